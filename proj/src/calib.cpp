#include "maskblur/calib.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "maskblur/io.hpp"
#include "maskblur/system.hpp"

namespace maskblur {

PatternSet probe_schedule(const Geometry& g) {
  PatternSet set;
  set.scheme = PatternScheme::SingleElement;
  set.seed = 0;
  const std::size_t count = g.scene_pixels();
  set.patterns.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    MaskPattern p;
    p.side = g.scene_side;
    p.id = static_cast<int>(i);
    p.bits.assign(count, 0);
    p.bits[i] = 1;
    set.patterns.push_back(std::move(p));
  }
  return set;
}

CalibratedWeights estimate_weights(const std::vector<std::vector<ImageGrid>>& responses,
                                   double threshold, const Geometry& g) {
  require(!responses.empty(), ErrorCode::MissingResponse, "no response sets supplied");
  require(threshold >= 0.0, ErrorCode::InvalidArgument, "threshold must be >= 0");

  CalibratedWeights w;
  w.geometry = g;
  w.sparsity_threshold = threshold;

  const auto probes = g.scene_pixels();
  const auto sensors = g.sensor_pixels();
  for (std::size_t kk = 0; kk < responses.size(); ++kk) {
    const std::vector<ImageGrid>& cols = responses[kk];
    require(cols.size() == probes, ErrorCode::MissingResponse,
            "kernel " + std::to_string(kk) + " has " + std::to_string(cols.size()) +
                " responses; expected one per scene pixel (" + std::to_string(probes) + ")");

    std::vector<Eigen::Triplet<double>> trips;
    for (std::size_t i = 0; i < probes; ++i) {
      const ImageGrid& resp = cols[i];
      require(resp.width == g.sensor_side && resp.height == g.sensor_side,
              ErrorCode::DimensionMismatch, "response image is not sensor resolution");
      // Intensities: clamp measurement noise below zero before thresholding.
      double col_max = 0.0;
      for (double v : resp.values) col_max = std::max(col_max, v);
      const double cut = threshold * col_max;
      bool any = false;
      for (std::size_t m = 0; m < resp.values.size(); ++m) {
        const double v = std::max(0.0, resp.values[m]);
        if (v <= 0.0) continue;
        if (v < cut) continue;
        trips.emplace_back(static_cast<int>(m), static_cast<int>(i), v);
        any = true;
      }
      if (!any) ++w.degenerate_columns;
    }
    Eigen::SparseMatrix<double> mat(static_cast<Eigen::Index>(sensors),
                                    static_cast<Eigen::Index>(probes));
    mat.setFromTriplets(trips.begin(), trips.end());
    mat.makeCompressed();
    w.weights.push_back(std::move(mat));
  }
  return w;
}

std::vector<ImageGrid> forward_calibrated(const CalibratedWeights& w, const PatternSet& patterns,
                                          const ImageGrid& x) {
  require(w.kernel_count() > 0, ErrorCode::InvalidArgument, "no calibrated kernels");
  require(x.width == w.geometry.scene_side && x.height == w.geometry.scene_side,
          ErrorCode::DimensionMismatch, "scene side does not match calibrated geometry");

  SystemOperator op;
  op.geometry = w.geometry;
  op.patterns = patterns.patterns;
  op.weighting = w;
  return forward(op, x);
}

namespace {
std::string matrix_path(const std::string& prefix, int kk) {
  return prefix + "_k" + std::to_string(kk) + ".mtx";
}
}  // namespace

void save_weights(const CalibratedWeights& w, const std::string& matrix_path_prefix,
                  const std::string& sidecar_path) {
  for (int kk = 0; kk < w.kernel_count(); ++kk)
    write_matrix_market(matrix_path(matrix_path_prefix, kk), w.weights[kk]);
  std::ostringstream side;
  side << "mask_side=" << w.geometry.mask_side << "\n";
  side << "sensor_side=" << w.geometry.sensor_side << "\n";
  side << "scene_side=" << w.geometry.scene_side << "\n";
  side << "upscale_c=" << w.geometry.upscale_c << "\n";
  side << "sensor_block=" << w.geometry.sensor_block << "\n";
  side << "kernel_count=" << w.kernel_count() << "\n";
  side << "sparsity_threshold=" << format_g17(w.sparsity_threshold) << "\n";
  side << "degenerate_columns=" << w.degenerate_columns << "\n";
  side << "matrix_prefix=" << matrix_path_prefix << "\n";
  write_text_file(sidecar_path, side.str());
}

CalibratedWeights load_weights(const std::string& sidecar_path) {
  const std::string text = read_text_file(sidecar_path);
  std::istringstream in(text);
  std::string line;
  Geometry g;
  int kernel_count = 0;
  double threshold = 0.0;
  int degenerate = 0;
  std::string prefix;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "mask_side") g.mask_side = std::stoi(value);
    else if (key == "sensor_side") g.sensor_side = std::stoi(value);
    else if (key == "scene_side") g.scene_side = std::stoi(value);
    else if (key == "upscale_c") g.upscale_c = std::stoi(value);
    else if (key == "sensor_block") g.sensor_block = std::stoi(value);
    else if (key == "kernel_count") kernel_count = std::stoi(value);
    else if (key == "sparsity_threshold") threshold = std::stod(value);
    else if (key == "degenerate_columns") degenerate = std::stoi(value);
    else if (key == "matrix_prefix") prefix = value;
  }
  require(kernel_count > 0 && !prefix.empty(), ErrorCode::UnsupportedFormat,
          sidecar_path + ": incomplete sidecar");

  CalibratedWeights w;
  w.geometry = g;
  w.sparsity_threshold = threshold;
  w.degenerate_columns = degenerate;
  for (int kk = 0; kk < kernel_count; ++kk) {
    Eigen::SparseMatrix<double> m = read_matrix_market(matrix_path(prefix, kk));
    require(m.rows() == static_cast<Eigen::Index>(g.sensor_pixels()) &&
                m.cols() == static_cast<Eigen::Index>(g.scene_pixels()),
            ErrorCode::DimensionMismatch, "stored weighting matrix has wrong shape");
    w.weights.push_back(std::move(m));
  }
  return w;
}

}  // namespace maskblur
