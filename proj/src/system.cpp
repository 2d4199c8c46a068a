#include "maskblur/system.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace maskblur {

namespace {

std::string bytes_string(std::size_t n) { return std::to_string(n) + " bytes"; }

void check_budget(std::size_t required, std::size_t available, const char* what) {
  require(required <= available, ErrorCode::BudgetExceeded,
          std::string(what) + " requires " + bytes_string(required) + " but the budget is " +
              bytes_string(available));
}

// Maps a scene pixel index to the pattern cell covering it.
inline int pattern_cell(int scene_index, int scene_side, int pattern_side) {
  const int upscale = scene_side / pattern_side;
  const int r = scene_index / scene_side;
  const int c = scene_index % scene_side;
  return (r / upscale) * pattern_side + (c / upscale);
}

}  // namespace

void validate_operator(const SystemOperator& op) {
  const Geometry& g = op.geometry;
  require(g.scene_side == g.mask_side * g.upscale_c, ErrorCode::DimensionMismatch,
          "geometry scene side inconsistent with mask side and upscale");
  require(!op.patterns.empty(), ErrorCode::InvalidArgument, "operator has no measurements");
  require(op.kernels.size() == op.patterns.size() || op.weighting.has_value(),
          ErrorCode::DimensionMismatch, "kernel list length must match pattern list length");
  for (const MaskPattern& p : op.patterns) {
    validate_pattern(p);
    require(g.scene_side % p.side == 0, ErrorCode::NonIntegralFactor,
            "pattern side does not divide scene side");
  }
  for (const BlurKernel& k : op.kernels)
    require(k.side() <= g.scene_side, ErrorCode::KernelLargerThanImage,
            "kernel raster exceeds scene dimensions");
  if (op.weighting) {
    require(op.weighting->kernel_count() > 0, ErrorCode::InvalidArgument,
            "calibrated weighting holds no kernels");
    for (const auto& w : op.weighting->weights)
      require(w.rows() == static_cast<Eigen::Index>(g.sensor_pixels()) &&
                  w.cols() == static_cast<Eigen::Index>(g.scene_pixels()),
              ErrorCode::DimensionMismatch, "calibrated weighting matrix has wrong shape");
  }
}

ImageGrid upscale_pattern(const MaskPattern& p, int scene_side) {
  require(scene_side % p.side == 0, ErrorCode::NonIntegralFactor,
          "pattern side does not divide scene side");
  const int upscale = scene_side / p.side;
  ImageGrid out(scene_side, scene_side);
  for (int r = 0; r < scene_side; ++r)
    for (int c = 0; c < scene_side; ++c)
      out.at(r, c) = p.bits[static_cast<std::size_t>(r / upscale) * p.side + (c / upscale)];
  return out;
}

ImageGrid modulate(const ImageGrid& x, const MaskPattern& p) {
  require(x.square(), ErrorCode::DimensionMismatch, "scene must be square");
  require(x.width % p.side == 0, ErrorCode::NonIntegralFactor,
          "pattern side does not divide scene side");
  const int upscale = x.width / p.side;
  ImageGrid out(x.width, x.height);
  for (int r = 0; r < x.height; ++r) {
    const int pr = r / upscale;
    for (int c = 0; c < x.width; ++c) {
      const std::uint8_t bit = p.bits[static_cast<std::size_t>(pr) * p.side + (c / upscale)];
      out.at(r, c) = bit ? x.at(r, c) : 0.0;
    }
  }
  return out;
}

ImageGrid blur(const ImageGrid& x, const BlurKernel& k) {
  const int side = k.side();
  require(side <= x.width && side <= x.height, ErrorCode::KernelLargerThanImage,
          "kernel side " + std::to_string(side) + " exceeds image side");
  if (side == 1) {
    ImageGrid out = x;
    if (k.raster.values[0] != 1.0)
      for (double& v : out.values) v *= k.raster.values[0];
    return out;
  }
  const int half = side / 2;
  ImageGrid out(x.width, x.height);
  for (int r = 0; r < x.height; ++r) {
    for (int c = 0; c < x.width; ++c) {
      double acc = 0.0;
      for (int tr = 0; tr < side; ++tr) {
        const int sr = r - tr + half;
        if (sr < 0 || sr >= x.height) continue;
        for (int tc = 0; tc < side; ++tc) {
          const int sc = c - tc + half;
          if (sc < 0 || sc >= x.width) continue;
          acc += k.raster.at(tr, tc) * x.at(sr, sc);
        }
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

ImageGrid blur_adjoint(const ImageGrid& y, const BlurKernel& k) {
  const int side = k.side();
  require(side <= y.width && side <= y.height, ErrorCode::KernelLargerThanImage,
          "kernel side exceeds image side");
  if (side == 1) {
    ImageGrid out = y;
    if (k.raster.values[0] != 1.0)
      for (double& v : out.values) v *= k.raster.values[0];
    return out;
  }
  // Adjoint of zero-padded convolution is correlation with the same taps.
  const int half = side / 2;
  ImageGrid out(y.width, y.height);
  for (int r = 0; r < y.height; ++r) {
    for (int c = 0; c < y.width; ++c) {
      double acc = 0.0;
      for (int tr = 0; tr < side; ++tr) {
        const int sr = r + tr - half;
        if (sr < 0 || sr >= y.height) continue;
        for (int tc = 0; tc < side; ++tc) {
          const int sc = c + tc - half;
          if (sc < 0 || sc >= y.width) continue;
          acc += k.raster.at(tr, tc) * y.at(sr, sc);
        }
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

namespace {

struct BilinearTap {
  int row, col;
  double weight;
};

// Up to four taps of the bilinear sample at (sr, sc); taps outside the image
// are dropped (zero padding).
int bilinear_taps(double sr, double sc, int height, int width, BilinearTap taps[4]) {
  const int r0 = static_cast<int>(std::floor(sr));
  const int c0 = static_cast<int>(std::floor(sc));
  const double fr = sr - r0;
  const double fc = sc - c0;
  const double w[4] = {(1 - fr) * (1 - fc), (1 - fr) * fc, fr * (1 - fc), fr * fc};
  const int rr[4] = {r0, r0, r0 + 1, r0 + 1};
  const int cc[4] = {c0, c0 + 1, c0, c0 + 1};
  int n = 0;
  for (int i = 0; i < 4; ++i) {
    if (w[i] == 0.0) continue;
    if (rr[i] < 0 || rr[i] >= height || cc[i] < 0 || cc[i] >= width) continue;
    taps[n++] = {rr[i], cc[i], w[i]};
  }
  return n;
}

inline void warp_source(const BilinearWarp& w, int width, int height, int r, int c, double* sr,
                        double* sc) {
  const double cy = 0.5 * (height - 1);
  const double cx = 0.5 * (width - 1);
  *sr = cy + (r - cy) / w.scale_y - w.shift_y;
  *sc = cx + (c - cx) / w.scale_x - w.shift_x;
}

}  // namespace

ImageGrid warp_sample(const ImageGrid& x, const BilinearWarp& w) {
  if (w.is_identity()) return x;
  ImageGrid out(x.width, x.height);
  BilinearTap taps[4];
  for (int r = 0; r < x.height; ++r) {
    for (int c = 0; c < x.width; ++c) {
      double sr, sc;
      warp_source(w, x.width, x.height, r, c, &sr, &sc);
      const int n = bilinear_taps(sr, sc, x.height, x.width, taps);
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += taps[i].weight * x.at(taps[i].row, taps[i].col);
      out.at(r, c) = acc;
    }
  }
  return out;
}

ImageGrid warp_adjoint(const ImageGrid& y, const BilinearWarp& w) {
  if (w.is_identity()) return y;
  ImageGrid out(y.width, y.height);
  BilinearTap taps[4];
  for (int r = 0; r < y.height; ++r) {
    for (int c = 0; c < y.width; ++c) {
      double sr, sc;
      warp_source(w, y.width, y.height, r, c, &sr, &sc);
      const int n = bilinear_taps(sr, sc, y.height, y.width, taps);
      for (int i = 0; i < n; ++i) out.at(taps[i].row, taps[i].col) += taps[i].weight * y.at(r, c);
    }
  }
  return out;
}

ImageGrid subsample(const ImageGrid& x, const Geometry& g) {
  require(x.width == g.scene_side && x.height == g.scene_side, ErrorCode::DimensionMismatch,
          "image side does not match scene side");
  return block_mean_downscale(x, g.sensor_block);
}

ImageGrid subsample_adjoint(const ImageGrid& y, const Geometry& g) {
  require(y.width == g.sensor_side && y.height == g.sensor_side, ErrorCode::DimensionMismatch,
          "image side does not match sensor side");
  const int b = g.sensor_block;
  const double inv = 1.0 / (static_cast<double>(b) * b);
  ImageGrid out(g.scene_side, g.scene_side);
  for (int r = 0; r < g.scene_side; ++r)
    for (int c = 0; c < g.scene_side; ++c) out.at(r, c) = y.at(r / b, c / b) * inv;
  return out;
}

namespace {

ImageGrid apply_weighting_image(const SystemOperator& op, int slot, const ImageGrid& masked) {
  if (op.weighting) {
    const Eigen::SparseMatrix<double>& w = op.weighting->weights[slot];
    Eigen::Map<const Eigen::VectorXd> v(masked.values.data(), masked.values.size());
    Eigen::VectorXd y = w * v;
    ImageGrid out(op.geometry.sensor_side, op.geometry.sensor_side);
    Eigen::Map<Eigen::VectorXd>(out.values.data(), out.values.size()) = y;
    return out;
  }
  ImageGrid stage = masked;
  if (op.distortion && !op.distortion->is_identity()) stage = warp_sample(stage, *op.distortion);
  stage = blur(stage, op.kernels[slot]);
  return subsample(stage, op.geometry);
}

ImageGrid apply_weighting_adjoint_image(const SystemOperator& op, int slot, const ImageGrid& y) {
  if (op.weighting) {
    const Eigen::SparseMatrix<double>& w = op.weighting->weights[slot];
    Eigen::Map<const Eigen::VectorXd> v(y.values.data(), y.values.size());
    Eigen::VectorXd a = w.transpose() * v;
    ImageGrid out(op.geometry.scene_side, op.geometry.scene_side);
    Eigen::Map<Eigen::VectorXd>(out.values.data(), out.values.size()) = a;
    return out;
  }
  ImageGrid stage = subsample_adjoint(y, op.geometry);
  stage = blur_adjoint(stage, op.kernels[slot]);
  if (op.distortion && !op.distortion->is_identity()) stage = warp_adjoint(stage, *op.distortion);
  return stage;
}

// Measurement index -> index of the first measurement sharing its blur
// setting (the weighting for both is identical).
std::vector<int> measurement_slots(const SystemOperator& op, int* distinct_count) {
  const int K = op.measurement_count();
  std::vector<int> slots(K, 0);
  if (op.weighting) {
    const int kc = op.weighting->kernel_count();
    for (int k = 0; k < K; ++k) slots[k] = k % kc;
    if (distinct_count) *distinct_count = std::min(K, kc);
    return slots;
  }
  std::vector<int> representatives;
  for (int k = 0; k < K; ++k) {
    int found = -1;
    for (std::size_t s = 0; s < representatives.size(); ++s) {
      if (same_kernel(op.kernels[k], op.kernels[representatives[s]])) {
        found = static_cast<int>(s);
        break;
      }
    }
    if (found < 0) {
      representatives.push_back(k);
      found = static_cast<int>(representatives.size()) - 1;
    }
    slots[k] = found;
  }
  if (distinct_count) *distinct_count = static_cast<int>(representatives.size());
  // Translate slot ids to measurement indices usable with op.kernels.
  for (int& s : slots) s = representatives[s];
  return slots;
}

}  // namespace

std::vector<int> kernel_slots(const SystemOperator& op, int* distinct_count) {
  return measurement_slots(op, distinct_count);
}

std::vector<ImageGrid> forward(const SystemOperator& op, const ImageGrid& x) {
  validate_operator(op);
  require(x.width == op.geometry.scene_side && x.height == op.geometry.scene_side,
          ErrorCode::DimensionMismatch, "scene side does not match geometry");
  std::vector<int> slots = measurement_slots(op, nullptr);
  std::vector<ImageGrid> ys;
  ys.reserve(op.patterns.size());
  for (int k = 0; k < op.measurement_count(); ++k)
    ys.push_back(apply_weighting_image(op, slots[k], modulate(x, op.patterns[k])));
  return ys;
}

ImageGrid adjoint(const SystemOperator& op, const std::vector<ImageGrid>& ys) {
  validate_operator(op);
  require(ys.size() == op.patterns.size(), ErrorCode::DimensionMismatch,
          "measurement count does not match operator");
  std::vector<int> slots = measurement_slots(op, nullptr);
  ImageGrid acc(op.geometry.scene_side, op.geometry.scene_side);
  for (int k = 0; k < op.measurement_count(); ++k) {
    require(ys[k].width == op.geometry.sensor_side && ys[k].height == op.geometry.sensor_side,
            ErrorCode::DimensionMismatch, "sensor image side does not match geometry");
    ImageGrid back = apply_weighting_adjoint_image(op, slots[k], ys[k]);
    back = modulate(back, op.patterns[k]);
    for (std::size_t i = 0; i < acc.values.size(); ++i) acc.values[i] += back.values[i];
  }
  return acc;
}

Eigen::SparseMatrix<double> sampling_matrix(const Geometry& g) {
  const int b = g.sensor_block;
  const double inv = 1.0 / (static_cast<double>(b) * b);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(g.scene_pixels());
  for (int r = 0; r < g.scene_side; ++r) {
    for (int c = 0; c < g.scene_side; ++c) {
      const int sensor = (r / b) * g.sensor_side + (c / b);
      trips.emplace_back(sensor, r * g.scene_side + c, inv);
    }
  }
  Eigen::SparseMatrix<double> s(g.sensor_pixels(), g.scene_pixels());
  s.setFromTriplets(trips.begin(), trips.end());
  return s;
}

Eigen::SparseMatrix<double> convolution_matrix(const BlurKernel& k, int side) {
  require(k.side() <= side, ErrorCode::KernelLargerThanImage, "kernel side exceeds image side");
  const int ks = k.side();
  const int half = ks / 2;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(side) * side * ks * ks);
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const int row = r * side + c;
      for (int tr = 0; tr < ks; ++tr) {
        const int sr = r - tr + half;
        if (sr < 0 || sr >= side) continue;
        for (int tc = 0; tc < ks; ++tc) {
          const int sc = c - tc + half;
          if (sc < 0 || sc >= side) continue;
          const double v = k.raster.at(tr, tc);
          if (v != 0.0) trips.emplace_back(row, sr * side + sc, v);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(side) * side,
                                static_cast<Eigen::Index>(side) * side);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

Eigen::SparseMatrix<double> warp_matrix(const BilinearWarp& w, int side) {
  std::vector<Eigen::Triplet<double>> trips;
  BilinearTap taps[4];
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      double sr, sc;
      warp_source(w, side, side, r, c, &sr, &sc);
      const int n = bilinear_taps(sr, sc, side, side, taps);
      for (int i = 0; i < n; ++i)
        trips.emplace_back(r * side + c, taps[i].row * side + taps[i].col, taps[i].weight);
    }
  }
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(side) * side,
                                static_cast<Eigen::Index>(side) * side);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

Eigen::SparseMatrix<double> weighting_matrix(const SystemOperator& op, int slot) {
  if (op.weighting) {
    require(slot >= 0 && slot < op.weighting->kernel_count(), ErrorCode::InvalidArgument,
            "weighting slot out of range");
    return op.weighting->weights[slot];
  }
  require(slot >= 0 && slot < static_cast<int>(op.kernels.size()), ErrorCode::InvalidArgument,
          "kernel slot out of range");
  Eigen::SparseMatrix<double> w =
      sampling_matrix(op.geometry) * convolution_matrix(op.kernels[slot], op.geometry.scene_side);
  if (op.distortion && !op.distortion->is_identity()) {
    w = (w * warp_matrix(*op.distortion, op.geometry.scene_side)).eval();
  }
  w.makeCompressed();
  return w;
}

Eigen::SparseMatrix<double> materialize(const SystemOperator& op) {
  validate_operator(op);
  std::vector<int> slots = measurement_slots(op, nullptr);
  const Geometry& g = op.geometry;
  const int K = op.measurement_count();

  // One weighting per distinct blur setting; measurements reuse them.
  std::vector<int> slot_ids;
  std::vector<Eigen::SparseMatrix<double>> weightings;
  std::vector<int> slot_of(K, -1);
  for (int k = 0; k < K; ++k) {
    int idx = -1;
    for (std::size_t i = 0; i < slot_ids.size(); ++i)
      if (slot_ids[i] == slots[k]) {
        idx = static_cast<int>(i);
        break;
      }
    if (idx < 0) {
      slot_ids.push_back(slots[k]);
      weightings.push_back(weighting_matrix(op, slots[k]));
      idx = static_cast<int>(weightings.size()) - 1;
    }
    slot_of[k] = idx;
  }

  std::size_t nnz_estimate = 0;
  for (int k = 0; k < K; ++k)
    nnz_estimate += static_cast<std::size_t>(weightings[slot_of[k]].nonZeros());
  check_budget(nnz_estimate * 16, op.dense_budget_bytes, "materialized system matrix");

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(nnz_estimate);
  for (int k = 0; k < K; ++k) {
    const Eigen::SparseMatrix<double>& w = weightings[slot_of[k]];
    const MaskPattern& p = op.patterns[k];
    const Eigen::Index row0 = static_cast<Eigen::Index>(k) * g.sensor_pixels();
    for (int col = 0; col < w.outerSize(); ++col) {
      const int cell = pattern_cell(col, g.scene_side, p.side);
      if (!p.bits[cell]) continue;
      for (Eigen::SparseMatrix<double>::InnerIterator it(w, col); it; ++it)
        trips.emplace_back(row0 + it.row(), col, it.value());
    }
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(K) * g.sensor_pixels(),
                                g.scene_pixels());
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  return a;
}

Eigen::MatrixXd gram(const SystemOperator& op) {
  validate_operator(op);
  const Geometry& g = op.geometry;
  const std::size_t R = g.scene_pixels();
  check_budget(R * R * sizeof(double), op.dense_budget_bytes, "dense normal matrix");

  std::vector<int> slots = measurement_slots(op, nullptr);
  std::vector<int> slot_ids;
  for (int s : slots) {
    bool seen = false;
    for (int id : slot_ids)
      if (id == s) {
        seen = true;
        break;
      }
    if (!seen) slot_ids.push_back(s);
  }

  Eigen::MatrixXd gram_total = Eigen::MatrixXd::Zero(R, R);
  for (int slot : slot_ids) {
    // Pattern correlation over the measurements sharing this blur setting.
    std::vector<int> members;
    for (int k = 0; k < op.measurement_count(); ++k)
      if (slots[k] == slot) members.push_back(k);
    const int pside = op.patterns[members.front()].side;
    const std::size_t cells = static_cast<std::size_t>(pside) * pside;
    for (int k : members)
      require(op.patterns[k].side == pside, ErrorCode::DimensionMismatch,
              "patterns sharing a blur setting must share a side");
    check_budget(cells * cells * sizeof(double) + R * R * sizeof(double), op.dense_budget_bytes,
                 "pattern correlation matrix");

    Eigen::MatrixXd pmat(cells, members.size());
    for (std::size_t j = 0; j < members.size(); ++j)
      for (std::size_t i = 0; i < cells; ++i)
        pmat(i, j) = static_cast<double>(op.patterns[members[j]].bits[i]);
    Eigen::MatrixXd corr;
    corr.noalias() = pmat * pmat.transpose();

    Eigen::SparseMatrix<double> w = weighting_matrix(op, slot);
    Eigen::SparseMatrix<double> wtw = (Eigen::SparseMatrix<double>(w.transpose()) * w).pruned();

    // (sum_k D_k W^T W D_k)(u, v) = (W^T W)(u, v) * corr(cell(u), cell(v)).
    for (int outer = 0; outer < wtw.outerSize(); ++outer) {
      const int cv = pattern_cell(outer, g.scene_side, pside);
      for (Eigen::SparseMatrix<double>::InnerIterator it(wtw, outer); it; ++it) {
        const int cu = pattern_cell(static_cast<int>(it.row()), g.scene_side, pside);
        gram_total(it.row(), outer) += it.value() * corr(cu, cv);
      }
    }
  }

  // Exact symmetry; sparse products can differ across the diagonal by round-off.
  for (std::size_t u = 0; u < R; ++u) {
    for (std::size_t v = u + 1; v < R; ++v) {
      const double m = 0.5 * (gram_total(u, v) + gram_total(v, u));
      gram_total(u, v) = m;
      gram_total(v, u) = m;
    }
  }
  return gram_total;
}

}  // namespace maskblur
