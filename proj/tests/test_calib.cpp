#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "maskblur/calib.hpp"
#include "maskblur/errors.hpp"
#include "maskblur/geometry.hpp"
#include "maskblur/image.hpp"
#include "maskblur/kernel.hpp"
#include "maskblur/metrics.hpp"
#include "maskblur/recon.hpp"
#include "maskblur/rng.hpp"
#include "maskblur/simkit.hpp"
#include "maskblur/system.hpp"
#include "support/oracles.hpp"

using namespace maskblur;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("maskblur_calib_" + name)).string();
}

// Probe responses produced by the analytic model itself: the round trip
// through estimate_weights must then reproduce forward() exactly.
std::vector<std::vector<ImageGrid>> analytic_probe_responses(const Geometry& g,
                                                             const std::vector<BlurKernel>& kernels) {
  const PatternSet probes = probe_schedule(g);
  std::vector<std::vector<ImageGrid>> responses(kernels.size());
  const ImageGrid ones = ImageGrid::constant(g.scene_side, g.scene_side, 1.0);
  for (std::size_t kk = 0; kk < kernels.size(); ++kk) {
    SystemOperator probe_op;
    probe_op.geometry = g;
    probe_op.kernels.assign(probes.patterns.size(), kernels[kk]);
    probe_op.patterns = probes.patterns;
    responses[kk] = forward(probe_op, ones);
  }
  return responses;
}

}  // namespace

TEST_CASE("probe schedule fires one scene pixel at a time in row-major order") {
  const Geometry g = make_geometry(4, 4, 4);  // scene 8x8
  const PatternSet probes = probe_schedule(g);
  REQUIRE(probes.count() == 64);
  for (int i = 0; i < probes.count(); ++i) {
    const MaskPattern& p = probes.patterns[static_cast<std::size_t>(i)];
    CHECK(p.side == g.scene_side);
    CHECK(p.on_count() == 1);
    CHECK(p.bits[static_cast<std::size_t>(i)] == 1);
  }
}

TEST_CASE("estimated weights match the dense blur+subsample matrix") {
  const Geometry g = make_geometry(4, 4, 4);
  const BlurKernel ker = kernel_by_name("disk-1.667", g);
  const CalibratedWeights w = estimate_weights(analytic_probe_responses(g, {ker}), 0.0, g);
  REQUIRE(w.kernel_count() == 1);
  CHECK(w.degenerate_columns == 0);

  const Eigen::MatrixXd expect =
      oracles::dense_subsample(g) * oracles::dense_blur(ker, g.scene_side);
  const Eigen::MatrixXd got = Eigen::MatrixXd(w.weights[0]);
  REQUIRE(got.rows() == expect.rows());
  REQUIRE(got.cols() == expect.cols());
  CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-12 * expect.cwiseAbs().maxCoeff());
}

TEST_CASE("calibrated forward reproduces the analytic forward exactly") {
  const Geometry g = make_geometry(4, 4, 4);
  const std::vector<BlurKernel> kernels = {kernel_by_name("disk-1.667", g),
                                           kernel_by_name("disk-3.0", g)};
  const CalibratedWeights w = estimate_weights(analytic_probe_responses(g, kernels), 0.0, g);

  const PatternSet set = generate_patterns(g, 9, PatternScheme::HalfOnExact, 21);
  SystemOperator op;
  op.geometry = g;
  op.patterns = set.patterns;
  for (int k = 0; k < set.count(); ++k)
    op.kernels.push_back(kernels[static_cast<std::size_t>(k) % kernels.size()]);

  CounterRng rng(3, 0, RngDomain::General);
  const ImageGrid x = oracles::random_image(g.scene_side, rng, 0.0, 255.0);
  const std::vector<ImageGrid> analytic = forward(op, x);
  const std::vector<ImageGrid> calibrated = forward_calibrated(w, set, x);
  REQUIRE(analytic.size() == calibrated.size());
  double scale = 0.0;
  for (const ImageGrid& y : analytic) scale = std::max(scale, max_value(y));
  for (std::size_t k = 0; k < analytic.size(); ++k)
    CHECK(max_abs_difference(analytic[k], calibrated[k]) <= 1e-10 * scale);
}

TEST_CASE("sparsity threshold drops small entries but keeps column maxima") {
  const Geometry g = make_geometry(4, 4, 4);
  const BlurKernel ker = kernel_by_name("disk-3.0", g);
  const auto responses = analytic_probe_responses(g, {ker});

  const CalibratedWeights full = estimate_weights(responses, 0.0, g);
  const CalibratedWeights half = estimate_weights(responses, 0.5, g);
  const CalibratedWeights all = estimate_weights(responses, 1.0, g);

  CHECK(half.weights[0].nonZeros() < full.weights[0].nonZeros());
  CHECK(all.weights[0].nonZeros() <= half.weights[0].nonZeros());
  CHECK(all.degenerate_columns == 0);  // threshold 1.0 keeps each column's max

  const Eigen::MatrixXd dense_full = Eigen::MatrixXd(full.weights[0]);
  const Eigen::MatrixXd dense_all = Eigen::MatrixXd(all.weights[0]);
  for (int col = 0; col < dense_full.cols(); ++col) {
    const double colmax = dense_full.col(col).maxCoeff();
    CHECK(dense_all.col(col).maxCoeff() == doctest::Approx(colmax).epsilon(1e-15));
    // Everything below the max is gone at threshold 1.0.
    int survivors = 0;
    for (int row = 0; row < dense_all.rows(); ++row) survivors += dense_all(row, col) > 0.0;
    CHECK(survivors >= 1);
  }
}

TEST_CASE("dead scene pixels are counted as degenerate columns") {
  const Geometry g = make_geometry(4, 4, 4);
  auto responses = analytic_probe_responses(g, {kernel_by_name("disk-1.667", g)});
  // Zero out the response to probes 5 and 12 to fake dead pixels.
  responses[0][5] = ImageGrid(g.sensor_side, g.sensor_side, 0.0);
  responses[0][12] = ImageGrid(g.sensor_side, g.sensor_side, 0.0);
  const CalibratedWeights w = estimate_weights(responses, 0.0, g);
  CHECK(w.degenerate_columns == 2);
}

TEST_CASE("negative response samples clamp to zero") {
  const Geometry g = make_geometry(2, 2, 4);
  auto responses = analytic_probe_responses(g, {make_in_focus()});
  for (ImageGrid& r : responses[0])
    for (double& v : r.values) v -= 0.6;  // push some samples negative
  const CalibratedWeights w = estimate_weights(responses, 0.0, g);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(w.weights[0]);
  CHECK(dense.minCoeff() >= 0.0);
}

TEST_CASE("weights survive a save/load round trip exactly") {
  const Geometry g = make_geometry(4, 4, 4);
  const std::vector<BlurKernel> kernels = {kernel_by_name("disk-1.667", g), make_in_focus()};
  const CalibratedWeights w = estimate_weights(analytic_probe_responses(g, kernels), 1e-4, g);

  const std::string prefix = temp_path("weights");
  const std::string sidecar = temp_path("weights.txt");
  save_weights(w, prefix, sidecar);
  const CalibratedWeights back = load_weights(sidecar);

  CHECK(back.kernel_count() == 2);
  CHECK(back.geometry.mask_side == g.mask_side);
  CHECK(back.geometry.sensor_side == g.sensor_side);
  CHECK(back.geometry.scene_side == g.scene_side);
  CHECK(back.sparsity_threshold == w.sparsity_threshold);
  CHECK(back.degenerate_columns == w.degenerate_columns);
  for (int kk = 0; kk < 2; ++kk) {
    const Eigen::MatrixXd a = Eigen::MatrixXd(w.weights[static_cast<std::size_t>(kk)]);
    const Eigen::MatrixXd b = Eigen::MatrixXd(back.weights[static_cast<std::size_t>(kk)]);
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);  // text format round-trips doubles
  }
}

TEST_CASE("loading a sidecar with a missing matrix file fails cleanly") {
  const Geometry g = make_geometry(2, 2, 4);
  const CalibratedWeights w = estimate_weights(analytic_probe_responses(g, {make_in_focus()}), 0.0, g);
  const std::string prefix = temp_path("missing");
  const std::string sidecar = temp_path("missing.txt");
  save_weights(w, prefix, sidecar);
  std::filesystem::remove(prefix + "_k0.mtx");
  CHECK_THROWS_AS((void)load_weights(sidecar), Error);
}

TEST_CASE("calibrated weights absorb a model distortion the analytic model misses") {
  // A system whose true response includes a smooth gain field the analytic
  // kernel model does not know about. Reconstruction through calibrated
  // weights must beat reconstruction through the analytic operator.
  const Geometry g = make_geometry(8, 8, 4);  // scene 16x16, R = 256
  const BlurKernel ker = kernel_by_name("disk-1.667", g);

  // True system: gain field applied at the sensor.
  ImageGrid gain(g.sensor_side, g.sensor_side);
  for (int r = 0; r < g.sensor_side; ++r)
    for (int c = 0; c < g.sensor_side; ++c)
      gain.at(r, c) = 1.0 + 0.35 * std::sin(0.9 * r) * std::cos(0.7 * c);
  const auto distort = [&](std::vector<ImageGrid> ys) {
    for (ImageGrid& y : ys)
      for (int r = 0; r < y.height; ++r)
        for (int c = 0; c < y.width; ++c) y.at(r, c) *= gain.at(r, c);
    return ys;
  };

  // Calibrate against the distorted system.
  const PatternSet probes = probe_schedule(g);
  SystemOperator probe_op;
  probe_op.geometry = g;
  probe_op.patterns = probes.patterns;
  probe_op.kernels.assign(probes.patterns.size(), ker);
  const ImageGrid ones = ImageGrid::constant(g.scene_side, g.scene_side, 1.0);
  std::vector<std::vector<ImageGrid>> responses{distort(forward(probe_op, ones))};
  const CalibratedWeights w = estimate_weights(responses, 0.0, g);

  // Measurements from the distorted system.
  const PatternSet set = generate_patterns(g, 60, PatternScheme::HalfOnExact, 17);
  SystemOperator op;
  op.geometry = g;
  op.patterns = set.patterns;
  op.kernels.assign(set.patterns.size(), ker);
  CounterRng rng(8, 0, RngDomain::General);
  const ImageGrid x = oracles::random_image(g.scene_side, rng, 20.0, 235.0);
  const std::vector<ImageGrid> ys = distort(forward(op, x));

  TikhonovConfig cfg;
  // Noise-free measurements: a vanishing ridge keeps the regularisation bias
  // far below the model-mismatch error this test is about.
  cfg.delta = 1e-10;
  const ReconResult analytic = solve(op, ys, cfg);

  SystemOperator cal_op = op;
  cal_op.weighting = w;
  const ReconResult calibrated = solve(cal_op, ys, cfg);

  const double err_analytic = quality(analytic.estimate, x).relative_error;
  const double err_calibrated = quality(calibrated.estimate, x).relative_error;
  CHECK(err_calibrated < 1e-6);       // calibrated model matches the true system
  CHECK(err_analytic > 10.0 * err_calibrated);
}
