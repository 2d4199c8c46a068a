#include "maskblur/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "maskblur/errors.hpp"
#include "maskblur/rng.hpp"

namespace maskblur {

int SpectrumReport::effective_rank(double tau) const {
  int count = 0;
  for (double v : normalized)
    if (v >= tau) ++count;
  return count;
}

SpectrumReport spectrum(const Eigen::MatrixXd& normal_matrix) {
  require(normal_matrix.rows() == normal_matrix.cols(), ErrorCode::NotSymmetric,
          "matrix is not square");
  const double scale = normal_matrix.cwiseAbs().maxCoeff();
  if (scale > 0.0) {
    const double asym = (normal_matrix - normal_matrix.transpose()).cwiseAbs().maxCoeff();
    require(asym <= 1e-10 * scale, ErrorCode::NotSymmetric,
            "relative asymmetry " + std::to_string(asym / scale) + " exceeds 1e-10");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(normal_matrix,
                                                        Eigen::EigenvaluesOnly);
  require(solver.info() == Eigen::Success, ErrorCode::NumericFailure,
          "eigendecomposition did not converge");

  SpectrumReport report;
  const Eigen::VectorXd& vals = solver.eigenvalues();  // ascending
  report.eigenvalues.assign(vals.data(), vals.data() + vals.size());
  std::reverse(report.eigenvalues.begin(), report.eigenvalues.end());

  const double lambda1 = report.eigenvalues.empty() ? 0.0 : report.eigenvalues.front();
  report.normalized.resize(report.eigenvalues.size(), 0.0);
  if (lambda1 > 0.0)
    for (std::size_t i = 0; i < report.eigenvalues.size(); ++i)
      report.normalized[i] = report.eigenvalues[i] / lambda1;

  // Tiny negative eigenvalues are round-off from an exactly PSD matrix; clamp
  // them before forming the condition number.
  const double lambda_min_raw = report.eigenvalues.empty() ? 0.0 : report.eigenvalues.back();
  const double lambda_min = std::max(lambda_min_raw, -1e-12 * lambda1);
  report.condition_number = (lambda1 > 0.0 && lambda_min > 0.0)
                                ? lambda1 / lambda_min
                                : std::numeric_limits<double>::infinity();
  return report;
}

Eigen::MatrixXd pair_sum_matrix_1d(int length) {
  require(length >= 2, ErrorCode::InvalidArgument, "length must be >= 2");
  require(length % 2 == 0, ErrorCode::OddLength, "length must be even for pair sums");
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(length / 2, length);
  for (int j = 0; j < length / 2; ++j) {
    s(j, 2 * j) = 1.0;
    s(j, 2 * j + 1) = 1.0;
  }
  return s;
}

Eigen::MatrixXd convolution_matrix_1d(const std::vector<double>& taps, int length) {
  require(!taps.empty() && taps.size() % 2 == 1, ErrorCode::OddLength,
          "tap count must be odd");
  require(static_cast<int>(taps.size()) <= length, ErrorCode::KernelLargerThanImage,
          "tap count exceeds signal length");
  const int half = static_cast<int>(taps.size()) / 2;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(length, length);
  for (int i = 0; i < length; ++i) {
    for (int t = 0; t < static_cast<int>(taps.size()); ++t) {
      const int j = i - t + half;
      if (j >= 0 && j < length) b(i, j) = taps[t];
    }
  }
  return b;
}

Eigen::MatrixXd weighting_gram_1d(const std::vector<double>& taps, int length) {
  const Eigen::MatrixXd w = pair_sum_matrix_1d(length) * convolution_matrix_1d(taps, length);
  return w.transpose() * w;
}

Eigen::MatrixXd expected_gram_1d_taps(int length, const std::vector<double>& taps,
                                      PatternModel model) {
  const Eigen::MatrixXd g = weighting_gram_1d(taps, length);
  // +/-1 limit: mask correlations vanish across pairs, leaving the 2x2
  // block-diagonal restriction of W^T W. Boundary blocks inherit the
  // zero-padding automatically. The per-element pattern energy contributes
  // E[p^2] = 1 on the diagonal blocks.
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(length, length);
  for (int u = 0; u < length; ++u)
    for (int v = 0; v < length; ++v)
      if (u / 2 == v / 2) expected(u, v) = g(u, v);
  if (model == PatternModel::ZeroOne) {
    expected += 0.25 * Eigen::MatrixXd::Identity(length, length);
    expected += 0.25 * Eigen::MatrixXd::Ones(length, length);
  }
  return expected;
}

Eigen::MatrixXd expected_gram_1d(int length, const SymmetricFilter1D& filter, PatternModel model) {
  const auto t = filter.taps();
  return expected_gram_1d_taps(length, {t[0], t[1], t[2]}, model);
}

Eigen::MatrixXd masked_gram_1d(const Eigen::MatrixXd& weighting_gram,
                               const std::vector<std::vector<double>>& patterns) {
  require(weighting_gram.rows() == weighting_gram.cols(), ErrorCode::DimensionMismatch,
          "weighting gram must be square");
  require(!patterns.empty(), ErrorCode::InvalidArgument, "need at least one pattern");
  const int length = static_cast<int>(weighting_gram.rows());
  require(length % 2 == 0, ErrorCode::OddLength, "length must be even");
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(length, length);
  for (const auto& p : patterns) {
    require(static_cast<int>(p.size()) == length / 2, ErrorCode::DimensionMismatch,
            "pattern length must be length/2");
    for (int u = 0; u < length; ++u) {
      const double du = p[u / 2];
      if (du == 0.0) continue;
      for (int v = 0; v < length; ++v) {
        const double dv = p[v / 2];
        if (dv != 0.0) acc(u, v) += du * weighting_gram(u, v) * dv;
      }
    }
  }
  return acc / static_cast<double>(patterns.size());
}

Eigen::MatrixXd empirical_gram_1d_taps(int length, const std::vector<double>& taps,
                                       int num_patterns, std::uint64_t seed, PatternModel model) {
  require(num_patterns >= 1, ErrorCode::InvalidArgument, "need at least one pattern");
  const Eigen::MatrixXd g = weighting_gram_1d(taps, length);
  std::vector<std::vector<double>> patterns(num_patterns);
  for (int k = 0; k < num_patterns; ++k) {
    CounterRng rng(seed, static_cast<std::uint64_t>(k), RngDomain::Pattern1D);
    std::vector<double>& p = patterns[k];
    p.resize(length / 2);
    for (double& v : p) {
      const std::uint64_t bit = rng.next_u64() >> 63;
      v = (model == PatternModel::PlusMinusOne) ? (bit ? 1.0 : -1.0)
                                                : static_cast<double>(bit);
    }
  }
  return masked_gram_1d(g, patterns);
}

Eigen::MatrixXd empirical_gram_1d(int length, const SymmetricFilter1D& filter, int num_patterns,
                                  std::uint64_t seed, PatternModel model) {
  const auto t = filter.taps();
  return empirical_gram_1d_taps(length, {t[0], t[1], t[2]}, num_patterns, seed, model);
}

double filter_condition_ratio(const SymmetricFilter1D& filter) {
  require(filter.outer != 0.0, ErrorCode::ZeroOuterTap, "outer tap must be nonzero");
  const double a = filter.outer;
  const double s = filter.outer + filter.center;
  return (a * a + 2.0 * s * s) / (a * a);
}

double effective_superres_factor(const SpectrumReport& report, const Geometry& g,
                                 double noise_floor_tau) {
  require(noise_floor_tau > 0.0 && noise_floor_tau < 1.0, ErrorCode::InvalidArgument,
          "noise floor threshold must lie in (0,1)");
  return static_cast<double>(report.effective_rank(noise_floor_tau)) /
         static_cast<double>(g.mask_elements());
}

}  // namespace maskblur
