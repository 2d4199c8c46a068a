#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "maskblur/geometry.hpp"

namespace maskblur {

/// Eigenvalue summary of a normal matrix. Eigenvalues are sorted descending;
/// `normalized` divides by the largest.
struct SpectrumReport {
  std::vector<double> eigenvalues;
  std::vector<double> normalized;
  double condition_number = 0.0;

  /// Number of normalized eigenvalues at or above tau.
  int effective_rank(double tau) const;
};

/// Eigen-decomposes a symmetric matrix (checked to 1e-10 relative asymmetry).
/// Eigenvalues below -1e-12 * lambda_max are treated as numerically zero for
/// the condition number, which becomes +inf when the smallest clamped
/// eigenvalue is not positive.
SpectrumReport spectrum(const Eigen::MatrixXd& normal_matrix);

/// Symmetric three-tap blur [a, b, a] used by the one-dimensional analysis.
/// The outer tap must be nonzero for the conditioning results to apply.
struct SymmetricFilter1D {
  double outer = 1.0;  // a
  double center = 2.0;  // b

  std::array<double, 3> taps() const { return {outer, center, outer}; }
};

enum class PatternModel { PlusMinusOne, ZeroOne };

/// One-dimensional pair-sum sampling matrix: output j sums inputs 2j and
/// 2j+1. length must be even.
Eigen::MatrixXd pair_sum_matrix_1d(int length);

/// One-dimensional zero-padded convolution matrix for odd symmetric taps.
Eigen::MatrixXd convolution_matrix_1d(const std::vector<double>& taps, int length);

/// Normal matrix W^T W of the one-dimensional weighting W = pair-sum * blur.
Eigen::MatrixXd weighting_gram_1d(const std::vector<double>& taps, int length);

/// Expectation of the randomly masked one-dimensional normal matrix. For
/// +/-1 patterns this is the 2x2-block-diagonal restriction of W^T W; for
/// 0/1 patterns it is a quarter of that plus a quarter of the rank-one
/// all-ones augmentation of W^T W.
Eigen::MatrixXd expected_gram_1d(int length, const SymmetricFilter1D& filter, PatternModel model);
Eigen::MatrixXd expected_gram_1d_taps(int length, const std::vector<double>& taps,
                                      PatternModel model);

/// Monte-Carlo average (1/K) sum_k D_k W^T W D_k over random patterns held
/// constant across each output pair.
Eigen::MatrixXd empirical_gram_1d(int length, const SymmetricFilter1D& filter, int num_patterns,
                                  std::uint64_t seed, PatternModel model);
Eigen::MatrixXd empirical_gram_1d_taps(int length, const std::vector<double>& taps,
                                       int num_patterns, std::uint64_t seed, PatternModel model);

/// Average of D_k (W^T W) D_k over caller-supplied pattern values; each
/// pattern has length/2 entries, one per sensor pair.
Eigen::MatrixXd masked_gram_1d(const Eigen::MatrixXd& weighting_gram,
                               const std::vector<std::vector<double>>& patterns);

/// Interior-block eigenvalue ratio (a^2 + 2(a+b)^2) / a^2 of the expected
/// +/-1 normal matrix: the per-pair conditioning of the recovery problem.
/// Equals 3 at b = 0, attains its minimum of 1 at b = -a, and grows without
/// bound as a -> 0. Reports of this ratio list both candidate optima (b = 0
/// and b = -a) so the no-overlap and cancellation points can be compared.
double filter_condition_ratio(const SymmetricFilter1D& filter);

/// Fraction of scene modes recoverable above the noise floor, expressed
/// relative to the mask element count: effective_rank(tau) / mask_elements.
double effective_superres_factor(const SpectrumReport& report, const Geometry& g,
                                 double noise_floor_tau);

}  // namespace maskblur
