#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstddef>
#include <optional>
#include <vector>

#include "maskblur/calib.hpp"
#include "maskblur/geometry.hpp"
#include "maskblur/image.hpp"
#include "maskblur/kernel.hpp"
#include "maskblur/mask.hpp"

namespace maskblur {

enum class Boundary { ZeroPad };

/// Separable geometric distortion used to emulate an imperfect optical path:
/// the distorted image samples the input bilinearly at
///   src = center + (dst - center) / scale - shift
/// per axis. Identity when scale = 1 and shift = 0. Linear in the input.
struct BilinearWarp {
  double scale_x = 1.0;
  double scale_y = 1.0;
  double shift_x = 0.0;  // scene pixels
  double shift_y = 0.0;

  bool is_identity() const {
    return scale_x == 1.0 && scale_y == 1.0 && shift_x == 0.0 && shift_y == 0.0;
  }
};

/// Linear measurement model: measurement k applies mask pattern k to the
/// scene, optionally warps it, blurs with kernel k, and block-averages onto
/// the sensor. When `weighting` is set the warp/blur/average stage is
/// replaced by the calibrated response matrices (kernel k maps to
/// weighting slot k mod kernel_count).
struct SystemOperator {
  Geometry geometry;
  std::vector<MaskPattern> patterns;
  std::vector<BlurKernel> kernels;  // one per measurement; repeats allowed
  Boundary boundary = Boundary::ZeroPad;
  std::optional<BilinearWarp> distortion;
  std::optional<CalibratedWeights> weighting;
  std::size_t dense_budget_bytes = std::size_t(2) * 1024 * 1024 * 1024;

  int measurement_count() const { return static_cast<int>(patterns.size()); }
};

/// Validates shape consistency; throws on mismatch.
void validate_operator(const SystemOperator& op);

/// Nearest-neighbour upscale of a mask pattern to the scene grid (each mask
/// cell becomes an upscale_c x upscale_c block of identical values).
ImageGrid upscale_pattern(const MaskPattern& p, int scene_side);

/// Elementwise product of the scene with the upscaled pattern.
ImageGrid modulate(const ImageGrid& x, const MaskPattern& p);

/// 2D convolution with zero padding: out(p) = sum_t kernel(t) * x(p - t + r).
ImageGrid blur(const ImageGrid& x, const BlurKernel& k);
ImageGrid blur_adjoint(const ImageGrid& y, const BlurKernel& k);

ImageGrid warp_sample(const ImageGrid& x, const BilinearWarp& w);
ImageGrid warp_adjoint(const ImageGrid& y, const BilinearWarp& w);

/// Mean over each sensor_block x sensor_block block of scene pixels.
ImageGrid subsample(const ImageGrid& x, const Geometry& g);
ImageGrid subsample_adjoint(const ImageGrid& y, const Geometry& g);

/// Applies the full model to a scene: one sensor image per measurement.
std::vector<ImageGrid> forward(const SystemOperator& op, const ImageGrid& x);

/// Exact adjoint of `forward`: accumulates the per-measurement transposes
/// into a scene-resolution image, in measurement order.
ImageGrid adjoint(const SystemOperator& op, const std::vector<ImageGrid>& ys);

/// Indices of the distinct blur settings, and the slot each measurement maps
/// to. Calibrated operators map measurement k to slot k mod kernel_count.
std::vector<int> kernel_slots(const SystemOperator& op, int* distinct_count);

/// Sparse pattern-independent weighting for one distinct blur slot:
/// sensor = W * scene for an all-on mask. Includes the distortion stage (or
/// the calibrated matrix) when configured.
Eigen::SparseMatrix<double> weighting_matrix(const SystemOperator& op, int slot);

/// Stacked sparse measurement matrix (measurements * sensor_pixels rows by
/// scene_pixels columns). Its action matches `forward` to floating-point
/// round-off. Throws BudgetExceeded if the triplet storage estimate exceeds
/// dense_budget_bytes.
Eigen::SparseMatrix<double> materialize(const SystemOperator& op);

/// Dense normal matrix (scene_pixels x scene_pixels), assembled per distinct
/// blur slot as the elementwise product of the slot's weighting normal matrix
/// with the pattern correlation sum. Throws BudgetExceeded if the dense
/// matrix exceeds dense_budget_bytes.
Eigen::MatrixXd gram(const SystemOperator& op);

/// Sparse sensor block-mean matrix (sensor_pixels x scene_pixels).
Eigen::SparseMatrix<double> sampling_matrix(const Geometry& g);

/// Sparse zero-padded convolution matrix for a kernel on a side x side grid.
Eigen::SparseMatrix<double> convolution_matrix(const BlurKernel& k, int side);

/// Sparse bilinear warp sampling matrix on a side x side grid.
Eigen::SparseMatrix<double> warp_matrix(const BilinearWarp& w, int side);

}  // namespace maskblur
