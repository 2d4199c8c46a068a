#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <string>
#include <vector>

#include "maskblur/geometry.hpp"
#include "maskblur/image.hpp"
#include "maskblur/mask.hpp"

namespace maskblur {

/// Measured optical weighting estimated from single-pixel probes. Entry
/// weights[kk] is the sensor-response matrix (sensor_pixels x scene_pixels)
/// for the kk-th distinct blur setting; column i holds the sensor response to
/// a unit impulse at scene pixel i. All stored entries are non-negative.
struct CalibratedWeights {
  Geometry geometry;
  std::vector<Eigen::SparseMatrix<double>> weights;
  double sparsity_threshold = 0.0;
  int degenerate_columns = 0;  // columns that thresholded to all-zero

  int kernel_count() const { return static_cast<int>(weights.size()); }
};

/// Scene-resolution probe set: one single-on pattern per scene pixel, in
/// row-major scene order. Probe i illuminates exactly scene pixel i.
PatternSet probe_schedule(const Geometry& g);

/// Assembles calibrated weights from probe responses. responses[kk][i] is the
/// sensor image recorded for probe i under blur setting kk (averaged over
/// repeats by the caller). Entries are clamped at zero, then entries below
/// threshold * (column max) are dropped. Columns that become all-zero are
/// counted as degenerate but kept.
CalibratedWeights estimate_weights(const std::vector<std::vector<ImageGrid>>& responses,
                                   double threshold, const Geometry& g);

/// Applies the calibrated model: measurement k is weights[k mod kernel_count]
/// acting on the masked scene. Patterns follow the same mask-to-scene
/// upscaling as the analytic model.
std::vector<ImageGrid> forward_calibrated(const CalibratedWeights& w, const PatternSet& patterns,
                                          const ImageGrid& x);

void save_weights(const CalibratedWeights& w, const std::string& matrix_path_prefix,
                  const std::string& sidecar_path);
CalibratedWeights load_weights(const std::string& sidecar_path);

}  // namespace maskblur
