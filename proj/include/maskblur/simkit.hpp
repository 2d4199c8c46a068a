#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskblur/geometry.hpp"
#include "maskblur/image.hpp"
#include "maskblur/kernel.hpp"
#include "maskblur/mask.hpp"
#include "maskblur/system.hpp"

namespace maskblur {

struct NoiseModel {
  enum class Kind { None, GaussianPsnr };
  Kind kind = Kind::None;
  double target_psnr_db = 40.0;
  double derived_sigma = 0.0;  // filled from the scene peak; see derived_noise_sigma
};

/// Noise standard deviation that realises the target peak SNR for the given
/// ground-truth scene: sigma = peak / 10^(psnr/20).
double derived_noise_sigma(const NoiseModel& noise, const ImageGrid& scene);

/// Seeded mask pattern generation. Deterministic in (seed, scheme, K,
/// geometry); pattern k depends only on its own substream, so a K'-pattern
/// set is a bit-exact prefix of any longer set with the same seed.
///   HalfOnExact    exactly floor(N/2) elements on per pattern
///   Bernoulli      each element on with probability 1/2
///   SingleElement  pattern k turns on element k alone (K <= N)
PatternSet generate_patterns(const Geometry& g, int count, PatternScheme scheme,
                             std::uint64_t seed);

/// Reads a PGM or CSV image (by extension), checks the source is square with
/// side an integer multiple of the scene side, block-averages down, and for
/// PGM rescales samples to [0, 255]. CSV values pass through unscaled.
ImageGrid load_scene(const std::string& path, const Geometry& g);

/// Noisy measurement simulation: forward(op, x) plus i.i.d. Gaussian noise of
/// the derived sigma on every sensor sample. Measurement k draws from its own
/// substream, so results are independent of evaluation order. NoiseModel
/// kind None returns forward(op, x) exactly.
std::vector<ImageGrid> simulate(const SystemOperator& op, const ImageGrid& x,
                                const NoiseModel& noise, std::uint64_t seed);

/// Named kernels used throughout the experiments: infocus, disks of diameter
/// {1, 1.5, 5/3, 2, 3} sensor px, and the coded-2x2 quadrant kernel.
std::vector<BlurKernel> make_kernel_library(const Geometry& g);

/// Resolves "infocus", "disk-<diameter>", "coded-2x2", or "file:<path>" (an
/// explicit raster as CSV) to a kernel.
BlurKernel kernel_by_name(const std::string& name, const Geometry& g);

}  // namespace maskblur
