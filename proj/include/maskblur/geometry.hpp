#pragma once

#include <cstddef>

#include "maskblur/errors.hpp"

namespace maskblur {

/// Grid relationship between the mask plane, the reconstruction (scene) grid,
/// and the sensor. The scene grid refines each mask cell by `upscale_c` per
/// axis and each sensor pixel covers a `sensor_block` x `sensor_block` block
/// of scene pixels.
struct Geometry {
  int mask_side = 0;
  int sensor_side = 0;
  int scene_side = 0;
  int upscale_c = 1;
  int sensor_block = 1;

  std::size_t mask_elements() const { return static_cast<std::size_t>(mask_side) * mask_side; }
  std::size_t sensor_pixels() const { return static_cast<std::size_t>(sensor_side) * sensor_side; }
  std::size_t scene_pixels() const { return static_cast<std::size_t>(scene_side) * scene_side; }
};

/// Builds a Geometry from the mask and sensor sides plus the target
/// superresolution factor expressed as the scene/mask pixel-count ratio.
/// The factor must be a perfect square of an integer per-axis upscale, and
/// the resulting scene side must be an integer multiple of the sensor side.
Geometry make_geometry(int mask_side, int sensor_side, int superres_factor);

}  // namespace maskblur
