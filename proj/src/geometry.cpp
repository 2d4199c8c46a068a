#include "maskblur/geometry.hpp"

#include <string>

namespace maskblur {

Geometry make_geometry(int mask_side, int sensor_side, int superres_factor) {
  require(mask_side >= 1, ErrorCode::InvalidArgument, "mask_side must be >= 1");
  require(sensor_side >= 1, ErrorCode::InvalidArgument, "sensor_side must be >= 1");
  require(superres_factor >= 1, ErrorCode::InvalidArgument, "superres_factor must be >= 1");

  int upscale = 0;
  for (int c = 1; static_cast<long long>(c) * c <= superres_factor; ++c) {
    if (c * c == superres_factor) {
      upscale = c;
      break;
    }
  }
  require(upscale > 0, ErrorCode::NonIntegralFactor,
          "superres_factor " + std::to_string(superres_factor) +
              " is not the square of an integer per-axis upscale");

  Geometry g;
  g.mask_side = mask_side;
  g.sensor_side = sensor_side;
  g.upscale_c = upscale;
  g.scene_side = mask_side * upscale;
  require(g.scene_side % sensor_side == 0, ErrorCode::NonIntegralFactor,
          "scene side " + std::to_string(g.scene_side) +
              " is not an integer multiple of sensor side " + std::to_string(sensor_side));
  g.sensor_block = g.scene_side / sensor_side;
  return g;
}

}  // namespace maskblur
