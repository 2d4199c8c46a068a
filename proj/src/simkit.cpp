#include "maskblur/simkit.hpp"

#include <algorithm>
#include <cmath>

#include "maskblur/io.hpp"
#include "maskblur/rng.hpp"

namespace maskblur {

double derived_noise_sigma(const NoiseModel& noise, const ImageGrid& scene) {
  if (noise.kind == NoiseModel::Kind::None) return 0.0;
  const double peak = max_value(scene);
  require(std::isfinite(noise.target_psnr_db), ErrorCode::InvalidArgument,
          "target PSNR must be finite");
  return peak / std::pow(10.0, noise.target_psnr_db / 20.0);
}

PatternSet generate_patterns(const Geometry& g, int count, PatternScheme scheme,
                             std::uint64_t seed) {
  require(count >= 1, ErrorCode::InvalidArgument, "pattern count must be >= 1");
  const auto elements = static_cast<std::uint32_t>(g.mask_elements());
  if (scheme == PatternScheme::SingleElement)
    require(count <= static_cast<int>(elements), ErrorCode::TooManyPatterns,
            "single-element schedules cannot exceed the mask element count");

  PatternSet set;
  set.seed = seed;
  set.scheme = scheme;
  set.patterns.reserve(count);
  for (int k = 0; k < count; ++k) {
    MaskPattern p;
    p.side = g.mask_side;
    p.id = k;
    p.bits.assign(elements, 0);
    switch (scheme) {
      case PatternScheme::HalfOnExact: {
        CounterRng rng(seed, static_cast<std::uint64_t>(k), RngDomain::MaskPattern);
        for (std::uint32_t idx : rng.sample_without_replacement(elements, elements / 2))
          p.bits[idx] = 1;
        break;
      }
      case PatternScheme::Bernoulli: {
        CounterRng rng(seed, static_cast<std::uint64_t>(k), RngDomain::MaskPattern);
        for (auto& b : p.bits) b = static_cast<std::uint8_t>(rng.next_u64() >> 63);
        break;
      }
      case PatternScheme::SingleElement:
        p.bits[k] = 1;
        break;
    }
    set.patterns.push_back(std::move(p));
  }
  return set;
}

ImageGrid load_scene(const std::string& path, const Geometry& g) {
  const auto dot = path.find_last_of('.');
  const std::string ext = (dot == std::string::npos) ? "" : path.substr(dot + 1);

  ImageGrid source;
  if (ext == "pgm") {
    int maxval = 0;
    source = read_pgm(path, &maxval);
    const double scale = 255.0 / maxval;
    if (scale != 1.0)
      for (double& v : source.values) v *= scale;
  } else if (ext == "csv") {
    source = read_csv_image(path);
  } else {
    fail(ErrorCode::UnsupportedFormat, path + ": expected a .pgm or .csv scene");
  }

  require(source.square(), ErrorCode::UnsupportedFormat, path + ": scene must be square");
  require(source.width >= g.scene_side, ErrorCode::NonIntegralDownscale,
          path + ": source side smaller than scene side");
  require(source.width % g.scene_side == 0, ErrorCode::NonIntegralDownscale,
          path + ": source side is not an integer multiple of the scene side");
  const int factor = source.width / g.scene_side;
  return (factor == 1) ? source : block_mean_downscale(source, factor);
}

std::vector<ImageGrid> simulate(const SystemOperator& op, const ImageGrid& x,
                                const NoiseModel& noise, std::uint64_t seed) {
  std::vector<ImageGrid> ys = forward(op, x);
  if (noise.kind == NoiseModel::Kind::None) return ys;
  const double sigma = derived_noise_sigma(noise, x);
  for (std::size_t k = 0; k < ys.size(); ++k) {
    CounterRng rng(seed, static_cast<std::uint64_t>(k), RngDomain::MeasurementNoise);
    for (double& v : ys[k].values) v += sigma * rng.normal();
  }
  return ys;
}

std::vector<BlurKernel> make_kernel_library(const Geometry& g) {
  std::vector<BlurKernel> lib;
  lib.push_back(make_in_focus());
  for (double d : {1.0, 1.5, 5.0 / 3.0, 2.0, 3.0}) lib.push_back(make_disk(d, g.sensor_block));
  lib[3].name = "disk-1.667";  // stable name for the 5/3 diameter
  lib.push_back(make_coded_quadrant(2.0, g.sensor_block));
  return lib;
}

BlurKernel kernel_by_name(const std::string& name, const Geometry& g) {
  if (name == "infocus") return make_in_focus();
  if (name == "coded-2x2") return make_coded_quadrant(2.0, g.sensor_block);
  if (name.rfind("disk-", 0) == 0) {
    double d = 0.0;
    try {
      d = std::stod(name.substr(5));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "bad disk diameter in kernel name \"" + name + "\"");
    }
    // Accept the shorthand for the 5/3 library kernel exactly.
    if (name == "disk-1.667") d = 5.0 / 3.0;
    BlurKernel k = make_disk(d, g.sensor_block);
    k.name = name;
    return k;
  }
  if (name.rfind("file:", 0) == 0) {
    const std::string path = name.substr(5);
    return make_explicit(read_csv_image(path), path);
  }
  fail(ErrorCode::InvalidArgument, "unknown kernel \"" + name + "\"");
}

}  // namespace maskblur
