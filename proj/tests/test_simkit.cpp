#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "maskblur/errors.hpp"
#include "maskblur/geometry.hpp"
#include "maskblur/io.hpp"
#include "maskblur/kernel.hpp"
#include "maskblur/simkit.hpp"
#include "maskblur/system.hpp"

using namespace maskblur;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("maskblur_simkit_" + name)).string();
}

}  // namespace

TEST_CASE("half-on patterns have exactly floor(N/2) elements open") {
  const Geometry g = make_geometry(8, 8, 4);  // N = 64
  const PatternSet set = generate_patterns(g, 40, PatternScheme::HalfOnExact, 3);
  REQUIRE(set.count() == 40);
  for (const MaskPattern& p : set.patterns) {
    CHECK(p.side == 8);
    CHECK(p.on_count() == 32);
  }

  const Geometry g_odd = make_geometry(3, 3, 4);  // N = 9
  for (const MaskPattern& p : generate_patterns(g_odd, 10, PatternScheme::HalfOnExact, 3).patterns)
    CHECK(p.on_count() == 4);
}

TEST_CASE("pattern k depends only on (seed, k): prefix property") {
  // Measurement-count sweeps reuse one fixed pattern sequence; a smaller run
  // must see a prefix of a larger one.
  const Geometry g = make_geometry(8, 8, 4);
  const PatternSet big = generate_patterns(g, 40, PatternScheme::HalfOnExact, 12);
  const PatternSet small = generate_patterns(g, 7, PatternScheme::HalfOnExact, 12);
  for (int k = 0; k < 7; ++k) {
    CHECK(big.patterns[static_cast<std::size_t>(k)].bits ==
          small.patterns[static_cast<std::size_t>(k)].bits);
    CHECK(big.patterns[static_cast<std::size_t>(k)].id == k);
  }

  const PatternSet bern_big = generate_patterns(g, 20, PatternScheme::Bernoulli, 12);
  const PatternSet bern_small = generate_patterns(g, 5, PatternScheme::Bernoulli, 12);
  for (int k = 0; k < 5; ++k)
    CHECK(bern_big.patterns[static_cast<std::size_t>(k)].bits ==
          bern_small.patterns[static_cast<std::size_t>(k)].bits);
}

TEST_CASE("pattern generation is deterministic and seed-sensitive") {
  const Geometry g = make_geometry(8, 8, 4);
  const PatternSet a = generate_patterns(g, 10, PatternScheme::HalfOnExact, 5);
  const PatternSet b = generate_patterns(g, 10, PatternScheme::HalfOnExact, 5);
  const PatternSet c = generate_patterns(g, 10, PatternScheme::HalfOnExact, 6);
  for (int k = 0; k < 10; ++k)
    CHECK(a.patterns[static_cast<std::size_t>(k)].bits ==
          b.patterns[static_cast<std::size_t>(k)].bits);
  bool any_diff = false;
  for (int k = 0; k < 10; ++k)
    any_diff = any_diff || (a.patterns[static_cast<std::size_t>(k)].bits !=
                            c.patterns[static_cast<std::size_t>(k)].bits);
  CHECK(any_diff);
}

TEST_CASE("each mask element is open in about half the patterns") {
  const Geometry g = make_geometry(8, 8, 4);  // N = 64
  const int K = 200;
  const PatternSet set = generate_patterns(g, K, PatternScheme::HalfOnExact, 8);
  std::vector<int> on(64, 0);
  for (const MaskPattern& p : set.patterns)
    for (std::size_t i = 0; i < p.bits.size(); ++i) on[i] += p.bits[i];
  for (int count : on) {
    // Binomial-like spread around K/2 = 100 (sd ~ 7); allow 5 sigma.
    CHECK(count > 65);
    CHECK(count < 135);
  }
}

TEST_CASE("Bernoulli patterns are unbiased") {
  const Geometry g = make_geometry(8, 8, 4);
  const int K = 400;
  long on = 0;
  for (const MaskPattern& p : generate_patterns(g, K, PatternScheme::Bernoulli, 4).patterns)
    on += p.on_count();
  const double frac = static_cast<double>(on) / (64.0 * K);
  CHECK(frac > 0.47);
  CHECK(frac < 0.53);
}

TEST_CASE("single-element probes walk the mask in row-major order") {
  const Geometry g = make_geometry(4, 4, 4);  // N = 16
  const PatternSet set = generate_patterns(g, 16, PatternScheme::SingleElement, 0);
  for (int k = 0; k < 16; ++k) {
    const MaskPattern& p = set.patterns[static_cast<std::size_t>(k)];
    CHECK(p.on_count() == 1);
    CHECK(p.bits[static_cast<std::size_t>(k)] == 1);
  }
  CHECK_THROWS_AS((void)generate_patterns(g, 17, PatternScheme::SingleElement, 0), Error);
}

TEST_CASE("noise sigma follows the scene peak") {
  NoiseModel noise;
  noise.kind = NoiseModel::Kind::GaussianPsnr;
  noise.target_psnr_db = 40.0;
  const ImageGrid scene = ImageGrid::constant(8, 8, 255.0);
  CHECK(derived_noise_sigma(noise, scene) == doctest::Approx(2.55).epsilon(1e-12));

  noise.target_psnr_db = 20.0;
  CHECK(derived_noise_sigma(noise, scene) == doctest::Approx(25.5).epsilon(1e-12));
}

TEST_CASE("simulated noise has the requested standard deviation") {
  const Geometry g = make_geometry(16, 16, 4);  // M = 256 per measurement
  SystemOperator op;
  op.geometry = g;
  const int K = 4000;  // ~1e6 noise samples
  op.patterns = generate_patterns(g, K, PatternScheme::HalfOnExact, 2).patterns;
  op.kernels.assign(static_cast<std::size_t>(K), make_in_focus());

  const ImageGrid x = ImageGrid::constant(g.scene_side, g.scene_side, 255.0);
  NoiseModel noise;
  noise.kind = NoiseModel::Kind::GaussianPsnr;
  noise.target_psnr_db = 40.0;
  const std::vector<ImageGrid> clean = forward(op, x);
  const std::vector<ImageGrid> noisy = simulate(op, x, noise, 19);

  double sum = 0.0, sumsq = 0.0;
  long n = 0;
  for (int k = 0; k < K; ++k)
    for (std::size_t i = 0; i < clean[static_cast<std::size_t>(k)].values.size(); ++i) {
      const double e = noisy[static_cast<std::size_t>(k)].values[i] -
                       clean[static_cast<std::size_t>(k)].values[i];
      sum += e;
      sumsq += e * e;
      ++n;
    }
  const double mean = sum / n;
  const double sd = std::sqrt(sumsq / n - mean * mean);
  CHECK(std::abs(sd - 2.55) < 0.0255);  // within 1%
  CHECK(std::abs(mean) < 0.01);
}

TEST_CASE("noise-free simulation equals forward bitwise") {
  const Geometry g = make_geometry(4, 4, 4);
  SystemOperator op;
  op.geometry = g;
  op.patterns = generate_patterns(g, 6, PatternScheme::HalfOnExact, 7).patterns;
  op.kernels.assign(6, kernel_by_name("disk-1.667", g));
  const ImageGrid x = ImageGrid::constant(g.scene_side, g.scene_side, 100.0);

  NoiseModel none;
  const std::vector<ImageGrid> a = forward(op, x);
  const std::vector<ImageGrid> b = simulate(op, x, none, 123);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].values == b[k].values);
}

TEST_CASE("noisy simulation is deterministic per seed and k-indexed") {
  const Geometry g = make_geometry(4, 4, 4);
  SystemOperator op;
  op.geometry = g;
  op.patterns = generate_patterns(g, 8, PatternScheme::HalfOnExact, 7).patterns;
  op.kernels.assign(8, make_in_focus());
  const ImageGrid x = ImageGrid::constant(g.scene_side, g.scene_side, 128.0);
  NoiseModel noise;
  noise.kind = NoiseModel::Kind::GaussianPsnr;
  noise.target_psnr_db = 30.0;

  const std::vector<ImageGrid> a = simulate(op, x, noise, 55);
  const std::vector<ImageGrid> b = simulate(op, x, noise, 55);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].values == b[k].values);

  // Measurement k's noise is tied to k, not to the run length: a shorter run
  // reproduces the prefix.
  SystemOperator op5 = op;
  op5.patterns.assign(op.patterns.begin(), op.patterns.begin() + 5);
  op5.kernels.assign(op.kernels.begin(), op.kernels.begin() + 5);
  const std::vector<ImageGrid> c = simulate(op5, x, noise, 55);
  for (std::size_t k = 0; k < 5; ++k) CHECK(a[k].values == c[k].values);
}

TEST_CASE("load_scene handles PGM, CSV, and block-averaging") {
  SUBCASE("8-bit PGM is scaled to [0,255]") {
    const std::string path = temp_path("gray8.pgm");
    std::ofstream f(path, std::ios::binary);
    f << "P5\n# comment line\n2 2\n255\n";
    const unsigned char px[4] = {0, 128, 64, 255};
    f.write(reinterpret_cast<const char*>(px), 4);
    f.close();
    const Geometry g = make_geometry(1, 1, 4);  // scene 2x2
    const ImageGrid img = load_scene(path, g);
    CHECK(img.at(0, 0) == 0.0);
    CHECK(img.at(0, 1) == 128.0);
    CHECK(img.at(1, 1) == 255.0);
  }
  SUBCASE("16-bit PGM scales by 255/maxval") {
    const std::string path = temp_path("gray16.pgm");
    ImageGrid img(2, 2);
    img.values = {0.0, 127.5, 63.75, 255.0};
    write_pgm16(path, img, 255.0);
    const Geometry g = make_geometry(1, 1, 4);
    const ImageGrid back = load_scene(path, g);
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(back.values[i] == doctest::Approx(img.values[i]).epsilon(1e-4));
  }
  SUBCASE("CSV values pass through unscaled") {
    const std::string path = temp_path("scene.csv");
    ImageGrid img(2, 2);
    img.values = {1000.0, -3.5, 0.25, 7.0};
    write_csv_image(path, img);
    const Geometry g = make_geometry(1, 1, 4);
    const ImageGrid back = load_scene(path, g);
    CHECK(back.values == img.values);
  }
  SUBCASE("larger multiples are block-averaged down") {
    const std::string path = temp_path("scene4.csv");
    ImageGrid img(4, 4);
    for (int i = 0; i < 16; ++i) img.values[static_cast<std::size_t>(i)] = i;
    write_csv_image(path, img);
    const Geometry g = make_geometry(1, 1, 4);  // scene side 2
    const ImageGrid back = load_scene(path, g);
    CHECK(back.at(0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
    CHECK(back.at(1, 1) == doctest::Approx((10 + 11 + 14 + 15) / 4.0));
  }
  SUBCASE("non-square and non-multiple inputs are rejected") {
    const std::string path = temp_path("bad.csv");
    write_csv_image(path, ImageGrid(3, 2, 1.0));
    const Geometry g = make_geometry(1, 1, 4);
    CHECK_THROWS_AS((void)load_scene(path, g), Error);

    write_csv_image(path, ImageGrid(3, 3, 1.0));
    CHECK_THROWS_AS((void)load_scene(path, g), Error);  // 3 not a multiple of 2
  }
}

TEST_CASE("kernel library and name lookup agree") {
  const Geometry g = make_geometry(32, 32, 4);
  const std::vector<BlurKernel> lib = make_kernel_library(g);
  REQUIRE(lib.size() >= 7);
  bool has_167 = false;
  for (const BlurKernel& k : lib) {
    const BlurKernel byname = kernel_by_name(k.name, g);
    CHECK(byname.side() == k.side());
    CHECK(same_kernel(byname, k));
    if (k.name == "disk-1.667") {
      has_167 = true;
      CHECK(k.diameter_sensor_px == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
    }
  }
  CHECK(has_167);

  CHECK_THROWS_AS((void)kernel_by_name("swirl-9", g), Error);

  SUBCASE("explicit kernel file") {
    const std::string path = temp_path("kernel.csv");
    ImageGrid raster(3, 3, 1.0 / 9.0);
    write_csv_image(path, raster);
    const BlurKernel k = kernel_by_name("file:" + path, g);
    CHECK(k.side() == 3);
    double sum = 0.0;
    for (double v : k.raster.values) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}
