#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "maskblur/errors.hpp"
#include "maskblur/image.hpp"
#include "maskblur/metrics.hpp"
#include "maskblur/rng.hpp"

using namespace maskblur;

namespace {

ImageGrid ramp_image(int side) {
  ImageGrid img(side, side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c)
      img.at(r, c) = 255.0 * (std::sin(0.31 * r) * std::cos(0.17 * c) + 1.0) / 2.0;
  return img;
}

ImageGrid add_noise(const ImageGrid& img, double sigma, std::uint64_t seed) {
  CounterRng rng(seed, 0, RngDomain::General);
  ImageGrid out = img;
  for (double& v : out.values) v += sigma * rng.normal();
  return out;
}

}  // namespace

TEST_CASE("quality of an image against itself is perfect") {
  const ImageGrid img = ramp_image(32);
  const QualityReport q = quality(img, img);
  CHECK(q.mse == 0.0);
  CHECK(q.relative_error == 0.0);
  CHECK(q.psnr_db == 300.0);  // capped
  CHECK(q.ssim == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("known constant offset gives exact mse and psnr") {
  const ImageGrid truth = ramp_image(32);
  ImageGrid est = truth;
  for (double& v : est.values) v += 3.0;
  const QualityReport q = quality(est, truth);
  CHECK(q.mse == doctest::Approx(9.0).epsilon(1e-12));

  const double peak = max_value(truth);
  CHECK(q.psnr_db == doctest::Approx(10.0 * std::log10(peak * peak / 9.0)).epsilon(1e-9));

  double norm2 = 0.0;
  for (double v : truth.values) norm2 += v * v;
  CHECK(q.relative_error ==
        doctest::Approx(std::sqrt(9.0 * truth.values.size() / norm2)).epsilon(1e-9));
}

TEST_CASE("psnr of sigma-2.55 noise on a peak-255 image is near 40 dB") {
  ImageGrid truth(256, 256, 128.0);
  truth.at(0, 0) = 255.0;  // pin the peak
  const ImageGrid est = add_noise(truth, 2.55, 99);
  const QualityReport q = quality(est, truth);
  // mse concentrates around sigma^2 on 65536 samples; +-0.2 dB is ~5 sigma.
  CHECK(q.psnr_db > 39.8);
  CHECK(q.psnr_db < 40.2);
}

TEST_CASE("ssim is symmetric and decreases with noise level") {
  const ImageGrid truth = ramp_image(64);
  ImageGrid noisy = add_noise(truth, 8.0, 5);
  // quality() reads the ssim dynamic range off its reference argument, so the
  // swap is an exact symmetry only when both images share the same peak.
  const double peak = max_value(truth);
  for (double& v : noisy.values) v = std::min(v, peak);
  noisy.values[static_cast<std::size_t>(
      std::max_element(truth.values.begin(), truth.values.end()) - truth.values.begin())] = peak;
  CHECK(quality(noisy, truth).ssim == doctest::Approx(quality(truth, noisy).ssim).epsilon(1e-12));

  double prev = 1.0;
  for (double sigma : {1.0, 2.0, 4.0, 8.0}) {
    const double s = quality(add_noise(truth, sigma, 7), truth).ssim;
    CHECK(s < prev);
    CHECK(s > 0.0);
    prev = s;
  }
}

TEST_CASE("illumination correction undoes a smooth vignette") {
  // Odd side puts a pixel exactly at the vignette centre, so the background
  // peaks at gain 1 and the max-normalised correction restores truth exactly.
  const int side = 31;
  ImageGrid truth = ramp_image(side);
  for (double& v : truth.values) v += 20.0;  // keep the scene bright
  ImageGrid background(side, side);
  ImageGrid observed(side, side);
  const double h = (side - 1) / 2.0;
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      const double d2 = ((r - h) * (r - h) + (c - h) * (c - h)) / (2.0 * h * h);
      const double gain = 1.0 - 0.5 * d2;  // radial falloff, min ~0.5
      background.at(r, c) = 200.0 * gain;
      observed.at(r, c) = truth.at(r, c) * gain;
    }

  std::vector<std::uint32_t> flagged;
  const ImageGrid corrected = illumination_correct(observed, background, 0.05, &flagged);
  CHECK(flagged.empty());
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c)
      CHECK(corrected.at(r, c) == doctest::Approx(truth.at(r, c)).epsilon(1e-10));
}

TEST_CASE("illumination correction leaves dark pixels untouched and flags them") {
  ImageGrid observed(4, 4, 10.0);
  ImageGrid background(4, 4, 100.0);
  background.at(2, 3) = 1.0;  // normalised 0.01 < dark_eps
  std::vector<std::uint32_t> flagged;
  const ImageGrid corrected = illumination_correct(observed, background, 0.05, &flagged);
  REQUIRE(flagged.size() == 1);
  CHECK(flagged[0] == 2u * 4u + 3u);
  CHECK(corrected.at(2, 3) == 10.0);          // passthrough
  CHECK(corrected.at(0, 0) == doctest::Approx(10.0).epsilon(1e-12));  // gain 1 elsewhere

  SUBCASE("an all-dark background is rejected") {
    const ImageGrid zeros(4, 4, 0.0);
    CHECK_THROWS_AS((void)illumination_correct(observed, zeros), Error);
  }
}

TEST_CASE("register_crop recovers a known misalignment") {
  const int hi = 64, lo = 16;
  const ImageGrid scene = ramp_image(hi);

  SUBCASE("aligned input needs no trim") {
    const ImageGrid est = area_resample(scene, 0, 0, hi, hi, lo, lo);
    const RegisterResult res = register_crop(scene, est, 3);
    CHECK(res.trim.total() == 0);
    CHECK(res.mse == doctest::Approx(0.0).epsilon(1e-18));
  }
  SUBCASE("known crop is found exactly") {
    // Estimate views the truth minus (left 2, right 2, top 1, bottom 1); the
    // search resamples candidate crops the same way, so the match is exact.
    const ImageGrid est = area_resample(scene, 2, 1, 60, 62, lo, lo);
    const RegisterResult res = register_crop(scene, est, 3);
    CHECK(res.trim.left == 2);
    CHECK(res.trim.right == 2);
    CHECK(res.trim.top == 1);
    CHECK(res.trim.bottom == 1);
    CHECK(res.mse < 1e-18);
    CHECK(res.aligned_truth.width == lo);
    CHECK(res.aligned_truth.height == lo);
  }
}

TEST_CASE("area_resample averages boxes exactly") {
  SUBCASE("constant image stays constant") {
    const ImageGrid img(10, 10, 7.25);
    const ImageGrid out = area_resample(img, 1, 2, 8, 6, 3, 5);
    for (double v : out.values) CHECK(v == doctest::Approx(7.25).epsilon(1e-14));
  }
  SUBCASE("2x2 block means by hand") {
    ImageGrid img(4, 2);
    img.values = {1, 2, 3, 4, 5, 6, 7, 8};
    const ImageGrid out = area_resample(img, 0, 0, 4, 2, 2, 1);
    REQUIRE(out.values.size() == 2);
    CHECK(out.values[0] == doctest::Approx((1 + 2 + 5 + 6) / 4.0));
    CHECK(out.values[1] == doctest::Approx((3 + 4 + 7 + 8) / 4.0));
  }
}

TEST_CASE("bicubic_resize preserves constants and is identity at same size") {
  const ImageGrid img = ramp_image(16);
  const ImageGrid same = bicubic_resize(img, 16, 16);
  CHECK(max_abs_difference(same, img) < 1e-12);

  const ImageGrid flat(9, 9, 3.5);
  const ImageGrid up = bicubic_resize(flat, 21, 21);
  for (double v : up.values) CHECK(v == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("fan target renders a binary sector star") {
  const int side = 64;
  const ImageGrid fan = render_fan_target(side, 8);
  int bright = 0;
  for (double v : fan.values) {
    CHECK((v == 0.0 || v == 255.0));
    bright += v > 0.0;
  }
  // Half the sectors are bright.
  const double frac = static_cast<double>(bright) / fan.values.size();
  CHECK(frac > 0.4);
  CHECK(frac < 0.6);
}

TEST_CASE("mtf_fan measures contrast of radial sector patterns") {
  const int side = 256;
  const int spokes = 8;
  const ImageGrid fan = render_fan_target(side, spokes);
  const double h = (side - 1) / 2.0;

  SUBCASE("constant image has zero contrast") {
    const ImageGrid flat(side, side, 100.0);
    const MTFCurve c = mtf_fan(flat, {h, h}, {40.0, 80.0}, spokes);
    REQUIRE(c.contrasts.size() == 2);
    CHECK(c.contrasts[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c.contrasts[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c.frequencies[0] == doctest::Approx(spokes / (2.0 * 3.14159265358979323846 * 40.0))
                                  .epsilon(1e-9));
  }
  SUBCASE("the ideal target itself has near-unit contrast at coarse radii") {
    const MTFCurve c = mtf_fan(fan, {h, h}, {60.0, 100.0}, spokes);
    for (double v : c.contrasts) CHECK(v > 0.95);
  }
  SUBCASE("block-averaging plus bicubic upsampling kills fine contrast") {
    // 4x downscale then upscale: radii where the sector period is ~2 px at
    // the low resolution retain little contrast.
    const ImageGrid lo = block_mean_downscale(fan, 4);
    const ImageGrid back = bicubic_resize(lo, side, side);
    const double r_fine = spokes / (2.0 * 3.14159265358979323846 * 0.35);  // 0.35 lp/px
    const MTFCurve c = mtf_fan(back, {h, h}, {r_fine}, spokes);
    CHECK(c.contrasts[0] < 0.2);
    const MTFCurve ideal = mtf_fan(fan, {h, h}, {r_fine}, spokes);
    CHECK(ideal.contrasts[0] > 0.9);
  }
  SUBCASE("radii outside the image are rejected") {
    CHECK_THROWS_AS((void)mtf_fan(fan, {h, h}, {static_cast<double>(side)}, spokes), Error);
    CHECK_THROWS_AS((void)mtf_fan(fan, {h, h}, {0.0}, spokes), Error);
  }
}
