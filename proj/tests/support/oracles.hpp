#pragma once

// Slow, obviously-correct dense reference implementations of the measurement
// chain, written independently of the production operator code. Tests compare
// the fast paths against these.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "maskblur/geometry.hpp"
#include "maskblur/image.hpp"
#include "maskblur/kernel.hpp"
#include "maskblur/mask.hpp"
#include "maskblur/rng.hpp"
#include "maskblur/system.hpp"

namespace oracles {

using maskblur::BilinearWarp;
using maskblur::BlurKernel;
using maskblur::Geometry;
using maskblur::ImageGrid;
using maskblur::MaskPattern;
using maskblur::SystemOperator;

// Diagonal mask modulation at scene resolution.
inline Eigen::MatrixXd dense_modulation(const MaskPattern& p, int scene_side) {
  const int R = scene_side * scene_side;
  const int up = scene_side / p.side;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(R, R);
  for (int r = 0; r < scene_side; ++r)
    for (int c = 0; c < scene_side; ++c) {
      const int j = r * scene_side + c;
      D(j, j) = p.bits[static_cast<std::size_t>(r / up) * p.side + (c / up)];
    }
  return D;
}

// Zero-padded convolution: out(p) = sum_t ker(t) * x(p - t + h), h = side/2.
inline Eigen::MatrixXd dense_blur(const BlurKernel& k, int scene_side) {
  const int R = scene_side * scene_side;
  const int side = k.side();
  const int h = side / 2;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(R, R);
  for (int r = 0; r < scene_side; ++r)
    for (int c = 0; c < scene_side; ++c)
      for (int tr = 0; tr < side; ++tr)
        for (int tc = 0; tc < side; ++tc) {
          const int sr = r - tr + h;
          const int sc = c - tc + h;
          if (sr < 0 || sr >= scene_side || sc < 0 || sc >= scene_side) continue;
          B(r * scene_side + c, sr * scene_side + sc) += k.raster.at(tr, tc);
        }
  return B;
}

// Block-mean downsampling from scene to sensor resolution.
inline Eigen::MatrixXd dense_subsample(const Geometry& g) {
  const int R = g.scene_pixels();
  const int M = g.sensor_pixels();
  const int b = g.sensor_block;
  const double w = 1.0 / (static_cast<double>(b) * b);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(M, R);
  for (int r = 0; r < g.scene_side; ++r)
    for (int c = 0; c < g.scene_side; ++c)
      S((r / b) * g.sensor_side + (c / b), r * g.scene_side + c) = w;
  return S;
}

// Bilinear resampling: source = center + (dest - center)/scale - shift,
// taps outside the image dropped.
inline Eigen::MatrixXd dense_warp(const BilinearWarp& w, int scene_side) {
  const int R = scene_side * scene_side;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(R, R);
  const double cy = 0.5 * (scene_side - 1);
  const double cx = 0.5 * (scene_side - 1);
  for (int r = 0; r < scene_side; ++r)
    for (int c = 0; c < scene_side; ++c) {
      const double sr = cy + (r - cy) / w.scale_y - w.shift_y;
      const double sc = cx + (c - cx) / w.scale_x - w.shift_x;
      const int r0 = static_cast<int>(std::floor(sr));
      const int c0 = static_cast<int>(std::floor(sc));
      const double fr = sr - r0;
      const double fc = sc - c0;
      const double weights[4] = {(1 - fr) * (1 - fc), (1 - fr) * fc, fr * (1 - fc), fr * fc};
      const int rows[4] = {r0, r0, r0 + 1, r0 + 1};
      const int cols[4] = {c0, c0 + 1, c0, c0 + 1};
      for (int i = 0; i < 4; ++i) {
        if (weights[i] == 0.0) continue;
        if (rows[i] < 0 || rows[i] >= scene_side || cols[i] < 0 || cols[i] >= scene_side)
          continue;
        W(r * scene_side + c, rows[i] * scene_side + cols[i]) += weights[i];
      }
    }
  return W;
}

// Full measurement-k matrix: subsample * blur * [warp] * modulation.
inline Eigen::MatrixXd dense_measurement_matrix(const SystemOperator& op, int k) {
  const int scene = op.geometry.scene_side;
  Eigen::MatrixXd A = dense_modulation(op.patterns[k], scene);
  if (op.distortion && !op.distortion->is_identity())
    A = dense_warp(*op.distortion, scene) * A;
  A = dense_blur(op.kernels[k % op.kernels.size()], scene) * A;
  return dense_subsample(op.geometry) * A;
}

// Stacked system matrix, measurements in order.
inline Eigen::MatrixXd dense_stacked(const SystemOperator& op) {
  const int M = op.geometry.sensor_pixels();
  const int R = op.geometry.scene_pixels();
  const int K = static_cast<int>(op.patterns.size());
  Eigen::MatrixXd A(static_cast<Eigen::Index>(K) * M, R);
  for (int k = 0; k < K; ++k) A.middleRows(static_cast<Eigen::Index>(k) * M, M) = dense_measurement_matrix(op, k);
  return A;
}

inline ImageGrid random_image(int side, maskblur::CounterRng& rng, double lo = -1.0,
                              double hi = 1.0) {
  ImageGrid img(side, side);
  for (double& v : img.values) v = lo + (hi - lo) * rng.uniform();
  return img;
}

inline Eigen::VectorXd flatten(const ImageGrid& img) {
  return Eigen::Map<const Eigen::VectorXd>(img.values.data(),
                                           static_cast<Eigen::Index>(img.values.size()));
}

inline Eigen::VectorXd flatten_all(const std::vector<ImageGrid>& imgs) {
  std::size_t total = 0;
  for (const auto& im : imgs) total += im.values.size();
  Eigen::VectorXd v(static_cast<Eigen::Index>(total));
  Eigen::Index at = 0;
  for (const auto& im : imgs)
    for (double x : im.values) v(at++) = x;
  return v;
}

}  // namespace oracles
