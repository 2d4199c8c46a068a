#include "maskblur/recon.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "maskblur/errors.hpp"

namespace maskblur {

namespace {

void validate_config(const TikhonovConfig& cfg) {
  require(cfg.delta > 0.0, ErrorCode::InvalidArgument, "delta must be positive");
  require(cfg.cg_tol > 0.0 && cfg.cg_tol < 1.0, ErrorCode::InvalidArgument,
          "cg_tol must lie in (0,1)");
  require(cfg.cg_max_iter >= 1, ErrorCode::InvalidArgument, "cg_max_iter must be >= 1");
}

Eigen::VectorXd flatten(const ImageGrid& img) {
  return Eigen::Map<const Eigen::VectorXd>(img.values.data(), img.values.size());
}

ImageGrid unflatten(const Eigen::VectorXd& v, int side) {
  ImageGrid img(side, side);
  Eigen::Map<Eigen::VectorXd>(img.values.data(), img.values.size()) = v;
  return img;
}

// x -> (A^T A + delta I) x through the matrix-free operator pair.
Eigen::VectorXd normal_apply(const SystemOperator& op, const Eigen::VectorXd& v, double delta) {
  const int side = op.geometry.scene_side;
  const ImageGrid back = adjoint(op, forward(op, unflatten(v, side)));
  return flatten(back) + delta * v;
}

}  // namespace

NormalEquationsSolver::NormalEquationsSolver(const SystemOperator& op)
    : op_(op), gram_(gram(op)) {}

Eigen::VectorXd NormalEquationsSolver::rhs(const std::vector<ImageGrid>& ys) const {
  return flatten(adjoint(op_, ys));
}

ImageGrid NormalEquationsSolver::solve(const std::vector<ImageGrid>& ys, double delta) {
  return solve_rhs(rhs(ys), delta);
}

ImageGrid NormalEquationsSolver::solve_rhs(const Eigen::VectorXd& b, double delta) {
  require(delta > 0.0, ErrorCode::InvalidArgument, "delta must be positive");
  if (delta != factored_delta_) {
    Eigen::MatrixXd shifted = gram_;
    shifted.diagonal().array() += delta;
    llt_.compute(shifted);
    require(llt_.info() == Eigen::Success, ErrorCode::NumericFailure,
            "Cholesky factorization failed at delta " + std::to_string(delta));
    factored_delta_ = delta;
  }
  const Eigen::VectorXd x = llt_.solve(b);
  return unflatten(x, op_.geometry.scene_side);
}

ReconResult solve(const SystemOperator& op, const std::vector<ImageGrid>& ys,
                  const TikhonovConfig& cfg) {
  validate_config(cfg);
  validate_operator(op);

  ReconResult result;
  result.delta_used = cfg.delta;

  if (cfg.solver == SolverKind::Direct) {
    NormalEquationsSolver solver(op);
    const Eigen::VectorXd b = solver.rhs(ys);
    result.estimate = solver.solve_rhs(b, cfg.delta);
    const Eigen::VectorXd x = flatten(result.estimate);
    Eigen::VectorXd residual = solver.gram_matrix() * x + cfg.delta * x - b;
    result.residual_norm = residual.norm();
    result.solver_iterations = 0;
    result.converged = true;
    return result;
  }

  // Conjugate gradient on (A^T A + delta I) x = A^T Y; the operator is
  // symmetric positive definite for delta > 0.
  const Eigen::VectorXd b = flatten(adjoint(op, ys));
  const double b_norm = b.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  if (b_norm == 0.0) {
    result.estimate = unflatten(x, op.geometry.scene_side);
    result.residual_norm = 0.0;
    result.converged = true;
    return result;
  }
  Eigen::VectorXd r = b;
  Eigen::VectorXd p = r;
  double rs = r.squaredNorm();
  int iterations = 0;
  bool converged = false;
  for (int it = 0; it < cfg.cg_max_iter; ++it) {
    const Eigen::VectorXd ap = normal_apply(op, p, cfg.delta);
    const double alpha = rs / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rs_next = r.squaredNorm();
    iterations = it + 1;
    if (std::sqrt(rs_next) <= cfg.cg_tol * b_norm) {
      converged = true;
      break;
    }
    p = r + (rs_next / rs) * p;
    rs = rs_next;
  }
  result.estimate = unflatten(x, op.geometry.scene_side);
  result.solver_iterations = iterations;
  result.residual_norm = r.norm();
  result.converged = converged;
  return result;
}

double estimate_top_eigenvalue(const SystemOperator& op, int iterations) {
  validate_operator(op);
  const std::size_t n = op.geometry.scene_pixels();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd w = normal_apply(op, v, 0.0);
    lambda = v.dot(w);
    const double norm = w.norm();
    require(norm > 0.0, ErrorCode::NumericFailure, "power iteration collapsed to zero");
    v = w / norm;
  }
  return lambda;
}

std::vector<double> default_delta_grid(const SystemOperator& op, int points) {
  require(points >= 1, ErrorCode::InvalidArgument, "grid needs at least one point");
  const double lambda1 = estimate_top_eigenvalue(op);
  std::vector<double> grid(points);
  const double lo = std::log10(1e-6);
  const double hi = std::log10(1e2);
  for (int i = 0; i < points; ++i) {
    const double t = (points == 1) ? 0.0 : static_cast<double>(i) / (points - 1);
    grid[i] = lambda1 * std::pow(10.0, lo + t * (hi - lo));
  }
  return grid;
}

DeltaSweepResult sweep_delta(const SystemOperator& op, const std::vector<ImageGrid>& ys,
                             const ImageGrid& ground_truth, const std::vector<double>& grid) {
  require(!grid.empty(), ErrorCode::InvalidArgument, "delta grid is empty");
  for (double d : grid)
    require(d > 0.0, ErrorCode::InvalidArgument, "delta grid entries must be positive");
  require(ground_truth.width == op.geometry.scene_side &&
              ground_truth.height == op.geometry.scene_side,
          ErrorCode::DimensionMismatch, "ground truth must be at scene resolution");

  NormalEquationsSolver solver(op);
  const Eigen::VectorXd b = solver.rhs(ys);

  DeltaSweepResult result;
  double best_mse = 0.0;
  bool have_best = false;
  for (double delta : grid) {
    ImageGrid estimate;
    try {
      estimate = solver.solve_rhs(b, delta);
    } catch (const Error& e) {
      std::fprintf(stderr, "sweep_delta: skipping delta %.6g (%s)\n", delta, e.what());
      continue;
    }
    double mse = 0.0;
    for (std::size_t i = 0; i < estimate.values.size(); ++i) {
      const double d = estimate.values[i] - ground_truth.values[i];
      mse += d * d;
    }
    mse /= static_cast<double>(estimate.values.size());
    result.per_delta_mse.emplace_back(delta, mse);
    if (!have_best || mse < best_mse - 1e-12) {
      best_mse = mse;
      result.best_delta = delta;
      have_best = true;
    } else if (std::abs(mse - best_mse) <= 1e-12 && delta < result.best_delta) {
      result.best_delta = delta;  // ties go to the smaller delta
    }
  }
  require(have_best, ErrorCode::NumericFailure, "every sweep point failed");
  return result;
}

}  // namespace maskblur
