#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "maskblur/image.hpp"
#include "maskblur/system.hpp"

namespace maskblur {

enum class SolverKind { Direct, ConjugateGradient };

struct TikhonovConfig {
  double delta = 1e-3;
  SolverKind solver = SolverKind::Direct;
  double cg_tol = 1e-8;     // relative residual target
  int cg_max_iter = 500;
};

struct ReconResult {
  ImageGrid estimate;       // scene resolution
  double delta_used = 0.0;
  int solver_iterations = 0;  // 0 for the direct solver
  double residual_norm = 0.0; // ||(A^T A + delta I) x - A^T Y||
  bool converged = true;      // false when CG hit the iteration cap
};

/// Ridge-regularised least squares on the normal equations:
/// (A^T A + delta I) x = A^T Y. Direct assembles the dense normal matrix and
/// Cholesky-solves (budget permitting); ConjugateGradient runs matrix-free
/// through forward/adjoint and never forms the matrix.
ReconResult solve(const SystemOperator& op, const std::vector<ImageGrid>& ys,
                  const TikhonovConfig& cfg);

struct DeltaSweepResult {
  double best_delta = 0.0;
  std::vector<std::pair<double, double>> per_delta_mse;  // (delta, mse) in grid order
};

/// Direct solve per grid point against a fixed right-hand side, scoring each
/// estimate by MSE against ground truth. Ties within 1e-12 go to the smaller
/// delta. Failed points are skipped with a warning on stderr.
DeltaSweepResult sweep_delta(const SystemOperator& op, const std::vector<ImageGrid>& ys,
                             const ImageGrid& ground_truth, const std::vector<double>& grid);

/// 25 logarithmically spaced points spanning [1e-6, 1e2] times the estimated
/// top eigenvalue of A^T A (30 power iterations).
std::vector<double> default_delta_grid(const SystemOperator& op, int points = 25);

double estimate_top_eigenvalue(const SystemOperator& op, int iterations = 30);

/// Caches the dense normal matrix and right-hand-side assembly so repeated
/// solves (delta sweeps, multi-scene studies) pay for the gram once. The
/// Cholesky factor is re-used while delta is unchanged.
class NormalEquationsSolver {
 public:
  explicit NormalEquationsSolver(const SystemOperator& op);

  Eigen::VectorXd rhs(const std::vector<ImageGrid>& ys) const;
  ImageGrid solve(const std::vector<ImageGrid>& ys, double delta);
  ImageGrid solve_rhs(const Eigen::VectorXd& rhs, double delta);
  const Eigen::MatrixXd& gram_matrix() const { return gram_; }

 private:
  const SystemOperator& op_;
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double factored_delta_ = -1.0;
};

}  // namespace maskblur
