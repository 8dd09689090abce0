#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "hodgemix/dataset.hpp"

namespace hodgemix {

struct LsSolveOptions {
  double rel_tolerance = 1e-10;
  // 0 = pick per solve: 10 * (problem dimension) with a small floor.
  Eigen::Index max_iterations = 0;
};

// Weighted item Laplacian d^T W d as a sparse n x n matrix. This is the only
// operator ever materialized; X never is.
Eigen::SparseMatrix<double> item_laplacian(const ComparisonDataset& dataset);

// Subtracts the per-component mean from v (component id per coordinate,
// id < 0 coordinates are left untouched).
void center_by_component(Eigen::VectorXd& v, const std::vector<std::int32_t>& component);

// CG solve of L x = rhs restricted to the component-wise mean-zero subspace,
// where L is a (weighted) graph Laplacian. x0 is the warm start; rhs and x0
// are projected into the subspace. Throws SolverDidNotConverge.
Eigen::VectorXd solve_laplacian_gauge(const Eigen::SparseMatrix<double>& laplacian,
                                      const std::vector<std::int32_t>& component,
                                      const Eigen::VectorXd& rhs, const Eigen::VectorXd& x0,
                                      const LsSolveOptions& options = {});

// Least-squares ranking scores: the minimum-norm solution of
// min_theta ||y - d theta||_W^2, gauge-fixed to mean zero on every global
// item-graph component.
Eigen::VectorXd hodgerank(const ComparisonDataset& dataset, const LsSolveOptions& options = {});

// Same, but for an arbitrary record-space response b in place of y (used by
// the path engine, which repeatedly ranks y - X beta).
Eigen::VectorXd hodgerank_response(const ComparisonDataset& dataset, const Eigen::VectorXd& b,
                                   const LsSolveOptions& options = {});

// Largest eigenvalue of X^T W X (= ||X^T X||_2 at unit weights), via power
// iteration on beta -> X^T W (X beta) with a deterministic start vector.
double spectral_norm_xtx(const ComparisonDataset& dataset, double tol = 1e-6);

struct FullLsSolution {
  Eigen::VectorXd theta;
  Eigen::VectorXd beta;
  Eigen::Index iterations = 0;
};

// Minimum-norm least squares over (theta, beta) jointly:
// min ||y - d theta - X beta||_W^2, solved by CGLS on the stacked operator
// [d X] from a zero start. The overfit "full model" the path approaches.
FullLsSolution full_least_squares(const ComparisonDataset& dataset,
                                  const LsSolveOptions& options = {});

}  // namespace hodgemix
