#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "hodgemix/dataset.hpp"
#include "hodgemix/solvers.hpp"

namespace hodgemix {

// Which theta enters the dual update residual: the freshly minimized
// theta^{k+1} (default) or the previous iterate theta^k.
enum class ZUpdateTheta { kFresh, kStale };

struct LbiConfig {
  double kappa = 100.0;
  // Step size; 0 = auto, alpha = m / (kappa * ||X^T X||_2). An explicit value
  // must satisfy alpha * kappa * ||X^T X||_2 / m < 2.
  double alpha = 0.0;
  // Explicit stops; 0 = unset. When neither is set the fit stops at the
  // first of: the active set covering active_fraction_stop of the annotators
  // with records, no active-set change over the trailing 10% of iterations,
  // the dual state stalling before any activation, or the iteration cap.
  Eigen::Index max_iterations = 0;
  double t_max = 0.0;
  // Auto-stop bounds (only used when both explicit stops are unset).
  Eigen::Index auto_min_iterations = 200;
  Eigen::Index auto_max_iterations = 50000;
  double active_fraction_stop = 0.9;

  Eigen::Index checkpoint_every = 1;
  // When > 0, stored checkpoints are thinned (cadence doubled) so at most
  // this many are kept; activation events are always logged exactly.
  Eigen::Index max_checkpoints = 512;

  std::uint64_t rng_seed = 0;
  ZUpdateTheta z_update_theta = ZUpdateTheta::kFresh;
  LsSolveOptions theta_solve;
  double spectral_tol = 1e-6;
};

struct PathPoint {
  double t = 0.0;
  Eigen::VectorXd theta;
  Eigen::VectorXd z;     // dual state; beta = kappa * Shrinkage(z)
  Eigen::VectorXd beta;
  std::vector<std::int32_t> active_delta;
  std::vector<std::int32_t> active_gamma;
  double loss = 0.0;     // (1/2m) ||y - d theta - X beta||_W^2
  Eigen::Index iteration = 0;
};

struct ActivationEvent {
  enum class Block { kDelta, kGamma };
  std::int32_t annotator = 0;
  Block block = Block::kDelta;
  double t = 0.0;
  Eigen::Index iteration = 0;
};

struct LbiPath {
  LbiConfig config;
  BetaLayout layout;
  double alpha = 0.0;      // resolved step size
  double xtx_norm = 0.0;   // computed ||X^T X||_2
  Eigen::Index iterations = 0;
  std::string stop_reason;
  std::vector<PathPoint> points;         // t strictly increasing, first at t=0
  std::vector<ActivationEvent> activations;  // first nonzero t per (annotator, block)

  double t_end() const { return points.empty() ? 0.0 : points.back().t; }
};

// Dense model snapshot at one path time; the unit of prediction.
struct ModelFit {
  double t = 0.0;
  Eigen::VectorXd theta;  // n_items
  Eigen::VectorXd delta;  // n_items * n_annotators, annotator-major
  Eigen::VectorXd gamma;  // n_annotators
};

// Group soft-thresholding: per annotator,
//   delta part: kappa * max(0, 1 - 1/||z_delta_u||_2) * z_delta_u
//   gamma part: kappa * max(0, 1 - 1/|z_gamma_u|)    * z_gamma_u
// This equals kappa * prox_P(z) for P(beta) = ||gamma||_1 + sum_u ||delta_u||_2.
Eigen::VectorXd shrinkage(const Eigen::VectorXd& z, double kappa, const BetaLayout& layout);

// Runs the iteration
//   theta^{k+1} = argmin_theta ||y - d theta - X beta^k||_W^2   (gauge-fixed)
//   z^{k+1}     = z^k + (alpha/m) X^T W (y - d theta - X beta^k)
//   beta^{k+1}  = kappa * Shrinkage(z^{k+1}),   t^{k+1} = (k+1) alpha
// from beta^0 = 0, z^0 = 0, theta^0 = the ranking-only least squares fit.
LbiPath lbi_fit(const ComparisonDataset& dataset, const LbiConfig& config = {});

// Linear interpolation of (theta, z) between the bracketing checkpoints;
// beta(t) is recovered as kappa * Shrinkage(z(t)). Throws TOutOfRange.
ModelFit interpolate(const LbiPath& path, double t);

ModelFit fit_from_point(const LbiPath& path, const PathPoint& point);

struct Query {
  std::int32_t annotator = 0;
  std::int32_t left = 0;
  std::int32_t right = 0;
};

// yhat = (theta_i + delta^u_i) - (theta_j + delta^u_j) + gamma^u. Annotators
// outside the fit's table fall back to the common model (delta = gamma = 0).
Eigen::VectorXd predict(const ModelFit& fit, const std::vector<Query>& queries);

// (1/2m) sum_k w_k (y_k - yhat_k)^2
double loss(const ComparisonDataset& dataset, const ModelFit& fit);

// Plain mean squared prediction error (the cross-validation / holdout metric).
double prediction_mse(const ComparisonDataset& dataset, const ModelFit& fit);

}  // namespace hodgemix
