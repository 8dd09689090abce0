#include "hodgemix/solvers.hpp"

#include <cmath>
#include <vector>

#include "hodgemix/operators.hpp"
#include "hodgemix/rng.hpp"

namespace hodgemix {

namespace {

Eigen::Index default_max_iterations(const LsSolveOptions& options, Eigen::Index dimension) {
  if (options.max_iterations > 0) return options.max_iterations;
  return 10 * dimension + 100;
}

// r scaled by per-record weights, skipping the multiply when all are 1.
Eigen::VectorXd apply_weights(const ComparisonDataset& dataset, Eigen::VectorXd r) {
  if (!dataset.unit_weights()) r.array() *= dataset.weights().array();
  return r;
}

}  // namespace

Eigen::SparseMatrix<double> item_laplacian(const ComparisonDataset& dataset) {
  const Eigen::Index n = dataset.n_items();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(dataset.n_records()) * 4);
  for (Eigen::Index k = 0; k < dataset.n_records(); ++k) {
    const auto i = dataset.lefts()[static_cast<std::size_t>(k)];
    const auto j = dataset.rights()[static_cast<std::size_t>(k)];
    const double w = dataset.weights()[k];
    triplets.emplace_back(i, i, w);
    triplets.emplace_back(j, j, w);
    triplets.emplace_back(i, j, -w);
    triplets.emplace_back(j, i, -w);
  }
  Eigen::SparseMatrix<double> laplacian(n, n);
  laplacian.setFromTriplets(triplets.begin(), triplets.end());
  return laplacian;
}

void center_by_component(Eigen::VectorXd& v, const std::vector<std::int32_t>& component) {
  std::int32_t n_components = 0;
  for (std::int32_t c : component) n_components = std::max(n_components, c + 1);
  if (n_components == 0) return;
  std::vector<double> sum(static_cast<std::size_t>(n_components), 0.0);
  std::vector<Eigen::Index> count(static_cast<std::size_t>(n_components), 0);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const std::int32_t c = component[static_cast<std::size_t>(i)];
    if (c < 0) continue;
    sum[static_cast<std::size_t>(c)] += v[i];
    ++count[static_cast<std::size_t>(c)];
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const std::int32_t c = component[static_cast<std::size_t>(i)];
    if (c < 0) continue;
    v[i] -= sum[static_cast<std::size_t>(c)] / static_cast<double>(count[static_cast<std::size_t>(c)]);
  }
}

Eigen::VectorXd solve_laplacian_gauge(const Eigen::SparseMatrix<double>& laplacian,
                                      const std::vector<std::int32_t>& component,
                                      const Eigen::VectorXd& rhs, const Eigen::VectorXd& x0,
                                      const LsSolveOptions& options) {
  const Eigen::Index n = laplacian.rows();
  if (rhs.size() != n || x0.size() != n)
    throw DimensionMismatch("solve_laplacian_gauge: vector size does not match Laplacian");

  Eigen::VectorXd b = rhs;
  center_by_component(b, component);
  Eigen::VectorXd x = x0;
  center_by_component(x, component);

  const double bnorm = b.norm();
  if (bnorm == 0.0) return Eigen::VectorXd::Zero(n);

  Eigen::VectorXd r = b - laplacian * x;
  center_by_component(r, component);
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  const double threshold = options.rel_tolerance * bnorm;
  const Eigen::Index max_iters = default_max_iterations(options, n);

  for (Eigen::Index it = 0; it < max_iters; ++it) {
    if (std::sqrt(rr) <= threshold) {
      center_by_component(x, component);
      return x;
    }
    Eigen::VectorXd lp = laplacian * p;
    center_by_component(lp, component);
    const double plp = p.dot(lp);
    if (plp <= 0.0) break;  // numerically singular direction
    const double alpha = rr / plp;
    x += alpha * p;
    r -= alpha * lp;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  if (std::sqrt(rr) <= threshold) {
    center_by_component(x, component);
    return x;
  }
  throw SolverDidNotConverge("Laplacian CG: residual " + std::to_string(std::sqrt(rr) / bnorm) +
                             " above tolerance after " + std::to_string(max_iters) +
                             " iterations");
}

Eigen::VectorXd hodgerank_response(const ComparisonDataset& dataset, const Eigen::VectorXd& b,
                                   const LsSolveOptions& options) {
  if (b.size() != dataset.n_records())
    throw DimensionMismatch("hodgerank_response: response length mismatch");
  const Eigen::SparseMatrix<double> laplacian = item_laplacian(dataset);
  const ComponentLabels components = connected_components(dataset);
  const Eigen::VectorXd rhs = apply_d_adjoint(dataset, apply_weights(dataset, b));
  return solve_laplacian_gauge(laplacian, components.item_component, rhs,
                               Eigen::VectorXd::Zero(dataset.n_items()), options);
}

Eigen::VectorXd hodgerank(const ComparisonDataset& dataset, const LsSolveOptions& options) {
  return hodgerank_response(dataset, dataset.responses(), options);
}

double spectral_norm_xtx(const ComparisonDataset& dataset, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("spectral_norm_xtx: tol must be positive");
  const BetaLayout layout = dataset.beta_layout();
  Rng rng(0x9d2c5680u);  // fixed stream: the estimate must not depend on callers
  Eigen::VectorXd v(layout.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  v.normalize();

  double lambda = 0.0;
  int settled = 0;
  const Eigen::Index max_iters = 200000;
  for (Eigen::Index it = 0; it < max_iters; ++it) {
    Eigen::VectorXd w = apply_X_adjoint(dataset, apply_weights(dataset, apply_X(dataset, v)));
    const double lambda_new = v.dot(w);  // Rayleigh quotient, ||v|| = 1
    const double wnorm = w.norm();
    if (wnorm == 0.0) return 0.0;
    v = w / wnorm;
    // The Rayleigh value must hold still for several iterations; a single
    // small step can be a plateau of a still-rotating iterate.
    if (it > 0 && std::abs(lambda_new - lambda) <= 0.05 * tol * std::abs(lambda_new)) {
      if (++settled >= 5) return lambda_new;
    } else {
      settled = 0;
    }
    lambda = lambda_new;
  }
  throw SolverDidNotConverge("spectral_norm_xtx: power iteration did not settle");
}

FullLsSolution full_least_squares(const ComparisonDataset& dataset,
                                  const LsSolveOptions& options) {
  const Eigen::Index n = dataset.n_items();
  const BetaLayout layout = dataset.beta_layout();
  const Eigen::Index dim = n + layout.size();

  const bool weighted = !dataset.unit_weights();
  Eigen::VectorXd sqrt_w;
  if (weighted) sqrt_w = dataset.weights().cwiseSqrt();

  auto apply_stacked = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd out = apply_d(dataset, x.head(n)) + apply_X(dataset, x.tail(layout.size()));
    if (weighted) out.array() *= sqrt_w.array();
    return out;
  };
  auto apply_stacked_adjoint = [&](Eigen::VectorXd r) {
    if (weighted) r.array() *= sqrt_w.array();
    Eigen::VectorXd out(dim);
    out.head(n) = apply_d_adjoint(dataset, r);
    out.tail(layout.size()) = apply_X_adjoint(dataset, r);
    return out;
  };

  // CGLS (CG on the normal equations). Started at zero, iterates stay in
  // range([d X]^T), so the limit is the minimum-norm least-squares solution.
  Eigen::VectorXd b = dataset.responses();
  if (weighted) b.array() *= sqrt_w.array();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd r = b;
  Eigen::VectorXd s = apply_stacked_adjoint(r);
  Eigen::VectorXd p = s;
  double ss = s.squaredNorm();
  const double s0norm = std::sqrt(ss);
  FullLsSolution result;
  if (s0norm == 0.0) {
    result.theta = Eigen::VectorXd::Zero(n);
    result.beta = Eigen::VectorXd::Zero(layout.size());
    return result;
  }
  const double threshold = options.rel_tolerance * s0norm;
  const Eigen::Index max_iters = default_max_iterations(options, dim);

  Eigen::Index it = 0;
  for (; it < max_iters; ++it) {
    if (std::sqrt(ss) <= threshold) break;
    const Eigen::VectorXd q = apply_stacked(p);
    const double qq = q.squaredNorm();
    if (qq == 0.0) break;
    const double alpha = ss / qq;
    x += alpha * p;
    r -= alpha * q;
    s = apply_stacked_adjoint(r);
    const double ss_new = s.squaredNorm();
    p = s + (ss_new / ss) * p;
    ss = ss_new;
  }
  if (std::sqrt(ss) > threshold)
    throw SolverDidNotConverge("full_least_squares: CGLS stalled at relative residual " +
                               std::to_string(std::sqrt(ss) / s0norm));

  result.theta = x.head(n);
  result.beta = x.tail(layout.size());
  result.iterations = it;

  // Roundoff hygiene: the min-norm solution is already component-mean-zero
  // on theta and on each annotator's delta over its touched items.
  const ComponentLabels components = connected_components(dataset);
  center_by_component(result.theta, components.item_component);
  for (Eigen::Index u = 0; u < layout.n_annotators; ++u) {
    if (dataset.annotator_records()[static_cast<std::size_t>(u)].empty()) continue;
    Eigen::VectorXd block = result.beta.segment(layout.delta_offset(u), n);
    center_by_component(block, components.annotator_item_component[static_cast<std::size_t>(u)]);
    result.beta.segment(layout.delta_offset(u), n) = block;
  }
  return result;
}

}  // namespace hodgemix
