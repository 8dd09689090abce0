#include "hodgemix/lbi.hpp"

#include <algorithm>
#include <cmath>

#include "hodgemix/operators.hpp"

namespace hodgemix {

namespace {

double group_scale(double norm) { return norm > 1.0 ? 1.0 - 1.0 / norm : 0.0; }

double record_prediction(const ComparisonDataset& ds, Eigen::Index k, const Eigen::VectorXd& theta,
                         const Eigen::VectorXd& delta, const Eigen::VectorXd& gamma) {
  const auto idx = static_cast<std::size_t>(k);
  const Eigen::Index u = ds.annotators()[idx];
  const Eigen::Index i = ds.lefts()[idx];
  const Eigen::Index j = ds.rights()[idx];
  const Eigen::Index base = u * ds.n_items();
  return theta[i] - theta[j] + delta[base + i] - delta[base + j] + gamma[u];
}

double training_loss(const ComparisonDataset& ds, const Eigen::VectorXd& theta,
                     const Eigen::VectorXd& beta) {
  const BetaLayout layout = ds.beta_layout();
  const Eigen::Index gamma0 = layout.gamma_offset(0);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < ds.n_records(); ++k) {
    const auto idx = static_cast<std::size_t>(k);
    const Eigen::Index u = ds.annotators()[idx];
    const Eigen::Index base = u * layout.n_items;
    const double fitted = theta[ds.lefts()[idx]] - theta[ds.rights()[idx]] +
                          beta[base + ds.lefts()[idx]] - beta[base + ds.rights()[idx]] +
                          beta[gamma0 + u];
    const double r = ds.responses()[k] - fitted;
    acc += ds.weights()[k] * r * r;
  }
  return acc / (2.0 * static_cast<double>(ds.n_records()));
}

}  // namespace

Eigen::VectorXd shrinkage(const Eigen::VectorXd& z, double kappa, const BetaLayout& layout) {
  if (z.size() != layout.size())
    throw DimensionMismatch("shrinkage: z length does not match layout");
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(z.size());
  for (Eigen::Index u = 0; u < layout.n_annotators; ++u) {
    const auto block = z.segment(layout.delta_offset(u), layout.n_items);
    const double scale = group_scale(block.norm());
    if (scale > 0.0) beta.segment(layout.delta_offset(u), layout.n_items) = kappa * scale * block;
    const double zg = z[layout.gamma_offset(u)];
    const double gscale = group_scale(std::abs(zg));
    if (gscale > 0.0) beta[layout.gamma_offset(u)] = kappa * gscale * zg;
  }
  return beta;
}

LbiPath lbi_fit(const ComparisonDataset& dataset, const LbiConfig& config) {
  if (!(config.kappa > 0.0)) throw InvalidArgument("lbi_fit: kappa must be positive");
  if (config.checkpoint_every < 1)
    throw InvalidArgument("lbi_fit: checkpoint_every must be >= 1");
  if (config.alpha < 0.0 || config.t_max < 0.0 || config.max_iterations < 0)
    throw InvalidArgument("lbi_fit: negative stop parameter");

  const Eigen::Index n = dataset.n_items();
  const BetaLayout layout = dataset.beta_layout();
  const double m = static_cast<double>(dataset.n_records());

  LbiPath path;
  path.config = config;
  path.layout = layout;
  path.xtx_norm = spectral_norm_xtx(dataset, config.spectral_tol);

  if (config.alpha == 0.0) {
    if (path.xtx_norm <= 0.0)
      throw ConfigUnstable("lbi_fit: auto step size undefined, ||X^T X||_2 = 0");
    path.alpha = m / (config.kappa * path.xtx_norm);
  } else {
    path.alpha = config.alpha;
    if (config.alpha * config.kappa * path.xtx_norm / m >= 2.0)
      throw ConfigUnstable("lbi_fit: alpha * kappa * ||X^T X||_2 / m = " +
                           std::to_string(config.alpha * config.kappa * path.xtx_norm / m) +
                           " >= 2");
  }
  const double alpha = path.alpha;

  const Eigen::SparseMatrix<double> laplacian = item_laplacian(dataset);
  const ComponentLabels components = connected_components(dataset);
  const Eigen::VectorXd weighted_y =
      dataset.unit_weights()
          ? dataset.responses()
          : Eigen::VectorXd(dataset.responses().array() * dataset.weights().array());
  const Eigen::VectorXd dtwy = apply_d_adjoint(dataset, weighted_y);

  Eigen::VectorXd theta = solve_laplacian_gauge(laplacian, components.item_component, dtwy,
                                                Eigen::VectorXd::Zero(n), config.theta_solve);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(layout.size());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(layout.size());
  std::vector<char> active_delta(static_cast<std::size_t>(layout.n_annotators), 0);
  std::vector<char> active_gamma(static_cast<std::size_t>(layout.n_annotators), 0);
  std::vector<char> seen_delta = active_delta;
  std::vector<char> seen_gamma = active_gamma;

  auto snapshot = [&](double t, Eigen::Index iteration) {
    PathPoint point;
    point.t = t;
    point.theta = theta;
    point.z = z;
    point.beta = beta;
    for (Eigen::Index u = 0; u < layout.n_annotators; ++u) {
      if (active_delta[static_cast<std::size_t>(u)])
        point.active_delta.push_back(static_cast<std::int32_t>(u));
      if (active_gamma[static_cast<std::size_t>(u)])
        point.active_gamma.push_back(static_cast<std::int32_t>(u));
    }
    point.loss = training_loss(dataset, theta, beta);
    point.iteration = iteration;
    return point;
  };

  path.points.push_back(snapshot(0.0, 0));

  const bool explicit_stop = config.max_iterations > 0 || config.t_max > 0.0;
  const Eigen::Index iteration_cap =
      explicit_stop
          ? (config.max_iterations > 0
                 ? config.max_iterations
                 : static_cast<Eigen::Index>(std::ceil(config.t_max / alpha)) + 1)
          : config.auto_max_iterations;

  Eigen::Index cadence = config.checkpoint_every;
  Eigen::Index last_change = 0;
  std::string stop_reason;

  Eigen::Index annotators_with_records = 0;
  for (const auto& recs : dataset.annotator_records())
    if (!recs.empty()) ++annotators_with_records;
  const auto active_target = static_cast<Eigen::Index>(
      std::ceil(config.active_fraction_stop * static_cast<double>(annotators_with_records)));
  Eigen::Index active_annotators = 0;
  std::vector<double> inactive_z_history;  // per-iteration max dual norm over inactive groups
  if (!explicit_stop) inactive_z_history.reserve(static_cast<std::size_t>(iteration_cap) + 1);

  const auto& lefts = dataset.lefts();
  const auto& rights = dataset.rights();
  const auto& weights = dataset.weights();
  const auto& responses = dataset.responses();
  const bool unit_w = dataset.unit_weights();
  const Eigen::Index gamma0 = layout.gamma_offset(0);

  Eigen::VectorXd theta_stale;
  Eigen::VectorXd rhs(n);

  Eigen::Index k = 0;
  for (;; ++k) {
    if (config.t_max > 0.0 && static_cast<double>(k) * alpha >= config.t_max) {
      stop_reason = "t_max";
      break;
    }
    if (k >= iteration_cap) {
      stop_reason = explicit_stop ? "max_iterations" : "auto iteration cap";
      break;
    }
    if (!explicit_stop && k >= config.auto_min_iterations) {
      if (active_target > 0 && active_annotators >= active_target) {
        stop_reason = "active-set fraction";
        break;
      }
      // Saturation: the active set is quiet AND the inactive groups' dual
      // norms have stopped advancing toward the threshold, so nothing more
      // is on its way into the model.
      const Eigen::Index window = std::max(k / 10, config.auto_min_iterations);
      if (k - last_change >= window && k > window) {
        const double now = inactive_z_history[static_cast<std::size_t>(k - 1)];
        const double before = inactive_z_history[static_cast<std::size_t>(k - 1 - window)];
        if (now - before < 1e-7) {
          stop_reason = "active-set saturation";
          break;
        }
      }
    }

    if (config.z_update_theta == ZUpdateTheta::kStale) theta_stale = theta;

    // theta step: exact minimization given beta^k. rhs = d^T W (y - X beta^k);
    // only annotators with a nonzero block contribute to the correction.
    rhs = dtwy;
    for (Eigen::Index u = 0; u < layout.n_annotators; ++u) {
      const auto uu = static_cast<std::size_t>(u);
      if (!active_delta[uu] && !active_gamma[uu]) continue;
      const Eigen::Index base = u * n;
      const double gamma_u = beta[gamma0 + u];
      for (std::int32_t rec : dataset.annotator_records()[uu]) {
        const auto idx = static_cast<std::size_t>(rec);
        const Eigen::Index i = lefts[idx];
        const Eigen::Index j = rights[idx];
        double v = beta[base + i] - beta[base + j] + gamma_u;
        if (!unit_w) v *= weights[static_cast<Eigen::Index>(rec)];
        rhs[i] -= v;
        rhs[j] += v;
      }
    }
    theta = solve_laplacian_gauge(laplacian, components.item_component, rhs, theta,
                                  config.theta_solve);

    // Dual update from the residual y - d theta - X beta^k.
    const Eigen::VectorXd& theta_for_z =
        config.z_update_theta == ZUpdateTheta::kStale ? theta_stale : theta;
    const double step = alpha / m;
    for (Eigen::Index u = 0; u < layout.n_annotators; ++u) {
      const auto uu = static_cast<std::size_t>(u);
      const Eigen::Index base = u * n;
      const double gamma_u = beta[gamma0 + u];
      double z_gamma_acc = 0.0;
      for (std::int32_t rec : dataset.annotator_records()[uu]) {
        const auto idx = static_cast<std::size_t>(rec);
        const Eigen::Index i = lefts[idx];
        const Eigen::Index j = rights[idx];
        double r = responses[static_cast<Eigen::Index>(rec)] - (theta_for_z[i] - theta_for_z[j]) -
                   (beta[base + i] - beta[base + j] + gamma_u);
        if (!unit_w) r *= weights[static_cast<Eigen::Index>(rec)];
        const double c = step * r;
        z[base + i] += c;
        z[base + j] -= c;
        z_gamma_acc += c;
      }
      z[gamma0 + u] += z_gamma_acc;
    }

    // beta^{k+1} = kappa * Shrinkage(z^{k+1}); track activation flips.
    const double t_next = static_cast<double>(k + 1) * alpha;
    bool changed = false;
    double inactive_z_max = 0.0;
    for (Eigen::Index u = 0; u < layout.n_annotators; ++u) {
      const auto uu = static_cast<std::size_t>(u);
      const bool was_any = active_delta[uu] || active_gamma[uu];
      const Eigen::Index base = u * n;
      const auto block = z.segment(base, n);
      const double block_norm = block.norm();
      const double scale = group_scale(block_norm);
      const bool delta_on = scale > 0.0;
      if (!delta_on) inactive_z_max = std::max(inactive_z_max, block_norm);
      if (delta_on)
        beta.segment(base, n) = config.kappa * scale * block;
      else if (active_delta[uu])
        beta.segment(base, n).setZero();
      if (delta_on != static_cast<bool>(active_delta[uu])) {
        changed = true;
        active_delta[uu] = delta_on;
        if (delta_on && !seen_delta[uu]) {
          seen_delta[uu] = 1;
          path.activations.push_back({static_cast<std::int32_t>(u),
                                      ActivationEvent::Block::kDelta, t_next, k + 1});
        }
      }
      const double zg = z[gamma0 + u];
      const double gscale = group_scale(std::abs(zg));
      const bool gamma_on = gscale > 0.0;
      if (!gamma_on) inactive_z_max = std::max(inactive_z_max, std::abs(zg));
      beta[gamma0 + u] = gamma_on ? config.kappa * gscale * zg : 0.0;
      if (gamma_on != static_cast<bool>(active_gamma[uu])) {
        changed = true;
        active_gamma[uu] = gamma_on;
        if (gamma_on && !seen_gamma[uu]) {
          seen_gamma[uu] = 1;
          path.activations.push_back({static_cast<std::int32_t>(u),
                                      ActivationEvent::Block::kGamma, t_next, k + 1});
        }
      }
      const bool is_any = active_delta[uu] || active_gamma[uu];
      if (is_any != was_any) active_annotators += is_any ? 1 : -1;
    }
    if (changed) last_change = k + 1;
    if (!explicit_stop) inactive_z_history.push_back(inactive_z_max);

    if ((k + 1) % cadence == 0) {
      path.points.push_back(snapshot(t_next, k + 1));
      if (config.max_checkpoints > 1 &&
          static_cast<Eigen::Index>(path.points.size()) > config.max_checkpoints) {
        // Keep every second stored point (t=0 stays), double the cadence.
        std::vector<PathPoint> kept;
        kept.reserve(path.points.size() / 2 + 1);
        for (std::size_t idx = 0; idx < path.points.size(); idx += 2)
          kept.push_back(std::move(path.points[idx]));
        path.points = std::move(kept);
        cadence *= 2;
      }
    }
  }

  path.iterations = k;
  path.stop_reason = stop_reason;
  if (path.points.back().iteration != k)
    path.points.push_back(snapshot(static_cast<double>(k) * alpha, k));
  return path;
}

ModelFit fit_from_point(const LbiPath& path, const PathPoint& point) {
  ModelFit fit;
  fit.t = point.t;
  fit.theta = point.theta;
  fit.delta = point.beta.head(path.layout.n_items * path.layout.n_annotators);
  fit.gamma = point.beta.tail(path.layout.n_annotators);
  return fit;
}

ModelFit interpolate(const LbiPath& path, double t) {
  if (path.points.empty()) throw TOutOfRange("interpolate: empty path");
  const double t_end = path.points.back().t;
  if (t < 0.0 || t > t_end)
    throw TOutOfRange("interpolate: t = " + std::to_string(t) + " outside [0, " +
                      std::to_string(t_end) + "]");

  const auto it = std::lower_bound(path.points.begin(), path.points.end(), t,
                                   [](const PathPoint& p, double value) { return p.t < value; });
  if (it != path.points.end() && it->t == t) return fit_from_point(path, *it);

  const PathPoint& hi = *it;
  const PathPoint& lo = *std::prev(it);
  const double w = (t - lo.t) / (hi.t - lo.t);

  ModelFit fit;
  fit.t = t;
  fit.theta = (1.0 - w) * lo.theta + w * hi.theta;
  if (lo.z.size() == 0 || hi.z.size() == 0)
    throw InvalidArgument("interpolate: path checkpoints do not carry z");
  const Eigen::VectorXd z = (1.0 - w) * lo.z + w * hi.z;
  const Eigen::VectorXd beta = shrinkage(z, path.config.kappa, path.layout);
  fit.delta = beta.head(path.layout.n_items * path.layout.n_annotators);
  fit.gamma = beta.tail(path.layout.n_annotators);
  return fit;
}

Eigen::VectorXd predict(const ModelFit& fit, const std::vector<Query>& queries) {
  const Eigen::Index n = fit.theta.size();
  const Eigen::Index n_annotators = fit.gamma.size();
  Eigen::VectorXd out(static_cast<Eigen::Index>(queries.size()));
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const Query& query = queries[q];
    if (query.left < 0 || query.left >= n || query.right < 0 || query.right >= n)
      throw IndexOutOfRange("predict: item index out of range");
    double value = fit.theta[query.left] - fit.theta[query.right];
    if (query.annotator >= 0 && query.annotator < n_annotators) {
      const Eigen::Index base = static_cast<Eigen::Index>(query.annotator) * n;
      value += fit.delta[base + query.left] - fit.delta[base + query.right] +
               fit.gamma[query.annotator];
    }
    out[static_cast<Eigen::Index>(q)] = value;
  }
  return out;
}

double loss(const ComparisonDataset& dataset, const ModelFit& fit) {
  if (fit.theta.size() != dataset.n_items() || fit.gamma.size() != dataset.n_annotators() ||
      fit.delta.size() != dataset.n_items() * dataset.n_annotators())
    throw DimensionMismatch("loss: fit dimensions do not match dataset");
  double acc = 0.0;
  for (Eigen::Index k = 0; k < dataset.n_records(); ++k) {
    const double r = dataset.responses()[k] - record_prediction(dataset, k, fit.theta, fit.delta, fit.gamma);
    acc += dataset.weights()[k] * r * r;
  }
  return acc / (2.0 * static_cast<double>(dataset.n_records()));
}

double prediction_mse(const ComparisonDataset& dataset, const ModelFit& fit) {
  if (fit.theta.size() != dataset.n_items() || fit.gamma.size() != dataset.n_annotators() ||
      fit.delta.size() != dataset.n_items() * dataset.n_annotators())
    throw DimensionMismatch("prediction_mse: fit dimensions do not match dataset");
  double acc = 0.0;
  for (Eigen::Index k = 0; k < dataset.n_records(); ++k) {
    const double r = dataset.responses()[k] - record_prediction(dataset, k, fit.theta, fit.delta, fit.gamma);
    acc += r * r;
  }
  return acc / static_cast<double>(dataset.n_records());
}

}  // namespace hodgemix
