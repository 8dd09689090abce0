#include "hodgemix/simulation.hpp"

#include "hodgemix/rng.hpp"

namespace hodgemix {

namespace {

void validate(const SimulationConfig& c) {
  if (c.n_items < 2) throw InvalidArgument("simulate: need at least 2 items");
  if (c.n_annotators < 1) throw InvalidArgument("simulate: need at least 1 annotator");
  if (c.p_gamma < 0.0 || c.p_gamma > 1.0 || c.p_delta < 0.0 || c.p_delta > 1.0)
    throw InvalidArgument("simulate: probabilities must lie in [0, 1]");
  if (c.sigma_gamma < 0.0 || c.s_max < 0.0 || c.sigma_noise < 0.0)
    throw InvalidArgument("simulate: scales must be nonnegative");
  if (c.n_min < 1 || c.n_min > c.n_max)
    throw InvalidArgument("simulate: need 1 <= n_min <= n_max");
}

}  // namespace

SimulationConfig reduced_simulation_config(std::uint64_t seed) {
  SimulationConfig config;
  config.n_annotators = 100;
  config.n_min = 50;
  config.n_max = 150;
  config.rng_seed = seed;
  return config;
}

SimulationResult simulate(const SimulationConfig& config) {
  validate(config);
  const Eigen::Index n = config.n_items;
  const Eigen::Index n_annotators = config.n_annotators;

  GroundTruth truth;
  truth.theta_star.resize(n);
  truth.delta_star = Eigen::MatrixXd::Zero(n_annotators, n);
  truth.gamma_star = Eigen::VectorXd::Zero(n_annotators);
  truth.delta_mask.assign(static_cast<std::size_t>(n_annotators), 0);
  truth.gamma_mask.assign(static_cast<std::size_t>(n_annotators), 0);

  // Stream 0: common scores. Stream 1+u: everything specific to annotator u,
  // drawn in a fixed order (gamma support/value, delta support/scale/values,
  // sample count, then per-record pair/side/noise).
  Rng global(config.rng_seed, 0);
  for (Eigen::Index i = 0; i < n; ++i) truth.theta_star[i] = global.normal();

  std::vector<ComparisonRecord> records;
  for (Eigen::Index u = 0; u < n_annotators; ++u) {
    Rng rng(config.rng_seed, static_cast<std::uint64_t>(u) + 1);

    if (rng.bernoulli(config.p_gamma)) {
      truth.gamma_mask[static_cast<std::size_t>(u)] = 1;
      truth.gamma_star[u] = rng.normal(0.0, config.sigma_gamma);
    }
    if (rng.bernoulli(config.p_delta)) {
      truth.delta_mask[static_cast<std::size_t>(u)] = 1;
      const double s = rng.uniform(0.0, config.s_max);
      for (Eigen::Index i = 0; i < n; ++i) truth.delta_star(u, i) = rng.normal(0.0, s);
    }

    const auto n_u = static_cast<Eigen::Index>(rng.uniform_int(config.n_min, config.n_max));
    for (Eigen::Index draw = 0; draw < n_u; ++draw) {
      // Unordered pair uniform with replacement, then a random side.
      auto a = static_cast<Eigen::Index>(rng.bounded(static_cast<std::uint64_t>(n)));
      auto b = static_cast<Eigen::Index>(rng.bounded(static_cast<std::uint64_t>(n - 1)));
      if (b >= a) ++b;
      if (rng.bernoulli(0.5)) std::swap(a, b);

      const double signal = truth.theta_star[a] - truth.theta_star[b] + truth.delta_star(u, a) -
                            truth.delta_star(u, b) + truth.gamma_star[u];
      const double y = signal + rng.normal(0.0, config.sigma_noise);
      records.push_back({static_cast<std::int32_t>(u), static_cast<std::int32_t>(a),
                         static_cast<std::int32_t>(b), y, 1.0});
    }
  }

  SimulationResult result;
  result.dataset = build_dataset(records, n, n_annotators);
  result.truth = std::move(truth);
  return result;
}

}  // namespace hodgemix
