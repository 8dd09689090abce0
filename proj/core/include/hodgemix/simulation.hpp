#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "hodgemix/dataset.hpp"

namespace hodgemix {

struct SimulationConfig {
  Eigen::Index n_items = 30;
  Eigen::Index n_annotators = 500;
  double p_gamma = 0.4;       // probability of a nonzero position bias
  double p_delta = 0.4;       // probability of a nonzero preference deviation
  double sigma_gamma = 0.2;   // nonzero gamma ~ N(0, sigma_gamma^2)
  double s_max = 0.3;         // nonzero delta entries ~ N(0, s^2), s ~ U(0, s_max)
  double sigma_noise = 0.3;
  Eigen::Index n_min = 100;   // per-annotator sample count ~ U[n_min, n_max]
  Eigen::Index n_max = 500;
  std::uint64_t rng_seed = 0;
};

// Common-profile variant used for quick experiments: fewer annotators with
// smaller per-annotator samples, same effect sizes.
SimulationConfig reduced_simulation_config(std::uint64_t seed);

struct GroundTruth {
  Eigen::VectorXd theta_star;            // n_items
  Eigen::MatrixXd delta_star;            // n_annotators x n_items (rows zero when masked off)
  Eigen::VectorXd gamma_star;            // n_annotators
  std::vector<std::uint8_t> delta_mask;  // 1 = annotator has a nonzero deviation
  std::vector<std::uint8_t> gamma_mask;
};

struct SimulationResult {
  ComparisonDataset dataset;
  GroundTruth truth;
};

// Draws the planted model and, per annotator, N^u uniformly random item pairs
// (with replacement, presentation side randomized), then emits the continuous
// response theta*_i - theta*_j + delta*^u_i - delta*^u_j + gamma*^u + noise.
// Each annotator consumes its own seeded substream, so the output is
// reproducible record-for-record; records are ordered by annotator, then draw.
SimulationResult simulate(const SimulationConfig& config);

}  // namespace hodgemix
