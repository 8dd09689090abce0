#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hodgemix/dataset.hpp"
#include "hodgemix/rng.hpp"

namespace hodgemix::testing {

inline ComparisonDataset chain3() {
  // Two consistent comparisons 0 > 1 > 2 by one annotator.
  return build_dataset({{0, 0, 1, 1.0}, {0, 1, 2, 1.0}}, 3, 1);
}

// Dense realizations of the design operators, used as oracles only.
inline Eigen::MatrixXd dense_d(const ComparisonDataset& ds) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(ds.n_records(), ds.n_items());
  for (Eigen::Index k = 0; k < ds.n_records(); ++k) {
    d(k, ds.lefts()[static_cast<std::size_t>(k)]) = 1.0;
    d(k, ds.rights()[static_cast<std::size_t>(k)]) = -1.0;
  }
  return d;
}

inline Eigen::MatrixXd dense_X(const ComparisonDataset& ds) {
  const BetaLayout layout = ds.beta_layout();
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(ds.n_records(), layout.size());
  for (Eigen::Index k = 0; k < ds.n_records(); ++k) {
    const auto u = ds.annotators()[static_cast<std::size_t>(k)];
    X(k, layout.delta_offset(u) + ds.lefts()[static_cast<std::size_t>(k)]) = 1.0;
    X(k, layout.delta_offset(u) + ds.rights()[static_cast<std::size_t>(k)]) = -1.0;
    X(k, layout.gamma_offset(u)) = 1.0;
  }
  return X;
}

// Random multigraph dataset; responses ~ N(0,1), optionally random weights.
inline ComparisonDataset random_dataset(Rng& rng, Eigen::Index n_items, Eigen::Index n_annotators,
                                        Eigen::Index n_records, bool random_weights = false) {
  std::vector<ComparisonRecord> records;
  records.reserve(static_cast<std::size_t>(n_records));
  for (Eigen::Index k = 0; k < n_records; ++k) {
    ComparisonRecord rec;
    rec.annotator = static_cast<std::int32_t>(
        rng.bounded(static_cast<std::uint64_t>(n_annotators)));
    rec.left = static_cast<std::int32_t>(rng.bounded(static_cast<std::uint64_t>(n_items)));
    rec.right = static_cast<std::int32_t>(rng.bounded(static_cast<std::uint64_t>(n_items - 1)));
    if (rec.right >= rec.left) ++rec.right;
    rec.y = rng.normal();
    rec.weight = random_weights ? 0.25 + rng.uniform01() : 1.0;
    records.push_back(rec);
  }
  // Every annotator needs at least one record for the stratified splitters.
  for (Eigen::Index u = 0; u < n_annotators; ++u)
    records.push_back({static_cast<std::int32_t>(u), 0, 1, rng.normal(),
                       random_weights ? 0.25 + rng.uniform01() : 1.0});
  return build_dataset(records, n_items, n_annotators);
}

inline Eigen::VectorXd random_vector(Rng& rng, Eigen::Index size) {
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = rng.normal();
  return v;
}

// Minimum-norm least-squares solution via SVD of the dense stacked system
// (the weighted rows are scaled by sqrt(w)).
inline Eigen::VectorXd dense_min_norm_ls(const Eigen::MatrixXd& A, Eigen::VectorXd b,
                                         const Eigen::VectorXd& weights) {
  Eigen::MatrixXd Aw = A;
  for (Eigen::Index k = 0; k < A.rows(); ++k) {
    const double s = std::sqrt(weights[k]);
    Aw.row(k) *= s;
    b[k] *= s;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Aw, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  return svd.solve(b);
}

}  // namespace hodgemix::testing
