#include "hodgemix/operators.hpp"

namespace hodgemix {

namespace {

void check_record_dim(const ComparisonDataset& dataset, const Eigen::VectorXd& r,
                      const char* who) {
  if (r.size() != dataset.n_records())
    throw DimensionMismatch(std::string(who) + ": expected record-space vector of length " +
                            std::to_string(dataset.n_records()) + ", got " +
                            std::to_string(r.size()));
}

}  // namespace

Eigen::VectorXd apply_d(const ComparisonDataset& dataset, const Eigen::VectorXd& theta) {
  if (theta.size() != dataset.n_items())
    throw DimensionMismatch("apply_d: theta length " + std::to_string(theta.size()) +
                            " != n_items " + std::to_string(dataset.n_items()));
  const auto m = static_cast<std::size_t>(dataset.n_records());
  const auto& left = dataset.lefts();
  const auto& right = dataset.rights();
  Eigen::VectorXd out(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k)
    out[static_cast<Eigen::Index>(k)] = theta[left[k]] - theta[right[k]];
  return out;
}

Eigen::VectorXd apply_d_adjoint(const ComparisonDataset& dataset, const Eigen::VectorXd& r) {
  check_record_dim(dataset, r, "apply_d_adjoint");
  const auto m = static_cast<std::size_t>(dataset.n_records());
  const auto& left = dataset.lefts();
  const auto& right = dataset.rights();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dataset.n_items());
  for (std::size_t k = 0; k < m; ++k) {
    const double v = r[static_cast<Eigen::Index>(k)];
    out[left[k]] += v;
    out[right[k]] -= v;
  }
  return out;
}

Eigen::VectorXd apply_X(const ComparisonDataset& dataset, const Eigen::VectorXd& beta) {
  const BetaLayout layout = dataset.beta_layout();
  if (beta.size() != layout.size())
    throw DimensionMismatch("apply_X: beta length " + std::to_string(beta.size()) +
                            " != layout size " + std::to_string(layout.size()));
  const auto m = static_cast<std::size_t>(dataset.n_records());
  const auto& left = dataset.lefts();
  const auto& right = dataset.rights();
  const auto& annot = dataset.annotators();
  const Eigen::Index n = layout.n_items;
  const Eigen::Index gamma0 = layout.gamma_offset(0);
  Eigen::VectorXd out(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    const Eigen::Index u = annot[k];
    const Eigen::Index base = u * n;
    out[static_cast<Eigen::Index>(k)] =
        beta[base + left[k]] - beta[base + right[k]] + beta[gamma0 + u];
  }
  return out;
}

Eigen::VectorXd apply_X_adjoint(const ComparisonDataset& dataset, const Eigen::VectorXd& r) {
  check_record_dim(dataset, r, "apply_X_adjoint");
  const BetaLayout layout = dataset.beta_layout();
  const auto m = static_cast<std::size_t>(dataset.n_records());
  const auto& left = dataset.lefts();
  const auto& right = dataset.rights();
  const auto& annot = dataset.annotators();
  const Eigen::Index n = layout.n_items;
  const Eigen::Index gamma0 = layout.gamma_offset(0);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(layout.size());
  for (std::size_t k = 0; k < m; ++k) {
    const double v = r[static_cast<Eigen::Index>(k)];
    const Eigen::Index u = annot[k];
    const Eigen::Index base = u * n;
    out[base + left[k]] += v;
    out[base + right[k]] -= v;
    out[gamma0 + u] += v;
  }
  return out;
}

}  // namespace hodgemix
