#pragma once

#include <Eigen/Core>

#include "hodgemix/dataset.hpp"

namespace hodgemix {

// Design operators of the model y = d*theta + X*beta + noise, applied
// matrix-free in O(m). X = [D, A]: D maps delta blocks to per-record score
// differences of the record's annotator, A maps gamma to a per-record
// constant.

// (d theta)[k] = theta[left_k] - theta[right_k]
Eigen::VectorXd apply_d(const ComparisonDataset& dataset, const Eigen::VectorXd& theta);

// (d^T r)[i] = sum_{k: left_k = i} r_k - sum_{k: right_k = i} r_k
Eigen::VectorXd apply_d_adjoint(const ComparisonDataset& dataset, const Eigen::VectorXd& r);

// (X beta)[k] = delta^u[left_k] - delta^u[right_k] + gamma^u,  u = annotator_k
Eigen::VectorXd apply_X(const ComparisonDataset& dataset, const Eigen::VectorXd& beta);

// Adjoint of apply_X; the gamma slot of annotator u receives the sum of r
// over u's records.
Eigen::VectorXd apply_X_adjoint(const ComparisonDataset& dataset, const Eigen::VectorXd& r);

}  // namespace hodgemix
