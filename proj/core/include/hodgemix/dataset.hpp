#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "hodgemix/errors.hpp"

namespace hodgemix {

// One pairwise comparison. (left, right) is the presentation order: y > 0
// means the item shown on the left was preferred. Binary choices are coded
// +1 / -1 at ingestion; simulated responses are continuous.
struct ComparisonRecord {
  std::int32_t annotator = 0;
  std::int32_t left = 0;
  std::int32_t right = 0;
  double y = 0.0;
  double weight = 1.0;

  friend bool operator==(const ComparisonRecord&, const ComparisonRecord&) = default;
};

// Addressing of the random-effect vector beta = (delta, gamma):
// delta blocks of n_items per annotator first, then one gamma scalar per
// annotator.
struct BetaLayout {
  Eigen::Index n_items = 0;
  Eigen::Index n_annotators = 0;

  Eigen::Index size() const { return (n_items + 1) * n_annotators; }
  Eigen::Index delta_offset(Eigen::Index u) const { return u * n_items; }
  Eigen::Index gamma_offset(Eigen::Index u) const { return n_items * n_annotators + u; }

  friend bool operator==(const BetaLayout&, const BetaLayout&) = default;
};

// Immutable multigraph of comparison records with per-annotator indexing.
// Storage is columnar so the operator kernels can stream through records.
class ComparisonDataset {
public:
  ComparisonDataset() = default;

  Eigen::Index n_items() const { return n_items_; }
  Eigen::Index n_annotators() const { return n_annotators_; }
  Eigen::Index n_records() const { return static_cast<Eigen::Index>(left_.size()); }

  const std::vector<std::int32_t>& lefts() const { return left_; }
  const std::vector<std::int32_t>& rights() const { return right_; }
  const std::vector<std::int32_t>& annotators() const { return annotator_; }
  const Eigen::VectorXd& responses() const { return y_; }
  const Eigen::VectorXd& weights() const { return weight_; }
  bool unit_weights() const { return unit_weights_; }

  ComparisonRecord record(Eigen::Index k) const {
    return {annotator_[static_cast<std::size_t>(k)], left_[static_cast<std::size_t>(k)],
            right_[static_cast<std::size_t>(k)], y_[k], weight_[k]};
  }

  // Record indices of one annotator, in dataset order. These partition [0, m).
  const std::vector<std::vector<std::int32_t>>& annotator_records() const {
    return annotator_records_;
  }

  BetaLayout beta_layout() const { return {n_items_, n_annotators_}; }

  // External id tables; empty when the dataset was built programmatically,
  // in which case decimal indices act as labels.
  const std::vector<std::string>& item_labels() const { return item_labels_; }
  const std::vector<std::string>& annotator_labels() const { return annotator_labels_; }
  std::string item_label(Eigen::Index i) const;
  std::string annotator_label(Eigen::Index u) const;
  void set_labels(std::vector<std::string> item_labels, std::vector<std::string> annotator_labels);

private:
  friend ComparisonDataset build_dataset(const std::vector<ComparisonRecord>& records,
                                         Eigen::Index n_items, Eigen::Index n_annotators);

  Eigen::Index n_items_ = 0;
  Eigen::Index n_annotators_ = 0;
  std::vector<std::int32_t> annotator_;
  std::vector<std::int32_t> left_;
  std::vector<std::int32_t> right_;
  Eigen::VectorXd y_;
  Eigen::VectorXd weight_;
  bool unit_weights_ = true;
  std::vector<std::vector<std::int32_t>> annotator_records_;
  std::vector<std::string> item_labels_;
  std::vector<std::string> annotator_labels_;
};

// Validates all records and builds the index structures.
// Throws InvalidArgument, IndexOutOfRange, SelfComparison, NonFiniteResponse,
// NegativeWeight.
ComparisonDataset build_dataset(const std::vector<ComparisonRecord>& records,
                                Eigen::Index n_items, Eigen::Index n_annotators);

// Dataset restricted to the given record indices (order preserved); item and
// annotator index spaces are kept so parameter vectors stay comparable.
ComparisonDataset subset_dataset(const ComparisonDataset& dataset,
                                 const std::vector<std::int32_t>& record_indices);

// Connected components of the global item graph and of each annotator's
// private subgraph. Components are numbered in order of their smallest item.
struct ComponentLabels {
  std::vector<std::int32_t> item_component;  // size n_items
  std::int32_t n_components = 0;

  // Per annotator: local component id per item, -1 for items the annotator
  // never compared.
  std::vector<std::vector<std::int32_t>> annotator_item_component;
  std::vector<std::int32_t> annotator_component_count;
};

ComponentLabels connected_components(const ComparisonDataset& dataset);

}  // namespace hodgemix
