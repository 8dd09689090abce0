#include "hodgemix/dataset.hpp"

#include <cmath>
#include <numeric>

namespace hodgemix {

namespace {

// Union-find with path halving.
class DisjointSets {
public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  std::int32_t find(std::int32_t x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      parent_[static_cast<std::size_t>(x)] =
          parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
      x = parent_[static_cast<std::size_t>(x)];
    }
    return x;
  }

  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }

private:
  std::vector<std::int32_t> parent_;
};

// Renumbers union-find roots to consecutive ids ordered by smallest member.
std::int32_t compress_labels(DisjointSets& sets, std::vector<std::int32_t>& labels) {
  std::int32_t next = 0;
  std::vector<std::int32_t> remap(labels.size(), -1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::int32_t root = sets.find(static_cast<std::int32_t>(i));
    if (remap[static_cast<std::size_t>(root)] < 0) remap[static_cast<std::size_t>(root)] = next++;
    labels[i] = remap[static_cast<std::size_t>(root)];
  }
  return next;
}

}  // namespace

std::string ComparisonDataset::item_label(Eigen::Index i) const {
  if (!item_labels_.empty()) return item_labels_[static_cast<std::size_t>(i)];
  return std::to_string(i);
}

std::string ComparisonDataset::annotator_label(Eigen::Index u) const {
  if (!annotator_labels_.empty()) return annotator_labels_[static_cast<std::size_t>(u)];
  return std::to_string(u);
}

void ComparisonDataset::set_labels(std::vector<std::string> item_labels,
                                   std::vector<std::string> annotator_labels) {
  if (!item_labels.empty() && static_cast<Eigen::Index>(item_labels.size()) != n_items_)
    throw DimensionMismatch("item label table size does not match n_items");
  if (!annotator_labels.empty() &&
      static_cast<Eigen::Index>(annotator_labels.size()) != n_annotators_)
    throw DimensionMismatch("annotator label table size does not match n_annotators");
  item_labels_ = std::move(item_labels);
  annotator_labels_ = std::move(annotator_labels);
}

ComparisonDataset build_dataset(const std::vector<ComparisonRecord>& records,
                                Eigen::Index n_items, Eigen::Index n_annotators) {
  if (n_items <= 0) throw InvalidArgument("n_items must be positive");
  if (n_annotators <= 0) throw InvalidArgument("n_annotators must be positive");
  if (records.empty()) throw InvalidArgument("record list is empty");

  const std::size_t m = records.size();
  ComparisonDataset ds;
  ds.n_items_ = n_items;
  ds.n_annotators_ = n_annotators;
  ds.annotator_.resize(m);
  ds.left_.resize(m);
  ds.right_.resize(m);
  ds.y_.resize(static_cast<Eigen::Index>(m));
  ds.weight_.resize(static_cast<Eigen::Index>(m));
  ds.annotator_records_.assign(static_cast<std::size_t>(n_annotators), {});

  for (std::size_t k = 0; k < m; ++k) {
    const ComparisonRecord& rec = records[k];
    if (rec.annotator < 0 || rec.annotator >= n_annotators)
      throw IndexOutOfRange("record " + std::to_string(k) + ": annotator " +
                            std::to_string(rec.annotator) + " out of range");
    if (rec.left < 0 || rec.left >= n_items || rec.right < 0 || rec.right >= n_items)
      throw IndexOutOfRange("record " + std::to_string(k) + ": item index out of range");
    if (rec.left == rec.right)
      throw SelfComparison("record " + std::to_string(k) + ": item compared with itself");
    if (!std::isfinite(rec.y))
      throw NonFiniteResponse("record " + std::to_string(k) + ": response is not finite");
    if (!(rec.weight >= 0.0) || !std::isfinite(rec.weight))
      throw NegativeWeight("record " + std::to_string(k) + ": weight must be finite and >= 0");

    ds.annotator_[k] = rec.annotator;
    ds.left_[k] = rec.left;
    ds.right_[k] = rec.right;
    ds.y_[static_cast<Eigen::Index>(k)] = rec.y;
    ds.weight_[static_cast<Eigen::Index>(k)] = rec.weight;
    if (rec.weight != 1.0) ds.unit_weights_ = false;
    ds.annotator_records_[static_cast<std::size_t>(rec.annotator)].push_back(
        static_cast<std::int32_t>(k));
  }
  return ds;
}

ComparisonDataset subset_dataset(const ComparisonDataset& dataset,
                                 const std::vector<std::int32_t>& record_indices) {
  std::vector<ComparisonRecord> records;
  records.reserve(record_indices.size());
  for (std::int32_t k : record_indices) {
    if (k < 0 || k >= dataset.n_records())
      throw IndexOutOfRange("subset_dataset: record index out of range");
    records.push_back(dataset.record(k));
  }
  ComparisonDataset sub = build_dataset(records, dataset.n_items(), dataset.n_annotators());
  sub.set_labels(dataset.item_labels(), dataset.annotator_labels());
  return sub;
}

ComponentLabels connected_components(const ComparisonDataset& dataset) {
  const auto n = static_cast<std::size_t>(dataset.n_items());
  ComponentLabels out;

  DisjointSets global(n);
  for (Eigen::Index k = 0; k < dataset.n_records(); ++k)
    global.unite(dataset.lefts()[static_cast<std::size_t>(k)],
                 dataset.rights()[static_cast<std::size_t>(k)]);
  out.item_component.resize(n);
  out.n_components = compress_labels(global, out.item_component);

  const auto n_annotators = static_cast<std::size_t>(dataset.n_annotators());
  out.annotator_item_component.assign(n_annotators, {});
  out.annotator_component_count.assign(n_annotators, 0);
  for (std::size_t u = 0; u < n_annotators; ++u) {
    const auto& recs = dataset.annotator_records()[u];
    if (recs.empty()) continue;
    DisjointSets local(n);
    std::vector<bool> touched(n, false);
    for (std::int32_t k : recs) {
      const std::int32_t i = dataset.lefts()[static_cast<std::size_t>(k)];
      const std::int32_t j = dataset.rights()[static_cast<std::size_t>(k)];
      touched[static_cast<std::size_t>(i)] = true;
      touched[static_cast<std::size_t>(j)] = true;
      local.unite(i, j);
    }
    auto& labels = out.annotator_item_component[u];
    labels.assign(n, -1);
    std::int32_t next = 0;
    std::vector<std::int32_t> remap(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      if (!touched[i]) continue;
      const std::int32_t root = local.find(static_cast<std::int32_t>(i));
      if (remap[static_cast<std::size_t>(root)] < 0)
        remap[static_cast<std::size_t>(root)] = next++;
      labels[i] = remap[static_cast<std::size_t>(root)];
    }
    out.annotator_component_count[u] = next;
  }
  return out;
}

}  // namespace hodgemix
