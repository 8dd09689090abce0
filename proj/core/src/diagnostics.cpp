#include "hodgemix/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hodgemix {

std::vector<JumpInfo> jump_orders(const LbiPath& path) {
  std::vector<JumpInfo> out(static_cast<std::size_t>(path.layout.n_annotators));

  auto ranked = [&](ActivationEvent::Block block) {
    std::vector<const ActivationEvent*> events;
    for (const ActivationEvent& e : path.activations)
      if (e.block == block) events.push_back(&e);
    std::stable_sort(events.begin(), events.end(),
                     [](const ActivationEvent* a, const ActivationEvent* b) {
                       if (a->t != b->t) return a->t < b->t;
                       return a->annotator < b->annotator;
                     });
    return events;
  };

  int rank = 1;
  for (const ActivationEvent* e : ranked(ActivationEvent::Block::kDelta)) {
    auto& info = out[static_cast<std::size_t>(e->annotator)];
    info.t_delta = e->t;
    info.rank_delta = rank++;
  }
  rank = 1;
  for (const ActivationEvent* e : ranked(ActivationEvent::Block::kGamma)) {
    auto& info = out[static_cast<std::size_t>(e->annotator)];
    info.t_gamma = e->t;
    info.rank_gamma = rank++;
  }
  return out;
}

std::vector<double> l2_distances(const ComparisonDataset& dataset, const LsSolveOptions& options) {
  const FullLsSolution solution = full_least_squares(dataset, options);
  const ComponentLabels components = connected_components(dataset);
  const BetaLayout layout = dataset.beta_layout();

  std::vector<double> distances(static_cast<std::size_t>(dataset.n_annotators()), 0.0);
  for (Eigen::Index u = 0; u < dataset.n_annotators(); ++u) {
    const auto uu = static_cast<std::size_t>(u);
    if (dataset.annotator_records()[uu].empty()) continue;
    // theta_hat^u - theta_hat = delta_hat^u on the annotator's support.
    Eigen::VectorXd diff = solution.beta.segment(layout.delta_offset(u), layout.n_items);
    center_by_component(diff, components.annotator_item_component[uu]);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < layout.n_items; ++i)
      if (components.annotator_item_component[uu][static_cast<std::size_t>(i)] >= 0)
        ss += diff[i] * diff[i];
    distances[uu] = std::sqrt(ss);
  }
  return distances;
}

std::vector<AnnotatorReport> position_bias_report(const ComparisonDataset& dataset,
                                                  const ModelFit& fit,
                                                  const std::vector<JumpInfo>& jumps,
                                                  const std::vector<double>* l2) {
  if (fit.gamma.size() != dataset.n_annotators() ||
      fit.delta.size() != dataset.n_items() * dataset.n_annotators())
    throw DimensionMismatch("position_bias_report: fit does not match dataset");
  if (static_cast<Eigen::Index>(jumps.size()) != dataset.n_annotators())
    throw DimensionMismatch("position_bias_report: jump table does not match dataset");

  std::vector<AnnotatorReport> reports;
  for (Eigen::Index u = 0; u < dataset.n_annotators(); ++u) {
    const auto uu = static_cast<std::size_t>(u);
    const auto& recs = dataset.annotator_records()[uu];
    if (recs.empty()) continue;

    AnnotatorReport report;
    report.annotator = static_cast<std::int32_t>(u);
    report.label = dataset.annotator_label(u);
    report.n_records = static_cast<Eigen::Index>(recs.size());
    for (std::int32_t k : recs) {
      const double y = dataset.responses()[k];
      if (y > 0.0)
        ++report.left_clicks;
      else if (y < 0.0)
        ++report.right_clicks;
    }
    report.jumps = jumps[uu];
    if (l2 != nullptr) report.l2_distance = (*l2)[uu];
    report.gamma = fit.gamma[u];
    report.delta_norm = fit.delta.segment(u * dataset.n_items(), dataset.n_items()).norm();
    reports.push_back(std::move(report));
  }

  std::sort(reports.begin(), reports.end(), [](const AnnotatorReport& a, const AnnotatorReport& b) {
    const bool a_active = a.jumps.t_gamma.has_value();
    const bool b_active = b.jumps.t_gamma.has_value();
    if (a_active != b_active) return a_active;
    if (a_active) {
      if (*a.jumps.t_gamma != *b.jumps.t_gamma) return *a.jumps.t_gamma < *b.jumps.t_gamma;
      return a.annotator < b.annotator;
    }
    if (std::abs(a.gamma) != std::abs(b.gamma)) return std::abs(a.gamma) > std::abs(b.gamma);
    return a.annotator < b.annotator;
  });
  return reports;
}

namespace {

// Ranks by score descending, ties by item index.
std::vector<std::int32_t> order_by_score(const Eigen::VectorXd& scores) {
  std::vector<std::int32_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return order;
}

}  // namespace

RankingReport ranking_report(const ModelFit& fit, const std::vector<std::int32_t>& annotators) {
  const Eigen::Index n = fit.theta.size();
  RankingReport report;
  report.common_order = order_by_score(fit.theta);
  report.annotators = annotators;
  report.rank_positions.resize(n, 1 + static_cast<Eigen::Index>(annotators.size()));

  for (Eigen::Index i = 0; i < n; ++i) report.rank_positions(i, 0) = static_cast<int>(i);

  for (std::size_t a = 0; a < annotators.size(); ++a) {
    const std::int32_t u = annotators[a];
    if (u < 0 || u >= fit.gamma.size())
      throw UnknownAnnotator("ranking_report: annotator " + std::to_string(u) + " out of range");
    const Eigen::VectorXd personalized =
        fit.theta + fit.delta.segment(static_cast<Eigen::Index>(u) * n, n);
    const std::vector<std::int32_t> order = order_by_score(personalized);
    std::vector<int> rank_of_item(static_cast<std::size_t>(n));
    for (std::size_t pos = 0; pos < order.size(); ++pos)
      rank_of_item[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos);
    for (Eigen::Index i = 0; i < n; ++i)
      report.rank_positions(i, 1 + static_cast<Eigen::Index>(a)) =
          rank_of_item[static_cast<std::size_t>(report.common_order[static_cast<std::size_t>(i)])];
  }
  return report;
}

double kendall_tau(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw DimensionMismatch("kendall_tau: size mismatch");
  const Eigen::Index n = a.size();
  Eigen::Index concordant = 0, discordant = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0 || db == 0.0) continue;
      if ((da > 0.0) == (db > 0.0))
        ++concordant;
      else
        ++discordant;
    }
  const Eigen::Index total = concordant + discordant;
  if (total == 0) return 0.0;
  return static_cast<double>(concordant - discordant) / static_cast<double>(total);
}

}  // namespace hodgemix
