#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "hodgemix/dataset.hpp"
#include "hodgemix/lbi.hpp"
#include "hodgemix/solvers.hpp"

namespace hodgemix {

// First path time at which an annotator's block became nonzero, with the
// ordinal position of that event (1 = earliest; ties broken by annotator
// index). Annotators whose block never activated have no entry.
struct JumpInfo {
  std::optional<double> t_delta;
  std::optional<int> rank_delta;
  std::optional<double> t_gamma;
  std::optional<int> rank_gamma;
};

std::vector<JumpInfo> jump_orders(const LbiPath& path);

// ||theta_hat^u - theta_hat||_2 per annotator, where theta_hat^u =
// theta_hat + delta_hat^u comes from the joint full least squares. Distances
// run over the items the annotator compared, mean-centered per private
// component, so they are invariant to per-annotator score shifts.
std::vector<double> l2_distances(const ComparisonDataset& dataset,
                                 const LsSolveOptions& options = {});

struct AnnotatorReport {
  std::int32_t annotator = 0;
  std::string label;
  Eigen::Index n_records = 0;
  Eigen::Index left_clicks = 0;   // records with y > 0
  Eigen::Index right_clicks = 0;  // records with y < 0
  JumpInfo jumps;
  std::optional<double> l2_distance;
  double gamma = 0.0;       // at the reporting time
  double delta_norm = 0.0;  // at the reporting time
};

// Reports ordered for the position-bias audit: annotators with an activated
// gamma first (by activation time), the rest by |gamma| descending, then
// index. Annotators with no records are omitted.
std::vector<AnnotatorReport> position_bias_report(
    const ComparisonDataset& dataset, const ModelFit& fit, const std::vector<JumpInfo>& jumps,
    const std::vector<double>* l2 = nullptr);

struct RankingReport {
  std::vector<std::int32_t> common_order;  // items by theta descending
  std::vector<std::int32_t> annotators;    // selected annotators
  // rank_positions(i, 0) = common rank of the item at common_order[i] (= i);
  // rank_positions(i, 1 + a) = its rank under annotator annotators[a].
  Eigen::MatrixXi rank_positions;
};

// Common versus personalized (theta + delta^u) orderings; each personalized
// column is a permutation of ranks. Throws UnknownAnnotator.
RankingReport ranking_report(const ModelFit& fit, const std::vector<std::int32_t>& annotators);

// Kendall rank correlation between two score vectors (pairs tied on either
// side are skipped). Reporting extension, not part of the core model.
double kendall_tau(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace hodgemix
