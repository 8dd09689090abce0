#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "hodgemix/dataset.hpp"
#include "hodgemix/lbi.hpp"

namespace hodgemix {

struct FoldAssignment {
  std::vector<std::int32_t> fold_of_record;  // size m
  int n_folds = 0;
  std::uint64_t seed = 0;
};

// Annotator-stratified K-fold partition: each annotator's records are
// shuffled and dealt round-robin starting at a random fold, so its records
// are spread as evenly as counts allow. Deterministic given seed.
// Throws TooFewRecords when an annotator has no records or a fold ends empty.
FoldAssignment kfold_split(const ComparisonDataset& dataset, int n_folds, std::uint64_t seed);

struct CvOptions {
  int n_folds = 5;
  // Explicit evaluation grid; empty = grid_size points linear on
  // [0, shortest fold path end]. 0 is always included.
  std::vector<double> t_grid;
  int grid_size = 50;
  std::uint64_t seed = 0;
  int n_threads = 1;  // 0 = thread_limit()
};

struct CvResult {
  std::vector<double> t_grid;
  Eigen::VectorXd mean_error;   // per grid point, averaged over folds
  Eigen::MatrixXd fold_errors;  // n_folds x grid size
  double t_cv = 0.0;            // grid argmin, ties resolved toward smaller t
  bool grid_clipped = false;    // true when a requested grid point exceeded a fold path
  double path_t_end = 0.0;      // shortest fold path end
};

// K-fold cross-validation along the path: fit on each fold complement,
// interpolate at every grid time, score the held-out fold by mean squared
// prediction error, and pick the grid time with minimal average error.
CvResult cross_validate(const ComparisonDataset& dataset, const LbiConfig& lbi_config,
                        const CvOptions& options = {});

struct MethodStats {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  double stddev = 0.0;  // sample standard deviation
};

MethodStats summarize(const std::vector<double>& values);

struct RepeatResult {
  int repeat = 0;
  std::uint64_t seed = 0;
  double ranking_error = 0.0;  // common-ranking-only model
  double mixed_error = 0.0;    // mixed-effects model at t_cv
  double t_cv = 0.0;
};

struct EvalTable {
  MethodStats ranking;
  MethodStats mixed;
  std::vector<RepeatResult> repeats;
  double split_ratio = 0.0;
  std::uint64_t seed = 0;
};

struct EvalOptions {
  double split_ratio = 0.7;
  int repeats = 20;
  int cv_folds = 5;
  int grid_size = 50;
  std::uint64_t seed = 0;
  int n_threads = 1;  // 0 = thread_limit(); repeats run in parallel
};

// Repeated holdout comparison of the ranking-only fit against the
// mixed-effects fit at the cross-validated stopping time (CV runs inside the
// training split only). Splits are annotator-stratified so every annotator
// keeps at least one training record.
EvalTable holdout_eval(const ComparisonDataset& dataset, const LbiConfig& lbi_config,
                       const EvalOptions& options = {});

// Train/test record split used by holdout_eval, exposed for diagnostics.
struct HoldoutSplit {
  std::vector<std::int32_t> train;
  std::vector<std::int32_t> test;
};
HoldoutSplit holdout_split(const ComparisonDataset& dataset, double split_ratio,
                           std::uint64_t seed);

}  // namespace hodgemix
