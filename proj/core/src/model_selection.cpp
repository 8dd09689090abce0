#include "hodgemix/model_selection.hpp"

#include <algorithm>
#include <cmath>

#include "hodgemix/rng.hpp"
#include "hodgemix/threads.hpp"

namespace hodgemix {

namespace {

// MSE of a fit on the given records of the parent dataset.
double mse_on_records(const ComparisonDataset& dataset, const std::vector<std::int32_t>& records,
                      const ModelFit& fit) {
  if (records.empty()) return 0.0;
  std::vector<Query> queries;
  queries.reserve(records.size());
  for (std::int32_t k : records)
    queries.push_back({dataset.annotators()[static_cast<std::size_t>(k)],
                       dataset.lefts()[static_cast<std::size_t>(k)],
                       dataset.rights()[static_cast<std::size_t>(k)]});
  const Eigen::VectorXd yhat = predict(fit, queries);
  double acc = 0.0;
  for (std::size_t q = 0; q < records.size(); ++q) {
    const double r = dataset.responses()[records[q]] - yhat[static_cast<Eigen::Index>(q)];
    acc += r * r;
  }
  return acc / static_cast<double>(records.size());
}

ModelFit ranking_only_fit(const ComparisonDataset& train, const LsSolveOptions& options) {
  ModelFit fit;
  fit.t = 0.0;
  fit.theta = hodgerank(train, options);
  fit.delta = Eigen::VectorXd::Zero(train.n_items() * train.n_annotators());
  fit.gamma = Eigen::VectorXd::Zero(train.n_annotators());
  return fit;
}

std::vector<double> linear_grid(double t_end, int grid_size) {
  if (grid_size < 2) grid_size = 2;
  std::vector<double> grid(static_cast<std::size_t>(grid_size));
  // Division first so the last point is exactly t_end.
  for (int g = 0; g < grid_size; ++g)
    grid[static_cast<std::size_t>(g)] =
        t_end * (static_cast<double>(g) / static_cast<double>(grid_size - 1));
  return grid;
}

}  // namespace

FoldAssignment kfold_split(const ComparisonDataset& dataset, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw InvalidArgument("kfold_split: need at least 2 folds");
  FoldAssignment assignment;
  assignment.n_folds = n_folds;
  assignment.seed = seed;
  assignment.fold_of_record.assign(static_cast<std::size_t>(dataset.n_records()), -1);

  for (Eigen::Index u = 0; u < dataset.n_annotators(); ++u) {
    const auto& recs = dataset.annotator_records()[static_cast<std::size_t>(u)];
    if (recs.empty())
      throw TooFewRecords("kfold_split: annotator " + dataset.annotator_label(u) +
                          " has no records");
    std::vector<std::int32_t> order = recs;
    Rng rng(seed, static_cast<std::uint64_t>(u) + 1);
    rng.shuffle(order);
    const int start = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n_folds)));
    for (std::size_t idx = 0; idx < order.size(); ++idx)
      assignment.fold_of_record[static_cast<std::size_t>(order[idx])] =
          static_cast<std::int32_t>((start + static_cast<int>(idx)) % n_folds);
  }

  std::vector<Eigen::Index> counts(static_cast<std::size_t>(n_folds), 0);
  for (std::int32_t f : assignment.fold_of_record) ++counts[static_cast<std::size_t>(f)];
  for (int f = 0; f < n_folds; ++f)
    if (counts[static_cast<std::size_t>(f)] == 0)
      throw TooFewRecords("kfold_split: fold " + std::to_string(f) + " is empty");
  return assignment;
}

CvResult cross_validate(const ComparisonDataset& dataset, const LbiConfig& lbi_config,
                        const CvOptions& options) {
  const FoldAssignment folds = kfold_split(dataset, options.n_folds, options.seed);
  const int n_folds = options.n_folds;

  struct FoldData {
    std::vector<std::int32_t> held_out;
    LbiPath path;
  };
  std::vector<FoldData> fold_data(static_cast<std::size_t>(n_folds));
  for (Eigen::Index k = 0; k < dataset.n_records(); ++k)
    fold_data[static_cast<std::size_t>(folds.fold_of_record[static_cast<std::size_t>(k)])]
        .held_out.push_back(static_cast<std::int32_t>(k));

  parallel_tasks(static_cast<std::size_t>(n_folds), options.n_threads, [&](std::size_t f) {
    std::vector<std::int32_t> train;
    train.reserve(static_cast<std::size_t>(dataset.n_records()));
    for (Eigen::Index k = 0; k < dataset.n_records(); ++k)
      if (folds.fold_of_record[static_cast<std::size_t>(k)] != static_cast<std::int32_t>(f))
        train.push_back(static_cast<std::int32_t>(k));
    fold_data[f].path = lbi_fit(subset_dataset(dataset, train), lbi_config);
  });

  CvResult result;
  result.path_t_end = fold_data[0].path.t_end();
  for (const auto& fd : fold_data) result.path_t_end = std::min(result.path_t_end, fd.path.t_end());

  if (options.t_grid.empty()) {
    result.t_grid = linear_grid(result.path_t_end, options.grid_size);
  } else {
    result.t_grid = options.t_grid;
    std::sort(result.t_grid.begin(), result.t_grid.end());
    if (result.t_grid.front() > 0.0) result.t_grid.insert(result.t_grid.begin(), 0.0);
    for (double& t : result.t_grid)
      if (t > result.path_t_end) {
        t = result.path_t_end;
        result.grid_clipped = true;
      }
    result.t_grid.erase(std::unique(result.t_grid.begin(), result.t_grid.end()),
                        result.t_grid.end());
  }

  const auto n_grid = static_cast<Eigen::Index>(result.t_grid.size());
  result.fold_errors.resize(n_folds, n_grid);
  parallel_tasks(static_cast<std::size_t>(n_folds), options.n_threads, [&](std::size_t f) {
    for (Eigen::Index g = 0; g < n_grid; ++g) {
      const ModelFit fit = interpolate(fold_data[f].path, result.t_grid[static_cast<std::size_t>(g)]);
      result.fold_errors(static_cast<Eigen::Index>(f), g) =
          mse_on_records(dataset, fold_data[f].held_out, fit);
    }
  });

  result.mean_error = result.fold_errors.colwise().mean();
  Eigen::Index best = 0;
  for (Eigen::Index g = 1; g < n_grid; ++g)
    if (result.mean_error[g] < result.mean_error[best]) best = g;
  // Ties go to the smallest t; differences at roundoff level count as ties.
  // The natural scale of these mean squared errors is the second moment of y.
  const double error_scale =
      dataset.responses().squaredNorm() / static_cast<double>(dataset.n_records());
  const double tie_band = result.mean_error[best] + 1e-12 * error_scale;
  for (Eigen::Index g = 0; g < n_grid; ++g)
    if (result.mean_error[g] <= tie_band) {
      best = g;
      break;
    }
  result.t_cv = result.t_grid[static_cast<std::size_t>(best)];
  return result;
}

MethodStats summarize(const std::vector<double>& values) {
  MethodStats stats;
  if (values.empty()) return stats;
  stats.min = *std::min_element(values.begin(), values.end());
  stats.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  stats.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
    stats.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return stats;
}

HoldoutSplit holdout_split(const ComparisonDataset& dataset, double split_ratio,
                           std::uint64_t seed) {
  if (!(split_ratio > 0.0 && split_ratio < 1.0))
    throw InvalidArgument("holdout_split: split ratio must lie in (0, 1)");
  HoldoutSplit split;
  for (Eigen::Index u = 0; u < dataset.n_annotators(); ++u) {
    const auto& recs = dataset.annotator_records()[static_cast<std::size_t>(u)];
    if (recs.empty()) continue;
    std::vector<std::int32_t> order = recs;
    Rng rng(seed, static_cast<std::uint64_t>(u) + 1);
    rng.shuffle(order);
    // Every annotator keeps at least one training record, otherwise its
    // random effects are unlearnable.
    const auto n_train = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(split_ratio * static_cast<double>(order.size()))),
        1, order.size());
    for (std::size_t idx = 0; idx < order.size(); ++idx)
      (idx < n_train ? split.train : split.test).push_back(order[idx]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

EvalTable holdout_eval(const ComparisonDataset& dataset, const LbiConfig& lbi_config,
                       const EvalOptions& options) {
  if (options.repeats < 1) throw InvalidArgument("holdout_eval: repeats must be >= 1");

  EvalTable table;
  table.split_ratio = options.split_ratio;
  table.seed = options.seed;
  table.repeats.resize(static_cast<std::size_t>(options.repeats));

  parallel_tasks(static_cast<std::size_t>(options.repeats), options.n_threads, [&](std::size_t r) {
    const std::uint64_t repeat_seed = splitmix64(options.seed ^ (0xeba1ull + r));
    const HoldoutSplit split = holdout_split(dataset, options.split_ratio, repeat_seed);
    const ComparisonDataset train = subset_dataset(dataset, split.train);

    RepeatResult row;
    row.repeat = static_cast<int>(r);
    row.seed = repeat_seed;

    row.ranking_error =
        mse_on_records(dataset, split.test, ranking_only_fit(train, lbi_config.theta_solve));

    CvOptions cv;
    cv.n_folds = options.cv_folds;
    cv.grid_size = options.grid_size;
    cv.seed = repeat_seed;
    cv.n_threads = 1;  // repeats already run in parallel
    const CvResult cv_result = cross_validate(train, lbi_config, cv);
    row.t_cv = cv_result.t_cv;

    const LbiPath path = lbi_fit(train, lbi_config);
    const double t_fit = std::min(row.t_cv, path.t_end());
    row.mixed_error = mse_on_records(dataset, split.test, interpolate(path, t_fit));

    table.repeats[r] = row;
  });

  std::vector<double> ranking_errors, mixed_errors;
  for (const RepeatResult& row : table.repeats) {
    ranking_errors.push_back(row.ranking_error);
    mixed_errors.push_back(row.mixed_error);
  }
  table.ranking = summarize(ranking_errors);
  table.mixed = summarize(mixed_errors);
  return table;
}

}  // namespace hodgemix
