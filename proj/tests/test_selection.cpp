#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "hodgemix/model_selection.hpp"
#include "hodgemix/simulation.hpp"

using namespace hodgemix;

namespace {

ComparisonDataset single_annotator(Eigen::Index n_records, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ComparisonRecord> records;
  for (Eigen::Index k = 0; k < n_records; ++k) {
    const auto i = static_cast<std::int32_t>(rng.bounded(4));
    auto j = static_cast<std::int32_t>(rng.bounded(3));
    if (j >= i) ++j;
    records.push_back({0, i, j, rng.normal()});
  }
  return build_dataset(records, 4, 1);
}

}  // namespace

TEST_CASE("kfold splits one annotator's records evenly") {
  const ComparisonDataset ds = single_annotator(10, 1);
  const FoldAssignment folds = kfold_split(ds, 5, 3);
  std::vector<int> sizes(5, 0);
  for (std::int32_t f : folds.fold_of_record) ++sizes[static_cast<std::size_t>(f)];
  for (int s : sizes) CHECK(s == 2);
}

TEST_CASE("an annotator with fewer records than folds lands in that many folds") {
  std::vector<ComparisonRecord> records = {{0, 0, 1, 1.0}, {0, 1, 2, 1.0}, {0, 2, 3, 1.0}};
  for (int k = 0; k < 20; ++k) records.push_back({1, k % 4, (k + 1) % 4, -1.0});
  const ComparisonDataset ds = build_dataset(records, 4, 2);
  const FoldAssignment folds = kfold_split(ds, 5, 9);
  std::set<std::int32_t> touched;
  for (std::int32_t k : ds.annotator_records()[0])
    touched.insert(folds.fold_of_record[static_cast<std::size_t>(k)]);
  CHECK(touched.size() == 3);
}

TEST_CASE("kfold is deterministic in the seed") {
  Rng rng(2);
  const ComparisonDataset ds = testing::random_dataset(rng, 5, 4, 60);
  CHECK(kfold_split(ds, 4, 11).fold_of_record == kfold_split(ds, 4, 11).fold_of_record);
  CHECK(kfold_split(ds, 4, 11).fold_of_record != kfold_split(ds, 4, 12).fold_of_record);
}

TEST_CASE("kfold rejects empty folds and annotators without records") {
  const ComparisonDataset tiny = single_annotator(3, 4);
  CHECK_THROWS_AS(kfold_split(tiny, 5, 1), TooFewRecords);  // 3 records over 5 folds
  const ComparisonDataset missing = build_dataset({{0, 0, 1, 1.0}, {0, 1, 2, 1.0}}, 3, 2);
  CHECK_THROWS_AS(kfold_split(missing, 2, 1), TooFewRecords);
  CHECK_THROWS_AS(kfold_split(tiny, 1, 1), InvalidArgument);
}

TEST_CASE("noise-free consistent data has a flat zero CV curve and t_cv = 0") {
  // Two passes over a consistent triangle; any fold complement still covers
  // the item graph.
  const Eigen::Vector3d theta(1.0, 0.4, -1.4);
  std::vector<ComparisonRecord> records;
  for (int pass = 0; pass < 2; ++pass)
    for (int e = 0; e < 3; ++e) {
      const int i = e, j = (e + 1) % 3;
      records.push_back({0, i, j, theta[i] - theta[j]});
    }
  const ComparisonDataset ds = build_dataset(records, 3, 1);

  CvOptions options;
  options.n_folds = 3;
  options.grid_size = 10;
  options.seed = 5;
  const CvResult result = cross_validate(ds, {}, options);
  CHECK(result.t_cv == 0.0);
  CHECK(result.mean_error.lpNorm<Eigen::Infinity>() <= 1e-16);
}

TEST_CASE("K = m reproduces brute-force leave-one-out") {
  const ComparisonDataset ds = single_annotator(8, 7);
  LbiConfig config;
  config.max_iterations = 120;

  CvOptions options;
  options.n_folds = 8;
  options.seed = 31;
  options.t_grid = {0.0, 0.05, 0.1, 0.2};  // well inside every fold path
  const CvResult result = cross_validate(ds, config, options);
  REQUIRE(!result.grid_clipped);

  // Oracle: fit on every size-7 subset directly.
  const std::vector<double> grid = {0.0, 0.05, 0.1, 0.2};
  Eigen::VectorXd oracle = Eigen::VectorXd::Zero(4);
  for (Eigen::Index held = 0; held < 8; ++held) {
    std::vector<std::int32_t> train;
    for (std::int32_t k = 0; k < 8; ++k)
      if (k != held) train.push_back(k);
    const LbiPath path = lbi_fit(subset_dataset(ds, train), config);
    for (std::size_t g = 0; g < 4; ++g) {
      const ModelFit fit = interpolate(path, grid[g]);
      const Eigen::VectorXd yhat =
          predict(fit, {{0, ds.lefts()[static_cast<std::size_t>(held)],
                         ds.rights()[static_cast<std::size_t>(held)]}});
      const double r = ds.responses()[held] - yhat[0];
      oracle[static_cast<Eigen::Index>(g)] += r * r / 8.0;
    }
  }
  REQUIRE(result.t_grid.size() == 4);
  CHECK((result.mean_error - oracle).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("cross-validation is deterministic and thread-count independent") {
  SimulationConfig sim;
  sim.n_items = 6;
  sim.n_annotators = 10;
  sim.n_min = 15;
  sim.n_max = 30;
  sim.rng_seed = 13;
  const ComparisonDataset ds = simulate(sim).dataset;
  LbiConfig config;
  config.max_iterations = 200;

  CvOptions one;
  one.seed = 3;
  one.n_threads = 1;
  CvOptions four = one;
  four.n_threads = 4;
  const CvResult a = cross_validate(ds, config, one);
  const CvResult b = cross_validate(ds, config, four);
  CHECK(a.t_cv == b.t_cv);
  CHECK(a.mean_error == b.mean_error);
  CHECK(a.fold_errors == b.fold_errors);
}

TEST_CASE("holdout split is stratified and keeps every annotator in training") {
  Rng rng(6);
  const ComparisonDataset ds = testing::random_dataset(rng, 6, 12, 200);
  const HoldoutSplit split = holdout_split(ds, 0.7, 99);
  CHECK(split.train.size() + split.test.size() == static_cast<std::size_t>(ds.n_records()));

  std::vector<int> train_count(12, 0), total(12, 0);
  for (std::int32_t k : split.train) ++train_count[static_cast<std::size_t>(ds.annotators()[static_cast<std::size_t>(k)])];
  for (Eigen::Index u = 0; u < 12; ++u)
    total[static_cast<std::size_t>(u)] =
        static_cast<int>(ds.annotator_records()[static_cast<std::size_t>(u)].size());
  for (Eigen::Index u = 0; u < 12; ++u) {
    CHECK(train_count[static_cast<std::size_t>(u)] >= 1);
    const double ratio = static_cast<double>(train_count[static_cast<std::size_t>(u)]) /
                         static_cast<double>(total[static_cast<std::size_t>(u)]);
    CHECK(ratio == doctest::Approx(0.7).epsilon(0.3));
  }
  CHECK_THROWS_AS(holdout_split(ds, 1.2, 1), InvalidArgument);
}

TEST_CASE("summarize computes ordered statistics") {
  const MethodStats stats = summarize({0.2, 0.1, 0.4, 0.3});
  CHECK(stats.min == 0.1);
  CHECK(stats.max == 0.4);
  CHECK(stats.mean == doctest::Approx(0.25));
  CHECK(stats.stddev == doctest::Approx(std::sqrt(0.05 / 3.0)));
  CHECK(stats.min <= stats.mean);
  CHECK(stats.mean <= stats.max);
}

TEST_CASE("holdout_eval without random effects shows no real gap") {
  SimulationConfig sim;
  sim.n_items = 8;
  sim.n_annotators = 20;
  sim.p_gamma = 0.0;
  sim.p_delta = 0.0;
  sim.n_min = 30;
  sim.n_max = 60;
  sim.rng_seed = 17;
  const ComparisonDataset ds = simulate(sim).dataset;

  EvalOptions options;
  options.repeats = 6;
  options.cv_folds = 4;
  options.grid_size = 25;
  options.seed = 23;
  options.n_threads = 2;
  const EvalTable table = holdout_eval(ds, {}, options);

  CHECK(table.ranking.min <= table.ranking.mean);
  CHECK(table.ranking.mean <= table.ranking.max);
  CHECK(table.mixed.stddev >= 0.0);
  // Neither model has an edge when no annotator effects were planted.
  const double spread = 2.0 * std::max(table.ranking.stddev, table.mixed.stddev);
  CHECK(std::abs(table.ranking.mean - table.mixed.mean) <= std::max(spread, 1e-3));
}
