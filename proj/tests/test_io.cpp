#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "hodgemix/io.hpp"
#include "hodgemix/simulation.hpp"

using namespace hodgemix;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("hodgemix_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write_file(const TempDir& dir, const std::string& name, const std::string& body) {
  const std::string full = dir.file(name);
  std::ofstream out(full);
  out << body;
  return full;
}

bool labeled_equal(const ComparisonDataset& a, const ComparisonDataset& b) {
  if (a.n_records() != b.n_records() || a.n_items() != b.n_items() ||
      a.n_annotators() != b.n_annotators())
    return false;
  for (Eigen::Index k = 0; k < a.n_records(); ++k) {
    const ComparisonRecord ra = a.record(k), rb = b.record(k);
    if (a.annotator_label(ra.annotator) != b.annotator_label(rb.annotator)) return false;
    if (a.item_label(ra.left) != b.item_label(rb.left)) return false;
    if (a.item_label(ra.right) != b.item_label(rb.right)) return false;
    if (ra.y != rb.y || ra.weight != rb.weight) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  for (double v : {1.0 / 3.0, 0.1, -1.2345678901234567e-12, 150494.0, 2e300}) {
    CHECK(std::strtod(io::format_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("csv parsing: coding rules and label interning") {
  TempDir dir;
  const std::string file = write_file(dir, "ok.csv",
                                      "# a comment\n"
                                      "annotator_id,left_item,right_item,choice\n"
                                      "u1,a,b,left\n"
                                      "u1,b,c,right\n"
                                      "# mid comment\n"
                                      "u2,a,c,0.7\n");
  const ComparisonDataset ds = io::read_comparisons_csv(file);
  CHECK(ds.n_records() == 3);
  CHECK(ds.n_items() == 3);
  CHECK(ds.n_annotators() == 2);
  CHECK(ds.record(0) == ComparisonRecord{0, 0, 1, 1.0, 1.0});
  CHECK(ds.record(1) == ComparisonRecord{0, 1, 2, -1.0, 1.0});
  CHECK(ds.record(2) == ComparisonRecord{1, 0, 2, 0.7, 1.0});
  CHECK(ds.annotator_label(1) == "u2");
  CHECK(ds.item_label(2) == "c");
}

TEST_CASE("csv parsing: weight column") {
  TempDir dir;
  const std::string file = write_file(dir, "w.csv",
                                      "annotator_id,left_item,right_item,choice,weight\n"
                                      "u,a,b,left,2.5\n");
  const ComparisonDataset ds = io::read_comparisons_csv(file);
  CHECK(ds.weights()[0] == 2.5);
  CHECK(!ds.unit_weights());
}

TEST_CASE("csv parsing: errors carry line numbers") {
  TempDir dir;
  CHECK_THROWS_AS(io::read_comparisons_csv(dir.file("missing.csv")), IoError);
  CHECK_THROWS_AS(
      io::read_comparisons_csv(write_file(dir, "empty.csv", "")), EmptyFile);
  CHECK_THROWS_AS(io::read_comparisons_csv(write_file(
                      dir, "h.csv", "annotator_id,left_item,right_item,choice\n")),
                  EmptyFile);
  CHECK_THROWS_AS(io::read_comparisons_csv(write_file(
                      dir, "self.csv",
                      "annotator_id,left_item,right_item,choice\nu1,a,a,left\n")),
                  MalformedRow);
  CHECK_THROWS_AS(io::read_comparisons_csv(write_file(
                      dir, "tok.csv",
                      "annotator_id,left_item,right_item,choice\nu1,a,b,maybe\n")),
                  UnknownChoiceToken);
  CHECK_THROWS_AS(io::read_comparisons_csv(write_file(
                      dir, "wide.csv",
                      "annotator_id,left_item,right_item,choice\nu1,a,b,left,9,9\n")),
                  MalformedRow);
  CHECK_THROWS_AS(io::read_comparisons_csv(write_file(
                      dir, "hdr.csv", "who,l,r,choice\nu1,a,b,left\n")),
                  MalformedRow);
  try {
    io::read_comparisons_csv(write_file(
        dir, "line.csv",
        "annotator_id,left_item,right_item,choice\nu1,a,b,left\nu1,c,c,left\n"));
    FAIL("expected MalformedRow");
  } catch (const MalformedRow& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("comparison csv round trip is lossless") {
  SimulationConfig config;
  config.n_items = 7;
  config.n_annotators = 9;
  config.n_min = 10;
  config.n_max = 25;
  config.rng_seed = 91;
  const ComparisonDataset ds = simulate(config).dataset;

  TempDir dir;
  const std::string file = dir.file("round.csv");
  io::write_comparisons_csv(file, ds, {});
  const ComparisonDataset back = io::read_comparisons_csv(file);
  CHECK(labeled_equal(ds, back));
  CHECK(io::dataset_hash(back) == io::dataset_hash(ds));
}

TEST_CASE("binary responses are written as side tokens") {
  const ComparisonDataset ds = build_dataset({{0, 0, 1, 1.0}, {0, 1, 2, -1.0}}, 3, 1);
  TempDir dir;
  const std::string file = dir.file("binary.csv");
  io::write_comparisons_csv(file, ds, {});
  std::ifstream in(file);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  CHECK(lines[lines.size() - 2] == "0,0,1,left");
  CHECK(lines.back() == "0,1,2,right");
  CHECK(labeled_equal(io::read_comparisons_csv(file), ds));
}

TEST_CASE("path file round trip, with and without the z sidecar") {
  SimulationConfig sim;
  sim.n_items = 5;
  sim.n_annotators = 6;
  sim.n_min = 20;
  sim.n_max = 30;
  sim.rng_seed = 19;
  const ComparisonDataset ds = simulate(sim).dataset;
  LbiConfig config;
  config.max_iterations = 300;
  config.checkpoint_every = 10;
  const LbiPath path = lbi_fit(ds, config);

  TempDir dir;
  const std::string file = dir.file("path.jsonl");
  io::Metadata metadata;
  metadata.seed = 19;
  io::write_path_jsonl(file, path, io::dataset_hash(ds), /*store_z=*/true, metadata);

  const LbiPath back = io::read_path_jsonl(file, /*require_z=*/true);
  CHECK(back.alpha == path.alpha);
  CHECK(back.xtx_norm == path.xtx_norm);
  CHECK(back.config.kappa == path.config.kappa);
  CHECK(back.config.checkpoint_every == path.config.checkpoint_every);
  CHECK(back.stop_reason == path.stop_reason);
  CHECK(back.layout == path.layout);
  REQUIRE(back.points.size() == path.points.size());
  for (std::size_t p = 0; p < path.points.size(); ++p) {
    CHECK(back.points[p].t == path.points[p].t);
    CHECK(back.points[p].theta == path.points[p].theta);
    CHECK(back.points[p].beta == path.points[p].beta);
    CHECK(back.points[p].z == path.points[p].z);
    CHECK(back.points[p].loss == path.points[p].loss);
  }
  REQUIRE(back.activations.size() == path.activations.size());
  for (std::size_t a = 0; a < path.activations.size(); ++a) {
    CHECK(back.activations[a].annotator == path.activations[a].annotator);
    CHECK(back.activations[a].t == path.activations[a].t);
    CHECK((back.activations[a].block == path.activations[a].block));
  }

  // Interpolation between checkpoints agrees after the round trip.
  const double mid = 0.5 * (path.points[2].t + path.points[3].t);
  CHECK((interpolate(back, mid).delta - interpolate(path, mid).delta)
            .lpNorm<Eigen::Infinity>() == 0.0);

  const std::string bare = dir.file("bare.jsonl");
  io::write_path_jsonl(bare, path, io::dataset_hash(ds), /*store_z=*/false, metadata);
  CHECK_THROWS_AS(io::read_path_jsonl(bare, /*require_z=*/true), IoError);
  const LbiPath no_z = io::read_path_jsonl(bare, /*require_z=*/false);
  CHECK(no_z.points.size() == path.points.size());
  CHECK(no_z.points[1].z.size() == 0);
}

TEST_CASE("emitted tables carry the metadata header") {
  TempDir dir;
  CvResult result;
  result.t_grid = {0.0, 1.0};
  result.mean_error = Eigen::Vector2d(0.5, 0.25);
  result.fold_errors = Eigen::MatrixXd::Constant(2, 2, 0.375);
  result.t_cv = 1.0;
  io::Metadata metadata;
  metadata.seed = 123;
  metadata.config_hash = "deadbeef";
  const std::string file = dir.file("cv.csv");
  io::write_cv_csv(file, result, metadata);

  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# hodgemix", 0) == 0);
  std::getline(in, line);
  CHECK(line == "# seed=123");
  std::getline(in, line);
  CHECK(line == "# config_hash=deadbeef");
  std::getline(in, line);
  CHECK(line == "# t_cv=1");
}
