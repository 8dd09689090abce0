#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hodgemix/dataset.hpp"
#include "hodgemix/diagnostics.hpp"
#include "hodgemix/lbi.hpp"
#include "hodgemix/model_selection.hpp"
#include "hodgemix/simulation.hpp"

namespace hodgemix::io {

// Shortest text that parses back to the exact double (17 significant digits).
std::string format_double(double value);

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ull);

// Structural hash over dimensions and records; label tables excluded.
std::string dataset_hash(const ComparisonDataset& dataset);

// Provenance block stamped on every emitted file.
struct Metadata {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> extra;
};

// Comparison CSV: header `annotator_id,left_item,right_item,choice[,weight]`,
// `choice` one of left / right / real number, `#` comment lines ignored.
ComparisonDataset read_comparisons_csv(const std::string& path);
void write_comparisons_csv(const std::string& path, const ComparisonDataset& dataset,
                           const Metadata& metadata);

void write_ground_truth_json(const std::string& path, const GroundTruth& truth,
                             const SimulationConfig& config, const Metadata& metadata);

// Path file: one JSONL header (config, dataset hash, ||X^T X||_2, activation
// log) followed by one object per checkpoint. The dual state z goes to a
// sidecar `<file>.z` (JSONL, aligned line by line) only when store_z is set;
// interpolation needs it.
void write_path_jsonl(const std::string& path, const LbiPath& lbi_path,
                      const std::string& data_hash, bool store_z, const Metadata& metadata);
LbiPath read_path_jsonl(const std::string& path, bool require_z);

void write_cv_csv(const std::string& path, const CvResult& result, const Metadata& metadata);
void write_eval_table_csv(const std::string& path, const EvalTable& table,
                          const Metadata& metadata);
void write_eval_repeats_csv(const std::string& path, const EvalTable& table,
                            const Metadata& metadata);
void write_annotator_report_csv(const std::string& path,
                                const std::vector<AnnotatorReport>& reports,
                                const Metadata& metadata);
void write_ranking_report_csv(const std::string& path, const RankingReport& report,
                              const ComparisonDataset& dataset, const Metadata& metadata);

}  // namespace hodgemix::io
