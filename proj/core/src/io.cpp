#include "hodgemix/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "hodgemix/version.hpp"

namespace hodgemix::io {

using nlohmann::json;

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

std::uint64_t fnv1a_string(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ull) {
  return fnv1a(s.data(), s.size(), seed);
}

std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

void write_metadata_comments(std::ofstream& out, const Metadata& metadata) {
  out << "# hodgemix " << kVersion << "\n";
  out << "# seed=" << metadata.seed << "\n";
  if (!metadata.config_hash.empty()) out << "# config_hash=" << metadata.config_hash << "\n";
  for (const auto& [key, value] : metadata.extra) out << "# " << key << "=" << value << "\n";
}

json metadata_json(const Metadata& metadata) {
  json j;
  j["tool"] = std::string("hodgemix ") + kVersion;
  j["seed"] = metadata.seed;
  if (!metadata.config_hash.empty()) j["config_hash"] = metadata.config_hash;
  for (const auto& [key, value] : metadata.extra) j[key] = value;
  return j;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

bool parse_full_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

json lbi_config_to_json(const LbiConfig& config) {
  json j;
  j["kappa"] = config.kappa;
  j["alpha"] = config.alpha;
  j["max_iterations"] = config.max_iterations;
  j["t_max"] = config.t_max;
  j["auto_min_iterations"] = config.auto_min_iterations;
  j["auto_max_iterations"] = config.auto_max_iterations;
  j["active_fraction_stop"] = config.active_fraction_stop;
  j["checkpoint_every"] = config.checkpoint_every;
  j["max_checkpoints"] = config.max_checkpoints;
  j["rng_seed"] = config.rng_seed;
  j["z_update_theta"] = config.z_update_theta == ZUpdateTheta::kFresh ? "fresh" : "stale";
  j["theta_rel_tolerance"] = config.theta_solve.rel_tolerance;
  j["theta_max_iterations"] = config.theta_solve.max_iterations;
  j["spectral_tol"] = config.spectral_tol;
  return j;
}

LbiConfig lbi_config_from_json(const json& j) {
  LbiConfig config;
  config.kappa = j.at("kappa").get<double>();
  config.alpha = j.at("alpha").get<double>();
  config.max_iterations = j.at("max_iterations").get<Eigen::Index>();
  config.t_max = j.at("t_max").get<double>();
  config.auto_min_iterations = j.at("auto_min_iterations").get<Eigen::Index>();
  config.auto_max_iterations = j.at("auto_max_iterations").get<Eigen::Index>();
  config.active_fraction_stop = j.at("active_fraction_stop").get<double>();
  config.checkpoint_every = j.at("checkpoint_every").get<Eigen::Index>();
  config.max_checkpoints = j.at("max_checkpoints").get<Eigen::Index>();
  config.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  config.z_update_theta =
      j.at("z_update_theta").get<std::string>() == "stale" ? ZUpdateTheta::kStale
                                                           : ZUpdateTheta::kFresh;
  config.theta_solve.rel_tolerance = j.at("theta_rel_tolerance").get<double>();
  config.theta_solve.max_iterations = j.at("theta_max_iterations").get<Eigen::Index>();
  config.spectral_tol = j.at("spectral_tol").get<double>();
  return config;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

}  // namespace

// Hashed over labels rather than internal indices, so the value identifies
// the data content no matter how parsing assigned dense ids.
std::string dataset_hash(const ComparisonDataset& dataset) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const std::int64_t dims[3] = {dataset.n_items(), dataset.n_annotators(), dataset.n_records()};
  h = fnv1a(dims, sizeof(dims), h);
  for (Eigen::Index k = 0; k < dataset.n_records(); ++k) {
    const ComparisonRecord record = dataset.record(k);
    h = fnv1a_string(dataset.annotator_label(record.annotator), h);
    h = fnv1a_string(dataset.item_label(record.left), h ^ 0x1d);
    h = fnv1a_string(dataset.item_label(record.right), h ^ 0x2d);
    const double vals[2] = {record.y, record.weight};
    h = fnv1a(vals, sizeof(vals), h);
  }
  return hex64(h);
}

ComparisonDataset read_comparisons_csv(const std::string& path) {
  std::ifstream in = open_in(path);

  std::unordered_map<std::string, std::int32_t> item_index;
  std::unordered_map<std::string, std::int32_t> annotator_index;
  std::vector<std::string> item_labels;
  std::vector<std::string> annotator_labels;
  std::vector<ComparisonRecord> records;

  auto intern = [](std::unordered_map<std::string, std::int32_t>& map,
                   std::vector<std::string>& labels, const std::string& key) {
    const auto [it, inserted] = map.emplace(key, static_cast<std::int32_t>(labels.size()));
    if (inserted) labels.push_back(key);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t n_columns = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::vector<std::string> fields = split_csv_line(stripped);

    if (!header_seen) {
      if (fields.size() != 4 && fields.size() != 5)
        throw MalformedRow(line_no, "expected 4 or 5 header columns, got " +
                                        std::to_string(fields.size()));
      if (fields[0] != "annotator_id" || fields[1] != "left_item" || fields[2] != "right_item" ||
          fields[3] != "choice" || (fields.size() == 5 && fields[4] != "weight"))
        throw MalformedRow(line_no,
                           "expected header annotator_id,left_item,right_item,choice[,weight]");
      n_columns = fields.size();
      header_seen = true;
      continue;
    }

    if (fields.size() != n_columns)
      throw MalformedRow(line_no, "expected " + std::to_string(n_columns) + " fields, got " +
                                      std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty() || fields[2].empty())
      throw MalformedRow(line_no, "empty id field");
    if (fields[1] == fields[2]) throw MalformedRow(line_no, "item compared with itself");

    ComparisonRecord record;
    record.annotator = intern(annotator_index, annotator_labels, fields[0]);
    record.left = intern(item_index, item_labels, fields[1]);
    record.right = intern(item_index, item_labels, fields[2]);

    if (fields[3] == "left") {
      record.y = 1.0;
    } else if (fields[3] == "right") {
      record.y = -1.0;
    } else if (double value; parse_full_double(fields[3], value)) {
      if (!std::isfinite(value)) throw MalformedRow(line_no, "choice is not finite");
      record.y = value;
    } else {
      throw UnknownChoiceToken(line_no, fields[3]);
    }

    if (n_columns == 5) {
      double w;
      if (!parse_full_double(fields[4], w))
        throw MalformedRow(line_no, "weight '" + fields[4] + "' is not a number");
      if (!(w >= 0.0) || !std::isfinite(w))
        throw MalformedRow(line_no, "weight must be finite and >= 0");
      record.weight = w;
    }
    records.push_back(record);
  }

  if (!header_seen || records.empty()) throw EmptyFile("'" + path + "' contains no data rows");

  ComparisonDataset dataset =
      build_dataset(records, static_cast<Eigen::Index>(item_labels.size()),
                    static_cast<Eigen::Index>(annotator_labels.size()));
  dataset.set_labels(std::move(item_labels), std::move(annotator_labels));
  return dataset;
}

void write_comparisons_csv(const std::string& path, const ComparisonDataset& dataset,
                           const Metadata& metadata) {
  std::ofstream out = open_out(path);
  write_metadata_comments(out, metadata);
  const bool with_weight = !dataset.unit_weights();
  out << "annotator_id,left_item,right_item,choice" << (with_weight ? ",weight" : "") << "\n";
  for (Eigen::Index k = 0; k < dataset.n_records(); ++k) {
    const ComparisonRecord record = dataset.record(k);
    out << dataset.annotator_label(record.annotator) << ',' << dataset.item_label(record.left)
        << ',' << dataset.item_label(record.right) << ',';
    if (record.y == 1.0)
      out << "left";
    else if (record.y == -1.0)
      out << "right";
    else
      out << format_double(record.y);
    if (with_weight) out << ',' << format_double(record.weight);
    out << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_ground_truth_json(const std::string& path, const GroundTruth& truth,
                             const SimulationConfig& config, const Metadata& metadata) {
  json j;
  j["metadata"] = metadata_json(metadata);
  j["config"] = {{"n_items", config.n_items},
                 {"n_annotators", config.n_annotators},
                 {"p_gamma", config.p_gamma},
                 {"p_delta", config.p_delta},
                 {"sigma_gamma", config.sigma_gamma},
                 {"s_max", config.s_max},
                 {"sigma_noise", config.sigma_noise},
                 {"n_min", config.n_min},
                 {"n_max", config.n_max},
                 {"rng_seed", config.rng_seed}};
  j["theta_star"] = vector_to_json(truth.theta_star);
  j["gamma_star"] = vector_to_json(truth.gamma_star);
  json delta = json::object();
  for (Eigen::Index u = 0; u < truth.delta_star.rows(); ++u)
    if (truth.delta_mask[static_cast<std::size_t>(u)])
      delta[std::to_string(u)] = vector_to_json(truth.delta_star.row(u));
  j["delta_star"] = delta;
  json gamma_mask = json::array(), delta_mask = json::array();
  for (std::size_t u = 0; u < truth.gamma_mask.size(); ++u) {
    if (truth.gamma_mask[u]) gamma_mask.push_back(u);
    if (truth.delta_mask[u]) delta_mask.push_back(u);
  }
  j["gamma_support"] = gamma_mask;
  j["delta_support"] = delta_mask;

  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_path_jsonl(const std::string& path, const LbiPath& lbi_path,
                      const std::string& data_hash, bool store_z, const Metadata& metadata) {
  json header;
  header["metadata"] = metadata_json(metadata);
  header["type"] = "lbi_path";
  header["config"] = lbi_config_to_json(lbi_path.config);
  header["n_items"] = lbi_path.layout.n_items;
  header["n_annotators"] = lbi_path.layout.n_annotators;
  header["alpha"] = lbi_path.alpha;
  header["xtx_norm"] = lbi_path.xtx_norm;
  header["iterations"] = lbi_path.iterations;
  header["stop_reason"] = lbi_path.stop_reason;
  header["dataset_hash"] = data_hash;
  header["store_z"] = store_z;
  json activations = json::array();
  for (const ActivationEvent& e : lbi_path.activations)
    activations.push_back({{"annotator", e.annotator},
                           {"block", e.block == ActivationEvent::Block::kDelta ? "delta" : "gamma"},
                           {"t", e.t},
                           {"iteration", e.iteration}});
  header["activations"] = activations;

  std::ofstream out = open_out(path);
  out << header.dump() << "\n";

  const BetaLayout& layout = lbi_path.layout;
  for (const PathPoint& point : lbi_path.points) {
    json j;
    j["t"] = point.t;
    j["iteration"] = point.iteration;
    j["loss"] = point.loss;
    j["theta"] = vector_to_json(point.theta);
    j["active_delta"] = point.active_delta;
    j["active_gamma"] = point.active_gamma;
    json gamma = json::object();
    for (std::int32_t u : point.active_gamma)
      gamma[std::to_string(u)] = point.beta[layout.gamma_offset(u)];
    j["gamma"] = gamma;
    json delta = json::object();
    for (std::int32_t u : point.active_delta)
      delta[std::to_string(u)] = vector_to_json(point.beta.segment(layout.delta_offset(u), layout.n_items));
    j["delta"] = delta;
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");

  if (store_z) {
    std::ofstream zout = open_out(path + ".z");
    for (const PathPoint& point : lbi_path.points) {
      json j;
      j["t"] = point.t;
      j["z"] = vector_to_json(point.z);
      zout << j.dump() << "\n";
    }
    if (!zout) throw IoError("failed writing '" + path + ".z'");
  }
}

LbiPath read_path_jsonl(const std::string& path, bool require_z) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw EmptyFile("'" + path + "' is empty");

  json header = json::parse(line, nullptr, true);
  if (header.value("type", "") != "lbi_path")
    throw IoError("'" + path + "' is not a path file");

  LbiPath lbi_path;
  lbi_path.config = lbi_config_from_json(header.at("config"));
  lbi_path.layout = {header.at("n_items").get<Eigen::Index>(),
                     header.at("n_annotators").get<Eigen::Index>()};
  lbi_path.alpha = header.at("alpha").get<double>();
  lbi_path.xtx_norm = header.at("xtx_norm").get<double>();
  lbi_path.iterations = header.at("iterations").get<Eigen::Index>();
  lbi_path.stop_reason = header.at("stop_reason").get<std::string>();
  for (const json& e : header.at("activations"))
    lbi_path.activations.push_back(
        {e.at("annotator").get<std::int32_t>(),
         e.at("block").get<std::string>() == "delta" ? ActivationEvent::Block::kDelta
                                                     : ActivationEvent::Block::kGamma,
         e.at("t").get<double>(), e.at("iteration").get<Eigen::Index>()});

  const BetaLayout& layout = lbi_path.layout;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line);
    PathPoint point;
    point.t = j.at("t").get<double>();
    point.iteration = j.at("iteration").get<Eigen::Index>();
    point.loss = j.at("loss").get<double>();
    point.theta = vector_from_json(j.at("theta"));
    point.active_delta = j.at("active_delta").get<std::vector<std::int32_t>>();
    point.active_gamma = j.at("active_gamma").get<std::vector<std::int32_t>>();
    point.beta = Eigen::VectorXd::Zero(layout.size());
    for (const auto& [key, value] : j.at("gamma").items())
      point.beta[layout.gamma_offset(std::stoi(key))] = value.get<double>();
    for (const auto& [key, value] : j.at("delta").items())
      point.beta.segment(layout.delta_offset(std::stoi(key)), layout.n_items) =
          vector_from_json(value);
    lbi_path.points.push_back(std::move(point));
  }
  if (lbi_path.points.empty()) throw IoError("'" + path + "' has no checkpoints");

  const bool stored_z = header.value("store_z", false);
  if (stored_z) {
    std::ifstream zin = open_in(path + ".z");
    for (PathPoint& point : lbi_path.points) {
      if (!std::getline(zin, line))
        throw IoError("'" + path + ".z' has fewer lines than the path has checkpoints");
      json j = json::parse(line);
      point.z = vector_from_json(j.at("z"));
      if (point.z.size() != layout.size())
        throw IoError("'" + path + ".z' has a z vector of the wrong length");
    }
  } else if (require_z) {
    throw IoError("'" + path + "' was written without --store-z; interpolation needs the sidecar");
  }
  return lbi_path;
}

void write_cv_csv(const std::string& path, const CvResult& result, const Metadata& metadata) {
  std::ofstream out = open_out(path);
  write_metadata_comments(out, metadata);
  out << "# t_cv=" << format_double(result.t_cv) << "\n";
  out << "# path_t_end=" << format_double(result.path_t_end) << "\n";
  if (result.grid_clipped) out << "# grid_clipped=1\n";
  const Eigen::Index n_folds = result.fold_errors.rows();
  out << "t,mean_error";
  for (Eigen::Index f = 0; f < n_folds; ++f) out << ",fold_" << (f + 1);
  out << "\n";
  for (std::size_t g = 0; g < result.t_grid.size(); ++g) {
    out << format_double(result.t_grid[g]) << ','
        << format_double(result.mean_error[static_cast<Eigen::Index>(g)]);
    for (Eigen::Index f = 0; f < n_folds; ++f)
      out << ',' << format_double(result.fold_errors(f, static_cast<Eigen::Index>(g)));
    out << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_eval_table_csv(const std::string& path, const EvalTable& table,
                          const Metadata& metadata) {
  std::ofstream out = open_out(path);
  write_metadata_comments(out, metadata);
  out << "# split_ratio=" << format_double(table.split_ratio) << "\n";
  out << "# repeats=" << table.repeats.size() << "\n";
  out << "method,min,mean,max,std\n";
  auto row = [&](const char* name, const MethodStats& stats) {
    out << name << ',' << format_double(stats.min) << ',' << format_double(stats.mean) << ','
        << format_double(stats.max) << ',' << format_double(stats.stddev) << "\n";
  };
  row("hodgerank", table.ranking);
  row("mixed_effects", table.mixed);
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_eval_repeats_csv(const std::string& path, const EvalTable& table,
                            const Metadata& metadata) {
  std::ofstream out = open_out(path);
  write_metadata_comments(out, metadata);
  out << "repeat,seed,hodgerank_error,mixed_error,t_cv\n";
  for (const RepeatResult& r : table.repeats)
    out << r.repeat << ',' << r.seed << ',' << format_double(r.ranking_error) << ','
        << format_double(r.mixed_error) << ',' << format_double(r.t_cv) << "\n";
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_annotator_report_csv(const std::string& path,
                                const std::vector<AnnotatorReport>& reports,
                                const Metadata& metadata) {
  std::ofstream out = open_out(path);
  write_metadata_comments(out, metadata);
  out << "annotator_id,n_records,left_clicks,right_clicks,jump_rank_delta,jump_t_delta,"
         "jump_rank_gamma,jump_t_gamma,l2_distance,gamma,delta_norm\n";
  auto opt_int = [&](const std::optional<int>& v) { if (v) out << *v; };
  auto opt_double = [&](const std::optional<double>& v) { if (v) out << format_double(*v); };
  for (const AnnotatorReport& r : reports) {
    out << r.label << ',' << r.n_records << ',' << r.left_clicks << ',' << r.right_clicks << ',';
    opt_int(r.jumps.rank_delta);
    out << ',';
    opt_double(r.jumps.t_delta);
    out << ',';
    opt_int(r.jumps.rank_gamma);
    out << ',';
    opt_double(r.jumps.t_gamma);
    out << ',';
    opt_double(r.l2_distance);
    out << ',' << format_double(r.gamma) << ',' << format_double(r.delta_norm) << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_ranking_report_csv(const std::string& path, const RankingReport& report,
                              const ComparisonDataset& dataset, const Metadata& metadata) {
  std::ofstream out = open_out(path);
  write_metadata_comments(out, metadata);
  out << "item_id,common";
  for (std::int32_t u : report.annotators) out << ',' << dataset.annotator_label(u);
  out << "\n";
  for (Eigen::Index i = 0; i < report.rank_positions.rows(); ++i) {
    out << dataset.item_label(report.common_order[static_cast<std::size_t>(i)]);
    for (Eigen::Index c = 0; c < report.rank_positions.cols(); ++c)
      out << ',' << report.rank_positions(i, c);
    out << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace hodgemix::io
