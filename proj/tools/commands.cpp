#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hodgemix/diagnostics.hpp"
#include "hodgemix/io.hpp"
#include "hodgemix/lbi.hpp"
#include "hodgemix/model_selection.hpp"
#include "hodgemix/simulation.hpp"
#include "hodgemix/solvers.hpp"
#include "hodgemix/threads.hpp"
#include "hodgemix/version.hpp"

namespace hodgemix::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Flag-addressable run configuration. Precedence: command line > --config
// JSON > defaults, implemented by loading the JSON into these fields before
// CLI11 applies the flags.
struct RunConfig {
  // lbi
  double kappa = 100.0;
  std::string alpha = "auto";
  std::int64_t iterations = 0;
  double t_max = 0.0;
  std::int64_t checkpoint_every = 1;
  std::int64_t max_checkpoints = 512;
  std::string z_update = "fresh";
  double theta_tol = 1e-10;
  double spectral_tol = 1e-6;
  std::uint64_t seed = 0;
  bool store_z = false;
  // simulate
  std::int64_t items = 30;
  std::int64_t annotators = 500;
  double p1 = 0.4;
  double p2 = 0.4;
  double sigma_gamma = 0.2;
  double s_max = 0.3;
  double sigma_noise = 0.3;
  std::int64_t n_min = 100;
  std::int64_t n_max = 500;
  bool reduced = false;
  // selection
  std::int64_t folds = 5;
  std::int64_t grid = 50;
  double split = 0.7;
  std::int64_t repeats = 20;
  // report
  std::string report_t = "cv";
  std::string annotators_list;
  std::int64_t top = 10;
  bool skip_l2 = false;
  // common
  std::int64_t threads = 0;
  std::string data_path;
  std::string out_path;
  std::string path_file;
  std::string config_file;
};

void apply_config_file(RunConfig& cfg, const std::string& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config file '" + file + "'");
  json j = json::parse(in, nullptr, true, true);  // allow comments

  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("kappa", cfg.kappa);
  get("alpha", cfg.alpha);
  get("iterations", cfg.iterations);
  get("t_max", cfg.t_max);
  get("checkpoint_every", cfg.checkpoint_every);
  get("max_checkpoints", cfg.max_checkpoints);
  get("z_update", cfg.z_update);
  get("theta_tol", cfg.theta_tol);
  get("spectral_tol", cfg.spectral_tol);
  get("seed", cfg.seed);
  get("store_z", cfg.store_z);
  get("items", cfg.items);
  get("annotators", cfg.annotators);
  get("p1", cfg.p1);
  get("p2", cfg.p2);
  get("sigma_gamma", cfg.sigma_gamma);
  get("s_max", cfg.s_max);
  get("sigma_noise", cfg.sigma_noise);
  get("n_min", cfg.n_min);
  get("n_max", cfg.n_max);
  get("folds", cfg.folds);
  get("grid", cfg.grid);
  get("split", cfg.split);
  get("repeats", cfg.repeats);
  get("t", cfg.report_t);
  get("annotators_list", cfg.annotators_list);
  get("top", cfg.top);
  get("threads", cfg.threads);
}

LbiConfig lbi_config_from(const RunConfig& cfg) {
  LbiConfig config;
  config.kappa = cfg.kappa;
  if (cfg.alpha == "auto") {
    config.alpha = 0.0;
  } else {
    try {
      config.alpha = std::stod(cfg.alpha);
    } catch (const std::exception&) {
      throw InvalidArgument("--alpha expects a number or 'auto'");
    }
    if (config.alpha <= 0.0) throw InvalidArgument("--alpha must be positive");
  }
  config.max_iterations = cfg.iterations;
  config.t_max = cfg.t_max;
  config.checkpoint_every = cfg.checkpoint_every;
  config.max_checkpoints = cfg.max_checkpoints;
  config.rng_seed = cfg.seed;
  if (cfg.z_update == "fresh")
    config.z_update_theta = ZUpdateTheta::kFresh;
  else if (cfg.z_update == "stale")
    config.z_update_theta = ZUpdateTheta::kStale;
  else
    throw InvalidArgument("--z-update expects 'fresh' or 'stale'");
  config.theta_solve.rel_tolerance = cfg.theta_tol;
  config.spectral_tol = cfg.spectral_tol;
  return config;
}

SimulationConfig simulation_config_from(const RunConfig& cfg) {
  SimulationConfig config;
  if (cfg.reduced) config = reduced_simulation_config(cfg.seed);
  config.n_items = cfg.items;
  if (!cfg.reduced) {
    config.n_annotators = cfg.annotators;
    config.n_min = cfg.n_min;
    config.n_max = cfg.n_max;
  }
  config.p_gamma = cfg.p1;
  config.p_delta = cfg.p2;
  config.sigma_gamma = cfg.sigma_gamma;
  config.s_max = cfg.s_max;
  config.sigma_noise = cfg.sigma_noise;
  config.rng_seed = cfg.seed;
  return config;
}

int resolve_threads(const RunConfig& cfg) {
  return cfg.threads > 0 ? static_cast<int>(cfg.threads) : thread_limit();
}

// Effective-config hash stamped into output metadata.
std::string config_hash(const json& effective) {
  const std::string dump = effective.dump();
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(io::fnv1a(dump.data(), dump.size())));
  return buffer;
}

json lbi_json(const RunConfig& cfg) {
  return {{"kappa", cfg.kappa},       {"alpha", cfg.alpha},
          {"iterations", cfg.iterations}, {"t_max", cfg.t_max},
          {"checkpoint_every", cfg.checkpoint_every}, {"max_checkpoints", cfg.max_checkpoints},
          {"z_update", cfg.z_update}, {"theta_tol", cfg.theta_tol},
          {"spectral_tol", cfg.spectral_tol}, {"seed", cfg.seed}};
}

io::Metadata make_metadata(const RunConfig& cfg, const json& effective) {
  io::Metadata metadata;
  metadata.seed = cfg.seed;
  metadata.config_hash = config_hash(effective);
  return metadata;
}

ComparisonDataset load_data(const RunConfig& cfg) {
  if (cfg.data_path.empty()) throw InvalidArgument("--data is required");
  ComparisonDataset dataset = io::read_comparisons_csv(cfg.data_path);
  const ComponentLabels components = connected_components(dataset);
  if (components.n_components > 1)
    std::cerr << "warning: item graph has " << components.n_components
              << " connected components; scores are only comparable within a component\n";
  return dataset;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

int cmd_simulate(const RunConfig& cfg) {
  const SimulationConfig config = simulation_config_from(cfg);
  const SimulationResult result = simulate(config);
  ensure_dir(cfg.out_path);

  json effective = {{"command", "simulate"},
                    {"items", config.n_items},
                    {"annotators", config.n_annotators},
                    {"p1", config.p_gamma},
                    {"p2", config.p_delta},
                    {"sigma_gamma", config.sigma_gamma},
                    {"s_max", config.s_max},
                    {"sigma_noise", config.sigma_noise},
                    {"n_min", config.n_min},
                    {"n_max", config.n_max},
                    {"seed", config.rng_seed}};
  io::Metadata metadata = make_metadata(cfg, effective);
  metadata.extra.emplace_back("command", effective.dump());

  const std::string data_csv = (fs::path(cfg.out_path) / "data.csv").string();
  const std::string truth_json = (fs::path(cfg.out_path) / "ground_truth.json").string();
  io::write_comparisons_csv(data_csv, result.dataset, metadata);
  io::write_ground_truth_json(truth_json, result.truth, config, metadata);
  std::cout << "simulated " << result.dataset.n_records() << " comparisons from "
            << result.dataset.n_annotators() << " annotators over " << result.dataset.n_items()
            << " items\n";
  std::cout << "wrote " << data_csv << " and " << truth_json << "\n";
  return 0;
}

int cmd_fit(const RunConfig& cfg) {
  if (cfg.out_path.empty()) throw InvalidArgument("--out is required");
  const ComparisonDataset dataset = load_data(cfg);
  const LbiConfig config = lbi_config_from(cfg);
  const LbiPath path = lbi_fit(dataset, config);

  json effective = lbi_json(cfg);
  effective["command"] = "fit";
  effective["store_z"] = cfg.store_z;
  io::Metadata metadata = make_metadata(cfg, effective);
  io::write_path_jsonl(cfg.out_path, path, io::dataset_hash(dataset), cfg.store_z, metadata);
  std::cout << "alpha = " << io::format_double(path.alpha)
            << "  xtx_norm = " << io::format_double(path.xtx_norm) << "\n";
  std::cout << "path: " << path.points.size() << " checkpoints over " << path.iterations
            << " iterations (stop: " << path.stop_reason << "), t_end = "
            << io::format_double(path.t_end()) << "\n";
  std::cout << "wrote " << cfg.out_path << (cfg.store_z ? " (+ .z sidecar)" : "") << "\n";
  return 0;
}

int cmd_cv(const RunConfig& cfg) {
  if (cfg.out_path.empty()) throw InvalidArgument("--out is required");
  const ComparisonDataset dataset = load_data(cfg);
  const LbiConfig config = lbi_config_from(cfg);

  CvOptions options;
  options.n_folds = static_cast<int>(cfg.folds);
  options.grid_size = static_cast<int>(cfg.grid);
  options.seed = cfg.seed;
  options.n_threads = resolve_threads(cfg);
  const CvResult result = cross_validate(dataset, config, options);
  if (result.grid_clipped)
    std::cerr << "warning: grid clipped to the shortest fold path (t_end = "
              << io::format_double(result.path_t_end) << ")\n";

  json effective = lbi_json(cfg);
  effective["command"] = "cv";
  effective["folds"] = cfg.folds;
  effective["grid"] = cfg.grid;
  io::write_cv_csv(cfg.out_path, result, make_metadata(cfg, effective));
  std::cout << "t_cv = " << io::format_double(result.t_cv) << "\n";
  std::cout << "wrote " << cfg.out_path << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  if (cfg.out_path.empty()) throw InvalidArgument("--out is required");
  const ComparisonDataset dataset = load_data(cfg);
  const LbiConfig config = lbi_config_from(cfg);

  EvalOptions options;
  options.split_ratio = cfg.split;
  options.repeats = static_cast<int>(cfg.repeats);
  options.cv_folds = static_cast<int>(cfg.folds);
  options.grid_size = static_cast<int>(cfg.grid);
  options.seed = cfg.seed;
  options.n_threads = resolve_threads(cfg);
  const EvalTable table = holdout_eval(dataset, config, options);

  json effective = lbi_json(cfg);
  effective["command"] = "eval";
  effective["split"] = cfg.split;
  effective["repeats"] = cfg.repeats;
  effective["folds"] = cfg.folds;
  effective["grid"] = cfg.grid;
  const io::Metadata metadata = make_metadata(cfg, effective);

  ensure_dir(cfg.out_path);
  const std::string table_csv = (fs::path(cfg.out_path) / "eval_table.csv").string();
  const std::string repeats_csv = (fs::path(cfg.out_path) / "eval_repeats.csv").string();
  io::write_eval_table_csv(table_csv, table, metadata);
  io::write_eval_repeats_csv(repeats_csv, table, metadata);

  auto print_row = [](const char* name, const MethodStats& stats) {
    std::printf("%-14s min %.6f  mean %.6f  max %.6f  std %.6f\n", name, stats.min, stats.mean,
                stats.max, stats.stddev);
  };
  print_row("hodgerank", table.ranking);
  print_row("mixed_effects", table.mixed);
  std::cout << "wrote " << table_csv << " and " << repeats_csv << "\n";
  return 0;
}

int cmd_report(const RunConfig& cfg) {
  if (cfg.out_path.empty()) throw InvalidArgument("--out is required");
  const ComparisonDataset dataset = load_data(cfg);
  const LbiConfig config = lbi_config_from(cfg);

  LbiPath path;
  if (!cfg.path_file.empty()) {
    path = io::read_path_jsonl(cfg.path_file, /*require_z=*/true);
  } else {
    path = lbi_fit(dataset, config);
  }

  double t_report;
  if (cfg.report_t == "cv") {
    CvOptions options;
    options.n_folds = static_cast<int>(cfg.folds);
    options.grid_size = static_cast<int>(cfg.grid);
    options.seed = cfg.seed;
    options.n_threads = resolve_threads(cfg);
    t_report = cross_validate(dataset, config, options).t_cv;
    std::cout << "t_cv = " << io::format_double(t_report) << "\n";
  } else {
    try {
      t_report = std::stod(cfg.report_t);
    } catch (const std::exception&) {
      throw InvalidArgument("--t expects a number or 'cv'");
    }
  }
  t_report = std::clamp(t_report, 0.0, path.t_end());
  const ModelFit fit = interpolate(path, t_report);
  const std::vector<JumpInfo> jumps = jump_orders(path);

  std::optional<std::vector<double>> l2;
  if (!cfg.skip_l2) l2 = l2_distances(dataset, config.theta_solve);

  const std::vector<AnnotatorReport> reports =
      position_bias_report(dataset, fit, jumps, l2 ? &*l2 : nullptr);

  // Ranking columns: explicit labels, else the earliest delta activations.
  std::vector<std::int32_t> selection;
  if (!cfg.annotators_list.empty()) {
    std::stringstream ss(cfg.annotators_list);
    std::string token;
    while (std::getline(ss, token, ',')) {
      const auto& labels = dataset.annotator_labels();
      std::int32_t index = -1;
      if (labels.empty()) {
        try {
          index = static_cast<std::int32_t>(std::stol(token));
        } catch (const std::exception&) {
          index = -1;
        }
      } else {
        const auto it = std::find(labels.begin(), labels.end(), token);
        if (it != labels.end()) index = static_cast<std::int32_t>(it - labels.begin());
      }
      if (index < 0 || index >= dataset.n_annotators())
        throw UnknownAnnotator("unknown annotator '" + token + "'");
      selection.push_back(index);
    }
  } else {
    std::vector<std::pair<int, std::int32_t>> ranked;
    for (std::size_t u = 0; u < jumps.size(); ++u)
      if (jumps[u].rank_delta)
        ranked.emplace_back(*jumps[u].rank_delta, static_cast<std::int32_t>(u));
    std::sort(ranked.begin(), ranked.end());
    for (const auto& [rank, u] : ranked) {
      if (static_cast<std::int64_t>(selection.size()) >= cfg.top) break;
      selection.push_back(u);
    }
  }
  const RankingReport ranking = ranking_report(fit, selection);

  json effective = lbi_json(cfg);
  effective["command"] = "report";
  effective["t"] = t_report;
  io::Metadata metadata = make_metadata(cfg, effective);
  metadata.extra.emplace_back("t_report", io::format_double(t_report));

  // Rank-correlation summary per selected annotator; an extension, not a
  // core output.
  if (!selection.empty()) {
    std::string taus;
    for (std::int32_t u : selection) {
      const Eigen::VectorXd personalized =
          fit.theta + fit.delta.segment(static_cast<Eigen::Index>(u) * dataset.n_items(),
                                        dataset.n_items());
      if (!taus.empty()) taus += ",";
      taus += dataset.annotator_label(u) + ":" +
              io::format_double(kendall_tau(fit.theta, personalized));
    }
    metadata.extra.emplace_back("kendall_tau_extension", taus);
  }

  ensure_dir(cfg.out_path);
  const std::string annotator_csv = (fs::path(cfg.out_path) / "annotator_report.csv").string();
  const std::string ranking_csv = (fs::path(cfg.out_path) / "ranking_report.csv").string();
  io::write_annotator_report_csv(annotator_csv, reports, metadata);
  io::write_ranking_report_csv(ranking_csv, ranking, dataset, metadata);
  std::cout << "wrote " << annotator_csv << " and " << ranking_csv << "\n";
  return 0;
}

}  // namespace

int run_command(std::vector<std::string> args) {
  RunConfig cfg;

  // --config is applied before flag parsing so flags win.
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) cfg.config_file = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) cfg.config_file = args[i].substr(9);
  }

  try {
    if (!cfg.config_file.empty()) apply_config_file(cfg, cfg.config_file);

    CLI::App app{"Pairwise-comparison rank aggregation with sparse annotator effects"};
    app.set_version_flag("--version", std::string("hodgemix ") + kVersion);
    app.require_subcommand(1);

    std::string subcommand;

    auto add_common = [&](CLI::App* sub) {
      sub->add_option("--config", cfg.config_file, "JSON config file (flags override it)");
      sub->add_option("--threads", cfg.threads,
                      "max worker threads (0 = HODGEMIX_THREADS or hardware)");
      sub->add_option("--seed", cfg.seed, "random seed");
    };
    auto add_lbi = [&](CLI::App* sub) {
      sub->add_option("--kappa", cfg.kappa, "damping factor (> 0)");
      sub->add_option("--alpha", cfg.alpha, "step size, or 'auto' = m/(kappa*||X^T X||)");
      sub->add_option("--iters", cfg.iterations, "iteration budget (0 = auto stop)");
      sub->add_option("--t-max", cfg.t_max, "path time budget (0 = unset)");
      sub->add_option("--checkpoint-every", cfg.checkpoint_every, "checkpoint cadence");
      sub->add_option("--max-checkpoints", cfg.max_checkpoints,
                      "thin stored checkpoints to at most this many (0 = keep all)");
      sub->add_option("--z-update", cfg.z_update, "theta used in the dual update: fresh|stale");
      sub->add_option("--theta-tol", cfg.theta_tol, "inner solve relative tolerance");
      sub->add_option("--spectral-tol", cfg.spectral_tol, "power iteration tolerance");
    };

    CLI::App* sim = app.add_subcommand("simulate", "generate synthetic comparison data");
    sim->add_option("--out", cfg.out_path, "output directory")->required();
    sim->add_option("--items", cfg.items, "number of items");
    sim->add_option("--annotators", cfg.annotators, "number of annotators");
    sim->add_option("--p1", cfg.p1, "P(nonzero position bias)");
    sim->add_option("--p2", cfg.p2, "P(nonzero preference deviation)");
    sim->add_option("--sigma-gamma", cfg.sigma_gamma, "position bias scale");
    sim->add_option("--s-max", cfg.s_max, "deviation scale upper bound");
    sim->add_option("--sigma-noise", cfg.sigma_noise, "noise scale");
    sim->add_option("--n-min", cfg.n_min, "per-annotator sample minimum");
    sim->add_option("--n-max", cfg.n_max, "per-annotator sample maximum");
    sim->add_flag("--reduced", cfg.reduced, "reduced profile: 100 annotators, 50-150 samples");
    add_common(sim);

    CLI::App* fit = app.add_subcommand("fit", "trace the regularization path");
    fit->add_option("--data", cfg.data_path, "comparison CSV")->required();
    fit->add_option("--out", cfg.out_path, "path file (JSON lines)")->required();
    fit->add_flag("--store-z", cfg.store_z, "write the dual state sidecar (needed to interpolate)");
    add_lbi(fit);
    add_common(fit);

    CLI::App* cv = app.add_subcommand("cv", "cross-validate the stopping time");
    cv->add_option("--data", cfg.data_path, "comparison CSV")->required();
    cv->add_option("--out", cfg.out_path, "CV curve CSV")->required();
    cv->add_option("--folds", cfg.folds, "number of folds");
    cv->add_option("--grid", cfg.grid, "grid points on [0, t_end]");
    add_lbi(cv);
    add_common(cv);

    CLI::App* eval = app.add_subcommand("eval", "repeated holdout comparison vs plain ranking");
    eval->add_option("--data", cfg.data_path, "comparison CSV")->required();
    eval->add_option("--out", cfg.out_path, "output directory")->required();
    eval->add_option("--split", cfg.split, "training fraction");
    eval->add_option("--repeats", cfg.repeats, "holdout repeats");
    eval->add_option("--folds", cfg.folds, "CV folds inside training");
    eval->add_option("--grid", cfg.grid, "CV grid points");
    add_lbi(eval);
    add_common(eval);

    CLI::App* report = app.add_subcommand("report", "annotator and ranking diagnostics");
    report->add_option("--data", cfg.data_path, "comparison CSV")->required();
    report->add_option("--out", cfg.out_path, "output directory")->required();
    report->add_option("--path", cfg.path_file, "existing path file (else fit in-process)");
    report->add_option("--t", cfg.report_t, "reporting time: number or 'cv'");
    report->add_option("--annotators", cfg.annotators_list,
                       "comma-separated annotator ids for the ranking report");
    report->add_option("--top", cfg.top, "ranking columns when --annotators is not given");
    report->add_flag("--skip-l2", cfg.skip_l2, "skip the full least-squares distance column");
    report->add_option("--folds", cfg.folds, "CV folds for --t cv");
    report->add_option("--grid", cfg.grid, "CV grid points for --t cv");
    add_lbi(report);
    add_common(report);

    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      return app.exit(e) == 0 ? 0 : 2;
    }

    if (sim->parsed()) return cmd_simulate(cfg);
    if (fit->parsed()) return cmd_fit(cfg);
    if (cv->parsed()) return cmd_cv(cfg);
    if (eval->parsed()) return cmd_eval(cfg);
    if (report->parsed()) return cmd_report(cfg);
    return 2;
  } catch (const IoError& e) {
    std::cerr << "hodgemix: I/O error: " << e.what() << "\n";
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "hodgemix: numerical error: " << e.what() << "\n";
    return 3;
  } catch (const InputError& e) {
    std::cerr << "hodgemix: input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "hodgemix: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace hodgemix::cli
