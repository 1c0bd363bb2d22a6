#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eegraph/augment.hpp"
#include "eegraph/checkpoint.hpp"
#include "eegraph/config.hpp"
#include "eegraph/dataset.hpp"
#include "eegraph/errors.hpp"
#include "eegraph/fixtures.hpp"
#include "eegraph/graph.hpp"
#include "eegraph/model.hpp"
#include "eegraph/montage.hpp"
#include "eegraph/table.hpp"
#include "eegraph/trainer.hpp"

namespace fs = std::filesystem;
using namespace eegraph;

namespace {

void print_graph_stats(const Graph& g) {
  std::size_t loops = 0;
  for (const auto& e : g.edges())
    if (e.i == e.j) ++loops;
  std::cout << "nodes " << g.node_count() << "\n";
  std::cout << "directed edges " << g.edges().size() << "\n";
  std::cout << "self loops " << loops << "\n";
  std::map<std::size_t, std::size_t> hist;
  for (std::size_t i = 0; i < g.node_count(); ++i)
    ++hist[g.neighbors(i).size()];
  std::cout << "degree histogram\n";
  for (const auto& [deg, count] : hist)
    std::cout << "  " << deg << ": " << count << "\n";
}

std::vector<double> parse_snr_list(const std::string& text) {
  std::vector<double> levels;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string item = comma == std::string::npos
                           ? text.substr(start)
                           : text.substr(start, comma - start);
    std::size_t used = 0;
    double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument(item);
    levels.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return levels;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

struct LoadedExperiment {
  ExperimentConfig cfg;
  TrialSet trials;
  Montage montage;
  Graph graph;
};

/// Resolves manifest and montage, loads the trials and builds the electrode
/// graph; the returned config reflects the values actually used.
LoadedExperiment prepare_experiment(ExperimentConfig cfg) {
  if (cfg.manifest.empty())
    throw CLI::ValidationError(
        "no dataset: pass --data or set [dataset] manifest in the config");
  TrialSet trials = load_trialset(cfg.manifest);
  if (cfg.montage.empty()) cfg.montage = trials.montage_ref;
  Montage montage = resolve_montage(cfg.montage);
  if (montage.size() != trials.n_channels)
    throw DataError("montage has " + std::to_string(montage.size()) +
                    " electrodes but the dataset has " +
                    std::to_string(trials.n_channels) + " channels");
  Graph graph = build_graph(montage, parse_edge_policy(cfg.edge_policy));
  return LoadedExperiment{std::move(cfg), std::move(trials),
                          std::move(montage), std::move(graph)};
}

int run_graph(const std::string& montage_arg, const std::string& policy_arg,
              const std::string& out_path) {
  Montage montage = resolve_montage(montage_arg);
  Graph graph = build_graph(montage, parse_edge_policy(policy_arg));
  print_graph_stats(graph);
  if (!out_path.empty()) {
    save_graph(graph, out_path);
    std::cout << "edge list written to " << out_path << "\n";
  }
  return 0;
}

int run_augment(const std::string& in_path, const std::string& out_path,
                const std::string& snr_text, std::uint64_t seed) {
  TrialSet input = load_trialset(in_path);
  std::vector<double> levels = parse_snr_list(snr_text);
  AugmentResult result = augment_awgn(input, levels, seed);
  fs::path out(out_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_trialset(result.trials, out_path);
  std::cout << "trials " << input.n_trials << " -> " << result.trials.n_trials
            << " (" << levels.size() << " levels)\n";
  if (result.zero_power_channels > 0)
    std::cout << "zero-power channels copied unchanged: "
              << result.zero_power_channels << "\n";
  std::cout << "written to " << out_path << "\n";
  return 0;
}

int run_train(ExperimentConfig cfg, std::string out_dir, bool dry_run) {
  LoadedExperiment exp = prepare_experiment(std::move(cfg));
  Network net(exp.cfg.model, exp.graph, exp.trials.n_channels,
              exp.trials.n_samples, exp.trials.n_classes, exp.cfg.train.seed);
  std::cout << "params " << net.param_count() << "\n";
  print_graph_stats(exp.graph);
  if (dry_run) return 0;

  if (out_dir.empty())
    out_dir = "run-" + config_hash(exp.cfg).substr(0, 8) + "-s" +
              std::to_string(exp.cfg.train.seed);
  fs::create_directories(out_dir);

  auto [train_set, val_set] = split(exp.trials, exp.cfg.train.seed);
  if (!exp.cfg.augment_snr_db.empty()) {
    train_set = augment_awgn(train_set, exp.cfg.augment_snr_db,
                             exp.cfg.train.seed)
                    .trials;
    std::cout << "augmented training trials " << train_set.n_trials << "\n";
  }

  RunReport report = train(net, train_set, val_set, exp.cfg.train, out_dir);
  write_text_file(fs::path(out_dir) / "config.json",
                  experiment_to_json(exp.cfg));
  write_text_file(fs::path(out_dir) / "report.json", report_to_json(report));

  std::printf("best val acc %.4f (epoch %zu)\n", report.best_val_acc,
              report.best_epoch);
  std::printf("wall %.1f s, %zu epochs\n", report.wall_seconds,
              report.epochs.size());
  std::cout << "run dir " << out_dir << "\n";
  return 0;
}

int run_eval(const std::string& run_dir, const std::string& config_path,
             std::string ckpt_path, const std::string& data_path,
             const std::string& split_name) {
  ExperimentConfig cfg;
  if (!run_dir.empty() && !config_path.empty())
    throw CLI::ValidationError("pass --run or --config, not both");
  if (!run_dir.empty()) {
    fs::path config_json = fs::path(run_dir) / "config.json";
    cfg = experiment_from_json(read_text_file(config_json),
                               config_json.string());
    if (ckpt_path.empty())
      ckpt_path = (fs::path(run_dir) / "best.ckpt").string();
  } else if (!config_path.empty()) {
    cfg = load_experiment_config(config_path);
  } else {
    throw CLI::ValidationError("pass --run or --config");
  }
  if (ckpt_path.empty()) throw CLI::ValidationError("pass --checkpoint");
  if (!data_path.empty()) cfg.manifest = data_path;

  LoadedExperiment exp = prepare_experiment(std::move(cfg));
  Network net(exp.cfg.model, exp.graph, exp.trials.n_channels,
              exp.trials.n_samples, exp.trials.n_classes, exp.cfg.train.seed);
  restore_params(net.params(), load_checkpoint(ckpt_path));

  TrialSet chosen;
  if (split_name == "all") {
    chosen = exp.trials;
  } else {
    auto [train_set, val_set] = split(exp.trials, exp.cfg.train.seed);
    chosen = split_name == "train" ? std::move(train_set) : std::move(val_set);
  }
  EvalResult result = evaluate(net, chosen);
  std::printf("accuracy %.6f on %zu %s trials\n", result.accuracy,
              chosen.n_trials, split_name.c_str());
  std::cout << "confusion (rows = true class)\n";
  for (const auto& row : result.confusion) {
    std::cout << " ";
    for (std::size_t v : row) std::cout << " " << v;
    std::cout << "\n";
  }
  return 0;
}

int run_table(const std::vector<std::string>& run_dirs, bool csv,
              const std::string& out_path) {
  std::vector<RunRecord> records;
  records.reserve(run_dirs.size());
  for (const auto& dir : run_dirs) records.push_back(load_run_dir(dir));
  auto cells = aggregate_runs(records);
  std::string text = csv ? format_table_csv(cells) : format_table_text(cells);
  std::cout << text;
  if (!out_path.empty()) write_text_file(out_path, text);
  return 0;
}

int run_fixtures(const std::string& out_dir, std::uint64_t seed) {
  write_fixture_tree(out_dir, seed);
  std::cout << "fixtures written under " << out_dir << "\n";
  std::cout << "  montages/errp56.txt\n  montages/rsvp16.txt\n"
            << "  hemi/manifest.json\n  smoke/manifest.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG graph classification toolkit"};
  app.require_subcommand(1);

  auto policy_check = CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          parse_edge_policy(s);
          return {};
        } catch (const std::exception& e) {
          return std::string(e.what());
        }
      },
      "POLICY");
  auto snr_check = CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          parse_snr_list(s);
          return {};
        } catch (const std::exception&) {
          return "expected comma-separated numbers, got '" + s + "'";
        }
      },
      "SNRLIST");

  // graph
  std::string g_montage, g_policy = "complete", g_out;
  auto* cmd_g = app.add_subcommand(
      "graph", "Build an electrode graph and print a summary");
  cmd_g->add_option("--montage", g_montage,
                    "Montage name (errp56, rsvp16) or coordinate file")
      ->required();
  cmd_g->add_option("--edge-policy", g_policy,
                    "complete | knng:k=K | dist:d=D, optional ,self-loops")
      ->check(policy_check);
  cmd_g->add_option("--out", g_out, "Write the edge list to this path");

  // augment
  std::string a_in, a_out, a_snr;
  std::uint64_t a_seed = 0;
  auto* cmd_a = app.add_subcommand(
      "augment", "Append noisy trial copies at fixed SNR levels");
  cmd_a->add_option("input", a_in, "Input manifest")->required();
  cmd_a->add_option("output", a_out, "Output manifest")->required();
  cmd_a->add_option("--snr", a_snr, "Comma-separated SNR levels in dB")
      ->required()
      ->check(snr_check);
  cmd_a->add_option("--seed", a_seed, "Noise seed");

  // train
  std::string t_config, t_data, t_out;
  std::uint64_t t_seed = 0;
  bool t_dry = false;
  auto* cmd_t =
      app.add_subcommand("train", "Train a classifier per an experiment config");
  cmd_t->add_option("--config", t_config, "TOML experiment config");
  cmd_t->add_option("--data", t_data, "Dataset manifest (overrides the config)");
  auto* t_seed_opt =
      cmd_t->add_option("--seed", t_seed, "Run seed (overrides the config)");
  cmd_t->add_option("--out", t_out,
                    "Run directory (default run-<confighash>-s<seed>)");
  cmd_t->add_flag("--dry-run", t_dry,
                  "Print parameter count and graph stats, train nothing");

  // eval
  std::string e_run, e_config, e_ckpt, e_data, e_split = "val";
  auto* cmd_e = app.add_subcommand("eval", "Evaluate a checkpoint");
  cmd_e->add_option("--run", e_run, "Run directory (config.json + best.ckpt)");
  cmd_e->add_option("--config", e_config, "TOML config (alternative to --run)");
  cmd_e->add_option("--checkpoint", e_ckpt,
                    "Checkpoint path (default <run>/best.ckpt)");
  cmd_e->add_option("--data", e_data, "Dataset manifest (overrides the config)");
  cmd_e->add_option("--split", e_split, "Evaluation split")
      ->check(CLI::IsMember({"train", "val", "all"}));

  // table
  std::vector<std::string> tb_dirs;
  bool tb_csv = false;
  std::string tb_out;
  auto* cmd_tb = app.add_subcommand(
      "table", "Aggregate run directories into a results table");
  cmd_tb->add_option("runs", tb_dirs, "Run directories")->required();
  cmd_tb->add_flag("--csv", tb_csv, "Emit CSV instead of aligned text");
  cmd_tb->add_option("--out", tb_out, "Also write the table to this file");

  // fixtures
  std::string f_out = "fixtures";
  std::uint64_t f_seed = 0;
  auto* cmd_f = app.add_subcommand(
      "fixtures", "Generate the synthetic fixture datasets");
  cmd_f->add_option("--out", f_out, "Output directory");
  cmd_f->add_option("--seed", f_seed, "Generation seed");

  try {
    app.parse(argc, argv);
    if (cmd_g->parsed()) return run_graph(g_montage, g_policy, g_out);
    if (cmd_a->parsed()) return run_augment(a_in, a_out, a_snr, a_seed);
    if (cmd_t->parsed()) {
      ExperimentConfig cfg;
      if (!t_config.empty()) cfg = load_experiment_config(t_config);
      if (!t_data.empty()) cfg.manifest = t_data;
      if (t_seed_opt->count() > 0) cfg.train.seed = t_seed;
      return run_train(std::move(cfg), t_out, t_dry);
    }
    if (cmd_e->parsed()) return run_eval(e_run, e_config, e_ckpt, e_data, e_split);
    if (cmd_tb->parsed()) return run_table(tb_dirs, tb_csv, tb_out);
    if (cmd_f->parsed()) return run_fixtures(f_out, f_seed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
