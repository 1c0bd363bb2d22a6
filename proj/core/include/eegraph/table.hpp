#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eegraph/trainer.hpp"

namespace eegraph {

/// Summary JSON written next to epochs.csv after a run.
std::string report_to_json(const RunReport& report);

/// One completed run directory (config.json + report.json).
struct RunRecord {
  std::string dir;
  std::string hash;
  std::string config_text;  // resolved config with the seed removed
  std::string model_label;  // "conv/pool"
  std::string graph_label;  // "edge_policy shift"
  std::size_t param_count = 0;
  double best_val_acc = 0.0;
};

RunRecord load_run_dir(const std::string& dir);

/// A table cell: runs sharing a config hash, accuracy in percent.
struct TableCell {
  std::string hash;
  std::string model_label;
  std::string graph_label;
  std::size_t param_count = 0;
  std::size_t runs = 0;
  double mean_pct = 0.0;
  double std_pct = 0.0;  // population standard deviation
};

/// Groups runs by hash, deterministic (label, hash) order. Throws DataError
/// when runs in one cell disagree on the underlying config or parameter
/// count.
std::vector<TableCell> aggregate_runs(const std::vector<RunRecord>& runs);

/// "76.00 ± 0.82" for a cell; a single run reports "± 0.00".
std::string format_mean_std(double mean_pct, double std_pct);

std::string format_table_text(const std::vector<TableCell>& cells);
std::string format_table_csv(const std::vector<TableCell>& cells);

}  // namespace eegraph
