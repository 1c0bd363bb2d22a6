#include "eegraph/table.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "eegraph/config.hpp"
#include "eegraph/errors.hpp"
#include "json.hpp"

namespace eegraph {

namespace fs = std::filesystem;

std::string report_to_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["best_val_acc"] = report.best_val_acc;
  j["best_epoch"] = report.best_epoch;
  j["param_count"] = report.param_count;
  j["epochs_run"] = report.epochs.size();
  j["wall_seconds"] = report.wall_seconds;
  return j.dump(2) + "\n";
}

namespace {

nlohmann::ordered_json load_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace

RunRecord load_run_dir(const std::string& dir) {
  fs::path base(dir);
  auto config = load_json_file(base / "config.json");
  auto report = load_json_file(base / "report.json");

  RunRecord rec;
  rec.dir = dir;
  try {
    auto stripped = config;
    stripped.at("train").erase("seed");
    rec.config_text = stripped.dump();
    rec.hash = [&] {
      char buf[17];
      std::snprintf(buf, sizeof(buf), "%016llx",
                    static_cast<unsigned long long>(fnv1a64(rec.config_text)));
      return std::string(buf);
    }();
    rec.model_label = config.at("model").at("conv").get<std::string>() + "/" +
                      config.at("model").at("pool").get<std::string>();
    rec.graph_label = config.at("graph").at("edge_policy").get<std::string>() +
                      " " + config.at("graph").at("shift").get<std::string>();
    rec.param_count = report.at("param_count").get<std::size_t>();
    rec.best_val_acc = report.at("best_val_acc").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(dir + ": malformed run record: " + e.what());
  }
  if (!(rec.best_val_acc >= 0.0 && rec.best_val_acc <= 1.0))
    throw DataError(dir + ": best_val_acc outside [0, 1]");
  return rec;
}

std::vector<TableCell> aggregate_runs(const std::vector<RunRecord>& runs) {
  std::map<std::string, std::vector<const RunRecord*>> groups;
  for (const auto& run : runs) groups[run.hash].push_back(&run);

  std::vector<TableCell> cells;
  for (const auto& [hash, members] : groups) {
    const RunRecord& first = *members.front();
    std::vector<double> accs;
    for (const RunRecord* run : members) {
      if (run->config_text != first.config_text)
        throw DataError("runs " + first.dir + " and " + run->dir +
                        " share hash " + hash + " but differ in config");
      if (run->param_count != first.param_count)
        throw DataError("runs " + first.dir + " and " + run->dir +
                        " share a config but differ in parameter count");
      accs.push_back(run->best_val_acc * 100.0);
    }
    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= static_cast<double>(accs.size());
    double var = 0.0;
    for (double a : accs) var += (a - mean) * (a - mean);
    var /= static_cast<double>(accs.size());

    TableCell cell;
    cell.hash = hash;
    cell.model_label = first.model_label;
    cell.graph_label = first.graph_label;
    cell.param_count = first.param_count;
    cell.runs = members.size();
    cell.mean_pct = mean;
    cell.std_pct = std::sqrt(var);
    cells.push_back(std::move(cell));
  }
  std::sort(cells.begin(), cells.end(), [](const TableCell& a, const TableCell& b) {
    if (a.model_label != b.model_label) return a.model_label < b.model_label;
    if (a.graph_label != b.graph_label) return a.graph_label < b.graph_label;
    return a.hash < b.hash;
  });
  return cells;
}

std::string format_mean_std(double mean_pct, double std_pct) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", mean_pct, std_pct);
  return std::string(buf);
}

std::string format_table_text(const std::vector<TableCell>& cells) {
  const std::string headers[5] = {"model", "graph", "params", "runs",
                                  "val acc (%)"};
  std::vector<std::array<std::string, 5>> rows;
  for (const auto& cell : cells)
    rows.push_back({cell.model_label, cell.graph_label,
                    std::to_string(cell.param_count),
                    std::to_string(cell.runs),
                    format_mean_std(cell.mean_pct, cell.std_pct)});

  std::size_t width[5];
  for (int c = 0; c < 5; ++c) {
    width[c] = headers[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }

  // The ± sign is two bytes in UTF-8 but one column on screen.
  auto display_width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s)
      if ((c & 0xc0) != 0x80) ++w;
    return w;
  };

  std::ostringstream out;
  auto emit_row = [&](const std::array<std::string, 5>& row) {
    for (int c = 0; c < 5; ++c) {
      out << row[c];
      if (c + 1 < 5)
        out << std::string(width[c] - display_width(row[c]) + 2, ' ');
    }
    out << "\n";
  };
  emit_row({headers[0], headers[1], headers[2], headers[3], headers[4]});
  for (const auto& row : rows) emit_row(row);
  return out.str();
}

std::string format_table_csv(const std::vector<TableCell>& cells) {
  std::ostringstream out;
  out << "model,graph,params,runs,val_acc_mean,val_acc_std\n";
  for (const auto& cell : cells) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f,%.2f", cell.mean_pct, cell.std_pct);
    out << cell.model_label << "," << cell.graph_label << ","
        << cell.param_count << "," << cell.runs << "," << buf << "\n";
  }
  return out.str();
}

}  // namespace eegraph
