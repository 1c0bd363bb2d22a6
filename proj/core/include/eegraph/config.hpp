#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "eegraph/model.hpp"
#include "eegraph/trainer.hpp"

namespace eegraph {

/// Flat key/value config document: [section] headers, `key = value` lines,
/// '#' comments. Values are strings, booleans, numbers, or numeric arrays.
struct ConfigValue {
  std::variant<std::string, double, std::int64_t, bool, std::vector<double>> v;

  const std::string& as_string(const std::string& where) const;
  double as_number(const std::string& where) const;
  std::int64_t as_integer(const std::string& where) const;
  bool as_bool(const std::string& where) const;
  const std::vector<double>& as_array(const std::string& where) const;
};

using ConfigDoc = std::map<std::string, std::map<std::string, ConfigValue>>;

ConfigDoc parse_config_text(const std::string& text, const std::string& origin);
ConfigDoc load_config_file(const std::string& path);

/// Everything one training run needs. Defaults follow the reference
/// protocol: batch 256, 400 epochs, Adam 0.001 halved every 50 epochs.
struct ExperimentConfig {
  std::string manifest;      // dataset manifest path ([dataset] manifest)
  std::string montage;       // empty: use the manifest's montage field
  std::string edge_policy = "complete";
  ShiftOperatorKind shift = ShiftOperatorKind::NormalizedAdjacency;
  ModelSpec model;
  std::vector<double> augment_snr_db;  // empty: no augmentation
  TrainConfig train;
};

/// Parses and validates a config document; unknown sections or keys are
/// errors. `origin` names the file in diagnostics.
ExperimentConfig experiment_from_doc(const ConfigDoc& doc,
                                     const std::string& origin);
ExperimentConfig load_experiment_config(const std::string& path);

/// Resolved config as canonical JSON text (stable key order, 2-space indent).
std::string experiment_to_json(const ExperimentConfig& cfg);

/// Inverse of experiment_to_json, for rereading a run's config.json.
ExperimentConfig experiment_from_json(const std::string& json_text,
                                      const std::string& origin);

/// FNV-1a 64 over the canonical JSON with the seed removed, as a hex string;
/// runs differing only by seed land in the same table cell.
std::string config_hash(const ExperimentConfig& cfg);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace eegraph
