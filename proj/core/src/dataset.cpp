#include "eegraph/dataset.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "eegraph/errors.hpp"
#include "eegraph/rng.hpp"
#include "json.hpp"

namespace eegraph {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

Tensor TrialSet::trial(std::size_t t) const {
  if (t >= n_trials)
    throw std::out_of_range("TrialSet::trial: index " + std::to_string(t) +
                            " of " + std::to_string(n_trials));
  const double* src = trial_data(t);
  return Tensor::from_vector(
      {n_channels, n_samples},
      std::vector<double>(src, src + n_channels * n_samples));
}

namespace {

std::vector<char> read_file(const fs::path& path, const char* what) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw DataError(std::string("cannot open ") + what + ": " + path.string());
  is.seekg(0, std::ios::end);
  const auto len = is.tellg();
  is.seekg(0);
  std::vector<char> buf(static_cast<std::size_t>(len));
  is.read(buf.data(), len);
  if (!is) throw DataError(std::string("short read of ") + what + ": " +
                           path.string());
  return buf;
}

std::size_t require_count(const json& j, const char* key,
                          const std::string& manifest) {
  if (!j.contains(key))
    throw DataError("manifest " + manifest + " is missing field '" + key + "'");
  if (!j[key].is_number_unsigned() || j[key].get<std::uint64_t>() == 0)
    throw DataError("manifest " + manifest + " field '" + key +
                    "' must be a positive integer");
  return j[key].get<std::size_t>();
}

}  // namespace

TrialSet load_trialset(const std::string& manifest_path) {
  const fs::path mpath(manifest_path);
  std::ifstream is(mpath);
  if (!is) throw DataError("cannot open manifest: " + manifest_path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw DataError("malformed manifest JSON in " + manifest_path + ": " +
                    e.what());
  }

  if (j.contains("version")) {
    const auto v = j["version"];
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() != 1)
      throw DataError("unknown manifest version " + v.dump() + " in " +
                      manifest_path + " (this reader supports version 1)");
  }

  TrialSet ts;
  ts.name = j.value("name", "");
  ts.n_trials = require_count(j, "n_trials", manifest_path);
  ts.n_channels = require_count(j, "n_channels", manifest_path);
  ts.n_samples = require_count(j, "n_samples", manifest_path);
  ts.n_classes = require_count(j, "n_classes", manifest_path);
  if (!j.contains("sample_rate_hz") || !j["sample_rate_hz"].is_number())
    throw DataError("manifest " + manifest_path +
                    " is missing numeric 'sample_rate_hz'");
  ts.sample_rate_hz = j["sample_rate_hz"].get<double>();
  if (!(ts.sample_rate_hz > 0.0))
    throw DataError("manifest " + manifest_path +
                    ": sample_rate_hz must be positive");
  if (!j.contains("montage") || !j.contains("payload") || !j.contains("labels"))
    throw DataError("manifest " + manifest_path +
                    " needs 'montage', 'payload' and 'labels' fields");
  ts.montage_ref = j["montage"].get<std::string>();

  const fs::path dir = mpath.parent_path();
  const auto payload =
      read_file(dir / j["payload"].get<std::string>(), "payload");
  const std::size_t values = ts.n_trials * ts.n_channels * ts.n_samples;
  if (payload.size() != values * sizeof(float))
    throw DataError("payload size mismatch for " + manifest_path +
                    ": expected " + std::to_string(values * sizeof(float)) +
                    " bytes (" + std::to_string(ts.n_trials) + "x" +
                    std::to_string(ts.n_channels) + "x" +
                    std::to_string(ts.n_samples) + " f32), got " +
                    std::to_string(payload.size()));
  ts.data.resize(values);
  for (std::size_t i = 0; i < values; ++i) {
    float f;
    std::memcpy(&f, payload.data() + i * sizeof(float), sizeof(float));
    if (!std::isfinite(f))
      throw DataError("payload of " + manifest_path +
                      " contains a non-finite value at offset " +
                      std::to_string(i));
    ts.data[i] = static_cast<double>(f);
  }

  const auto labels = read_file(dir / j["labels"].get<std::string>(), "labels");
  if (labels.size() != ts.n_trials * sizeof(std::uint16_t))
    throw DataError("labels size mismatch for " + manifest_path +
                    ": expected " +
                    std::to_string(ts.n_trials * sizeof(std::uint16_t)) +
                    " bytes (u16 per trial), got " +
                    std::to_string(labels.size()));
  ts.labels.resize(ts.n_trials);
  for (std::size_t i = 0; i < ts.n_trials; ++i) {
    std::uint16_t v;
    std::memcpy(&v, labels.data() + i * sizeof(std::uint16_t), sizeof(v));
    if (v >= ts.n_classes)
      throw DataError("label " + std::to_string(v) + " at trial " +
                      std::to_string(i) + " is outside [0, " +
                      std::to_string(ts.n_classes) + ") in " + manifest_path);
    ts.labels[i] = static_cast<int>(v);
  }
  return ts;
}

void save_trialset(const TrialSet& ts, const std::string& manifest_path) {
  const fs::path mpath(manifest_path);
  const fs::path dir = mpath.parent_path();
  const std::string stem = mpath.stem().string();
  const std::string payload_name = stem + ".f32";
  const std::string labels_name = stem + ".labels";

  {
    std::ofstream os(dir / payload_name, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot write payload next to " + manifest_path);
    for (double d : ts.data) {
      const float f = static_cast<float>(d);
      os.write(reinterpret_cast<const char*>(&f), sizeof(f));
    }
    if (!os) throw DataError("short payload write for " + manifest_path);
  }
  {
    std::ofstream os(dir / labels_name, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot write labels next to " + manifest_path);
    for (int l : ts.labels) {
      const std::uint16_t v = static_cast<std::uint16_t>(l);
      os.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    if (!os) throw DataError("short labels write for " + manifest_path);
  }

  json j;
  j["version"] = 1;
  j["name"] = ts.name;
  j["n_trials"] = ts.n_trials;
  j["n_channels"] = ts.n_channels;
  j["n_samples"] = ts.n_samples;
  j["n_classes"] = ts.n_classes;
  j["sample_rate_hz"] = ts.sample_rate_hz;
  j["montage"] = ts.montage_ref;
  j["payload"] = payload_name;
  j["labels"] = labels_name;
  std::ofstream os(mpath, std::ios::trunc);
  if (!os) throw DataError("cannot write manifest: " + manifest_path);
  os << j.dump(2) << "\n";
  if (!os) throw DataError("short manifest write: " + manifest_path);
}

std::pair<std::size_t, std::size_t> split_sizes(std::size_t n_trials) {
  const std::size_t train = n_trials * 8 / 10;
  return {train, n_trials - train};
}

TrialSet subset(const TrialSet& ts, const std::vector<std::size_t>& indices) {
  TrialSet out;
  out.name = ts.name;
  out.n_trials = indices.size();
  out.n_channels = ts.n_channels;
  out.n_samples = ts.n_samples;
  out.n_classes = ts.n_classes;
  out.sample_rate_hz = ts.sample_rate_hz;
  out.montage_ref = ts.montage_ref;
  const std::size_t stride = ts.n_channels * ts.n_samples;
  out.data.resize(indices.size() * stride);
  out.labels.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= ts.n_trials)
      throw std::out_of_range("subset: trial index out of range");
    std::memcpy(out.data.data() + i * stride, ts.trial_data(indices[i]),
                stride * sizeof(double));
    out.labels[i] = ts.labels[indices[i]];
  }
  return out;
}

std::pair<TrialSet, TrialSet> split(const TrialSet& ts, std::uint64_t seed) {
  if (ts.n_trials < 5)
    throw DataError("split: need at least 5 trials, have " +
                    std::to_string(ts.n_trials));
  auto rng = make_rng(seed, "split");
  const auto perm = random_permutation(ts.n_trials, rng);
  const auto [n_train, n_val] = split_sizes(ts.n_trials);
  const std::vector<std::size_t> train_idx(perm.begin(),
                                           perm.begin() + n_train);
  const std::vector<std::size_t> val_idx(perm.begin() + n_train, perm.end());
  (void)n_val;
  return {subset(ts, train_idx), subset(ts, val_idx)};
}

}  // namespace eegraph
