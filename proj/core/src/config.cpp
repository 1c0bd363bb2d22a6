#include "eegraph/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "eegraph/errors.hpp"
#include "eegraph/montage.hpp"
#include "json.hpp"

namespace eegraph {

namespace {

[[noreturn]] void config_error(const std::string& origin, std::size_t line,
                               const std::string& what) {
  throw DataError(origin + ":" + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Drops a '#' comment, honoring double-quoted strings.
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\' && i + 1 < s.size()) {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '#') {
      return s.substr(0, i);
    }
  }
  return s;
}

bool parse_number(const std::string& text, double* out) {
  if (text.empty()) return false;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    return false;
  }
  if (used != text.size()) return false;
  *out = v;
  return true;
}

bool integer_literal(const std::string& text) {
  std::size_t i = (text[0] == '+' || text[0] == '-') ? 1 : 0;
  if (i == text.size()) return false;
  for (; i < text.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
  return true;
}

ConfigValue parse_value(const std::string& text, const std::string& origin,
                        std::size_t line) {
  if (text.empty()) config_error(origin, line, "missing value");
  if (text.front() == '"') {
    std::string out;
    bool closed = false;
    for (std::size_t i = 1; i < text.size(); ++i) {
      char c = text[i];
      if (c == '\\') {
        if (i + 1 >= text.size())
          config_error(origin, line, "dangling escape in string");
        char n = text[++i];
        if (n == '"' || n == '\\')
          out.push_back(n);
        else
          config_error(origin, line, "unsupported escape in string");
      } else if (c == '"') {
        if (i + 1 != text.size())
          config_error(origin, line, "trailing characters after string");
        closed = true;
        break;
      } else {
        out.push_back(c);
      }
    }
    if (!closed) config_error(origin, line, "unterminated string");
    return ConfigValue{out};
  }
  if (text == "true") return ConfigValue{true};
  if (text == "false") return ConfigValue{false};
  if (text.front() == '[') {
    if (text.back() != ']') config_error(origin, line, "unterminated array");
    std::string body = trim(text.substr(1, text.size() - 2));
    std::vector<double> values;
    if (!body.empty()) {
      std::size_t start = 0;
      while (start <= body.size()) {
        std::size_t comma = body.find(',', start);
        std::string item =
            trim(comma == std::string::npos ? body.substr(start)
                                            : body.substr(start, comma - start));
        double v = 0.0;
        if (!parse_number(item, &v))
          config_error(origin, line, "expected number in array, got '" + item + "'");
        values.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
    return ConfigValue{values};
  }
  double v = 0.0;
  if (!parse_number(text, &v))
    config_error(origin, line, "cannot parse value '" + text + "'");
  if (integer_literal(text))
    return ConfigValue{static_cast<std::int64_t>(std::llround(v))};
  return ConfigValue{v};
}

[[noreturn]] void type_error(const std::string& where, const char* wanted) {
  throw DataError("config key " + where + ": expected " + wanted);
}

}  // namespace

const std::string& ConfigValue::as_string(const std::string& where) const {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  type_error(where, "string");
}

double ConfigValue::as_number(const std::string& where) const {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v))
    return static_cast<double>(*i);
  type_error(where, "number");
}

std::int64_t ConfigValue::as_integer(const std::string& where) const {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (const auto* d = std::get_if<double>(&v)) {
    if (*d == std::floor(*d) && std::isfinite(*d))
      return static_cast<std::int64_t>(*d);
  }
  type_error(where, "integer");
}

bool ConfigValue::as_bool(const std::string& where) const {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  type_error(where, "boolean");
}

const std::vector<double>& ConfigValue::as_array(const std::string& where) const {
  if (const auto* a = std::get_if<std::vector<double>>(&v)) return *a;
  type_error(where, "array of numbers");
}

ConfigDoc parse_config_text(const std::string& text, const std::string& origin) {
  ConfigDoc doc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        config_error(origin, lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) config_error(origin, lineno, "empty section name");
      doc[section];
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      config_error(origin, lineno, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) config_error(origin, lineno, "empty key");
    if (section.empty())
      config_error(origin, lineno, "key outside any [section]");
    std::string value = trim(line.substr(eq + 1));
    auto& sec = doc[section];
    if (sec.count(key))
      config_error(origin, lineno, "duplicate key '" + key + "'");
    sec.emplace(key, parse_value(value, origin, lineno));
  }
  return doc;
}

ConfigDoc load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

namespace {

std::size_t positive_size(const ConfigValue& v, const std::string& where) {
  std::int64_t n = v.as_integer(where);
  if (n < 1) throw DataError("config key " + where + ": must be at least 1");
  return static_cast<std::size_t>(n);
}

double nonnegative(const ConfigValue& v, const std::string& where) {
  double d = v.as_number(where);
  if (!(d >= 0.0) || !std::isfinite(d))
    throw DataError("config key " + where + ": must be a finite number >= 0");
  return d;
}

void apply_dataset(ExperimentConfig& cfg, const std::string& key,
                   const ConfigValue& v) {
  if (key == "manifest")
    cfg.manifest = v.as_string("dataset.manifest");
  else
    throw DataError("unknown config key dataset." + key);
}

void apply_graph(ExperimentConfig& cfg, const std::string& key,
                 const ConfigValue& v) {
  if (key == "montage") {
    cfg.montage = v.as_string("graph.montage");
  } else if (key == "edge_policy") {
    cfg.edge_policy = v.as_string("graph.edge_policy");
    parse_edge_policy(cfg.edge_policy);  // validate eagerly
  } else if (key == "shift") {
    cfg.shift = parse_shift_kind(v.as_string("graph.shift"));
    cfg.model.shift = cfg.shift;
  } else {
    throw DataError("unknown config key graph." + key);
  }
}

void apply_model(ExperimentConfig& cfg, const std::string& key,
                 const ConfigValue& v) {
  ModelSpec& m = cfg.model;
  if (key == "conv")
    m.conv = parse_conv_kind(v.as_string("model.conv"));
  else if (key == "depth")
    m.depth = positive_size(v, "model.depth");
  else if (key == "hidden")
    m.hidden = positive_size(v, "model.hidden");
  else if (key == "gin_mlp_hidden")
    m.gin_mlp_hidden = positive_size(v, "model.gin_mlp_hidden");
  else if (key == "poly_taps")
    m.poly_taps = positive_size(v, "model.poly_taps");
  else if (key == "pool")
    m.pool = parse_pool_kind(v.as_string("model.pool"));
  else if (key == "sag_rho")
    m.sag_rho = v.as_number("model.sag_rho");
  else if (key == "sortpool_rho")
    m.sortpool_rho = positive_size(v, "model.sortpool_rho");
  else if (key == "sortpool_filters")
    m.sortpool_filters = positive_size(v, "model.sortpool_filters");
  else if (key == "sortpool_wl_order")
    m.sortpool_wl_order = v.as_bool("model.sortpool_wl_order");
  else if (key == "set2set_steps")
    m.set2set_steps = positive_size(v, "model.set2set_steps");
  else if (key == "head_hidden")
    m.head_hidden = positive_size(v, "model.head_hidden");
  else if (key == "compress")
    m.compress = v.as_bool("model.compress");
  else
    throw DataError("unknown config key model." + key);
}

void apply_augment(ExperimentConfig& cfg, const std::string& key,
                   const ConfigValue& v) {
  if (key == "snr_db") {
    cfg.augment_snr_db = v.as_array("augment.snr_db");
    for (double level : cfg.augment_snr_db)
      if (!std::isfinite(level))
        throw DataError("config key augment.snr_db: levels must be finite");
  } else {
    throw DataError("unknown config key augment." + key);
  }
}

void apply_train(ExperimentConfig& cfg, const std::string& key,
                 const ConfigValue& v) {
  TrainConfig& t = cfg.train;
  if (key == "batch_size")
    t.batch_size = positive_size(v, "train.batch_size");
  else if (key == "epochs")
    t.epochs = positive_size(v, "train.epochs");
  else if (key == "lr") {
    t.lr = v.as_number("train.lr");
    if (!(t.lr > 0.0) || !std::isfinite(t.lr))
      throw DataError("config key train.lr: must be a finite number > 0");
  } else if (key == "lr_halving_period_epochs")
    t.lr_halving_period_epochs = positive_size(v, "train.lr_halving_period_epochs");
  else if (key == "seed")
    t.seed = static_cast<std::uint64_t>(v.as_integer("train.seed"));
  else if (key == "alpha")
    t.reg.alpha = nonnegative(v, "train.alpha");
  else if (key == "beta")
    t.reg.beta = nonnegative(v, "train.beta");
  else
    throw DataError("unknown config key train." + key);
}

}  // namespace

ExperimentConfig experiment_from_doc(const ConfigDoc& doc,
                                     const std::string& origin) {
  ExperimentConfig cfg;
  for (const auto& [section, entries] : doc) {
    for (const auto& [key, value] : entries) {
      if (section == "dataset")
        apply_dataset(cfg, key, value);
      else if (section == "graph")
        apply_graph(cfg, key, value);
      else if (section == "model")
        apply_model(cfg, key, value);
      else if (section == "augment")
        apply_augment(cfg, key, value);
      else if (section == "train")
        apply_train(cfg, key, value);
      else
        throw DataError(origin + ": unknown config section [" + section + "]");
    }
  }
  if (!(cfg.model.sag_rho > 0.0) || cfg.model.sag_rho > 1.0)
    throw DataError("config key model.sag_rho: must lie in (0, 1]");
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_from_doc(load_config_file(path), path);
}

std::string experiment_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["dataset"]["manifest"] = cfg.manifest;
  j["graph"]["montage"] = cfg.montage;
  j["graph"]["edge_policy"] = cfg.edge_policy;
  j["graph"]["shift"] = to_string(cfg.shift);
  auto& m = j["model"];
  m["conv"] = to_string(cfg.model.conv);
  m["depth"] = cfg.model.depth;
  m["hidden"] = cfg.model.hidden;
  m["gin_mlp_hidden"] = cfg.model.gin_mlp_hidden;
  m["poly_taps"] = cfg.model.poly_taps;
  m["pool"] = to_string(cfg.model.pool);
  m["sag_rho"] = cfg.model.sag_rho;
  m["sortpool_rho"] = cfg.model.sortpool_rho;
  m["sortpool_filters"] = cfg.model.sortpool_filters;
  m["sortpool_wl_order"] = cfg.model.sortpool_wl_order;
  m["set2set_steps"] = cfg.model.set2set_steps;
  m["head_hidden"] = cfg.model.head_hidden;
  m["compress"] = cfg.model.compress;
  j["augment"]["snr_db"] = cfg.augment_snr_db;
  auto& t = j["train"];
  t["batch_size"] = cfg.train.batch_size;
  t["epochs"] = cfg.train.epochs;
  t["lr"] = cfg.train.lr;
  t["lr_halving_period_epochs"] = cfg.train.lr_halving_period_epochs;
  t["alpha"] = cfg.train.reg.alpha;
  t["beta"] = cfg.train.reg.beta;
  t["seed"] = cfg.train.seed;
  return j.dump(2) + "\n";
}

ExperimentConfig experiment_from_json(const std::string& json_text,
                                      const std::string& origin) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(origin + ": " + e.what());
  }
  ExperimentConfig cfg;
  try {
    cfg.manifest = j.at("dataset").at("manifest").get<std::string>();
    cfg.montage = j.at("graph").at("montage").get<std::string>();
    cfg.edge_policy = j.at("graph").at("edge_policy").get<std::string>();
    cfg.shift = parse_shift_kind(j.at("graph").at("shift").get<std::string>());
    const auto& m = j.at("model");
    cfg.model.conv = parse_conv_kind(m.at("conv").get<std::string>());
    cfg.model.depth = m.at("depth").get<std::size_t>();
    cfg.model.hidden = m.at("hidden").get<std::size_t>();
    cfg.model.gin_mlp_hidden = m.at("gin_mlp_hidden").get<std::size_t>();
    cfg.model.poly_taps = m.at("poly_taps").get<std::size_t>();
    cfg.model.shift = cfg.shift;
    cfg.model.pool = parse_pool_kind(m.at("pool").get<std::string>());
    cfg.model.sag_rho = m.at("sag_rho").get<double>();
    cfg.model.sortpool_rho = m.at("sortpool_rho").get<std::size_t>();
    cfg.model.sortpool_filters = m.at("sortpool_filters").get<std::size_t>();
    cfg.model.sortpool_wl_order = m.at("sortpool_wl_order").get<bool>();
    cfg.model.set2set_steps = m.at("set2set_steps").get<std::size_t>();
    cfg.model.head_hidden = m.at("head_hidden").get<std::size_t>();
    cfg.model.compress = m.at("compress").get<bool>();
    cfg.augment_snr_db =
        j.at("augment").at("snr_db").get<std::vector<double>>();
    const auto& t = j.at("train");
    cfg.train.batch_size = t.at("batch_size").get<std::size_t>();
    cfg.train.epochs = t.at("epochs").get<std::size_t>();
    cfg.train.lr = t.at("lr").get<double>();
    cfg.train.lr_halving_period_epochs =
        t.at("lr_halving_period_epochs").get<std::size_t>();
    cfg.train.reg.alpha = t.at("alpha").get<double>();
    cfg.train.reg.beta = t.at("beta").get<double>();
    cfg.train.seed = t.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(origin + ": malformed config: " + e.what());
  }
  return cfg;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& cfg) {
  auto j = nlohmann::ordered_json::parse(experiment_to_json(cfg));
  j["train"].erase("seed");
  std::uint64_t h = fnv1a64(j.dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace eegraph
