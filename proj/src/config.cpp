#include "endemic/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "endemic/rng.hpp"

namespace endemic {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> kDefaults = {
      {"seed", "42"},
      {"dims.K", "512"},
      {"dims.G", "768"},
      {"dims.C", "128"},
      {"dims.k", "256"},
      {"dims.N", "64"},
      {"dims.E", "300"},
      {"vocab.max_size", "20000"},
      {"knowledge.epsilon", "0.8"},
      {"knowledge.mode", "train_time"},
      {"knowledge.similarity_sorted", "false"},
      {"graph.teleport", "0.3"},
      {"graph.layers", "2"},
      {"graph.walk_length", "5"},
      {"graph.window", "2"},
      {"graph.negatives", "5"},
      {"graph.walks_per_node", "10"},
      {"graph.epochs", "30"},
      {"graph.lr", "0.01"},
      {"graph.include_label_tag", "false"},
      {"graph.sample_size", "0"},
      {"fusion.p_drop", "0.2"},
      {"loss.lambda_ml", "1.0"},
      {"loss.lambda_at", "1.0"},
      {"loss.lambda_vat", "1.0"},
      {"loss.eps_at", "2.0"},
      {"loss.eps_vat", "2.0"},
      {"loss.xi", "1e-6"},
      {"loss.power_iters", "1"},
      {"train.epochs", "10"},
      {"train.batch_size", "32"},
      {"train.lr", "0.001"},
      {"train.at_all_inputs", "false"},
      {"splits.tau_label", "0.8"},
      {"splits.tau_cluster", "0.8"},
      {"splits.max_cluster_size", "20"},
      {"splits.max_age_seconds", "86400"},
      {"splits.general_test_fraction", "0.2"},
      {"eval.split", "general_test"},
      {"eval.mask_detect", "false"},
  };
  return kDefaults;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ExperimentConfig::ExperimentConfig() : values_(defaults()) {}

ExperimentConfig ExperimentConfig::from_defaults() {
  return ExperimentConfig();
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) +
                       ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = value;
  }
  return cfg;
}

void ExperimentConfig::set_override(const std::string& key,
                                    const std::string& value) {
  values_[key] = value;
  overrides_.emplace_back(key, value);
}

bool ExperimentConfig::has(const std::string& key) const {
  return values_.count(key) > 0;
}

std::string ExperimentConfig::get_str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("missing config key: " + key);
  return it->second;
}

std::string ExperimentConfig::get_str(const std::string& key,
                                      const std::string& dflt) const {
  auto it = values_.find(key);
  return it == values_.end() ? dflt : it->second;
}

int ExperimentConfig::get_int(const std::string& key) const {
  try {
    return std::stoi(get_str(key));
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception&) {
    throw UsageError("config key " + key + " is not an integer: " +
                     get_str(key));
  }
}

std::int64_t ExperimentConfig::get_i64(const std::string& key) const {
  try {
    return std::stoll(get_str(key));
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception&) {
    throw UsageError("config key " + key + " is not an integer: " +
                     get_str(key));
  }
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key) const {
  try {
    return std::stoull(get_str(key));
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception&) {
    throw UsageError("config key " + key + " is not an integer: " +
                     get_str(key));
  }
}

double ExperimentConfig::get_double(const std::string& key) const {
  try {
    return std::stod(get_str(key));
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception&) {
    throw UsageError("config key " + key + " is not a number: " +
                     get_str(key));
  }
}

bool ExperimentConfig::get_bool(const std::string& key) const {
  const std::string v = get_str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("config key " + key + " is not a boolean: " + v);
}

namespace {

std::string resolve_data_root(const std::string& value) {
  if (value.empty() || value.front() == '/') return value;
  const char* root = std::getenv("ENDEMIC_DATA_ROOT");
  if (!root || !*root) return value;
  return std::string(root) + "/" + value;
}

}  // namespace

std::string ExperimentConfig::get_path(const std::string& key) const {
  return resolve_data_root(get_str(key));
}

std::string ExperimentConfig::get_path(const std::string& key,
                                       const std::string& dflt) const {
  return resolve_data_root(get_str(key, dflt));
}

std::string ExperimentConfig::require_input_path(
    const std::string& key) const {
  const std::string path = get_path(key);
  if (!std::filesystem::exists(path))
    throw UsageError("config key " + key + " points to missing path: " + path);
  return path;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : values_) {
    const std::string line = k + "=" + v + "\n";
    h = fnv1a64(line.data(), line.size(), h);
  }
  return hex64(h);
}

void ExperimentConfig::validate() const {
  for (const char* key :
       {"dims.K", "dims.G", "dims.C", "dims.k", "dims.N", "dims.E"}) {
    if (get_int(key) <= 0)
      throw UsageError(std::string(key) + " must be positive");
  }
  if (get_int("dims.K") % 2 != 0) throw UsageError("dims.K must be even");
  const double eps = get_double("knowledge.epsilon");
  if (eps <= 0.0 || eps >= 1.0)
    throw UsageError("knowledge.epsilon must be in (0,1)");
  const double tp = get_double("graph.teleport");
  if (tp < 0.0 || tp > 1.0)
    throw UsageError("graph.teleport must be in [0,1]");
  const double pd = get_double("fusion.p_drop");
  if (pd < 0.0 || pd >= 1.0)
    throw UsageError("fusion.p_drop must be in [0,1)");
  for (const char* key : {"loss.eps_at", "loss.eps_vat", "loss.xi"}) {
    if (get_double(key) <= 0.0)
      throw UsageError(std::string(key) + " must be positive");
  }
  for (const char* key :
       {"loss.lambda_ml", "loss.lambda_at", "loss.lambda_vat"}) {
    if (get_double(key) < 0.0)
      throw UsageError(std::string(key) + " must be nonnegative");
  }
  if (get_int("loss.power_iters") < 1)
    throw UsageError("loss.power_iters must be >= 1");
}

}  // namespace endemic
