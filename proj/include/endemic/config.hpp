#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace endemic {

// Usage-level failures (unknown key/value, missing input path) map to exit
// code 2 rather than 1.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Flat dotted-key configuration: one "key = value" per line, '#' comments.
// Overrides layer on top of the file values and both are recorded.
class ExperimentConfig {
 public:
  ExperimentConfig();

  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig from_defaults();

  void set_override(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& dflt) const;
  int get_int(const std::string& key) const;
  std::int64_t get_i64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;

  // Path-valued keys resolve relative values against $ENDEMIC_DATA_ROOT
  // when that variable is set.
  std::string get_path(const std::string& key) const;
  std::string get_path(const std::string& key, const std::string& dflt) const;

  // Input path that must exist; missing -> UsageError.
  std::string require_input_path(const std::string& key) const;

  // FNV-1a over the canonical sorted "key=value" lines (file + overrides).
  std::string hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::vector<std::pair<std::string, std::string>>& overrides() const {
    return overrides_;
  }

  void validate() const;  // dims positive, K even, rates in range

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, std::string>> overrides_;
};

}  // namespace endemic
