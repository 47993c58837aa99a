#pragma once

// Flat key-value configuration: one `key = value` per line, `#` starts a
// comment, blank lines are ignored. Lists are comma separated; matrices use
// `;` between rows, e.g. `F2 = 2,1;1,2`.

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace altmax {

class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& def) const;
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& def) const;
  // Empty matrix when absent.
  Eigen::MatrixXd get_matrix(const std::string& key) const;

  // Keys that were never read; used to reject typos.
  std::vector<std::string> unused() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  const std::string* find(const std::string& key) const;
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> used_;
};

}  // namespace altmax
