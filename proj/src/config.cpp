#include "altmax/config.hpp"

#include "altmax/stat_core.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace altmax {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (trim(s.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw DomainError("config key '" + key + "': cannot parse '" + s + "' as a number");
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DomainError("config line " + std::to_string(lineno) + " has no '='");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw DomainError("config line " + std::to_string(lineno) + " has an empty key");
    c.values_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::string* KeyValueConfig::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  used_[key] = true;
  return &it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& def) const {
  const std::string* v = find(key);
  return v ? *v : def;
}

double KeyValueConfig::get_double(const std::string& key, double def) const {
  const std::string* v = find(key);
  if (!v) return def;
  if (*v == "inf") return INFINITY;
  return to_double(key, *v);
}

int KeyValueConfig::get_int(const std::string& key, int def) const {
  const std::string* v = find(key);
  if (!v) return def;
  const double d = to_double(key, *v);
  if (d != static_cast<int>(d)) throw DomainError("config key '" + key + "' must be an integer");
  return static_cast<int>(d);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t def) const {
  const std::string* v = find(key);
  if (!v) return def;
  try {
    size_t pos = 0;
    const auto x = std::stoull(*v, &pos, 0);
    if (pos == v->size()) return x;
  } catch (const std::exception&) {
  }
  throw DomainError("config key '" + key + "' must be an unsigned integer");
}

bool KeyValueConfig::get_bool(const std::string& key, bool def) const {
  const std::string* v = find(key);
  if (!v) return def;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw DomainError("config key '" + key + "' must be a boolean");
}

std::vector<double> KeyValueConfig::get_list(const std::string& key,
                                             const std::vector<double>& def) const {
  const std::string* v = find(key);
  if (!v) return def;
  std::vector<double> out;
  for (const auto& s : split(*v, ',')) out.push_back(to_double(key, s));
  return out;
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key, const std::vector<int>& def) const {
  const std::string* v = find(key);
  if (!v) return def;
  std::vector<int> out;
  for (const auto& s : split(*v, ',')) {
    const double d = to_double(key, s);
    if (d != static_cast<int>(d)) throw DomainError("config key '" + key + "' must list integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

Eigen::MatrixXd KeyValueConfig::get_matrix(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) return {};
  const auto rows = split(*v, ';');
  std::vector<std::vector<double>> vals;
  for (const auto& r : rows) {
    std::vector<double> row;
    for (const auto& s : split(r, ',')) row.push_back(to_double(key, s));
    if (!vals.empty() && row.size() != vals.front().size())
      throw DomainError("config key '" + key + "': ragged matrix");
    vals.push_back(std::move(row));
  }
  Eigen::MatrixXd M(vals.size(), vals.empty() ? 0 : vals.front().size());
  for (size_t i = 0; i < vals.size(); ++i)
    for (size_t j = 0; j < vals[i].size(); ++j) M(i, j) = vals[i][j];
  return M;
}

std::vector<std::string> KeyValueConfig::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

}  // namespace altmax
