#include "altmax/scalar_map.hpp"

#include "altmax/stat_core.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace altmax {

namespace {

double parse_double(const std::string& s) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw DomainError("cannot parse number '" + s + "'");
  }
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos != s.size()) throw DomainError("trailing characters in number '" + s + "'");
  return v;
}

}  // namespace

ScalarMap ScalarMap::constant(double c) {
  ScalarMap m;
  m.kind_ = Kind::Constant;
  m.c_ = c;
  return m;
}

ScalarMap ScalarMap::linear(double slope) {
  ScalarMap m;
  m.kind_ = Kind::Linear;
  m.c_ = slope;
  return m;
}

ScalarMap ScalarMap::table(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) throw DomainError("table map needs at least one knot");
  std::sort(knots.begin(), knots.end());
  for (size_t i = 1; i < knots.size(); ++i)
    if (knots[i].first == knots[i - 1].first) throw DomainError("table map has duplicate knots");
  ScalarMap m;
  m.kind_ = Kind::Table;
  m.knots_ = std::move(knots);
  return m;
}

ScalarMap ScalarMap::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return constant(parse_double(text));
  const std::string head = text.substr(0, colon);
  const std::string body = text.substr(colon + 1);
  if (head == "const") return constant(parse_double(body));
  if (head == "linear") return linear(parse_double(body));
  if (head == "table") {
    std::vector<std::pair<double, double>> knots;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto c = item.find(':');
      if (c == std::string::npos) throw DomainError("table knot '" + item + "' is not r:value");
      knots.emplace_back(parse_double(item.substr(0, c)), parse_double(item.substr(c + 1)));
    }
    return table(std::move(knots));
  }
  throw DomainError("unknown map kind '" + head + "'");
}

double ScalarMap::operator()(double r) const {
  switch (kind_) {
    case Kind::Constant: return c_;
    case Kind::Linear: return c_ * r;
    case Kind::Table: {
      if (r <= knots_.front().first) return knots_.front().second;
      if (r >= knots_.back().first) return knots_.back().second;
      auto it = std::upper_bound(knots_.begin(), knots_.end(), r,
                                 [](double v, const auto& k) { return v < k.first; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double t = (r - lo.first) / (hi.first - lo.first);
      return lo.second + t * (hi.second - lo.second);
    }
  }
  return 0.0;
}

std::vector<double> ScalarMap::grid() const {
  std::vector<double> g;
  for (const auto& k : knots_) g.push_back(k.first);
  return g;
}

bool ScalarMap::non_negative() const {
  switch (kind_) {
    case Kind::Constant:
    case Kind::Linear: return c_ >= 0.0;
    case Kind::Table:
      return std::all_of(knots_.begin(), knots_.end(), [](const auto& k) { return k.second >= 0.0; });
  }
  return false;
}

bool ScalarMap::non_decreasing() const {
  switch (kind_) {
    case Kind::Constant: return true;
    case Kind::Linear: return c_ >= 0.0;
    case Kind::Table:
      for (size_t i = 1; i < knots_.size(); ++i)
        if (knots_[i].second < knots_[i - 1].second) return false;
      return true;
  }
  return false;
}

std::string ScalarMap::to_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::Constant: os << "const:" << c_; break;
    case Kind::Linear: os << "linear:" << c_; break;
    case Kind::Table:
      os << "table:";
      for (size_t i = 0; i < knots_.size(); ++i)
        os << (i ? "," : "") << knots_[i].first << ':' << knots_[i].second;
      break;
  }
  return os.str();
}

}  // namespace altmax
