#pragma once

// Scalar function of one non-negative argument, used for radius-dependent
// constants such as delta(r) and g(r).
//
// Text forms:
//   "0.3"                 constant
//   "const:0.3"           constant
//   "linear:0.01"         0.01 * r
//   "table:0:0,1:0.2"     piecewise linear through (r, value) knots,
//                         constant beyond the end knots

#include <string>
#include <utility>
#include <vector>

namespace altmax {

class ScalarMap {
 public:
  enum class Kind { Constant, Linear, Table };

  ScalarMap() = default;
  static ScalarMap constant(double c);
  static ScalarMap linear(double slope);
  static ScalarMap table(std::vector<std::pair<double, double>> knots);
  static ScalarMap parse(const std::string& text);

  double operator()(double r) const;
  Kind kind() const { return kind_; }
  // Knot abscissae for tables, empty otherwise.
  std::vector<double> grid() const;
  bool non_negative() const;
  bool non_decreasing() const;
  std::string to_string() const;

 private:
  Kind kind_ = Kind::Constant;
  double c_ = 0.0;
  std::vector<std::pair<double, double>> knots_;
};

}  // namespace altmax
