#pragma once

// Numerical partial maximizer for one block with the other block frozen.
// Projected gradient ascent: Barzilai-Borwein step proposals, Armijo
// backtracking, and the model's retraction after every step.

#include "altmax/model.hpp"

namespace altmax {

struct AscentOptions {
  double grad_tol = 1e-9;    // stop when |tangent grad| <= grad_tol * (1 + |L|)
  int max_iter = 10000;
  int max_restarts = 5;      // perturbed restarts after a failed attempt
  double restart_scale = 1e-2;
};

struct AscentResult {
  VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
};

class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, ParameterPoint last) : Error(what), last_(std::move(last)) {}
  const ParameterPoint& last_iterate() const { return last_; }

 private:
  ParameterPoint last_;
};

// Maximizes L over `block` starting from the block's value in `base`.
// Throws SolverFailure carrying the best iterate if every attempt fails.
AscentResult maximize_block(const Model& model, Block block, const ParameterPoint& base,
                            const AscentOptions& opt);

}  // namespace altmax
