#pragma once

#include <string>
#include <vector>

#include "ecgraph/crtnet.hpp"

namespace ecgraph {

// Central-difference verification of the analytic gradients.
//
// Each registered case builds a scalar loss from seeded random inputs and
// parameters, runs backward(), then perturbs every coordinate by +/-eps and
// compares. Relative error uses max(|analytic|, |numeric|, floor) in the
// denominator so near-zero entries stay meaningful.

struct GradCheckResult {
  std::string op;
  double max_rel_err = 0.0;
  std::size_t n_coords = 0;   // coordinates compared
  std::string worst_param;    // tensor holding the worst coordinate
  std::size_t worst_index = 0;
};

// Registered case names, in run order.
std::vector<std::string> grad_check_ops();

// Runs one case. UnknownOp for names not in the registry.
GradCheckResult grad_check(const std::string& op, std::uint64_t seed, double eps = 1e-5,
                           double denom_floor = 1e-6);

// Runs every registered case.
std::vector<GradCheckResult> grad_check_all(std::uint64_t seed, double eps = 1e-5);

} // namespace ecgraph
