#pragma once

#include <functional>

#include "vsc/net/graph.hpp"

namespace vsc::net {

// Builds the graph from the given leaf tensors (all with gradients enabled)
// and must return a scalar.
using ScalarFn = std::function<Value(Graph&, const std::vector<Value>&)>;

struct GradCheckResult {
  double max_rel_err = 0;
  double max_abs_err = 0;
  int probes = 0;
};

// Central finite differences with step h = 1e-5 * (1 + |x|) on a seeded random
// subsample of input coordinates. The error is |analytic - numeric| relative
// to max(1, |analytic|, |numeric|).
GradCheckResult grad_check(const ScalarFn& fn, const std::vector<Tensor>& inputs,
                           int probes, std::uint64_t seed);

}  // namespace vsc::net
