#include "vsc/net/gradcheck.hpp"

#include <cmath>

namespace vsc::net {

namespace {

double eval(const ScalarFn& fn, const std::vector<Tensor>& inputs) {
  Graph g;
  std::vector<Value> leaves(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) leaves[i] = g.leaf(inputs[i], true);
  const Value y = fn(g, leaves);
  const Tensor& t = g.value(y);
  if (t.rows != 1 || t.cols != 1)
    fail(ErrorCategory::InvalidArgument, "grad_check: fn must return a scalar");
  return t.v[0];
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& fn, const std::vector<Tensor>& inputs,
                           int probes, std::uint64_t seed) {
  if (inputs.empty()) fail(ErrorCategory::EmptyInput, "grad_check: no inputs");

  // One analytic pass.
  Graph g;
  std::vector<Value> leaves(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) leaves[i] = g.leaf(inputs[i], true);
  const Value y = fn(g, leaves);
  if (g.value(y).rows != 1 || g.value(y).cols != 1)
    fail(ErrorCategory::InvalidArgument, "grad_check: fn must return a scalar");
  g.backward(y);
  std::vector<Tensor> analytic(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) analytic[i] = g.grad(leaves[i]);

  std::size_t total_coords = 0;
  for (const Tensor& t : inputs) total_coords += t.size();
  if (total_coords == 0) fail(ErrorCategory::EmptyInput, "grad_check: empty inputs");

  Rng rng(seed);
  GradCheckResult res;
  res.probes = probes;
  std::vector<Tensor> work = inputs;
  for (int p = 0; p < probes; ++p) {
    std::size_t flat = std::size_t(rng.uniform_index(total_coords));
    std::size_t ti = 0;
    while (flat >= work[ti].size()) {
      flat -= work[ti].size();
      ++ti;
    }
    const double x0 = work[ti].v[flat];
    const double h = 1e-5 * (1.0 + std::abs(x0));

    work[ti].v[flat] = x0 + h;
    const double f_plus = eval(fn, work);
    work[ti].v[flat] = x0 - h;
    const double f_minus = eval(fn, work);
    work[ti].v[flat] = x0;

    const double numeric = (f_plus - f_minus) / (2.0 * h);
    const double a = analytic[ti].v[flat];
    const double abs_err = std::abs(a - numeric);
    const double rel_err =
        abs_err / std::max({1.0, std::abs(a), std::abs(numeric)});
    res.max_abs_err = std::max(res.max_abs_err, abs_err);
    res.max_rel_err = std::max(res.max_rel_err, rel_err);
  }
  return res;
}

}  // namespace vsc::net
