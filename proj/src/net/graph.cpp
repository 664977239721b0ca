#include "vsc/net/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vsc/spatial/kdtree.hpp"

namespace vsc::net {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

Value Graph::leaf(Tensor t, bool requires_grad) {
  return push(std::move(t), requires_grad, nullptr);
}

Value Graph::push(Tensor value, bool requires_grad, std::function<void(Graph&)> back) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Value{int(nodes_.size()) - 1};
}

void Graph::check(Value v) const {
  if (!v.valid() || v.id >= int(nodes_.size()))
    fail(ErrorCategory::Internal, "graph: invalid value handle");
}

Tensor& Graph::ensure_grad(int id) {
  Node& n = nodes_[id];
  if (n.grad.rows == 0) n.grad = Tensor::zeros(n.value.rows, n.value.cols);
  return n.grad;
}

const Tensor& Graph::grad(Value v) const {
  check(v);
  const Node& n = nodes_[v.id];
  if (n.grad.rows == 0) {
    static thread_local Tensor zero;
    zero = Tensor::zeros(n.value.rows, n.value.cols);
    return zero;
  }
  return n.grad;
}

void Graph::backward(Value root) {
  check(root);
  const Tensor& rv = nodes_[root.id].value;
  if (rv.rows != 1 || rv.cols != 1)
    fail(ErrorCategory::InvalidArgument, "backward: root must be a scalar");
  ensure_grad(root.id).v[0] = 1.0;
  for (int id = root.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.back && n.requires_grad && n.grad.rows != 0) n.back(*this);
  }
}

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

Value Graph::add(Value a, Value b) {
  check(a);
  check(b);
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (!ta.same_shape(tb)) fail(ErrorCategory::DimensionMismatch, "add: shape mismatch");
  Tensor out(ta.rows, ta.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = ta.v[i] + tb.v[i];
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a) || needs_grad(b), [a, b, out_id](Graph& g) {
    const Tensor& go = g.nodes_[out_id].grad;
    if (g.needs_grad(a)) {
      Tensor& ga = g.ensure_grad(a.id);
      for (std::size_t i = 0; i < go.size(); ++i) ga.v[i] += go.v[i];
    }
    if (g.needs_grad(b)) {
      Tensor& gb = g.ensure_grad(b.id);
      for (std::size_t i = 0; i < go.size(); ++i) gb.v[i] += go.v[i];
    }
  });
}

Value Graph::sub(Value a, Value b) {
  check(a);
  check(b);
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (!ta.same_shape(tb)) fail(ErrorCategory::DimensionMismatch, "sub: shape mismatch");
  Tensor out(ta.rows, ta.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = ta.v[i] - tb.v[i];
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a) || needs_grad(b), [a, b, out_id](Graph& g) {
    const Tensor& go = g.nodes_[out_id].grad;
    if (g.needs_grad(a)) {
      Tensor& ga = g.ensure_grad(a.id);
      for (std::size_t i = 0; i < go.size(); ++i) ga.v[i] += go.v[i];
    }
    if (g.needs_grad(b)) {
      Tensor& gb = g.ensure_grad(b.id);
      for (std::size_t i = 0; i < go.size(); ++i) gb.v[i] -= go.v[i];
    }
  });
}

Value Graph::mul(Value a, Value b) {
  check(a);
  check(b);
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (!ta.same_shape(tb)) fail(ErrorCategory::DimensionMismatch, "mul: shape mismatch");
  Tensor out(ta.rows, ta.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = ta.v[i] * tb.v[i];
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a) || needs_grad(b), [a, b, out_id](Graph& g) {
    const Tensor& go = g.nodes_[out_id].grad;
    const Tensor& ta2 = g.value(a);
    const Tensor& tb2 = g.value(b);
    if (g.needs_grad(a)) {
      Tensor& ga = g.ensure_grad(a.id);
      for (std::size_t i = 0; i < go.size(); ++i) ga.v[i] += go.v[i] * tb2.v[i];
    }
    if (g.needs_grad(b)) {
      Tensor& gb = g.ensure_grad(b.id);
      for (std::size_t i = 0; i < go.size(); ++i) gb.v[i] += go.v[i] * ta2.v[i];
    }
  });
}

Value Graph::scale(Value a, double s) {
  check(a);
  const Tensor& ta = value(a);
  Tensor out(ta.rows, ta.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = ta.v[i] * s;
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a), [a, s, out_id](Graph& g) {
    const Tensor& go = g.nodes_[out_id].grad;
    Tensor& ga = g.ensure_grad(a.id);
    for (std::size_t i = 0; i < go.size(); ++i) ga.v[i] += go.v[i] * s;
  });
}

Value Graph::add_rowvec(Value x, Value r) {
  check(x);
  check(r);
  const Tensor& tx = value(x);
  const Tensor& tr = value(r);
  if (tr.rows != 1 || tr.cols != tx.cols)
    fail(ErrorCategory::DimensionMismatch, "add_rowvec: need 1 x cols(x)");
  Tensor out(tx.rows, tx.cols);
  for (int i = 0; i < tx.rows; ++i)
    for (int j = 0; j < tx.cols; ++j) out.at(i, j) = tx.at(i, j) + tr.at(0, j);
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(x) || needs_grad(r), [x, r, out_id](Graph& g) {
    const Tensor& go = g.nodes_[out_id].grad;
    if (g.needs_grad(x)) {
      Tensor& gx = g.ensure_grad(x.id);
      for (std::size_t i = 0; i < go.size(); ++i) gx.v[i] += go.v[i];
    }
    if (g.needs_grad(r)) {
      Tensor& gr = g.ensure_grad(r.id);
      for (int i = 0; i < go.rows; ++i)
        for (int j = 0; j < go.cols; ++j) gr.at(0, j) += go.at(i, j);
    }
  });
}

// ---------------------------------------------------------------------------
// linear algebra
// ---------------------------------------------------------------------------

Value Graph::matmul(Value a, Value b) {
  check(a);
  check(b);
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.cols != tb.rows) fail(ErrorCategory::DimensionMismatch, "matmul: inner dims");
  Tensor out(ta.rows, tb.cols);
  const int n = ta.rows, k = ta.cols, m = tb.cols;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < k; ++l) {
      const double av = ta.at(i, l);
      if (av == 0.0) continue;
      for (int j = 0; j < m; ++j) out.at(i, j) += av * tb.at(l, j);
    }
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a) || needs_grad(b), [a, b, out_id](Graph& g) {
    const Tensor& go = g.nodes_[out_id].grad;
    const Tensor& ta2 = g.value(a);
    const Tensor& tb2 = g.value(b);
    const int n2 = ta2.rows, k2 = ta2.cols, m2 = tb2.cols;
    if (g.needs_grad(a)) {
      Tensor& ga = g.ensure_grad(a.id);  // dA = dC * B^T
#pragma omp parallel for schedule(static)
      for (int i = 0; i < n2; ++i)
        for (int l = 0; l < k2; ++l) {
          double s = 0;
          for (int j = 0; j < m2; ++j) s += go.at(i, j) * tb2.at(l, j);
          ga.at(i, l) += s;
        }
    }
    if (g.needs_grad(b)) {
      Tensor& gb = g.ensure_grad(b.id);  // dB = A^T * dC
#pragma omp parallel for schedule(static)
      for (int l = 0; l < k2; ++l)
        for (int j = 0; j < m2; ++j) {
          double s = 0;
          for (int i = 0; i < n2; ++i) s += ta2.at(i, l) * go.at(i, j);
          gb.at(l, j) += s;
        }
    }
  });
}

Value Graph::matmul_nt(Value a, Value b) {
  check(a);
  check(b);
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.cols != tb.cols)
    fail(ErrorCategory::DimensionMismatch, "matmul_nt: inner dims");
  Tensor out(ta.rows, tb.rows);
  const int n = ta.rows, k = ta.cols, m = tb.rows;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      double s = 0;
      for (int l = 0; l < k; ++l) s += ta.at(i, l) * tb.at(j, l);
      out.at(i, j) = s;
    }
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a) || needs_grad(b), [a, b, out_id](Graph& g) {
    const Tensor& go = g.nodes_[out_id].grad;  // n x m
    const Tensor& ta2 = g.value(a);
    const Tensor& tb2 = g.value(b);
    const int n2 = ta2.rows, k2 = ta2.cols, m2 = tb2.rows;
    if (g.needs_grad(a)) {
      Tensor& ga = g.ensure_grad(a.id);  // dA = dC * B
#pragma omp parallel for schedule(static)
      for (int i = 0; i < n2; ++i)
        for (int l = 0; l < k2; ++l) {
          double s = 0;
          for (int j = 0; j < m2; ++j) s += go.at(i, j) * tb2.at(j, l);
          ga.at(i, l) += s;
        }
    }
    if (g.needs_grad(b)) {
      Tensor& gb = g.ensure_grad(b.id);  // dB = dC^T * A
#pragma omp parallel for schedule(static)
      for (int j = 0; j < m2; ++j)
        for (int l = 0; l < k2; ++l) {
          double s = 0;
          for (int i = 0; i < n2; ++i) s += go.at(i, j) * ta2.at(i, l);
          gb.at(j, l) += s;
        }
    }
  });
}

// ---------------------------------------------------------------------------
// nonlinearities
// ---------------------------------------------------------------------------

Value Graph::leaky_relu(Value a, double negative_slope) {
  check(a);
  const Tensor& ta = value(a);
  Tensor out(ta.rows, ta.cols);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.v[i] = ta.v[i] > 0 ? ta.v[i] : negative_slope * ta.v[i];
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a), [a, negative_slope, out_id](Graph& g) {
    const Tensor& go = g.nodes_[out_id].grad;
    const Tensor& ta2 = g.value(a);
    Tensor& ga = g.ensure_grad(a.id);
    for (std::size_t i = 0; i < go.size(); ++i)
      ga.v[i] += go.v[i] * (ta2.v[i] > 0 ? 1.0 : negative_slope);
  });
}

Value Graph::gelu(Value a) {
  check(a);
  const Tensor& ta = value(a);
  Tensor out(ta.rows, ta.cols);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = ta.v[i];
    out.v[i] = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
  }
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a), [a, out_id](Graph& g) {
    const Tensor& go = g.nodes_[out_id].grad;
    const Tensor& ta2 = g.value(a);
    Tensor& ga = g.ensure_grad(a.id);
    for (std::size_t i = 0; i < go.size(); ++i) {
      const double x = ta2.v[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
      ga.v[i] += go.v[i] * (cdf + x * pdf);
    }
  });
}

Value Graph::softmax_rows(Value a, const Tensor* additive_mask) {
  check(a);
  const Tensor& ta = value(a);
  if (additive_mask && !additive_mask->same_shape(ta))
    fail(ErrorCategory::DimensionMismatch, "softmax_rows: mask shape mismatch");
  Tensor out(ta.rows, ta.cols);
  for (int i = 0; i < ta.rows; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < ta.cols; ++j) {
      const double x = ta.at(i, j) + (additive_mask ? additive_mask->at(i, j) : 0.0);
      mx = std::max(mx, x);
    }
    double sum = 0;
    for (int j = 0; j < ta.cols; ++j) {
      const double x = ta.at(i, j) + (additive_mask ? additive_mask->at(i, j) : 0.0);
      const double e = std::exp(x - mx);
      out.at(i, j) = e;
      sum += e;
    }
    if (sum <= 0 || !std::isfinite(sum))
      fail(ErrorCategory::InvalidArgument, "softmax_rows: fully masked row");
    for (int j = 0; j < ta.cols; ++j) out.at(i, j) /= sum;
  }
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a), [a, out_id](Graph& g) {
    const Tensor& go = g.nodes_[out_id].grad;
    const Tensor& so = g.nodes_[out_id].value;
    Tensor& ga = g.ensure_grad(a.id);
    for (int i = 0; i < so.rows; ++i) {
      double dot = 0;
      for (int j = 0; j < so.cols; ++j) dot += go.at(i, j) * so.at(i, j);
      for (int j = 0; j < so.cols; ++j)
        ga.at(i, j) += so.at(i, j) * (go.at(i, j) - dot);
    }
  });
}

Value Graph::layer_norm(Value x, Value gain, Value bias, double eps) {
  check(x);
  check(gain);
  check(bias);
  const Tensor& tx = value(x);
  const Tensor& tg = value(gain);
  const Tensor& tb = value(bias);
  if (tg.rows != 1 || tg.cols != tx.cols || tb.rows != 1 || tb.cols != tx.cols)
    fail(ErrorCategory::DimensionMismatch, "layer_norm: gain/bias must be 1 x cols");
  Tensor out(tx.rows, tx.cols);
  Tensor xhat(tx.rows, tx.cols);
  std::vector<double> inv_std(tx.rows);
  const double d = double(tx.cols);
  for (int i = 0; i < tx.rows; ++i) {
    double mean = 0;
    for (int j = 0; j < tx.cols; ++j) mean += tx.at(i, j);
    mean /= d;
    double var = 0;
    for (int j = 0; j < tx.cols; ++j) {
      const double c = tx.at(i, j) - mean;
      var += c * c;
    }
    var /= d;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[i] = is;
    for (int j = 0; j < tx.cols; ++j) {
      xhat.at(i, j) = (tx.at(i, j) - mean) * is;
      out.at(i, j) = xhat.at(i, j) * tg.at(0, j) + tb.at(0, j);
    }
  }
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(x) || needs_grad(gain) || needs_grad(bias),
              [x, gain, bias, out_id, xh = std::move(xhat),
               istd = std::move(inv_std)](Graph& g) {
                const Tensor& go = g.nodes_[out_id].grad;
                const Tensor& tg2 = g.value(gain);
                const int rows = go.rows, cols = go.cols;
                const double d2 = double(cols);
                if (g.needs_grad(gain)) {
                  Tensor& gg = g.ensure_grad(gain.id);
                  for (int i = 0; i < rows; ++i)
                    for (int j = 0; j < cols; ++j)
                      gg.at(0, j) += go.at(i, j) * xh.at(i, j);
                }
                if (g.needs_grad(bias)) {
                  Tensor& gb = g.ensure_grad(bias.id);
                  for (int i = 0; i < rows; ++i)
                    for (int j = 0; j < cols; ++j) gb.at(0, j) += go.at(i, j);
                }
                if (g.needs_grad(x)) {
                  Tensor& gx = g.ensure_grad(x.id);
                  for (int i = 0; i < rows; ++i) {
                    double sum_dy = 0, sum_dy_xhat = 0;
                    for (int j = 0; j < cols; ++j) {
                      const double dy = go.at(i, j) * tg2.at(0, j);
                      sum_dy += dy;
                      sum_dy_xhat += dy * xh.at(i, j);
                    }
                    for (int j = 0; j < cols; ++j) {
                      const double dy = go.at(i, j) * tg2.at(0, j);
                      gx.at(i, j) += istd[i] * (dy - sum_dy / d2 -
                                                xh.at(i, j) * sum_dy_xhat / d2);
                    }
                  }
                }
              });
}

// ---------------------------------------------------------------------------
// shape ops
// ---------------------------------------------------------------------------

Value Graph::concat_cols(Value a, Value b) {
  check(a);
  check(b);
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.rows != tb.rows)
    fail(ErrorCategory::DimensionMismatch, "concat_cols: row mismatch");
  Tensor out(ta.rows, ta.cols + tb.cols);
  for (int i = 0; i < ta.rows; ++i) {
    for (int j = 0; j < ta.cols; ++j) out.at(i, j) = ta.at(i, j);
    for (int j = 0; j < tb.cols; ++j) out.at(i, ta.cols + j) = tb.at(i, j);
  }
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a) || needs_grad(b), [a, b, out_id](Graph& g) {
    const Tensor& go = g.nodes_[out_id].grad;
    const int ca = g.value(a).cols;
    if (g.needs_grad(a)) {
      Tensor& ga = g.ensure_grad(a.id);
      for (int i = 0; i < go.rows; ++i)
        for (int j = 0; j < ca; ++j) ga.at(i, j) += go.at(i, j);
    }
    if (g.needs_grad(b)) {
      Tensor& gb = g.ensure_grad(b.id);
      for (int i = 0; i < go.rows; ++i)
        for (int j = ca; j < go.cols; ++j) gb.at(i, j - ca) += go.at(i, j);
    }
  });
}

Value Graph::slice_cols(Value a, int c0, int c1) {
  check(a);
  const Tensor& ta = value(a);
  if (c0 < 0 || c1 > ta.cols || c0 >= c1)
    fail(ErrorCategory::InvalidArgument, "slice_cols: bad range");
  Tensor out(ta.rows, c1 - c0);
  for (int i = 0; i < ta.rows; ++i)
    for (int j = c0; j < c1; ++j) out.at(i, j - c0) = ta.at(i, j);
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a), [a, c0, out_id](Graph& g) {
    const Tensor& go = g.nodes_[out_id].grad;
    Tensor& ga = g.ensure_grad(a.id);
    for (int i = 0; i < go.rows; ++i)
      for (int j = 0; j < go.cols; ++j) ga.at(i, c0 + j) += go.at(i, j);
  });
}

Value Graph::reshape(Value a, int rows, int cols) {
  check(a);
  const Tensor& ta = value(a);
  if (std::size_t(rows) * cols != ta.size())
    fail(ErrorCategory::DimensionMismatch, "reshape: element count mismatch");
  Tensor out(rows, cols);
  out.v = ta.v;
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a), [a, out_id](Graph& g) {
    const Tensor& go = g.nodes_[out_id].grad;
    Tensor& ga = g.ensure_grad(a.id);
    for (std::size_t i = 0; i < go.size(); ++i) ga.v[i] += go.v[i];
  });
}

Value Graph::gather_rows(Value a, std::vector<int> idx) {
  check(a);
  const Tensor& ta = value(a);
  for (int i : idx)
    if (i < 0 || i >= ta.rows)
      fail(ErrorCategory::InvalidArgument, "gather_rows: index out of range");
  Tensor out(int(idx.size()), ta.cols);
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (int j = 0; j < ta.cols; ++j) out.at(int(r), j) = ta.at(idx[r], j);
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a), [a, out_id, ids = std::move(idx)](Graph& g) {
    const Tensor& go = g.nodes_[out_id].grad;
    Tensor& ga = g.ensure_grad(a.id);
    // scatter-add; serial keeps duplicate targets deterministic
    for (std::size_t r = 0; r < ids.size(); ++r)
      for (int j = 0; j < go.cols; ++j) ga.at(ids[r], j) += go.at(int(r), j);
  });
}

Value Graph::repeat_rows(Value a, int times) {
  check(a);
  const Tensor& ta = value(a);
  if (ta.rows != 1) fail(ErrorCategory::DimensionMismatch, "repeat_rows: need 1 x d");
  Tensor out(times, ta.cols);
  for (int i = 0; i < times; ++i)
    for (int j = 0; j < ta.cols; ++j) out.at(i, j) = ta.at(0, j);
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a), [a, out_id](Graph& g) {
    const Tensor& go = g.nodes_[out_id].grad;
    Tensor& ga = g.ensure_grad(a.id);
    for (int i = 0; i < go.rows; ++i)
      for (int j = 0; j < go.cols; ++j) ga.at(0, j) += go.at(i, j);
  });
}

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------

Value Graph::group_max_rows(Value a, int group_size) {
  check(a);
  const Tensor& ta = value(a);
  if (group_size < 1 || ta.rows % group_size != 0)
    fail(ErrorCategory::DimensionMismatch, "group_max_rows: rows not divisible");
  const int groups = ta.rows / group_size;
  Tensor out(groups, ta.cols);
  std::vector<int> argmax(std::size_t(groups) * ta.cols);
  for (int gi = 0; gi < groups; ++gi)
    for (int j = 0; j < ta.cols; ++j) {
      int best_r = gi * group_size;
      double best = ta.at(best_r, j);
      for (int r = gi * group_size + 1; r < (gi + 1) * group_size; ++r)
        if (ta.at(r, j) > best) {  // first max wins ties
          best = ta.at(r, j);
          best_r = r;
        }
      out.at(gi, j) = best;
      argmax[std::size_t(gi) * ta.cols + j] = best_r;
    }
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a),
              [a, out_id, am = std::move(argmax)](Graph& g) {
                const Tensor& go = g.nodes_[out_id].grad;
                Tensor& ga = g.ensure_grad(a.id);
                for (int gi = 0; gi < go.rows; ++gi)
                  for (int j = 0; j < go.cols; ++j)
                    ga.at(am[std::size_t(gi) * go.cols + j], j) += go.at(gi, j);
              });
}

Value Graph::max_rows(Value a) { return group_max_rows(a, value(a).rows); }

Value Graph::mean_rows(Value a) {
  check(a);
  const Tensor& ta = value(a);
  if (ta.rows < 1) fail(ErrorCategory::EmptyInput, "mean_rows: empty");
  Tensor out(1, ta.cols);
  for (int j = 0; j < ta.cols; ++j) {
    double s = 0;
    for (int i = 0; i < ta.rows; ++i) s += ta.at(i, j);
    out.at(0, j) = s / double(ta.rows);
  }
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a), [a, out_id](Graph& g) {
    const Tensor& go = g.nodes_[out_id].grad;
    Tensor& ga = g.ensure_grad(a.id);
    const double inv = 1.0 / double(ga.rows);
    for (int i = 0; i < ga.rows; ++i)
      for (int j = 0; j < ga.cols; ++j) ga.at(i, j) += go.at(0, j) * inv;
  });
}

Value Graph::sum_all(Value a) {
  check(a);
  const Tensor& ta = value(a);
  Tensor out(1, 1);
  double s = 0;
  for (double x : ta.v) s += x;
  out.v[0] = s;
  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(a), [a, out_id](Graph& g) {
    const double go = g.nodes_[out_id].grad.v[0];
    Tensor& ga = g.ensure_grad(a.id);
    for (double& x : ga.v) x += go;
  });
}

Value Graph::mean_all(Value a) {
  const double inv = 1.0 / double(value(a).size());
  return scale(sum_all(a), inv);
}

// ---------------------------------------------------------------------------
// Chamfer loss
// ---------------------------------------------------------------------------

Value Graph::cd_loss(Value pred, const Tensor& gt) {
  check(pred);
  const Tensor& tp = value(pred);
  if (tp.cols != 3 || gt.cols != 3)
    fail(ErrorCategory::DimensionMismatch, "cd_loss: clouds must be n x 3");
  if (tp.rows == 0 || gt.rows == 0) fail(ErrorCategory::EmptyInput, "cd_loss: empty");

  const auto pred_pts = tp.to_points();
  const auto gt_pts = gt.to_points();
  const spatial::KdTree gt_tree{std::span<const Vec3>(gt_pts)};
  const spatial::KdTree pred_tree{std::span<const Vec3>(pred_pts)};

  // NN indices are recomputed each forward pass and constant in backward.
  std::vector<int> nn_pred_to_gt(pred_pts.size());
  std::vector<int> nn_gt_to_pred(gt_pts.size());
  double term_pg = 0, term_gp = 0;
  for (std::size_t i = 0; i < pred_pts.size(); ++i) {
    const auto nb = gt_tree.nearest(pred_pts[i]);
    nn_pred_to_gt[i] = nb.index;
    term_pg += nb.sq_dist;
  }
  for (std::size_t j = 0; j < gt_pts.size(); ++j) {
    const auto nb = pred_tree.nearest(gt_pts[j]);
    nn_gt_to_pred[j] = nb.index;
    term_gp += nb.sq_dist;
  }
  const double n = double(pred_pts.size()), m = double(gt_pts.size());
  Tensor out(1, 1);
  out.v[0] = term_pg / n + term_gp / m;

  const int out_id = int(nodes_.size());
  return push(std::move(out), needs_grad(pred),
              [pred, out_id, gt, npg = std::move(nn_pred_to_gt),
               ngp = std::move(nn_gt_to_pred)](Graph& g) {
                const double go = g.nodes_[out_id].grad.v[0];
                const Tensor& tp2 = g.value(pred);
                Tensor& gp = g.ensure_grad(pred.id);
                const double inv_n = 1.0 / double(tp2.rows);
                const double inv_m = 1.0 / double(gt.rows);
                for (int i = 0; i < tp2.rows; ++i) {
                  const int j = npg[i];
                  for (int c = 0; c < 3; ++c)
                    gp.at(i, c) +=
                        go * 2.0 * inv_n * (tp2.at(i, c) - gt.at(j, c));
                }
                for (int j = 0; j < gt.rows; ++j) {
                  const int i = ngp[j];
                  for (int c = 0; c < 3; ++c)
                    gp.at(i, c) +=
                        go * 2.0 * inv_m * (tp2.at(i, c) - gt.at(j, c));
                }
              });
}

}  // namespace vsc::net
