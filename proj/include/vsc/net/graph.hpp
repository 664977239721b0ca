#pragma once

#include <functional>

#include "vsc/net/tensor.hpp"

namespace vsc::net {

struct Value {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape. One Graph per forward pass; ops append nodes, backward()
// walks the tape in reverse. Reductions run in a fixed serial order and
// parallel loops own disjoint output elements, so gradients are bitwise
// deterministic at any thread count.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Value leaf(Tensor t, bool requires_grad = false);
  Value constant(Tensor t) { return leaf(std::move(t), false); }

  const Tensor& value(Value v) const { return nodes_[v.id].value; }
  // Zero tensor if nothing flowed into v.
  const Tensor& grad(Value v) const;

  // --- elementwise ---
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul(Value a, Value b);
  Value scale(Value a, double s);
  Value add_rowvec(Value x, Value r);  // nxd + 1xd broadcast

  // --- linear algebra ---
  Value matmul(Value a, Value b);     // (n x k)(k x m)
  Value matmul_nt(Value a, Value b);  // (n x k)(m x k)^T -> n x m

  // --- nonlinearities ---
  Value leaky_relu(Value a, double negative_slope);
  Value gelu(Value a);
  // Row softmax; an optional additive mask (-inf blocks an entry) is applied
  // before normalization. Masked rows must keep at least one open entry.
  Value softmax_rows(Value a, const Tensor* additive_mask = nullptr);
  Value layer_norm(Value x, Value gain, Value bias, double eps = 1e-5);

  // --- shape ---
  Value concat_cols(Value a, Value b);
  Value slice_cols(Value a, int c0, int c1);
  Value reshape(Value a, int rows, int cols);
  Value gather_rows(Value a, std::vector<int> idx);
  Value repeat_rows(Value a, int times);  // 1xd -> times x d

  // --- reductions ---
  // Consecutive groups of group_size rows max-reduced per column; gradients
  // route to the argmax (first on ties).
  Value group_max_rows(Value a, int group_size);
  Value max_rows(Value a);   // n x d -> 1 x d, argmax routing
  Value mean_rows(Value a);  // n x d -> 1 x d
  Value sum_all(Value a);    // -> 1 x 1
  Value mean_all(Value a);

  // Symmetric squared-distance Chamfer loss of pred (n x 3) against a fixed
  // target point set. NN correspondences are recomputed each forward pass and
  // held constant in backward.
  Value cd_loss(Value pred, const Tensor& gt);

  // Seeds d(root)=1 and accumulates gradients through the tape. root must be
  // a scalar.
  void backward(Value root);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // empty until first accumulation
    bool requires_grad = false;
    std::function<void(Graph&)> back;
  };

  Tensor& ensure_grad(int id);
  bool needs_grad(Value v) const { return nodes_[v.id].requires_grad; }
  Value push(Tensor value, bool requires_grad, std::function<void(Graph&)> back);
  void check(Value v) const;

  std::vector<Node> nodes_;
};

}  // namespace vsc::net
