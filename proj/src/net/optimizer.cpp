#include <cmath>

#include "vsc/net/train.hpp"

namespace vsc::net {

void TrainConfig::validate() const {
  if (lr <= 0) fail(ErrorCategory::Config, "train: lr must be > 0");
  if (weight_decay < 0) fail(ErrorCategory::Config, "train: weight_decay must be >= 0");
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
    fail(ErrorCategory::Config, "train: betas must be in [0,1)");
  if (batch_size < 1) fail(ErrorCategory::Config, "train: batch_size must be >= 1");
  if (epochs < 0 || max_steps < 0)
    fail(ErrorCategory::Config, "train: epochs/max_steps must be >= 0");
}

void adamw_update(Tensor& w, const Tensor& grad, Tensor& m, Tensor& v, int t,
                  double lr, double weight_decay, double beta1, double beta2,
                  double eps) {
  if (!w.same_shape(grad) || !w.same_shape(m) || !w.same_shape(v))
    fail(ErrorCategory::DimensionMismatch, "adamw_update: shape mismatch");
  const double bc1 = 1.0 - std::pow(beta1, t);
  const double bc2 = 1.0 - std::pow(beta2, t);
  for (std::size_t i = 0; i < w.size(); ++i) {
    w.v[i] -= lr * weight_decay * w.v[i];  // decoupled decay
    m.v[i] = beta1 * m.v[i] + (1.0 - beta1) * grad.v[i];
    v.v[i] = beta2 * v.v[i] + (1.0 - beta2) * grad.v[i] * grad.v[i];
    const double m_hat = m.v[i] / bc1;
    const double v_hat = v.v[i] / bc2;
    w.v[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

AdamWState AdamWState::init_for(const ParamStore& params) {
  AdamWState s;
  s.m.reserve(params.count());
  s.v.reserve(params.count());
  for (const auto& e : params.entries()) {
    s.m.push_back(Tensor::zeros(e.value.rows, e.value.cols));
    s.v.push_back(Tensor::zeros(e.value.rows, e.value.cols));
  }
  return s;
}

void adamw_step(ParamStore& params, const std::vector<Tensor>& grads,
                AdamWState& state, const TrainConfig& cfg) {
  if (grads.size() != params.count() || state.m.size() != params.count())
    fail(ErrorCategory::DimensionMismatch, "adamw_step: store size mismatch");
  ++state.t;
  for (std::size_t i = 0; i < params.count(); ++i)
    adamw_update(params.entries()[i].value, grads[i], state.m[i], state.v[i],
                 state.t, cfg.lr, cfg.weight_decay, cfg.beta1, cfg.beta2, cfg.eps);
}

}  // namespace vsc::net
