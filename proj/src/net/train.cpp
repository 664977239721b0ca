#include "vsc/net/train.hpp"

#include <numeric>
#include <ostream>

namespace vsc::net {

namespace {

Tensor normalized_target(const geom::PointCloud& complete, const Vec3& center,
                         double scale) {
  Tensor t(int(complete.size()), 3);
  for (std::size_t i = 0; i < complete.size(); ++i) {
    const Vec3 p = (complete.points[i] - center) / scale;
    t.at(int(i), 0) = p.x;
    t.at(int(i), 1) = p.y;
    t.at(int(i), 2) = p.z;
  }
  return t;
}

// Forward + CD loss for one sample; returns the loss and, in train mode,
// accumulates parameter gradients.
double sample_loss(const CompletionModel& model, const TrainSample& sample,
                   bool train_mode, std::vector<Tensor>* grad_accum) {
  Graph g;
  const auto f = model.forward(g, sample.partial, train_mode);
  const Tensor target = normalized_target(sample.complete, f.center, f.scale);
  const Value loss = g.cd_loss(f.output, target);
  const double loss_val = g.value(loss).v[0];
  if (train_mode && grad_accum) {
    g.backward(loss);
    for (std::size_t p = 0; p < f.bound.size(); ++p) {
      const Tensor& pg = g.grad(f.bound[p]);
      Tensor& acc = (*grad_accum)[p];
      for (std::size_t i = 0; i < acc.size(); ++i) acc.v[i] += pg.v[i];
    }
  }
  return loss_val;
}

}  // namespace

double evaluate_cd(const CompletionModel& model, std::span<const TrainSample> samples) {
  if (samples.empty()) fail(ErrorCategory::EmptyInput, "evaluate_cd: no samples");
  double total = 0;
  for (const TrainSample& s : samples) total += sample_loss(model, s, false, nullptr);
  return total / double(samples.size());
}

TrainResult train(CompletionModel& model, std::span<const TrainSample> train_set,
                  std::span<const TrainSample> val_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) fail(ErrorCategory::EmptyInput, "train: empty dataset");

  AdamWState state = AdamWState::init_for(model.params());
  Rng shuffle_rng(cfg.seed);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  std::vector<Tensor> grads;
  grads.reserve(model.params().count());
  for (const auto& e : model.params().entries())
    grads.push_back(Tensor::zeros(e.value.rows, e.value.cols));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[std::size_t(shuffle_rng.uniform_index(i))]);

    double epoch_loss = 0;
    std::size_t epoch_samples = 0;
    bool step_cap_hit = false;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      for (auto& t : grads) std::fill(t.v.begin(), t.v.end(), 0.0);

      double batch_loss = 0;
      for (std::size_t bi = start; bi < stop; ++bi)
        batch_loss += sample_loss(model, train_set[order[bi]], true, &grads);
      const double inv = 1.0 / double(stop - start);
      for (auto& t : grads)
        for (double& x : t.v) x *= inv;

      adamw_step(model.params(), grads, state, cfg);
      ++result.steps;
      epoch_loss += batch_loss;
      epoch_samples += stop - start;

      if (cfg.max_steps > 0 && result.steps >= cfg.max_steps) {
        step_cap_hit = true;
        break;
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_cd = epoch_samples ? epoch_loss / double(epoch_samples) : 0.0;
    stats.val_cd = val_set.empty() ? 0.0 : evaluate_cd(model, val_set);
    result.curve.push_back(stats);
    if (step_cap_hit) break;
  }
  return result;
}

void write_loss_curve_csv(std::ostream& os, const TrainResult& result) {
  os << "epoch,train_cd,val_cd\n";
  char buf[96];
  for (const EpochStats& e : result.curve) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", e.epoch, e.train_cd, e.val_cd);
    os << buf;
  }
}

}  // namespace vsc::net
