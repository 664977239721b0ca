#pragma once

#include <span>

#include "vsc/net/model.hpp"

namespace vsc::net {

struct TrainConfig {
  double lr = 1e-4;
  double weight_decay = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 32;
  int epochs = 1;
  int max_steps = 0;  // 0 = no cap
  std::uint64_t seed = 0;

  void validate() const;
};

// Single-tensor AdamW update: decoupled decay w -= lr*wd*w, then the
// bias-corrected moment step. t is the 1-based step index.
void adamw_update(Tensor& w, const Tensor& grad, Tensor& m, Tensor& v, int t,
                  double lr, double weight_decay, double beta1, double beta2,
                  double eps);

struct AdamWState {
  std::vector<Tensor> m, v;
  int t = 0;

  static AdamWState init_for(const ParamStore& params);
};

void adamw_step(ParamStore& params, const std::vector<Tensor>& grads,
                AdamWState& state, const TrainConfig& cfg);

struct TrainSample {
  geom::PointCloud partial;   // exactly n_input points
  geom::PointCloud complete;  // target cloud, any cardinality
};

struct EpochStats {
  int epoch = 0;
  double train_cd = 0;  // mean CD loss over the epoch, normalized space
  double val_cd = 0;    // mean CD loss over the validation set, normalized space
};

struct TrainResult {
  std::vector<EpochStats> curve;
  int steps = 0;
};

// Seeded shuffling, mini-batches with gradient averaging, Chamfer loss,
// AdamW. Deterministic given seed (parallel kernels are bitwise stable at any
// thread count).
TrainResult train(CompletionModel& model, std::span<const TrainSample> train_set,
                  std::span<const TrainSample> val_set, const TrainConfig& cfg);

// Mean CD loss (normalized space) of the model over a sample set, no updates.
double evaluate_cd(const CompletionModel& model, std::span<const TrainSample> samples);

void write_loss_curve_csv(std::ostream& os, const TrainResult& result);

}  // namespace vsc::net
