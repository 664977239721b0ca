#pragma once

#include <optional>

#include <json.hpp>

#include "vsc/metrics/report.hpp"
#include "vsc/net/train.hpp"
#include "vsc/pipeline/folds.hpp"
#include "vsc/pipeline/manifest.hpp"

namespace vsc::pipe {

// All knobs of the pipeline in one document. Defaults follow the paper where
// it speaks (10k spine points, 2048 network inputs, 4096 GT points, AdamW
// 1e-4 / 5e-4, batch 32) and are documented in the README where it does not.
struct ExperimentConfig {
  std::uint64_t seed = 1;

  // preprocessing
  double depth_unit_mm = 1.0;  // millimeters per stored depth unit
  int spine_points = 10000;
  std::string downsample_method = "voxel_random";  // or "fps"
  double pre_voxel_size = 2.0;                     // mm
  double tau_bg = 3.0;                             // mm
  int min_points_per_level = 64;
  int gt_complete_points = 4096;

  // metrics
  double iou_voxel = 5.0;     // mm
  double tau_vis = 0.0;       // 0 = auto: 2x median NN spacing of the partial
  double fscore_pct = 0.01;   // fraction of the GT bbox longest side
  int emd_points = 512;       // evaluation resample size for EMD
  std::size_t emd_cap = metrics::kEmdExactCap;
  double emd_epsilon = 1e-3;  // auction tolerance, normalized units
  std::string snr_pairing = "nn";  // "nn" or "index"

  // completion network
  net::ModelConfig model = net::ModelConfig::desk();
  std::uint64_t model_seed = 7;
  net::TrainConfig train;

  void validate() const;
  nlohmann::json to_json() const;
  // Strict: unknown keys anywhere are a config error.
  static ExperimentConfig from_json(const nlohmann::json& j);
};

struct SampleRecord {
  std::string specimen;
  int level = 0;
  int frame = 0;  // recording id
  int view = 0;
  geom::PointCloud partial;   // extracted vertebra surface, camera space
  geom::PointCloud complete;  // mesh-sampled ground truth, camera space
  std::optional<double> seg_iou;       // frame-level, external labels only
  std::optional<double> seg_accuracy;
};

struct BuiltDataset {
  std::vector<SampleRecord> samples;
  std::vector<std::string> specimens;
  std::size_t skipped_small = 0;  // levels skipped for too few extracted points

  std::vector<const SampleRecord*> of_specimen(const std::string& id) const;
  std::vector<const SampleRecord*> excluding_specimen(const std::string& id) const;
};

// Decodes every frame, builds the labeled spine cloud (external labels when
// provided, geometric labeling otherwise), extracts per-level partials and
// samples GT completions from the posed meshes.
BuiltDataset build_dataset(const DatasetManifest& manifest,
                           const ExperimentConfig& cfg);

// A shape completion strategy; the network is the production one, the stubs
// exist for harness tests.
class Completer {
 public:
  virtual ~Completer() = default;
  virtual geom::PointCloud complete(const SampleRecord& sample,
                                    std::uint64_t seed) const = 0;
};

class ModelCompleter : public Completer {
 public:
  ModelCompleter(const net::CompletionModel& model) : model_(&model) {}
  geom::PointCloud complete(const SampleRecord& sample,
                            std::uint64_t seed) const override;

 private:
  const net::CompletionModel* model_;
};

// Returns the resampled ground truth (upper bound of every metric).
class OracleCompleter : public Completer {
 public:
  explicit OracleCompleter(int n_points) : n_points_(n_points) {}
  geom::PointCloud complete(const SampleRecord& sample,
                            std::uint64_t seed) const override;

 private:
  int n_points_;
};

// Returns the resampled input partial (what a no-op "completion" would give).
class CopyInputCompleter : public Completer {
 public:
  explicit CopyInputCompleter(int n_points) : n_points_(n_points) {}
  geom::PointCloud complete(const SampleRecord& sample,
                            std::uint64_t seed) const override;

 private:
  int n_points_;
};

// Full metric suite for one prediction.
metrics::MetricRow evaluate_sample(const geom::PointCloud& pred,
                                   const SampleRecord& sample,
                                   const ExperimentConfig& cfg);

// Trains on the fold's train specimens and evaluates every held-out sample.
// When `completer` is given, training is skipped and the stub is evaluated
// instead. Returns sorted rows.
metrics::MetricsReport run_fold(const FoldSpec& fold, const BuiltDataset& dataset,
                                const ExperimentConfig& cfg,
                                const Completer* completer = nullptr,
                                net::TrainResult* curve_out = nullptr);

struct CrossvalResult {
  metrics::MetricsReport combined;
  std::vector<std::pair<std::string, metrics::MetricsReport>> per_fold;
};

CrossvalResult run_crossval(const BuiltDataset& dataset, const ExperimentConfig& cfg);

// Deterministic per-sample seed stream.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

// Builds network training pairs (partials resampled to n_input).
std::vector<net::TrainSample> to_train_samples(
    const std::vector<const SampleRecord*>& samples, const ExperimentConfig& cfg);

}  // namespace vsc::pipe
