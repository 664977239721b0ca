#include "vsc/pipeline/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "vsc/geometry/camera.hpp"
#include "vsc/geometry/mesh.hpp"
#include "vsc/io/config.hpp"
#include "vsc/io/fsio.hpp"
#include "vsc/io/ply.hpp"
#include "vsc/io/png_io.hpp"
#include "vsc/pipeline/labeling.hpp"
#include "vsc/spatial/kdtree.hpp"
#include "vsc/spatial/sampling.hpp"

namespace vsc::pipe {

// ---------------------------------------------------------------------------
// config
// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (spine_points < 1 || gt_complete_points < 1 || min_points_per_level < 1)
    fail(ErrorCategory::Config, "experiment: point counts must be positive");
  if (downsample_method != "voxel_random" && downsample_method != "fps")
    fail(ErrorCategory::Config,
         "experiment: downsample_method must be voxel_random or fps");
  if (pre_voxel_size <= 0 || tau_bg <= 0 || iou_voxel <= 0)
    fail(ErrorCategory::Config, "experiment: sizes must be > 0");
  if (depth_unit_mm <= 0)
    fail(ErrorCategory::Config, "experiment: depth_unit_mm must be > 0");
  if (tau_vis < 0) fail(ErrorCategory::Config, "experiment: tau_vis must be >= 0");
  if (fscore_pct <= 0) fail(ErrorCategory::Config, "experiment: fscore_pct must be > 0");
  if (emd_points < 1 || emd_epsilon <= 0)
    fail(ErrorCategory::Config, "experiment: emd settings must be positive");
  if (snr_pairing != "nn" && snr_pairing != "index")
    fail(ErrorCategory::Config, "experiment: snr_pairing must be nn or index");
  model.validate();
  train.validate();
}

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& known,
                const std::string& where) {
  if (!j.is_object()) fail(ErrorCategory::Config, where + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key))
      fail(ErrorCategory::Config, where + ": unknown key '" + key + "'");
}

template <class T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["preprocess"] = {{"depth_unit_mm", depth_unit_mm},
                     {"spine_points", spine_points},
                     {"downsample_method", downsample_method},
                     {"pre_voxel_size", pre_voxel_size},
                     {"tau_bg", tau_bg},
                     {"min_points_per_level", min_points_per_level},
                     {"gt_complete_points", gt_complete_points}};
  j["metrics"] = {{"iou_voxel", iou_voxel},   {"tau_vis", tau_vis},
                  {"fscore_pct", fscore_pct}, {"emd_points", emd_points},
                  {"emd_cap", emd_cap},       {"emd_epsilon", emd_epsilon},
                  {"snr_pairing", snr_pairing}};
  j["model"] = nlohmann::json::parse(model.to_json_string());
  j["model_seed"] = model_seed;
  j["train"] = {{"lr", train.lr},
                {"weight_decay", train.weight_decay},
                {"beta1", train.beta1},
                {"beta2", train.beta2},
                {"eps", train.eps},
                {"batch_size", train.batch_size},
                {"epochs", train.epochs},
                {"max_steps", train.max_steps},
                {"seed", train.seed}};
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    // "_run" is the run-metadata block of a resolved-config snapshot; a
    // snapshot therefore reloads directly via --config.
    check_keys(j,
               {"seed", "preprocess", "metrics", "model", "model_seed", "train",
                "_run"},
               "config");
    maybe(j, "seed", c.seed);
    maybe(j, "model_seed", c.model_seed);
    if (j.contains("preprocess")) {
      const auto& p = j.at("preprocess");
      check_keys(p,
                 {"depth_unit_mm", "spine_points", "downsample_method",
                  "pre_voxel_size", "tau_bg", "min_points_per_level",
                  "gt_complete_points"},
                 "config.preprocess");
      maybe(p, "depth_unit_mm", c.depth_unit_mm);
      maybe(p, "spine_points", c.spine_points);
      maybe(p, "downsample_method", c.downsample_method);
      maybe(p, "pre_voxel_size", c.pre_voxel_size);
      maybe(p, "tau_bg", c.tau_bg);
      maybe(p, "min_points_per_level", c.min_points_per_level);
      maybe(p, "gt_complete_points", c.gt_complete_points);
    }
    if (j.contains("metrics")) {
      const auto& m = j.at("metrics");
      check_keys(m,
                 {"iou_voxel", "tau_vis", "fscore_pct", "emd_points", "emd_cap",
                  "emd_epsilon", "snr_pairing"},
                 "config.metrics");
      maybe(m, "iou_voxel", c.iou_voxel);
      maybe(m, "tau_vis", c.tau_vis);
      maybe(m, "fscore_pct", c.fscore_pct);
      maybe(m, "emd_points", c.emd_points);
      maybe(m, "emd_cap", c.emd_cap);
      maybe(m, "emd_epsilon", c.emd_epsilon);
      maybe(m, "snr_pairing", c.snr_pairing);
    }
    if (j.contains("model"))
      c.model = net::ModelConfig::from_json_string(j.at("model").dump());
    if (j.contains("train")) {
      const auto& t = j.at("train");
      check_keys(t,
                 {"lr", "weight_decay", "beta1", "beta2", "eps", "batch_size",
                  "epochs", "max_steps", "seed"},
                 "config.train");
      maybe(t, "lr", c.train.lr);
      maybe(t, "weight_decay", c.train.weight_decay);
      maybe(t, "beta1", c.train.beta1);
      maybe(t, "beta2", c.train.beta2);
      maybe(t, "eps", c.train.eps);
      maybe(t, "batch_size", c.train.batch_size);
      maybe(t, "epochs", c.train.epochs);
      maybe(t, "max_steps", c.train.max_steps);
      maybe(t, "seed", c.train.seed);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::Config, std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// dataset building
// ---------------------------------------------------------------------------

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t x = a * 0x9e3779b97f4a7c15ull + b * 0xbf58476d1ce4e5b9ull +
                    c * 0x94d049bb133111ebull + 0x2545f4914f6cdd1dull;
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  return x;
}

namespace {

std::vector<int> read_label_file(const std::string& path, std::size_t expected) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::Io, "cannot open label file: " + path);
  std::vector<int> labels;
  labels.reserve(expected);
  int v;
  while (in >> v) labels.push_back(v);
  if (labels.size() != expected)
    fail(ErrorCategory::DimensionMismatch,
         "label file " + path + " has " + std::to_string(labels.size()) +
             " entries, cloud has " + std::to_string(expected));
  return labels;
}

geom::PointCloud downsample_spine(const geom::PointCloud& cloud,
                                  const ExperimentConfig& cfg, std::uint64_t seed) {
  if (int(cloud.size()) <= cfg.spine_points) return cloud;
  if (cfg.downsample_method == "fps")
    return spatial::fps(cloud, std::size_t(cfg.spine_points), seed);
  geom::PointCloud reduced = spatial::voxel_downsample(cloud, cfg.pre_voxel_size);
  if (int(reduced.size()) < cfg.spine_points) reduced = cloud;
  return spatial::random_downsample(reduced, std::size_t(cfg.spine_points), seed);
}

}  // namespace

std::vector<const SampleRecord*> BuiltDataset::of_specimen(const std::string& id) const {
  std::vector<const SampleRecord*> out;
  for (const auto& s : samples)
    if (s.specimen == id) out.push_back(&s);
  return out;
}

std::vector<const SampleRecord*> BuiltDataset::excluding_specimen(
    const std::string& id) const {
  std::vector<const SampleRecord*> out;
  for (const auto& s : samples)
    if (s.specimen != id) out.push_back(&s);
  return out;
}

BuiltDataset build_dataset(const DatasetManifest& manifest,
                           const ExperimentConfig& cfg) {
  cfg.validate();
  BuiltDataset ds;
  ds.specimens = manifest.specimen_ids();

  for (std::size_t si = 0; si < manifest.specimens.size(); ++si) {
    const SpecimenRecord& spec = manifest.specimens[si];
    std::vector<geom::TriangleMesh> meshes;
    meshes.reserve(spec.meshes.size());
    for (const auto& mr : spec.meshes) {
      geom::TriangleMesh mesh = io::read_ply_mesh(mr.path);
      mesh.level = mr.level;  // manifest level wins over the file comment
      meshes.push_back(std::move(mesh));
    }

    for (std::size_t fi = 0; fi < spec.frames.size(); ++fi) {
      const FrameRecord& frame = spec.frames[fi];
      const std::uint64_t frame_seed = mix_seed(cfg.seed, si, fi);

      geom::DepthImage depth = io::read_depth_png(frame.depth_path);
      if (cfg.depth_unit_mm != 1.0)
        for (float& d : depth.mm) d *= float(cfg.depth_unit_mm);
      const geom::CameraIntrinsics intr =
          io::intrinsics_from_json(io::load_json(frame.intrinsics_path));
      const geom::RigidTransform pose =
          io::pose_from_json(io::load_json(frame.pose_path));

      std::optional<geom::ColorImage> color;
      if (!frame.color_path.empty()) color = io::read_color_png(frame.color_path);
      std::optional<geom::MaskImage> spine_mask;
      if (!frame.spine_mask_path.empty())
        spine_mask = io::read_mask_png(frame.spine_mask_path);

      geom::PointCloud spine =
          geom::unproject(depth, intr, spine_mask ? &*spine_mask : nullptr,
                          color ? &*color : nullptr);
      if (spine.empty()) continue;
      spine.labels.clear();  // mask labels are not vertebra levels
      // External labels align with the raw unprojection order (row-major over
      // valid pixels), which `vsc project` reproduces; they ride through the
      // downsampler with the points.
      const bool external_labels = !frame.labels_path.empty();
      if (external_labels)
        spine.labels = read_label_file(frame.labels_path, spine.size());
      spine = downsample_spine(spine, cfg, mix_seed(frame_seed, 1));

      std::vector<geom::TriangleMesh> posed;
      posed.reserve(meshes.size());
      for (const auto& m : meshes) posed.push_back(geom::apply_transform(pose, m));

      geom::PointCloud bare = spine;
      bare.labels.clear();
      const geom::PointCloud oracle = generate_gt_labels(bare, posed, cfg.tau_bg);

      geom::PointCloud labeled;
      std::optional<double> seg_iou, seg_accuracy;
      if (external_labels) {
        labeled = spine;
        const auto seg = metrics::seg_metrics(labeled, oracle);
        seg_iou = seg.mean_iou;
        seg_accuracy = seg.accuracy;
      } else {
        labeled = oracle;
      }

      for (const auto& mesh : posed) {
        geom::PointCloud partial = extract_vertebra(labeled, mesh.level);
        if (int(partial.size()) < cfg.min_points_per_level) {
          ++ds.skipped_small;
          continue;
        }
        SampleRecord rec;
        rec.specimen = spec.id;
        rec.level = mesh.level;
        rec.frame = frame.recording;
        rec.view = frame.view;
        rec.partial = std::move(partial);
        rec.complete = geom::sample_mesh_surface(
            mesh, std::size_t(cfg.gt_complete_points), mix_seed(frame_seed, 2, mesh.level));
        rec.seg_iou = seg_iou;
        rec.seg_accuracy = seg_accuracy;
        ds.samples.push_back(std::move(rec));
      }
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// completers
// ---------------------------------------------------------------------------

geom::PointCloud ModelCompleter::complete(const SampleRecord& sample,
                                          std::uint64_t seed) const {
  const geom::PointCloud input = spatial::random_downsample(
      sample.partial, std::size_t(model_->config().n_input), seed);
  return model_->complete(input);
}

geom::PointCloud OracleCompleter::complete(const SampleRecord& sample,
                                           std::uint64_t seed) const {
  return spatial::random_downsample(sample.complete, std::size_t(n_points_), seed);
}

geom::PointCloud CopyInputCompleter::complete(const SampleRecord& sample,
                                              std::uint64_t seed) const {
  return spatial::random_downsample(sample.partial, std::size_t(n_points_), seed);
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

metrics::MetricRow evaluate_sample(const geom::PointCloud& pred,
                                   const SampleRecord& sample,
                                   const ExperimentConfig& cfg) {
  metrics::MetricRow row;
  row.specimen = sample.specimen;
  row.level = sample.level;
  row.frame = sample.frame;
  row.view = sample.view;
  row.seg_iou = sample.seg_iou;
  row.seg_accuracy = sample.seg_accuracy;

  const geom::PointCloud& gt = sample.complete;
  row.iou_input = metrics::voxel_iou(sample.partial, gt, cfg.iou_voxel);
  row.cd = metrics::chamfer(pred, gt).cd;

  double tau_vis = cfg.tau_vis;
  if (tau_vis <= 0) tau_vis = 2.0 * spatial::median_nn_spacing(sample.partial);
  const auto split = metrics::chamfer_split(pred, gt, sample.partial, tau_vis);
  // Fall back to the directed GT->pred distance when a pred partition is
  // empty, so rows stay numeric; the flag records it.
  if (split.cd_top) {
    row.cd_top = *split.cd_top;
  } else {
    row.cd_top = split.gt_top_to_pred.value_or(0.0);
    row.cd_top_fallback = true;
  }
  if (split.cd_bottom) {
    row.cd_bottom = *split.cd_bottom;
  } else {
    row.cd_bottom = split.gt_bottom_to_pred.value_or(0.0);
    row.cd_bottom_fallback = true;
  }

  row.f1 = metrics::fscore(pred, gt, cfg.fscore_pct * gt.bbox_longest_side());

  const std::uint64_t emd_seed =
      mix_seed(cfg.seed, std::uint64_t(sample.frame) * 16 + sample.level, 3);
  const int m =
      std::min({int(pred.size()), int(gt.size()), cfg.emd_points});
  const geom::PointCloud pred_s =
      spatial::random_downsample(pred, std::size_t(m), mix_seed(emd_seed, 1));
  const geom::PointCloud gt_s =
      spatial::random_downsample(gt, std::size_t(m), mix_seed(emd_seed, 2));
  row.emd = metrics::emd_normalized(pred_s, gt_s, cfg.emd_cap, cfg.emd_epsilon);

  const auto pairing = cfg.snr_pairing == "nn" ? metrics::SnrPairing::NearestNeighbor
                                               : metrics::SnrPairing::IndexMatched;
  row.snr_db = metrics::snr(pred, gt, pairing).snr_db;
  return row;
}

metrics::MetricsReport run_fold(const FoldSpec& fold, const BuiltDataset& dataset,
                                const ExperimentConfig& cfg,
                                const Completer* completer,
                                net::TrainResult* curve_out) {
  const auto held_out = dataset.of_specimen(fold.held_out);
  if (held_out.empty())
    fail(ErrorCategory::NotFound, "run_fold: no samples for specimen " + fold.held_out);

  std::optional<net::CompletionModel> model;
  std::optional<ModelCompleter> model_completer;
  if (!completer) {
    std::vector<const SampleRecord*> train_samples;
    for (const auto& id : fold.train) {
      const auto s = dataset.of_specimen(id);
      train_samples.insert(train_samples.end(), s.begin(), s.end());
    }
    if (train_samples.empty())
      fail(ErrorCategory::EmptyInput, "run_fold: empty training set");

    const auto train_set = to_train_samples(train_samples, cfg);
    model.emplace(cfg.model, cfg.model_seed);
    net::TrainConfig tc = cfg.train;
    tc.seed = mix_seed(cfg.train.seed, fold.seed);
    const auto curve = net::train(*model, train_set, {}, tc);
    if (curve_out) *curve_out = curve;
    model_completer.emplace(*model);
    completer = &*model_completer;
  }

  metrics::MetricsReport report;
  for (std::size_t i = 0; i < held_out.size(); ++i) {
    const SampleRecord& sample = *held_out[i];
    const std::uint64_t seed = mix_seed(fold.seed, cfg.seed, i);
    const geom::PointCloud pred = completer->complete(sample, seed);
    report.rows.push_back(evaluate_sample(pred, sample, cfg));
  }
  report.sort_rows();
  return report;
}

CrossvalResult run_crossval(const BuiltDataset& dataset, const ExperimentConfig& cfg) {
  const auto folds = make_folds(dataset.specimens, cfg.seed);
  CrossvalResult result;
  for (const FoldSpec& fold : folds) {
    metrics::MetricsReport rep = run_fold(fold, dataset, cfg);
    result.combined.rows.insert(result.combined.rows.end(), rep.rows.begin(),
                                rep.rows.end());
    result.per_fold.emplace_back(fold.held_out, std::move(rep));
  }
  result.combined.sort_rows();
  return result;
}

std::vector<net::TrainSample> to_train_samples(
    const std::vector<const SampleRecord*>& samples, const ExperimentConfig& cfg) {
  std::vector<net::TrainSample> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    net::TrainSample ts;
    ts.partial = spatial::random_downsample(samples[i]->partial,
                                            std::size_t(cfg.model.n_input),
                                            mix_seed(cfg.seed, 11, i));
    ts.complete = samples[i]->complete;
    out.push_back(std::move(ts));
  }
  return out;
}

}  // namespace vsc::pipe
