// Command-line surface of the vertebra shape completion toolkit:
// project, label, train, infer, eval, crossval, report.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "vsc/geometry/camera.hpp"
#include "vsc/io/config.hpp"
#include "vsc/io/fsio.hpp"
#include "vsc/io/ply.hpp"
#include "vsc/io/png_io.hpp"
#include "vsc/net/checkpoint.hpp"
#include "vsc/net/train.hpp"
#include "vsc/pipeline/experiment.hpp"
#include "vsc/pipeline/labeling.hpp"
#include "vsc/pipeline/synth.hpp"
#include "vsc/spatial/sampling.hpp"

namespace fs = std::filesystem;
using namespace vsc;

namespace {

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config JSON");
  cmd->add_option("--set", args.overrides,
                  "dotted-path config override, e.g. train.epochs=3");
}

pipe::ExperimentConfig resolve_config(const ConfigArgs& args) {
  nlohmann::json j = pipe::ExperimentConfig{}.to_json();
  if (!args.config_path.empty()) {
    const nlohmann::json file = io::load_json(args.config_path);
    // Merge the file over the defaults so partial configs are fine, but only
    // for keys the schema knows.
    j.merge_patch(file);
  }
  for (const auto& ov : args.overrides) io::apply_override(j, ov);
  return pipe::ExperimentConfig::from_json(j);
}

// The snapshot is the resolved config itself plus a _run metadata block, so
// `--config resolved_config.json` replays the run.
void write_snapshot(const std::string& out_dir, const std::string& subcommand,
                    const pipe::ExperimentConfig& cfg, const nlohmann::json& extra) {
  nlohmann::json j = cfg.to_json();
  j["_run"] = {{"subcommand", subcommand}, {"inputs", extra}};
  io::save_json((fs::path(out_dir) / "resolved_config.json").string(), j);
}

void write_report_files(const std::string& out_dir, const metrics::MetricsReport& rep) {
  {
    std::ostringstream os;
    rep.write_csv(os);
    io::atomic_write_file((fs::path(out_dir) / "metrics.csv").string(), os.str());
  }
  {
    std::ostringstream os;
    rep.write_json(os);
    io::atomic_write_file((fs::path(out_dir) / "aggregates.json").string(), os.str());
  }
  if (rep.rows.size() >= 2) {
    const auto corr = metrics::correlation_matrix(rep, metrics::correlation_variables());
    std::ostringstream os;
    corr.write_csv(os);
    io::atomic_write_file((fs::path(out_dir) / "correlation.csv").string(), os.str());
  }
}

int run(int argc, char** argv) {
  CLI::App app{"vertebra shape completion toolkit"};
  app.require_subcommand(1);

  // --- project ---
  auto* project = app.add_subcommand(
      "project", "unproject RGB-D (plus optional mask) into a point cloud PLY");
  std::string depth_path, intr_path, color_path, mask_path, out_path;
  bool ascii = false;
  project->add_option("--depth", depth_path, "16-bit depth PNG (mm)")->required();
  project->add_option("--intrinsics", intr_path, "intrinsics JSON")->required();
  project->add_option("--color", color_path, "8-bit RGB PNG");
  project->add_option("--mask", mask_path, "8-bit label mask PNG");
  project->add_option("--out", out_path, "output PLY")->required();
  project->add_flag("--ascii", ascii, "write ascii PLY instead of binary");
  project->callback([&] {
    const auto depth = io::read_depth_png(depth_path);
    const auto intr = io::intrinsics_from_json(io::load_json(intr_path));
    std::optional<geom::ColorImage> color;
    if (!color_path.empty()) color = io::read_color_png(color_path);
    std::optional<geom::MaskImage> mask;
    if (!mask_path.empty()) mask = io::read_mask_png(mask_path);
    const auto cloud = geom::unproject(depth, intr, mask ? &*mask : nullptr,
                                       color ? &*color : nullptr);
    io::write_ply(out_path, cloud, !ascii);
    nlohmann::json snap;
    snap["subcommand"] = "project";
    snap["depth"] = depth_path;
    snap["intrinsics"] = intr_path;
    snap["color"] = color_path;
    snap["mask"] = mask_path;
    snap["points"] = cloud.size();
    io::save_json(out_path + ".config.json", snap);
    std::cout << "projected " << cloud.size() << " points -> " << out_path << "\n";
  });

  // --- label ---
  auto* label = app.add_subcommand(
      "label", "label a spine cloud by nearest posed mesh surface");
  std::string cloud_path, pose_path, label_out;
  std::vector<std::string> mesh_paths;
  std::vector<int> mesh_levels;
  double tau_bg = 3.0;
  bool label_ascii = false;
  label->add_option("--cloud", cloud_path, "spine cloud PLY")->required();
  label->add_option("--mesh", mesh_paths, "vertebra mesh PLY (repeatable)")->required();
  label->add_option("--levels", mesh_levels,
                    "mesh levels overriding the PLY level comments");
  label->add_option("--pose", pose_path, "T_CT^CAM pose JSON")->required();
  label->add_option("--tau-bg", tau_bg, "background distance threshold, mm");
  label->add_option("--out", label_out, "labeled PLY")->required();
  label->add_flag("--ascii", label_ascii, "write ascii PLY");
  label->callback([&] {
    const auto cloud = io::read_ply_cloud(cloud_path);
    const auto pose = io::pose_from_json(io::load_json(pose_path));
    if (!mesh_levels.empty() && mesh_levels.size() != mesh_paths.size())
      fail(ErrorCategory::InvalidArgument, "--levels count must match --mesh count");
    std::vector<geom::TriangleMesh> meshes;
    for (std::size_t i = 0; i < mesh_paths.size(); ++i) {
      geom::TriangleMesh m = io::read_ply_mesh(mesh_paths[i]);
      if (!mesh_levels.empty()) m.level = mesh_levels[i];
      if (m.level < 1)
        fail(ErrorCategory::InvalidArgument,
             "mesh " + mesh_paths[i] + " has no level; pass --levels");
      meshes.push_back(geom::apply_transform(pose, m));
    }
    const auto labeled = pipe::generate_gt_labels(cloud, meshes, tau_bg);
    io::write_ply(label_out, labeled, !label_ascii);
    nlohmann::json snap;
    snap["subcommand"] = "label";
    snap["cloud"] = cloud_path;
    snap["meshes"] = mesh_paths;
    snap["pose"] = pose_path;
    snap["tau_bg"] = tau_bg;
    io::save_json(label_out + ".config.json", snap);
    std::size_t labeled_count = 0;
    for (int l : labeled.labels) labeled_count += l != 0;
    std::cout << "labeled " << labeled_count << "/" << labeled.size()
              << " points -> " << label_out << "\n";
  });

  // --- train ---
  auto* train_cmd =
      app.add_subcommand("train", "train the completion network on a manifest");
  std::string manifest_path, out_dir;
  ConfigArgs train_cfg_args;
  train_cmd->add_option("--manifest", manifest_path, "dataset manifest JSON")
      ->required();
  add_config_options(train_cmd, train_cfg_args);
  train_cmd->add_option("--out-dir", out_dir, "output directory")->required();
  train_cmd->callback([&] {
    const auto cfg = resolve_config(train_cfg_args);
    fs::create_directories(out_dir);
    const auto manifest = pipe::DatasetManifest::load(manifest_path);
    const auto dataset = pipe::build_dataset(manifest, cfg);
    if (dataset.samples.empty())
      fail(ErrorCategory::EmptyInput, "train: dataset produced no samples");
    std::vector<const pipe::SampleRecord*> all;
    for (const auto& s : dataset.samples) all.push_back(&s);
    const auto train_set = pipe::to_train_samples(all, cfg);

    net::CompletionModel model(cfg.model, cfg.model_seed);
    const auto result = net::train(model, train_set, {}, cfg.train);
    net::save_model(model, (fs::path(out_dir) / "model.ckpt").string());
    std::ostringstream os;
    net::write_loss_curve_csv(os, result);
    io::atomic_write_file((fs::path(out_dir) / "loss_curve.csv").string(), os.str());
    write_snapshot(out_dir, "train",
                   cfg, {{"manifest", manifest_path}, {"samples", train_set.size()}});
    std::cout << "trained " << result.steps << " steps on " << train_set.size()
              << " samples -> " << out_dir << "\n";
  });

  // --- infer ---
  auto* infer = app.add_subcommand("infer", "complete a partial cloud");
  std::string model_path, in_path, infer_out;
  std::uint64_t infer_seed = 1;
  bool infer_ascii = false;
  infer->add_option("--model", model_path, "model checkpoint")->required();
  infer->add_option("--in", in_path, "partial cloud PLY")->required();
  infer->add_option("--out", infer_out, "completed cloud PLY")->required();
  infer->add_option("--seed", infer_seed, "resampling seed");
  infer->add_flag("--ascii", infer_ascii, "write ascii PLY");
  infer->callback([&] {
    const auto model = net::load_model(model_path);
    const auto partial = io::read_ply_cloud(in_path);
    if (partial.empty()) fail(ErrorCategory::EmptyInput, "infer: empty input cloud");
    const auto input = spatial::random_downsample(
        partial, std::size_t(model.config().n_input), infer_seed);
    const auto completed = model.complete(input);
    io::write_ply(infer_out, completed, !infer_ascii);
    nlohmann::json snap;
    snap["subcommand"] = "infer";
    snap["model"] = model_path;
    snap["in"] = in_path;
    snap["seed"] = infer_seed;
    snap["model_config"] = nlohmann::json::parse(model.config().to_json_string());
    io::save_json(infer_out + ".config.json", snap);
    std::cout << "completed " << completed.size() << " points -> " << infer_out
              << "\n";
  });

  // --- eval ---
  auto* eval = app.add_subcommand(
      "eval", "evaluate one prediction against ground truth");
  std::string pred_path, gt_path, partial_path, eval_out_dir;
  ConfigArgs eval_cfg_args;
  eval->add_option("--pred", pred_path, "predicted cloud PLY")->required();
  eval->add_option("--gt", gt_path, "ground-truth cloud PLY")->required();
  eval->add_option("--partial", partial_path,
                   "input partial PLY (enables CD_top/CD_bottom and IoU_input)")
      ->required();
  add_config_options(eval, eval_cfg_args);
  eval->add_option("--out-dir", eval_out_dir, "output directory")->required();
  eval->callback([&] {
    const auto cfg = resolve_config(eval_cfg_args);
    fs::create_directories(eval_out_dir);
    pipe::SampleRecord sample;
    sample.specimen = "cli";
    sample.level = 0;
    sample.partial = io::read_ply_cloud(partial_path);
    sample.complete = io::read_ply_cloud(gt_path);
    const auto pred = io::read_ply_cloud(pred_path);
    metrics::MetricsReport rep;
    rep.rows.push_back(pipe::evaluate_sample(pred, sample, cfg));
    write_report_files(eval_out_dir, rep);
    write_snapshot(eval_out_dir, "eval", cfg,
                   {{"pred", pred_path}, {"gt", gt_path}, {"partial", partial_path}});
    const auto& row = rep.rows[0];
    std::cout << "cd=" << row.cd << " cd_top=" << row.cd_top
              << " cd_bottom=" << row.cd_bottom << " f1=" << row.f1
              << " emd=" << row.emd << " snr_db=" << row.snr_db
              << " iou_input=" << row.iou_input << "\n";
  });

  // --- crossval ---
  auto* crossval = app.add_subcommand(
      "crossval", "leave-one-specimen-out cross-validation");
  std::string cv_manifest, cv_out_dir;
  ConfigArgs cv_cfg_args;
  crossval->add_option("--manifest", cv_manifest, "dataset manifest JSON")->required();
  add_config_options(crossval, cv_cfg_args);
  crossval->add_option("--out-dir", cv_out_dir, "output directory")->required();
  crossval->callback([&] {
    const auto cfg = resolve_config(cv_cfg_args);
    fs::create_directories(cv_out_dir);
    const auto manifest = pipe::DatasetManifest::load(cv_manifest);
    const auto dataset = pipe::build_dataset(manifest, cfg);
    if (dataset.samples.empty())
      fail(ErrorCategory::EmptyInput, "crossval: dataset produced no samples");
    const auto result = pipe::run_crossval(dataset, cfg);
    for (const auto& [held_out, rep] : result.per_fold) {
      std::ostringstream os;
      rep.write_csv(os);
      io::atomic_write_file(
          (fs::path(cv_out_dir) / ("fold_" + held_out + ".csv")).string(), os.str());
    }
    write_report_files(cv_out_dir, result.combined);
    write_snapshot(cv_out_dir, "crossval", cfg,
                   {{"manifest", cv_manifest},
                    {"samples", dataset.samples.size()},
                    {"skipped_small", dataset.skipped_small}});
    std::cout << "crossval: " << result.per_fold.size() << " folds, "
              << result.combined.rows.size() << " rows -> " << cv_out_dir << "\n";
  });

  // --- report ---
  auto* report = app.add_subcommand(
      "report", "aggregate a metrics CSV into JSON + correlation matrix");
  std::string rows_path, report_out_dir;
  report->add_option("--rows", rows_path, "metrics CSV (combined rows)")->required();
  report->add_option("--out-dir", report_out_dir, "output directory")->required();
  report->callback([&] {
    std::ifstream in(rows_path);
    if (!in) fail(ErrorCategory::Io, "cannot open " + rows_path);
    auto rep = metrics::MetricsReport::read_csv(in);
    rep.sort_rows();
    fs::create_directories(report_out_dir);
    write_report_files(report_out_dir, rep);
    nlohmann::json snap;
    snap["subcommand"] = "report";
    snap["rows"] = rows_path;
    io::save_json((fs::path(report_out_dir) / "resolved_config.json").string(), snap);
    std::cout << "aggregated " << rep.rows.size() << " rows -> " << report_out_dir
              << "\n";
  });

  // --- synth-fixture (test/demo data) ---
  auto* synth = app.add_subcommand(
      "synth-fixture", "write the bundled two-specimen synthetic dataset");
  std::string synth_dir;
  std::uint64_t synth_seed = 2024;
  int synth_frames = 3;
  synth->add_option("--out-dir", synth_dir, "output directory")->required();
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--frames", synth_frames, "frames per specimen");
  synth->callback([&] {
    const auto manifest = pipe::write_synthetic_fixture(synth_dir, synth_seed,
                                                        synth_frames);
    std::cout << "fixture manifest: " << manifest << "\n";
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error category=" << category_name(e.category) << ": " << e.what();
    if (e.offset) std::cerr << " (byte offset " << *e.offset << ")";
    std::cerr << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error category=internal: " << e.what() << "\n";
    return 1;
  }
}
