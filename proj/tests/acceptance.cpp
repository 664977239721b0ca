// Acceptance suite: every criterion prints one PASS/FAIL line with its
// runtime; the binary exits nonzero if any criterion fails. Budgets are
// asserted, not just reported.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "vsc/geometry/camera.hpp"
#include "vsc/geometry/raster.hpp"
#include "vsc/io/fsio.hpp"
#include "vsc/metrics/metrics.hpp"
#include "vsc/metrics/report.hpp"
#include "vsc/net/gradcheck.hpp"
#include "vsc/net/model.hpp"
#include "vsc/net/train.hpp"
#include "vsc/pipeline/experiment.hpp"
#include "vsc/pipeline/labeling.hpp"
#include "vsc/pipeline/synth.hpp"
#include "vsc/spatial/kdtree.hpp"
#include "vsc/spatial/sampling.hpp"

using namespace vsc;
using Clock = std::chrono::steady_clock;

namespace {

struct Checker {
  int failures = 0;
  std::string first_failure;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures;
    if (first_failure.empty()) first_failure = what;
  }
  void expect_near(double got, double want, double tol, const std::string& what) {
    expect(std::abs(got - want) <= tol,
           what + " (got " + std::to_string(got) + ", want " +
               std::to_string(want) + ")");
  }
};

int g_failed_criteria = 0;

void run_criterion(int id, const std::string& name, double budget_seconds,
                   const std::function<void(Checker&)>& body) {
  Checker c;
  const auto t0 = Clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  c.expect(seconds <= budget_seconds,
           "runtime " + std::to_string(seconds) + "s exceeds budget " +
               std::to_string(budget_seconds) + "s");
  const bool pass = c.failures == 0;
  if (!pass) ++g_failed_criteria;
  std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", pass ? "PASS" : "FAIL", id,
              name.c_str(), seconds, pass ? "" : " - ",
              pass ? "" : c.first_failure.c_str());
  std::fflush(stdout);
}

geom::PointCloud random_cloud(std::size_t n, std::uint64_t seed, double lo = -10,
                              double hi = 10) {
  Rng rng(seed);
  geom::PointCloud pc;
  pc.points.resize(n);
  for (auto& p : pc.points)
    p = {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
  return pc;
}

geom::RigidTransform random_rigid(std::uint64_t seed) {
  Rng rng(seed);
  return {Mat3::axis_angle(rng.unit_vector(), rng.uniform(0, 6.28)),
          {rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(-30, 30)}};
}

double emd_brute_force(const geom::PointCloud& pred, const geom::PointCloud& gt) {
  std::vector<int> perm(pred.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
      total += (pred.points[i] - gt.points[perm[i]]).norm();
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / double(pred.size());
}

// -------------------------------------------------------------------------
// criterion bodies
// -------------------------------------------------------------------------

void metric_oracles(Checker& c) {
  using namespace metrics;
  geom::PointCloud a, b;
  a.points = {{0, 0, 0}};
  b.points = {{1, 0, 0}};
  c.expect_near(chamfer(a, b).cd, 2.0, 1e-9, "chamfer single-pair");
  geom::PointCloud gt2;
  gt2.points = {{0, 0, 0}, {2, 0, 0}};
  c.expect_near(chamfer(a, gt2).cd, 2.0, 1e-9, "chamfer asymmetric case");
  c.expect_near(chamfer(gt2, gt2).cd, 0.0, 1e-9, "chamfer identical");

  geom::PointCloud g;
  g.points = {{0, 0, 0}};
  geom::PointCloud pred2;
  pred2.points = {{0, 0, 0}, {10, 0, 0}};
  c.expect_near(fscore(pred2, g, 1.0), 2.0 / 3.0, 1e-9, "fscore 2/3 case");
  c.expect_near(fscore(g, g, 0.5), 1.0, 1e-9, "fscore identical");

  geom::PointCloud e1, e2;
  e1.points = {{0, 0, 0}};
  e2.points = {{3, 4, 0}};
  c.expect_near(emd_exact(e1, e2).emd, 5.0, 1e-9, "emd 3-4-5 case");

  geom::PointCloud snr_gt;
  snr_gt.points = {{-1, 0, 0}, {1, 0, 0}};
  geom::PointCloud snr_pred = snr_gt;
  for (auto& p : snr_pred.points) p.y += 0.1;
  c.expect_near(snr(snr_pred, snr_gt).snr_db, 20.0, 1e-9, "snr 20 dB case");
  c.expect(std::isinf(snr(snr_gt, snr_gt).snr_db), "snr +inf sentinel");

  geom::PointCloud va, vb;
  va.points = {{0.5, 0.5, 0.5}, {1.5, 0.5, 0.5}};
  vb.points = {{1.5, 0.5, 0.5}, {2.5, 0.5, 0.5}};
  c.expect_near(voxel_iou(va, vb, 1.0), 1.0 / 3.0, 1e-9, "voxel_iou 1/3 case");

  geom::PointCloud sp, sg;
  sp.points = sg.points = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  sg.labels = {1, 1, 2, 2};
  sp.labels = {1, 2, 2, 2};
  const auto seg = seg_metrics(sp, sg);
  c.expect_near(seg.accuracy, 0.75, 1e-9, "seg accuracy");
  c.expect_near(seg.per_class_iou.at(1), 0.5, 1e-9, "seg iou class 1");
  c.expect_near(seg.per_class_iou.at(2), 2.0 / 3.0, 1e-9, "seg iou class 2");

  const std::vector<double> px = {1, 2, 3}, py = {1, 2, 4};
  c.expect_near(pearson(px, py), 3.0 / std::sqrt(2.0 * 14.0 / 3.0), 1e-9,
                "pearson hand case");

  // exhaustive emd oracle, 200 instances with n <= 6
  for (std::uint64_t s = 0; s < 200; ++s) {
    const std::size_t n = 2 + s % 5;
    const auto p = random_cloud(n, 1000 + 3 * s);
    const auto q = random_cloud(n, 2000 + 3 * s);
    const double exact = emd_exact(p, q).emd;
    const double brute = emd_brute_force(p, q);
    c.expect(std::abs(exact - brute) <= 1e-9, "emd vs exhaustive oracle");
  }
}

void emd_consistency(Checker& c) {
  const double eps = 1e-3;
  for (std::uint64_t s = 0; s < 50; ++s) {
    // normalized units: clouds in the unit box
    const auto p = random_cloud(128, 5000 + 2 * s, 0, 1);
    const auto q = random_cloud(128, 6000 + 2 * s, 0, 1);
    const double exact = metrics::emd_exact(p, q).emd;
    const double approx = metrics::emd_approx(p, q, eps).emd;
    c.expect(approx >= exact - 1e-12, "auction below optimal");
    c.expect(approx <= exact + eps, "auction above optimal + eps");
  }
}

void metric_invariances(Checker& c) {
  int cases = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto pred = random_cloud(60 + s % 40, 100 + s);
    const auto gt = random_cloud(50 + s % 30, 500 + s);
    const auto ab = metrics::chamfer(pred, gt);
    const auto ba = metrics::chamfer(gt, pred);
    c.expect(std::abs(ab.cd - ba.cd) < 1e-12, "chamfer symmetry");
    ++cases;

    const auto t = random_rigid(900 + s);
    const auto pred_t = geom::apply_transform(t, pred);
    const auto gt_t = geom::apply_transform(t, gt);
    c.expect(std::abs(ab.cd - metrics::chamfer(pred_t, gt_t).cd) < 1e-9,
             "cd rigid invariance");
    c.expect(std::abs(metrics::fscore(pred, gt, 2.0) -
                      metrics::fscore(pred_t, gt_t, 2.0)) < 1e-9,
             "f1 rigid invariance");
    c.expect(std::abs(metrics::snr(pred, gt).snr_db -
                      metrics::snr(pred_t, gt_t).snr_db) < 1e-9,
             "snr rigid invariance");
    cases += 3;

    if (s < 40) {
      const auto pe = random_cloud(24, 1500 + s);
      const auto ge = random_cloud(24, 1600 + s);
      const auto pe_t = geom::apply_transform(t, pe);
      const auto ge_t = geom::apply_transform(t, ge);
      c.expect(std::abs(metrics::emd_exact(pe, ge).emd -
                        metrics::emd_exact(pe_t, ge_t).emd) < 1e-9,
               "emd rigid invariance");
      ++cases;
    }

    double prev = -1;
    for (double thr : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
      const double f = metrics::fscore(pred, gt, thr);
      c.expect(f >= prev - 1e-15, "fscore monotone in threshold");
      prev = f;
      ++cases;
    }
  }
  c.expect(cases >= 1000, "at least 1000 random invariance cases");
}

void gradient_checks(Checker& c) {
  using namespace net;
  auto rt = [](int r, int cc, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    Tensor t(r, cc);
    for (double& x : t.v) x = rng.uniform(-scale, scale);
    return t;
  };
  const double tol = 1e-4;

  auto check_op = [&](const char* name, const ScalarFn& fn,
                      const std::vector<Tensor>& inputs) {
    const auto res = grad_check(fn, inputs, 40, 77);
    c.expect(res.max_rel_err < tol,
             std::string(name) + " rel err " + std::to_string(res.max_rel_err));
  };

  check_op("matmul",
           [](Graph& g, const std::vector<Value>& in) {
             return g.sum_all(g.mul(g.matmul(in[0], in[1]), g.matmul(in[0], in[1])));
           },
           {rt(4, 6, 1), rt(6, 3, 2)});
  check_op("gelu+linear",
           [](Graph& g, const std::vector<Value>& in) {
             return g.sum_all(g.gelu(g.add_rowvec(g.matmul(in[0], in[1]), in[2])));
           },
           {rt(5, 4, 3), rt(4, 6, 4), rt(1, 6, 5)});
  check_op("softmax",
           [w = rt(5, 7, 6)](Graph& g, const std::vector<Value>& in) {
             return g.sum_all(g.mul(g.softmax_rows(in[0]), g.constant(w)));
           },
           {rt(5, 7, 7)});
  check_op("layer_norm",
           [w = rt(5, 8, 8)](Graph& g, const std::vector<Value>& in) {
             return g.sum_all(
                 g.mul(g.layer_norm(in[0], in[1], in[2]), g.constant(w)));
           },
           {rt(5, 8, 9), rt(1, 8, 10), rt(1, 8, 11)});
  check_op("leaky_relu/gather/group_max",
           [](Graph& g, const std::vector<Value>& in) {
             const Value gm =
                 g.group_max_rows(g.leaky_relu(g.gather_rows(in[0], {0, 2, 1, 2, 0, 1}),
                                               0.2),
                                  3);
             return g.sum_all(g.mul(gm, gm));
           },
           {rt(3, 5, 12, 2.0)});
  {
    const Tensor gt = rt(48, 3, 13, 5.0);
    check_op("cd_loss",
             [gt](Graph& g, const std::vector<Value>& in) {
               return g.cd_loss(in[0], gt);
             },
             {rt(32, 3, 14, 5.0)});
  }
  {
    // edgeconv over a fixed graph
    const auto pts = random_cloud(8, 15);
    const auto nbrs = knn_graph_points(pts.points, 3);
    check_op("edgeconv",
             [nbrs](Graph& g, const std::vector<Value>& in) {
               const LinearVals lv{in[1], in[2]};
               const Value out = edgeconv(g, in[0], nbrs, lv);
               return g.sum_all(g.mul(out, out));
             },
             {rt(8, 4, 16), rt(8, 6, 17), rt(1, 6, 18)});
  }
  {
    // multi-head attention, 4x8 toy shapes
    const int d = 8;
    check_op("mha",
             [d](Graph& g, const std::vector<Value>& in) {
               AttnVals p;
               const Value zb = g.leaf(Tensor::zeros(1, d), false);
               p.q = {in[1], zb};
               p.k = {in[2], zb};
               p.v = {in[3], zb};
               p.o = {in[4], zb};
               const Value out = mha(g, in[0], in[0], p, 2);
               return g.sum_all(g.mul(out, out));
             },
             {rt(4, d, 19), rt(d, d, 20), rt(d, d, 21), rt(d, d, 22), rt(d, d, 23)});
  }

  // full desk-scale model: analytic parameter grads vs central differences
  const net::CompletionModel model(net::ModelConfig::desk(), 9);
  const auto partial = random_cloud(64, 24, -30, 30);
  Rng trng(25);
  net::Tensor target(48, 3);
  for (double& x : target.v) x = trng.uniform(-0.5, 0.5);

  Graph g;
  const auto f = model.forward(g, partial, true);
  g.backward(g.cd_loss(f.output, target));

  net::CompletionModel probe(model.config(), model.seed());
  Rng rng(26);
  double max_rel = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t pi = std::size_t(rng.uniform_index(probe.params().count()));
    auto& tensor = probe.params().entries()[pi].value;
    if (tensor.size() == 0) continue;
    const std::size_t ci = std::size_t(rng.uniform_index(tensor.size()));
    const double x0 = tensor.v[ci];
    const double h = 1e-5 * (1.0 + std::abs(x0));
    auto loss_with = [&](double x) {
      tensor.v[ci] = x;
      Graph pg;
      const auto pf = probe.forward(pg, partial, false);
      return pg.value(pg.cd_loss(pf.output, target)).v[0];
    };
    const double numeric = (loss_with(x0 + h) - loss_with(x0 - h)) / (2 * h);
    tensor.v[ci] = x0;
    const double analytic = g.grad(f.bound[pi]).v[ci];
    max_rel = std::max(max_rel, std::abs(analytic - numeric) /
                                    std::max({1.0, std::abs(analytic),
                                              std::abs(numeric)}));
  }
  c.expect(max_rel < tol, "full model grad check rel err " + std::to_string(max_rel));
}

void completion_benchmark(Checker& c) {
  // 200 occluded shapes (removal fraction 40-75%), desk-scale model,
  // 200 optimizer steps.
  net::ModelConfig cfg;
  cfg.encoder_depth = 2;
  cfg.decoder_depth = 2;
  cfg.num_heads = 4;
  cfg.hidden_dim = 64;
  cfg.knn_feature = 6;
  cfg.knn_geom = 8;
  cfg.n_input = 256;
  cfg.n_tokens = 32;
  cfg.n_coarse = 32;
  cfg.fold_factor = 8;
  cfg.scale = "desk";

  const int n_shapes = 200, n_holdout = 40;
  std::vector<net::TrainSample> all(n_shapes);
  for (int i = 0; i < n_shapes; ++i) {
    const auto pair = pipe::synth_occluded_shape(42 + i, std::size_t(cfg.n_input), 256);
    c.expect(pair.removed_fraction >= 0.4 && pair.removed_fraction <= 0.75,
             "occlusion fraction in range");
    all[i].partial = pair.partial;
    all[i].complete = pair.complete;
  }
  const std::span<const net::TrainSample> train_set(all.data(), n_shapes - n_holdout);
  const std::span<const net::TrainSample> holdout(all.data() + n_shapes - n_holdout,
                                                  n_holdout);

  net::CompletionModel model(cfg, 7);

  auto holdout_cd = [&](const net::CompletionModel& m) {
    double total = 0;
    for (const auto& s : holdout)
      total += metrics::chamfer(m.complete(s.partial), s.complete).cd;
    return total / double(holdout.size());
  };
  auto bottom_coverage = [&](const geom::PointCloud& pred,
                             const net::TrainSample& s) {
    // directed mean squared NN distance from the unseen gt part to pred
    const double tau_vis = 2.0 * spatial::median_nn_spacing(s.partial);
    const auto split = metrics::chamfer_split(pred, s.complete, s.partial, tau_vis);
    return split.gt_bottom_to_pred;
  };

  const double cd_init = holdout_cd(model);

  net::TrainConfig tc;
  tc.lr = 1e-3;
  tc.weight_decay = 5e-4;
  tc.batch_size = 16;
  tc.epochs = 1000;   // step cap below is the real limit
  tc.max_steps = 200;
  tc.seed = 11;
  const auto result = net::train(model, train_set, {}, tc);
  c.expect(result.steps == 200, "exactly 200 steps");

  const double cd_trained = holdout_cd(model);
  c.expect(cd_trained <= 0.5 * cd_init,
           "holdout CD drop >= 50% (init " + std::to_string(cd_init) + ", trained " +
               std::to_string(cd_trained) + ")");

  // copy-input baseline on the unseen surface
  double model_bottom = 0, baseline_bottom = 0;
  int counted = 0;
  for (const auto& s : holdout) {
    const auto pred = model.complete(s.partial);
    geom::PointCloud copy_input = spatial::random_downsample(
        s.partial, std::size_t(cfg.n_output()), 99);
    const auto mb = bottom_coverage(pred, s);
    const auto bb = bottom_coverage(copy_input, s);
    if (!mb || !bb) continue;  // fully visible shape: no bottom partition
    model_bottom += *mb;
    baseline_bottom += *bb;
    ++counted;
  }
  c.expect(counted >= 30, "bottom partition present in most holdout shapes");
  c.expect(model_bottom <= 0.7 * baseline_bottom,
           "CD_bottom best copy-input by >= 30% (model " +
               std::to_string(model_bottom / counted) + ", baseline " +
               std::to_string(baseline_bottom / counted) + ")");
}

void geometry_round_trip(Checker& c) {
  geom::CameraIntrinsics intr;
  intr.fx = intr.fy = 120;
  intr.cx = 80;
  intr.cy = 60;
  intr.width = 160;
  intr.height = 120;
  const std::vector<geom::TriangleMesh> meshes = {
      pipe::make_ellipsoid_mesh({-30, 0, 220}, {20, 16, 14}, 2, 1),
      pipe::make_ellipsoid_mesh({30, 0, 225}, {20, 16, 14}, 2, 2)};
  const auto render =
      geom::render_mask_depth(meshes, geom::RigidTransform::identity(), intr);
  auto depth = render.depth;
  for (auto& d : depth.mm) d = std::round(d);  // 16-bit carrier quantization

  const auto cloud = geom::unproject(depth, intr, &render.mask);
  c.expect(cloud.size() > 500, "scene produced a dense cloud");
  geom::PointCloud bare = cloud;
  bare.labels.clear();
  const auto labeled = pipe::generate_gt_labels(bare, meshes, 2.0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    correct += labeled.labels[i] == cloud.labels[i];
  const double rate = double(correct) / double(cloud.size());
  c.expect(rate >= 0.99, "label recovery " + std::to_string(rate));

  // unproject(project) identity
  Rng rng(31);
  geom::PointCloud pts;
  for (int i = 0; i < 1000; ++i) {
    const double z = rng.uniform(150, 500);
    pts.points.push_back({(rng.uniform(1, intr.width - 2) - intr.cx) * z / intr.fx,
                          (rng.uniform(1, intr.height - 2) - intr.cy) * z / intr.fy,
                          z});
  }
  const auto pr = geom::project(pts, intr);
  double max_err = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 back{(pr[i].u - intr.cx) * pr[i].depth / intr.fx,
                    (pr[i].v - intr.cy) * pr[i].depth / intr.fy, pr[i].depth};
    max_err = std::max(max_err, (back - pts.points[i]).norm());
  }
  c.expect(max_err < 1e-6, "project round trip max err " + std::to_string(max_err));
}

void crossval_determinism(Checker& c) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "vsc_acceptance_cv";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string fixture = (dir / "fix").string();
  pipe::write_synthetic_fixture(fixture, 2024, 2);

  const std::string overrides =
      " --set preprocess.gt_complete_points=192"
      " --set preprocess.min_points_per_level=32"
      " --set metrics.emd_points=48"
      " --set train.epochs=1 --set train.max_steps=3 --set train.batch_size=4";
  for (const char* out : {"cv1", "cv2"}) {
    const std::string cmd = std::string(VSC_CLI_PATH) + " crossval --manifest " +
                            fixture + "/manifest.json" + overrides + " --out-dir " +
                            (dir / out).string() + " > /dev/null 2>&1";
    c.expect(std::system(cmd.c_str()) == 0, std::string("crossval run ") + out);
  }
  const auto a = io::read_file((dir / "cv1" / "metrics.csv").string());
  const auto b = io::read_file((dir / "cv2" / "metrics.csv").string());
  c.expect(!a.empty() && a == b, "byte-identical crossval reports");
  fs::remove_all(dir);
}

void snr_scaling(Checker& c) {
  // deterministic perturbation along +y; every gt keeps its own pred as NN
  geom::PointCloud gt;
  Rng rng(41);
  for (int i = 0; i < 64; ++i)
    gt.points.push_back({rng.uniform(-10, 10), rng.uniform(-10, 10),
                         rng.uniform(-10, 10)});
  const double s0 = 0.01;
  auto shifted = [&](double s) {
    geom::PointCloud pred = gt;
    for (auto& p : pred.points) p.y += s;
    return pred;
  };
  const double base = metrics::snr(shifted(s0), gt).snr_db;
  for (double k : {2.0, 10.0}) {
    const double scaled = metrics::snr(shifted(s0 * k), gt).snr_db;
    c.expect(std::abs((base - scaled) - 20.0 * std::log10(k)) <= 1e-9,
             "snr shift by -20log10(" + std::to_string(k) + ")");
  }
}

void correlation_fixture(Checker& c) {
  metrics::MetricsReport rep;
  Rng rng(51);
  for (int i = 0; i < 10; ++i) {
    metrics::MetricRow row;
    row.specimen = "s" + std::to_string(i % 4);
    row.level = 1 + i % 5;
    row.frame = i;
    row.iou_input = rng.uniform(0.1, 0.5);
    row.seg_iou = rng.uniform(0.3, 0.8);
    row.seg_accuracy = rng.uniform(0.4, 0.9);
    row.cd = rng.uniform(3, 9);
    row.cd_top = rng.uniform(3, 9);
    row.cd_bottom = rng.uniform(3, 9);
    row.f1 = rng.uniform(0.6, 0.95);
    row.emd = rng.uniform(0.005, 0.03);
    row.snr_db = rng.uniform(15, 25);
    rep.rows.push_back(row);
  }
  const auto& vars = metrics::correlation_variables();
  const auto m = metrics::correlation_matrix(rep, vars);

  // per-cell pearson oracle
  std::map<std::string, double> specimen_code = {
      {"s0", 0}, {"s1", 1}, {"s2", 2}, {"s3", 3}};
  auto column = [&](const std::string& var) {
    std::vector<double> col;
    for (const auto& r : rep.rows) {
      if (var == "specimen") col.push_back(specimen_code.at(r.specimen));
      else if (var == "level") col.push_back(r.level);
      else if (var == "iou_input") col.push_back(r.iou_input);
      else if (var == "seg_iou") col.push_back(*r.seg_iou);
      else if (var == "seg_accuracy") col.push_back(*r.seg_accuracy);
      else if (var == "cd") col.push_back(r.cd);
      else if (var == "cd_top") col.push_back(r.cd_top);
      else if (var == "cd_bottom") col.push_back(r.cd_bottom);
      else if (var == "f1") col.push_back(r.f1);
      else if (var == "emd") col.push_back(r.emd);
      else col.push_back(r.snr_db);
    }
    return col;
  };
  for (std::size_t i = 0; i < vars.size(); ++i) {
    c.expect(std::abs(m.at(i, i) - 1.0) <= 1e-12, "unit diagonal");
    for (std::size_t j = 0; j < vars.size(); ++j) {
      c.expect(m.at(i, j) == m.at(j, i), "symmetry");
      if (i != j) {
        const double want = metrics::pearson(column(vars[i]), column(vars[j]));
        c.expect(std::abs(m.at(i, j) - want) <= 1e-12, "per-cell pearson oracle");
      }
    }
  }
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  run_criterion(1, "metric oracle suite (closed-form + exhaustive EMD)", 30.0,
                metric_oracles);
  run_criterion(2, "EMD auction within 1e-3 of exact, 50x n=128", 60.0,
                emd_consistency);
  run_criterion(3, "metric invariances (symmetry, rigid, monotonicity)", 60.0,
                metric_invariances);
  run_criterion(4, "gradient checks (ops + full desk model)", 300.0, gradient_checks);
  run_criterion(5, "synthetic completion benchmark (200 shapes, 200 steps)", 1200.0,
                completion_benchmark);
  run_criterion(6, "geometry round trip (render/unproject/label)", 60.0,
                geometry_round_trip);
  run_criterion(7, "crossval determinism on the synthetic fixture", 300.0,
                crossval_determinism);
  run_criterion(8, "SNR scaling identity (k = 2, 10)", 10.0, snr_scaling);
  run_criterion(9, "correlation matrix fixture vs pearson oracle", 10.0,
                correlation_fixture);

  if (g_failed_criteria) {
    std::printf("%d criterion(s) FAILED\n", g_failed_criteria);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
