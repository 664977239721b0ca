#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "vsc/geometry/camera.hpp"
#include "vsc/metrics/metrics.hpp"
#include "vsc/metrics/report.hpp"

using namespace vsc;
using geom::PointCloud;

namespace {

PointCloud random_cloud(std::size_t n, std::uint64_t seed, double lo = -10,
                        double hi = 10) {
  Rng rng(seed);
  PointCloud pc;
  pc.points.resize(n);
  for (auto& p : pc.points)
    p = {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
  return pc;
}

geom::RigidTransform random_rigid(std::uint64_t seed) {
  Rng rng(seed);
  return {Mat3::axis_angle(rng.unit_vector(), rng.uniform(0, 6.28)),
          {rng.uniform(-40, 40), rng.uniform(-40, 40), rng.uniform(-40, 40)}};
}

// Exhaustive-permutation EMD oracle, n <= 8.
double emd_brute_force(const PointCloud& pred, const PointCloud& gt) {
  const std::size_t n = pred.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i)
      total += (pred.points[i] - gt.points[perm[i]]).norm();
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / double(n);
}

bool is_permutation_assignment(const std::vector<int>& a) {
  std::vector<char> seen(a.size(), 0);
  for (int x : a) {
    if (x < 0 || x >= int(a.size()) || seen[x]) return false;
    seen[x] = 1;
  }
  return true;
}

}  // namespace

TEST_CASE("chamfer hand values") {
  PointCloud a, b;
  a.points = {{0, 0, 0}};
  b.points = {{1, 0, 0}};
  const auto r = metrics::chamfer(a, b);
  CHECK(r.cd == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.cd_pred_to_gt == doctest::Approx(1.0));
  CHECK(r.cd_gt_to_pred == doctest::Approx(1.0));

  PointCloud gt2;
  gt2.points = {{0, 0, 0}, {2, 0, 0}};
  const auto r2 = metrics::chamfer(a, gt2);
  CHECK(r2.cd == doctest::Approx(2.0).epsilon(1e-12));  // 0 + (0+4)/2

  const auto same = metrics::chamfer(gt2, gt2);
  CHECK(same.cd == 0.0);

  CHECK_THROWS_AS(metrics::chamfer(PointCloud{}, a), Error);
}

TEST_CASE("chamfer is symmetric and serial path matches") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto a = random_cloud(100 + s * 13, s);
    const auto b = random_cloud(80 + s * 17, s + 50);
    const auto ab = metrics::chamfer(a, b);
    const auto ba = metrics::chamfer(b, a);
    CHECK(std::abs(ab.cd - ba.cd) < 1e-12);
    CHECK(ab.cd_pred_to_gt == ba.cd_gt_to_pred);
    CHECK(metrics::chamfer_serial(a, b).cd == ab.cd);
  }
}

TEST_CASE("chamfer split: degenerate and two-cluster cases") {
  const auto gt_a = random_cloud(60, 1, 0, 5);     // cluster A
  auto gt_b = random_cloud(60, 2, 100, 105);       // cluster B far away
  PointCloud gt = gt_a;
  gt.points.insert(gt.points.end(), gt_b.points.begin(), gt_b.points.end());

  SUBCASE("input = gt: everything visible") {
    const auto r = metrics::chamfer_split(gt, gt, gt, 1.0);
    REQUIRE(r.cd_top.has_value());
    CHECK(*r.cd_top == doctest::Approx(metrics::chamfer(gt, gt).cd));
    CHECK_FALSE(r.cd_bottom.has_value());
    CHECK(r.visible_fraction == 1.0);
  }
  SUBCASE("input far from gt: nothing visible") {
    auto far = random_cloud(40, 3, 1000, 1010);
    const auto r = metrics::chamfer_split(gt, gt, far, 1.0);
    CHECK_FALSE(r.cd_top.has_value());
    REQUIRE(r.cd_bottom.has_value());
    CHECK(*r.cd_bottom == doctest::Approx(metrics::chamfer(gt, gt).cd));
    CHECK(r.visible_fraction == 0.0);
  }
  SUBCASE("two clusters, input = A, pred = gt") {
    const auto r = metrics::chamfer_split(gt, gt, gt_a, 1.0);
    REQUIRE(r.cd_top.has_value());
    REQUIRE(r.cd_bottom.has_value());
    CHECK(*r.cd_top == doctest::Approx(0.0));
    CHECK(*r.cd_bottom == doctest::Approx(0.0));
    CHECK(r.visible_fraction == doctest::Approx(0.5));
  }
  SUBCASE("empty input partial is an error") {
    CHECK_THROWS_AS(metrics::chamfer_split(gt, gt, PointCloud{}, 1.0), Error);
  }
}

TEST_CASE("fscore hand values and monotonicity") {
  PointCloud g;
  g.points = {{0, 0, 0}};
  PointCloud far = g;
  far.points[0].x = 1000;
  CHECK(metrics::fscore(g, g, 0.5) == doctest::Approx(1.0));
  CHECK(metrics::fscore(far, g, 1.0) == doctest::Approx(0.0));

  PointCloud pred;
  pred.points = {{0, 0, 0}, {10, 0, 0}};
  CHECK(metrics::fscore(pred, g, 1.0) == doctest::Approx(2.0 / 3.0));

  const auto a = random_cloud(200, 4);
  const auto b = random_cloud(220, 5);
  double prev = -1;
  for (double t : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    const double f = metrics::fscore(a, b, t);
    CHECK(f >= prev - 1e-15);
    prev = f;
  }
}

TEST_CASE("fscore default threshold is 1% of the gt extent") {
  PointCloud gt;
  gt.points = {{0, 0, 0}, {200, 10, 30}};
  CHECK(metrics::fscore_default_threshold(gt) == doctest::Approx(2.0));
}

TEST_CASE("emd_exact hand values") {
  PointCloud a, b;
  a.points = {{0, 0, 0}};
  b.points = {{3, 4, 0}};
  const auto r = metrics::emd_exact(a, b);
  CHECK(r.emd == doctest::Approx(5.0));
  CHECK(r.assignment == std::vector<int>{0});

  PointCloud p2, g2;
  p2.points = {{0, 0, 0}, {1, 0, 0}};
  g2.points = {{1, 0, 0}, {0, 0, 0}};
  const auto r2 = metrics::emd_exact(p2, g2);
  CHECK(r2.emd == doctest::Approx(0.0));
  CHECK(is_permutation_assignment(r2.assignment));
  CHECK(r2.emd == doctest::Approx(emd_brute_force(p2, g2)));

  const auto same = metrics::emd_exact(p2, p2);
  CHECK(same.emd == doctest::Approx(0.0));
}

TEST_CASE("emd_exact equals the exhaustive oracle for n <= 6") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const std::size_t n = 2 + s % 5;  // 2..6
    const auto pred = random_cloud(n, s * 3 + 1);
    const auto gt = random_cloud(n, s * 3 + 2);
    const auto got = metrics::emd_exact(pred, gt);
    CHECK(got.emd == doctest::Approx(emd_brute_force(pred, gt)).epsilon(1e-12));
    CHECK(is_permutation_assignment(got.assignment));
  }
}

TEST_CASE("emd errors: size mismatch and cap") {
  const auto a = random_cloud(4, 1);
  const auto b = random_cloud(5, 2);
  CHECK_THROWS_AS(metrics::emd_exact(a, b), Error);
  const auto big_a = random_cloud(40, 3);
  const auto big_b = random_cloud(40, 4);
  CHECK_THROWS_AS(metrics::emd_exact(big_a, big_b, 30), Error);
}

TEST_CASE("emd_exact dominates the one-directional mean NN distance") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto pred = random_cloud(30, s + 10);
    const auto gt = random_cloud(30, s + 60);
    const auto r = metrics::emd_exact(pred, gt);
    double nn_mean = 0;
    for (const Vec3& p : pred.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& g : gt.points) best = std::min(best, (p - g).norm());
      nn_mean += best;
    }
    nn_mean /= double(pred.size());
    CHECK(r.emd >= nn_mean - 1e-12);
  }
}

TEST_CASE("emd_approx stays within epsilon of exact") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto pred = random_cloud(64, s + 1, 0, 1);
    const auto gt = random_cloud(64, s + 100, 0, 1);
    const auto exact = metrics::emd_exact(pred, gt);
    const double eps = 1e-3;
    const auto approx = metrics::emd_approx(pred, gt, eps);
    CHECK(is_permutation_assignment(approx.assignment));
    CHECK(approx.emd >= exact.emd - 1e-12);
    CHECK(approx.emd <= exact.emd + eps);
  }
}

TEST_CASE("emd_approx gap is monotone as epsilon shrinks") {
  const auto pred = random_cloud(48, 7, 0, 1);
  const auto gt = random_cloud(48, 8, 0, 1);
  const double exact = metrics::emd_exact(pred, gt).emd;
  double prev_gap = std::numeric_limits<double>::infinity();
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double gap = metrics::emd_approx(pred, gt, eps).emd - exact;
    CHECK(gap <= prev_gap + 1e-12);
    CHECK(gap >= -1e-12);
    CHECK(gap <= eps + 1e-12);
    prev_gap = gap;
  }
}

TEST_CASE("snr hand values, sentinel and scaling identity") {
  PointCloud gt;
  gt.points = {{-1, 0, 0}, {1, 0, 0}};

  SUBCASE("pred equals gt: +inf sentinel") {
    const auto r = metrics::snr(gt, gt);
    CHECK(r.p_noise == 0.0);
    CHECK(std::isinf(r.snr_db));
  }
  SUBCASE("shift by 0.1 gives exactly 20 dB") {
    PointCloud pred = gt;
    for (auto& p : pred.points) p.y += 0.1;
    const auto r = metrics::snr(pred, gt);
    CHECK(r.p_signal == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.p_noise == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(r.snr_db == doctest::Approx(20.0).epsilon(1e-12));
  }
  SUBCASE("doubling the error drops snr by 10*log10(4)") {
    PointCloud p1 = gt, p2 = gt;
    for (auto& p : p1.points) p.y += 0.1;
    for (auto& p : p2.points) p.y += 0.2;
    const double drop = metrics::snr(p1, gt).snr_db - metrics::snr(p2, gt).snr_db;
    CHECK(drop == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));
  }
  SUBCASE("index-matched pairing") {
    PointCloud pred = gt;
    std::swap(pred.points[0], pred.points[1]);  // nn says 0 error, index says 2
    const auto nn = metrics::snr(pred, gt, metrics::SnrPairing::NearestNeighbor);
    CHECK(std::isinf(nn.snr_db));
    const auto im = metrics::snr(pred, gt, metrics::SnrPairing::IndexMatched);
    CHECK(im.p_noise == doctest::Approx(4.0));
  }
}

TEST_CASE("voxel_iou set arithmetic") {
  PointCloud a, b;
  a.points = {{0.5, 0.5, 0.5}, {1.5, 0.5, 0.5}};        // cells 0 and 1
  b.points = {{1.5, 0.5, 0.5}, {2.5, 0.5, 0.5}};        // cells 1 and 2
  CHECK(metrics::voxel_iou(a, b, 1.0) == doctest::Approx(1.0 / 3.0));
  CHECK(metrics::voxel_iou(a, a, 1.0) == doctest::Approx(1.0));

  PointCloud far;
  far.points = {{100, 100, 100}};
  PointCloud origin;
  origin.points = {{0, 0, 0}};
  CHECK(metrics::voxel_iou(origin, far, 1.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(metrics::voxel_iou(PointCloud{}, PointCloud{}, 1.0), Error);
}

TEST_CASE("voxel_iou is symmetric and 1 iff occupancy sets match") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto a = random_cloud(100, s);
    const auto b = random_cloud(100, s + 31);
    const double ab = metrics::voxel_iou(a, b, 2.0);
    const double ba = metrics::voxel_iou(b, a, 2.0);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-15));
    CHECK(metrics::voxel_iou(a, a, 2.0) == 1.0);
  }
}

TEST_CASE("seg_metrics confusion-matrix hand count") {
  PointCloud gt, pred;
  gt.points = pred.points = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  gt.labels = {1, 1, 2, 2};
  pred.labels = {1, 2, 2, 2};
  const auto r = metrics::seg_metrics(pred, gt);
  CHECK(r.accuracy == doctest::Approx(0.75));
  CHECK(r.per_class_iou.at(1) == doctest::Approx(0.5));
  CHECK(r.per_class_iou.at(2) == doctest::Approx(2.0 / 3.0));
  CHECK(r.mean_iou == doctest::Approx((0.5 + 2.0 / 3.0) / 2.0));

  pred.labels = gt.labels;
  const auto perfect = metrics::seg_metrics(pred, gt);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.mean_iou == 1.0);

  pred.labels = {0, 0, 0, 0};
  gt.labels = {1, 1, 1, 1};
  const auto worst = metrics::seg_metrics(pred, gt);
  CHECK(worst.accuracy == 0.0);
  CHECK(worst.per_class_iou.at(1) == 0.0);

  PointCloud short_pred = pred;
  short_pred.points.pop_back();
  short_pred.labels.pop_back();
  CHECK_THROWS_AS(metrics::seg_metrics(short_pred, gt), Error);
}

TEST_CASE("pearson basics") {
  const std::vector<double> x = {1, 2, 3};
  CHECK(metrics::pearson(x, x) == doctest::Approx(1.0));
  const std::vector<double> nx = {-1, -2, -3};
  CHECK(metrics::pearson(x, nx) == doctest::Approx(-1.0));

  const std::vector<double> y = {1, 2, 4};
  // hand evaluation: sxy=3, sxx=2, syy=14/3
  const double expected = 3.0 / std::sqrt(2.0 * 14.0 / 3.0);
  CHECK(metrics::pearson(x, y) == doctest::Approx(expected).epsilon(1e-14));

  const std::vector<double> constant = {5, 5, 5};
  CHECK_THROWS_AS(metrics::pearson(x, constant), Error);
}

TEST_CASE("metrics are invariant under common rigid transforms") {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const auto pred = random_cloud(80, s + 1);
    const auto gt = random_cloud(70, s + 200);
    const auto t = random_rigid(s + 400);
    const auto pred_t = geom::apply_transform(t, pred);
    const auto gt_t = geom::apply_transform(t, gt);

    CHECK(std::abs(metrics::chamfer(pred, gt).cd - metrics::chamfer(pred_t, gt_t).cd) <
          1e-9);
    CHECK(std::abs(metrics::fscore(pred, gt, 2.0) - metrics::fscore(pred_t, gt_t, 2.0)) <
          1e-9);
    CHECK(std::abs(metrics::snr(pred, gt).snr_db - metrics::snr(pred_t, gt_t).snr_db) <
          1e-9);

    const auto pred_eq = random_cloud(24, s + 600);
    const auto gt_eq = random_cloud(24, s + 700);
    const auto pe_t = geom::apply_transform(t, pred_eq);
    const auto ge_t = geom::apply_transform(t, gt_eq);
    CHECK(std::abs(metrics::emd_exact(pred_eq, gt_eq).emd -
                   metrics::emd_exact(pe_t, ge_t).emd) < 1e-9);
  }
}

TEST_CASE("report aggregates are the arithmetic means of rows") {
  metrics::MetricsReport rep;
  Rng rng(5);
  for (int i = 0; i < 12; ++i) {
    metrics::MetricRow row;
    row.specimen = i % 3 == 0 ? "a" : "b";
    row.level = 1 + i % 2;
    row.frame = i;
    row.iou_input = rng.uniform();
    row.cd = rng.uniform(0, 10);
    row.cd_top = rng.uniform(0, 10);
    row.cd_bottom = rng.uniform(0, 10);
    row.f1 = rng.uniform();
    row.emd = rng.uniform();
    row.snr_db = rng.uniform(0, 30);
    rep.rows.push_back(row);
  }
  const auto agg = rep.aggregate_all();
  double cd_sum = 0;
  for (const auto& r : rep.rows) cd_sum += r.cd;
  CHECK(std::abs(agg.cd - cd_sum / 12.0) < 1e-12);

  const auto by_level = rep.aggregate_per_level();
  std::size_t total = 0;
  for (const auto& [level, a] : by_level) total += a.rows;
  CHECK(total == rep.rows.size());
}

TEST_CASE("report snr +inf rows are excluded from the mean with a count") {
  metrics::MetricsReport rep;
  for (int i = 0; i < 4; ++i) {
    metrics::MetricRow row;
    row.specimen = "s";
    row.snr_db = i == 0 ? std::numeric_limits<double>::infinity() : 10.0;
    rep.rows.push_back(row);
  }
  const auto agg = rep.aggregate_all();
  CHECK(agg.snr_inf_count == 1);
  CHECK(agg.snr_db == doctest::Approx(10.0));
}

TEST_CASE("report csv round trip preserves rows including inf") {
  metrics::MetricsReport rep;
  metrics::MetricRow row;
  row.specimen = "spec9";
  row.level = 4;
  row.frame = 2;
  row.view = 1;
  row.iou_input = 0.123456789012345678;
  row.seg_iou = 0.5;
  row.seg_accuracy = 0.75;
  row.cd = 5.39;
  row.cd_top = 5.10;
  row.cd_bottom = 5.86;
  row.cd_bottom_fallback = true;
  row.f1 = 0.85;
  row.emd = 0.011;
  row.snr_db = std::numeric_limits<double>::infinity();
  rep.rows.push_back(row);

  std::stringstream ss;
  rep.write_csv(ss);
  const auto loaded = metrics::MetricsReport::read_csv(ss);
  REQUIRE(loaded.rows.size() == 1);
  const auto& r = loaded.rows[0];
  CHECK(r.specimen == "spec9");
  CHECK(r.iou_input == row.iou_input);
  CHECK(r.seg_iou == row.seg_iou);
  CHECK(r.cd == row.cd);
  CHECK(r.cd_bottom_fallback);
  CHECK(std::isinf(r.snr_db));
}

TEST_CASE("correlation matrix: diagonal, duplicated column, per-cell oracle") {
  metrics::MetricsReport rep;
  Rng rng(9);
  for (int i = 0; i < 10; ++i) {
    metrics::MetricRow row;
    row.specimen = "s" + std::to_string(i % 3);
    row.level = 1 + i % 5;
    row.frame = i;
    row.iou_input = rng.uniform();
    row.cd = rng.uniform(2, 8);
    row.cd_top = row.cd;  // duplicated column under another name
    row.cd_bottom = rng.uniform(2, 8);
    row.f1 = rng.uniform();
    row.emd = rng.uniform(0.005, 0.02);
    row.snr_db = rng.uniform(15, 25);
    rep.rows.push_back(row);
  }
  const std::vector<std::string> vars = {"level", "iou_input", "cd",  "cd_top",
                                         "cd_bottom", "f1",    "emd", "snr_db"};
  const auto m = metrics::correlation_matrix(rep, vars);
  for (std::size_t i = 0; i < vars.size(); ++i)
    CHECK(m.at(i, i) == doctest::Approx(1.0).epsilon(1e-12));
  // duplicated column: off-diagonal exactly 1
  CHECK(m.at(2, 3) == doctest::Approx(1.0).epsilon(1e-12));
  // symmetry + per-cell pearson oracle
  std::vector<std::vector<double>> cols(vars.size());
  for (const auto& r : rep.rows) {
    const double vals[] = {double(r.level), r.iou_input, r.cd,  r.cd_top,
                           r.cd_bottom,     r.f1,        r.emd, r.snr_db};
    for (std::size_t c = 0; c < vars.size(); ++c) cols[c].push_back(vals[c]);
  }
  for (std::size_t i = 0; i < vars.size(); ++i)
    for (std::size_t j = 0; j < vars.size(); ++j) {
      CHECK(m.at(i, j) == m.at(j, i));
      if (i != j)
        CHECK(m.at(i, j) ==
              doctest::Approx(metrics::pearson(cols[i], cols[j])).epsilon(1e-12));
    }
}

TEST_CASE("correlation matrix flags zero-variance columns as undefined") {
  metrics::MetricsReport rep;
  for (int i = 0; i < 5; ++i) {
    metrics::MetricRow row;
    row.specimen = "only_one";  // zero variance
    row.level = 1 + i;
    row.cd = double(i);
    rep.rows.push_back(row);
  }
  const auto m = metrics::correlation_matrix(rep, {"specimen", "level", "cd"});
  CHECK(std::isnan(m.at(0, 0)));
  CHECK(std::isnan(m.at(0, 1)));
  CHECK(m.at(1, 2) == doctest::Approx(1.0));
}
