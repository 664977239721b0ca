// Benchmark comparing the OpenMP kernels against their serial reference
// implementations. The two paths are bit-identical by construction; this
// target reports the speed side of that bargain.

#include <chrono>
#include <cstdio>

#include <omp.h>

#include "vsc/geometry/camera.hpp"
#include "vsc/geometry/raster.hpp"
#include "vsc/metrics/metrics.hpp"
#include "vsc/pipeline/synth.hpp"
#include "vsc/spatial/kdtree.hpp"
#include "vsc/spatial/sampling.hpp"

using namespace vsc;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

geom::PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  geom::PointCloud pc;
  pc.points.resize(n);
  for (auto& p : pc.points)
    p = {rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100)};
  return pc;
}

template <class F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, ms_since(t0));
  }
  return best;
}

void row(const char* name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-28s %10.2f ms %10.2f ms %8.2fx   %s\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

  {
    const auto a = random_cloud(20000, 1);
    const auto b = random_cloud(20000, 2);
    const spatial::KdTree tree(b);
    std::vector<double> ds, dp;
    const double ts = time_best_of(3, [&] { ds = spatial::nn_sq_dists_serial(a, tree); });
    const double tp = time_best_of(3, [&] { dp = spatial::nn_sq_dists(a, tree); });
    row("nn_sq_dists 20k->20k", ts, tp, ds == dp);
  }
  {
    const auto a = random_cloud(8192, 3);
    const auto b = random_cloud(8192, 4);
    metrics::ChamferResult rs{}, rp{};
    const double ts = time_best_of(3, [&] { rs = metrics::chamfer_serial(a, b); });
    const double tp = time_best_of(3, [&] { rp = metrics::chamfer(a, b); });
    row("chamfer 8k vs 8k", ts, tp, rs.cd == rp.cd);
  }
  {
    const auto pc = random_cloud(20000, 5);
    geom::PointCloud fs, fp;
    const double ts = time_best_of(2, [&] { fs = spatial::fps_serial(pc, 2048, 7); });
    const double tp = time_best_of(2, [&] { fp = spatial::fps(pc, 2048, 7); });
    row("fps 20k->2048", ts, tp, fs.points == fp.points);
  }
  {
    geom::CameraIntrinsics intr;
    intr.fx = intr.fy = 600;
    intr.cx = 320;
    intr.cy = 240;
    intr.width = 640;
    intr.height = 480;
    std::vector<geom::TriangleMesh> meshes;
    meshes.push_back(pipe::make_ellipsoid_mesh({0, -30, 0}, {60, 45, 40}, 3, 1));
    meshes.push_back(pipe::make_ellipsoid_mesh({0, 40, 0}, {55, 42, 38}, 3, 2));
    const geom::RigidTransform pose{Mat3::identity(), {0, 0, 400}};
    geom::RenderResult rs, rp;
    const double ts =
        time_best_of(3, [&] { rs = geom::render_mask_depth_serial(meshes, pose, intr); });
    const double tp =
        time_best_of(3, [&] { rp = geom::render_mask_depth(meshes, pose, intr); });
    row("render 640x480, 2.5k tris", ts, tp,
        rs.mask.labels == rp.mask.labels && rs.depth.mm == rp.depth.mm);
  }
  {
    const auto depth = geom::DepthImage::zeros(640, 480);
    geom::DepthImage d = depth;
    for (std::size_t i = 0; i < d.mm.size(); ++i) d.mm[i] = float(400 + i % 37);
    geom::CameraIntrinsics intr;
    intr.fx = intr.fy = 600;
    intr.cx = 320;
    intr.cy = 240;
    intr.width = 640;
    intr.height = 480;
    geom::PointCloud us, up;
    const double ts = time_best_of(3, [&] { us = geom::unproject_serial(d, intr); });
    const double tp = time_best_of(3, [&] { up = geom::unproject(d, intr); });
    row("unproject 640x480", ts, tp, us.points == up.points);
  }
  return 0;
}
