// Timing harness for the data-parallel kernels against their serial
// references: collision filtering, normal estimation, and depth rendering.
// The parallel and serial paths must agree exactly; a mismatch aborts.

#include "graspkit/grasp.hpp"
#include "graspkit/sim.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace graspkit;

namespace {

double seconds(std::chrono::steady_clock::time_point t0,
               std::chrono::steady_clock::time_point t1) {
  return std::chrono::duration<double>(t1 - t0).count();
}

template <typename F>
double time_best_of(int reps, F&& fn) {
  double best = 1e9;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, seconds(t0, t1));
  }
  return best;
}

PointCloud random_cloud(std::size_t n, Rng& rng) {
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    cloud.points.emplace_back(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                              rng.uniform(0.2, 1.0));
  return cloud;
}

void report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-22s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n",
              name, serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP disabled)\n");
#endif

  Rng rng(7);

  // Collision filtering: 1000 candidates against a 20k-point scene.
  {
    GripperModel gripper;
    PointCloud scene = random_cloud(20000, rng);
    const Vec3 center(0.0, 0.0, 0.6);

    std::vector<GraspCandidate> candidates;
    for (int i = 0; i < 1000; ++i) {
      GraspCandidate cand;
      const Vec3 axis =
          Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))
              .normalized();
      Vec3 t1 = axis.cross(Vec3::UnitZ());
      if (t1.norm() < 1e-6) t1 = axis.cross(Vec3::UnitX());
      t1.normalize();
      cand.pose.rotation.col(0) = axis;
      cand.pose.rotation.col(1) = t1;
      cand.pose.rotation.col(2) = axis.cross(t1);
      cand.pose.translation =
          center + Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                        rng.uniform(-0.3, 0.3));
      candidates.push_back(cand);
    }

    std::vector<char> mask_par, mask_ser;
    const double t_par = time_best_of(
        5, [&] { mask_par = collision_keep_mask(candidates, scene, center, gripper); });
    const double t_ser = time_best_of(3, [&] {
      mask_ser = serial::collision_keep_mask(candidates, scene, center, gripper);
    });
    if (mask_par != mask_ser) {
      std::cerr << "collision kernel mismatch vs serial reference\n";
      return 1;
    }
    report("collision_filter", t_ser, t_par);
  }

  // Normal estimation: 20k points, k = 30.
  {
    PointCloud cloud = random_cloud(20000, rng);
    const Vec3 viewpoint(0.0, 0.0, -1.0);
    PointCloud par, ser;
    const double t_par =
        time_best_of(3, [&] { par = estimate_normals(cloud, 30, viewpoint); });
    const double t_ser = time_best_of(
        2, [&] { ser = serial::estimate_normals(cloud, 30, viewpoint); });
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (par.normals[i] != ser.normals[i]) {
        std::cerr << "normal kernel mismatch vs serial reference\n";
        return 1;
      }
    }
    report("estimate_normals", t_ser, t_par);
  }

  // Depth rendering: 424x240 raster of a generated scene.
  {
    const Scene scene = generate_scene("drill", 3);
    const Pose cam = canonical_camera(scene);
    CameraIntrinsics intr;
    NoiseModel noise;
    noise.seed = 11;

    RenderResult par, ser;
    const double t_par =
        time_best_of(5, [&] { par = render_depth(scene, cam, intr, &noise); });
    const double t_ser = time_best_of(
        3, [&] { ser = serial::render_depth(scene, cam, intr, &noise); });
    if (par.depth.data != ser.depth.data) {
      std::cerr << "render kernel mismatch vs serial reference\n";
      return 1;
    }
    report("render_depth", t_ser, t_par);
  }

  return 0;
}
