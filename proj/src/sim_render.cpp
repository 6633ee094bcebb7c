#include "graspkit/sim.hpp"

#include <cmath>

namespace graspkit {

void NoiseModel::validate() const {
  if (sigma0 < 0.0 || sigma1 < 0.0 || quantization < 0.0)
    throw std::invalid_argument("noise: negative parameter");
  if (dropout_p < 0.0 || dropout_p > 1.0)
    throw std::invalid_argument("noise: dropout_p outside [0, 1]");
}

const MaskImage* RenderResult::mask_for(const std::string& id) const {
  for (const auto& [label, mask] : masks)
    if (label == id) return &mask;
  return nullptr;
}

namespace {
struct RenderBody {
  const SceneObject* object;
  Pose world_to_local;
};

// One pixel: nearest z-depth plus the hit body index (-1 for a miss).
void shade_pixel(const std::vector<RenderBody>& bodies, const Pose& cam_pose,
                 const CameraIntrinsics& intr, const NoiseModel* noise, int u,
                 int v, double& depth_out, int& hit_out) {
  // Camera-frame direction with unit z, so the ray parameter is the z-depth.
  const Vec3 dir_cam((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
  const Vec3 dir_world = cam_pose.rotation * dir_cam;
  const Vec3& origin = cam_pose.translation;

  double best = std::numeric_limits<double>::infinity();
  int hit = -1;
  for (std::size_t b = 0; b < bodies.size(); ++b) {
    const Vec3 lo = bodies[b].world_to_local.apply(origin);
    const Vec3 ld = bodies[b].world_to_local.rotation * dir_world;
    const std::optional<double> s = ray_hit(bodies[b].object->shape, lo, ld);
    if (s && *s < best) {
      best = *s;
      hit = static_cast<int>(b);
    }
  }

  if (hit < 0) {
    depth_out = 0.0;
    hit_out = -1;
    return;
  }

  double d = best;
  if (noise) {
    Rng rng = Rng(noise->seed).fork(std::uint64_t(v) * intr.width + u);
    d += rng.gaussian(noise->sigma0 + noise->sigma1 * d * d);
    if (rng.uniform() < noise->dropout_p) d = 0.0;
    if (d > 0.0 && noise->quantization > 0.0)
      d = std::round(d / noise->quantization) * noise->quantization;
  }
  if (d <= 0.0) {
    depth_out = 0.0;
    hit_out = -1;
    return;
  }
  depth_out = d;
  hit_out = hit;
}

RenderResult render_impl(const Scene& scene, const Pose& cam_pose,
                         const CameraIntrinsics& intr, const NoiseModel* noise,
                         bool parallel) {
  intr.validate();
  if (noise) noise->validate();

  const SceneObject table = scene.table_object();
  std::vector<RenderBody> bodies;
  bodies.reserve(scene.objects.size() + 1);
  for (const SceneObject& obj : scene.objects)
    bodies.push_back({&obj, obj.pose.inverse()});
  bodies.push_back({&table, table.pose.inverse()});

  RenderResult out;
  out.depth = DepthImage(intr.width, intr.height);
  std::vector<int> hits(std::size_t(intr.width) * intr.height, -1);

#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      shade_pixel(bodies, cam_pose, intr, noise, u, v, out.depth.at(u, v),
                  hits[std::size_t(v) * intr.width + u]);
    }
  }

  out.masks.reserve(bodies.size());
  for (const RenderBody& body : bodies)
    out.masks.emplace_back(body.object->id, MaskImage(intr.width, intr.height));
  for (int v = 0; v < intr.height; ++v)
    for (int u = 0; u < intr.width; ++u) {
      const int h = hits[std::size_t(v) * intr.width + u];
      if (h >= 0) out.masks[h].second.set(u, v, true);
    }
  return out;
}
}  // namespace

RenderResult render_depth(const Scene& scene, const Pose& cam_pose,
                          const CameraIntrinsics& intr,
                          const NoiseModel* noise) {
  return render_impl(scene, cam_pose, intr, noise, true);
}

namespace serial {
RenderResult render_depth(const Scene& scene, const Pose& cam_pose,
                          const CameraIntrinsics& intr,
                          const NoiseModel* noise) {
  return render_impl(scene, cam_pose, intr, noise, false);
}
}  // namespace serial

}  // namespace graspkit
