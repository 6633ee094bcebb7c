#pragma once

#include "graspkit/depth.hpp"
#include "graspkit/executor.hpp"
#include "graspkit/grasp.hpp"

#include <optional>

namespace graspkit {

/// Analytic solid. Local frames: boxes are centered with full extents `dims`;
/// cylinders are centered with the axis along z; spheres are centered.
struct Primitive {
  enum class Type { Box, Cylinder, Sphere, Composite };

  Type type = Type::Box;
  Vec3 dims = Vec3(0.1, 0.1, 0.1);  // box full extents
  double radius = 0.0;              // cylinder / sphere
  double height = 0.0;              // cylinder
  std::vector<std::pair<Primitive, Pose>> parts;  // composite, depth <= 2

  void validate(int depth = 0) const;
  double surface_area() const;
};

/// Signed distance from a local-frame point to the primitive surface
/// (negative inside). Composites take the union.
double signed_distance(const Primitive& prim, const Vec3& local_point);

/// Nearest ray hit parameter s > s_min for local ray o + s*d, or nullopt.
std::optional<double> ray_hit(const Primitive& prim, const Vec3& origin,
                              const Vec3& dir, double s_min = 1e-6);

struct SceneObject {
  std::string id;
  Primitive shape;
  Pose pose;
  bool is_target = false;
};

struct Scene {
  std::vector<SceneObject> objects;
  double table_height = 0.50;
  Eigen::Vector2d table_extent = Eigen::Vector2d(1.2, 0.8);
  Eigen::Vector2d arena = Eigen::Vector2d(3.0, 3.0);

  const SceneObject* find(const std::string& id) const;
  /// The tabletop slab, rendered and collision-checked like any other object.
  SceneObject table_object() const;
  void validate() const;
};

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& json_text);
void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);

/// Depth noise: d -> d + gaussian(0, sigma0 + sigma1*d^2), dropout to invalid
/// with probability dropout_p, then quantization. All draws are keyed by the
/// pixel index and `seed`.
struct NoiseModel {
  double sigma0 = 0.002;
  double sigma1 = 0.002;   // per m^2
  double dropout_p = 0.03;
  double quantization = 0.001;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RenderResult {
  DepthImage depth;
  /// One ground-truth mask per object (scene order, then the table). Masks
  /// are pairwise disjoint and cover exactly the valid pixels.
  std::vector<std::pair<std::string, MaskImage>> masks;

  const MaskImage* mask_for(const std::string& id) const;
};

/// Per-pixel ray casting against every object plus the table. Deterministic
/// given the noise seed.
RenderResult render_depth(const Scene& scene, const Pose& cam_pose,
                          const CameraIntrinsics& intr,
                          const NoiseModel* noise = nullptr);

/// Camera pose with +z looking from `eye` toward `at`, level horizon
/// (+x right, +y down).
Pose look_at_camera(const Vec3& eye, const Vec3& at);

/// n surface points of object `id`, uniform by area, with analytic outward
/// normals, in the world frame.
PointCloud sample_surface(const Scene& scene, const std::string& id,
                          std::size_t n, std::uint64_t seed);

enum class GraspOutcome { Success, FM1, FM2, FM3 };

std::string to_string(GraspOutcome o);

struct AdjudicationDetail {
  enum class Phase { None, Approach, Closure, Lift };
  Phase phase = Phase::None;
  std::size_t step = 0;       // sweep step of the first hit
  std::string hit_object;     // id of the object hit (approach / lift)
};

/// Ground-truth adjudication of one grasp: approach sweep, closure test at
/// the grasp, then a lift sweep. Total and deterministic.
GraspOutcome check_grasp_success(const Scene& scene, const std::string& target,
                                 const Pose& g_pre,
                                 const GraspCandidate& g_star,
                                 const GripperModel& gripper,
                                 const ExecParams& params,
                                 double friction_half_angle = 0.3490658503988659,
                                 AdjudicationDetail* detail = nullptr);

/// Seeded cluttered-scene templates. Placement is re-seeded deterministically
/// until the target shows at least kMinVisiblePixels from the canonical
/// initial camera.
inline constexpr std::size_t kMinVisiblePixels = 200;

Scene generate_scene(const std::string& templ, std::uint64_t seed);

/// Canonical initial camera used by the scene-generation visibility check.
Pose canonical_camera(const Scene& scene);

namespace serial {
/// Row-serial reference renderer; bit-identical to render_depth.
RenderResult render_depth(const Scene& scene, const Pose& cam_pose,
                          const CameraIntrinsics& intr,
                          const NoiseModel* noise = nullptr);
}  // namespace serial

}  // namespace graspkit
