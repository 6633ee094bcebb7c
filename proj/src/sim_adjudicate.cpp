#include "graspkit/sim.hpp"

#include <cmath>

namespace graspkit {

namespace {
constexpr std::size_t kAdjudicationSamples = 4096;
constexpr std::size_t kMinClosurePoints = 10;
constexpr std::uint64_t kAdjudicationSeed = 0x5ce7e5a11ceull;

struct Body {
  std::string id;
  PointCloud samples;
  Vec3 bound_center = Vec3::Zero();
  double bound_radius = 0.0;
  const SceneObject* object;
};

bool boxes_hit_body(const std::array<OrientedBox, 3>& boxes, const Body& body,
                    const Vec3& gripper_pos, double gripper_radius) {
  if ((body.bound_center - gripper_pos).norm() >
      body.bound_radius + gripper_radius)
    return false;
  for (const Vec3& p : body.samples.points)
    if (boxes[0].contains(p) || boxes[1].contains(p) || boxes[2].contains(p))
      return true;
  return false;
}
}  // namespace

GraspOutcome check_grasp_success(const Scene& scene, const std::string& target,
                                 const Pose& g_pre,
                                 const GraspCandidate& g_star,
                                 const GripperModel& gripper,
                                 const ExecParams& params,
                                 double friction_half_angle,
                                 AdjudicationDetail* detail) {
  params.validate();
  gripper.validate();
  if (!scene.find(target))
    throw std::invalid_argument("check_grasp_success: unknown target " + target);

  // Dense ground-truth surfaces, one fixed seed per object slot.
  std::vector<Body> bodies;
  std::vector<SceneObject> all = scene.objects;
  all.push_back(scene.table_object());
  bodies.reserve(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    Body body;
    body.id = all[i].id;
    body.object = &all[i];
    body.samples =
        sample_surface(scene, all[i].id, kAdjudicationSamples,
                       Rng(kAdjudicationSeed).fork(i).next());
    Vec3 lo = body.samples.points.front();
    Vec3 hi = lo;
    for (const Vec3& p : body.samples.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    body.bound_center = (lo + hi) / 2.0;
    body.bound_radius = (hi - lo).norm() / 2.0;
    bodies.push_back(std::move(body));
  }

  const double gripper_radius =
      std::hypot(gripper.finger_length + gripper.palm_depth,
                 gripper.palm_width) / 1.0;

  auto fail = [&](GraspOutcome outcome, AdjudicationDetail::Phase phase,
                  std::size_t step, const std::string& hit) {
    if (detail) {
      detail->phase = phase;
      detail->step = step;
      detail->hit_object = hit;
    }
    return outcome;
  };

  // (a) Approach sweep from the pre-grasp to the grasp.
  const Vec3 travel = g_star.pose.translation - g_pre.translation;
  const std::size_t approach_steps = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(travel.norm() / params.sweep_step)));
  for (std::size_t i = 0; i <= approach_steps; ++i) {
    Pose pose = g_star.pose;
    pose.translation =
        g_pre.translation +
        (static_cast<double>(i) / static_cast<double>(approach_steps)) * travel;
    const auto boxes = collision_boxes(gripper, pose);
    for (const Body& body : bodies) {
      if (boxes_hit_body(boxes, body, pose.translation, gripper_radius)) {
        const bool is_target = body.id == target;
        return fail(is_target ? GraspOutcome::FM2 : GraspOutcome::FM3,
                    AdjudicationDetail::Phase::Approach, i, body.id);
      }
    }
  }

  // (b) Closure at the grasp pose.
  {
    const OrientedBox region = closing_region(gripper, g_star.pose);
    const Vec3 yhat = closing_axis(g_star.pose);
    const double cos_gamma = std::cos(friction_half_angle);

    std::size_t target_in = 0;
    bool plus = false, minus = false;
    double lo = 0.0, hi = 0.0;
    for (const Body& body : bodies) {
      const bool is_target = body.id == target;
      for (std::size_t i = 0; i < body.samples.size(); ++i) {
        const Vec3& p = body.samples.points[i];
        if (!region.contains(p)) continue;
        if (!is_target)
          return fail(GraspOutcome::FM2, AdjudicationDetail::Phase::Closure, 0,
                      body.id);
        const double ly = p.dot(yhat);
        if (target_in == 0) {
          lo = hi = ly;
        } else {
          lo = std::min(lo, ly);
          hi = std::max(hi, ly);
        }
        ++target_in;
        const double ndoty = body.samples.normals[i].dot(yhat);
        plus = plus || ndoty >= cos_gamma;
        minus = minus || -ndoty >= cos_gamma;
      }
    }
    if (target_in < kMinClosurePoints || !plus || !minus ||
        hi - lo > gripper.max_aperture)
      return fail(GraspOutcome::FM2, AdjudicationDetail::Phase::Closure, 0,
                  target);
  }

  // (c) Lift sweep: gripper plus the grasped target move straight up.
  const std::size_t lift_steps = std::max<std::size_t>(
      1,
      static_cast<std::size_t>(std::ceil(params.lift_height / params.sweep_step)));
  const Body* target_body = nullptr;
  for (const Body& body : bodies)
    if (body.id == target) target_body = &body;

  for (std::size_t i = 1; i <= lift_steps; ++i) {
    const double dz = params.lift_height * static_cast<double>(i) /
                      static_cast<double>(lift_steps);
    Pose pose = g_star.pose;
    pose.translation.z() += dz;
    const auto boxes = collision_boxes(gripper, pose);

    for (const Body& body : bodies) {
      if (body.id == target) continue;
      if (boxes_hit_body(boxes, body, pose.translation, gripper_radius))
        return fail(GraspOutcome::FM3, AdjudicationDetail::Phase::Lift, i,
                    body.id);
    }
    // Lifted target surface against the other solids.
    for (const Vec3& p : target_body->samples.points) {
      const Vec3 lifted(p.x(), p.y(), p.z() + dz);
      for (const Body& body : bodies) {
        if (body.id == target) continue;
        if ((body.bound_center - lifted).norm() > body.bound_radius + 0.01)
          continue;
        const Vec3 local = body.object->pose.inverse().apply(lifted);
        if (signed_distance(body.object->shape, local) < 0.0)
          return fail(GraspOutcome::FM3, AdjudicationDetail::Phase::Lift, i,
                      body.id);
      }
    }
  }

  if (detail) *detail = AdjudicationDetail{};
  return GraspOutcome::Success;
}

}  // namespace graspkit
