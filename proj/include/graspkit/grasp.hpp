#pragma once

#include "graspkit/core.hpp"

#include <array>
#include <optional>

namespace graspkit {

/// Parallel-jaw gripper dimensions, meters.
struct GripperModel {
  double max_aperture = 0.10;
  double finger_length = 0.08;
  double finger_thickness = 0.02;
  double finger_height = 0.03;
  double palm_depth = 0.04;
  double palm_width = 0.14;

  void validate() const;
};

/// Box with arbitrary orientation; `axes` columns are the box axes.
struct OrientedBox {
  Vec3 center = Vec3::Zero();
  Mat3 axes = Mat3::Identity();
  Vec3 half = Vec3::Zero();

  /// Strict interior test; boundary points do not count.
  bool contains(const Vec3& p) const {
    const Vec3 local = axes.transpose() * (p - center);
    return std::abs(local.x()) < half.x() && std::abs(local.y()) < half.y() &&
           std::abs(local.z()) < half.z();
  }
};

/// 6-DoF grasp. Gripper frame: x = approach axis (palm toward object),
/// y = closing axis, z = x cross y. The pose origin sits at the center of the
/// palm's front face, where the fingers begin.
struct GraspCandidate {
  Pose pose;
  double width = 0.0;       // closing-axis extent of the grasped points
  std::size_t seed_index = 0;  // cloud index of the surface seed
};

inline Vec3 approach_axis(const Pose& pose) { return pose.rotation.col(0); }
inline Vec3 closing_axis(const Pose& pose) { return pose.rotation.col(1); }

/// The two finger boxes and the palm box, posed in the world.
std::array<OrientedBox, 3> collision_boxes(const GripperModel& g,
                                           const Pose& pose);

/// Volume swept between the fingers; grasped, not collided with.
OrientedBox closing_region(const GripperModel& g, const Pose& pose);

struct SamplerParams {
  std::size_t yaw_steps = 8;           // closing-axis rotations per seed
  double friction_half_angle = 20.0 * 0.017453292519943295;  // rad
  std::size_t min_region_points = 5;
  std::size_t seed_budget_factor = 20;  // seed trials = factor * n
};

/// Antipodal candidate sampling on an object cloud with normals. Deterministic
/// for a given seed; returns at most n candidates (fewer when the seed budget
/// runs out).
std::vector<GraspCandidate> sample_candidates(const PointCloud& object,
                                              const GripperModel& gripper,
                                              std::size_t n, std::uint64_t seed,
                                              const SamplerParams& params = {});

/// Gripper-vs-scene collision kernel. Scene points within `neighborhood` of
/// target_centroid are tested against the three collision boxes at each
/// candidate pose; a candidate is rejected iff any tested point lies strictly
/// inside a box. Output preserves input order.
std::vector<GraspCandidate> collision_filter(
    const std::vector<GraspCandidate>& candidates, const PointCloud& scene,
    const Vec3& target_centroid, const GripperModel& gripper,
    double neighborhood = 0.5);

/// Per-candidate keep mask from the same kernel; collision_filter is the
/// subsequence this induces.
std::vector<char> collision_keep_mask(
    const std::vector<GraspCandidate>& candidates, const PointCloud& scene,
    const Vec3& target_centroid, const GripperModel& gripper,
    double neighborhood = 0.5);

/// Weighted-cost parameters. penalty_M must exceed every achievable finite
/// cost (at least w_theta*pi + w_phi + w_c*10).
struct CostWeights {
  double w_theta = 1.0;        // per rad of approach misalignment
  double w_phi = 2.0;          // below-approach penalty
  double w_c = 5.0;            // per m of centroid distance
  double r_max = 0.9;          // reach radius, m
  double penalty_M = 1e6;
  double below_threshold = 0.2;  // approach-axis world-z bound for phi

  void validate() const;
};

struct ScoreBreakdown {
  double delta_theta = 0.0;  // rad, angle(base->centroid, approach axis)
  int phi = 0;               // 1 when approaching from below
  double centroid_dist = 0.0;
  double reach_dist = 0.0;
  double total = 0.0;
};

struct NoFeasibleGrasp : std::runtime_error {
  NoFeasibleGrasp() : std::runtime_error("no feasible grasp candidate") {}
};

ScoreBreakdown score(const GraspCandidate& candidate, const CostWeights& w,
                     const Vec3& centroid, const Vec3& base);

/// Argmin of the total cost over an already collision-filtered list; ties by
/// ascending index. Throws NoFeasibleGrasp on an empty list.
std::pair<GraspCandidate, ScoreBreakdown> select(
    const std::vector<GraspCandidate>& candidates, const CostWeights& w,
    const Vec3& centroid, const Vec3& base);

namespace serial {
/// Single-threaded reference collision kernel: every point against every box,
/// no culling or early exit. Kept for tests and the kernel benchmark.
std::vector<char> collision_keep_mask(
    const std::vector<GraspCandidate>& candidates, const PointCloud& scene,
    const Vec3& target_centroid, const GripperModel& gripper,
    double neighborhood = 0.5);
}  // namespace serial

}  // namespace graspkit
