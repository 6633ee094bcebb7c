#include "graspkit/grasp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace graspkit {

void GripperModel::validate() const {
  for (double v : {max_aperture, finger_length, finger_thickness, finger_height,
                   palm_depth, palm_width})
    if (!(v > 0.0))
      throw std::invalid_argument("gripper: all dimensions must be positive");
  if (palm_width + 1e-12 < max_aperture + 2.0 * finger_thickness)
    throw std::invalid_argument("gripper: palm narrower than opened fingers");
}

std::array<OrientedBox, 3> collision_boxes(const GripperModel& g,
                                           const Pose& pose) {
  const double half_gap = g.max_aperture / 2.0;
  const double finger_y = half_gap + g.finger_thickness / 2.0;

  OrientedBox left;
  left.axes = pose.rotation;
  left.half = Vec3(g.finger_length / 2.0, g.finger_thickness / 2.0,
                   g.finger_height / 2.0);
  left.center = pose.apply(Vec3(g.finger_length / 2.0, finger_y, 0.0));

  OrientedBox right = left;
  right.center = pose.apply(Vec3(g.finger_length / 2.0, -finger_y, 0.0));

  OrientedBox palm;
  palm.axes = pose.rotation;
  palm.half = Vec3(g.palm_depth / 2.0, g.palm_width / 2.0, g.finger_height / 2.0);
  palm.center = pose.apply(Vec3(-g.palm_depth / 2.0, 0.0, 0.0));

  return {left, right, palm};
}

OrientedBox closing_region(const GripperModel& g, const Pose& pose) {
  OrientedBox region;
  region.axes = pose.rotation;
  region.half =
      Vec3(g.finger_length / 2.0, g.max_aperture / 2.0, g.finger_height / 2.0);
  region.center = pose.apply(Vec3(g.finger_length / 2.0, 0.0, 0.0));
  return region;
}

// ---------------------------------------------------------------------------
// Candidate sampling
// ---------------------------------------------------------------------------

namespace {
// Orthonormal tangent basis for an approach axis.
void tangent_basis(const Vec3& xhat, Vec3& t1, Vec3& t2) {
  const Vec3 ref =
      std::abs(xhat.z()) < 0.9 ? Vec3(0.0, 0.0, 1.0) : Vec3(1.0, 0.0, 0.0);
  t1 = xhat.cross(ref).normalized();
  t2 = xhat.cross(t1);
}
}  // namespace

std::vector<GraspCandidate> sample_candidates(const PointCloud& object,
                                              const GripperModel& gripper,
                                              std::size_t n, std::uint64_t seed,
                                              const SamplerParams& params) {
  gripper.validate();
  if (object.empty() || !object.has_normals())
    throw std::invalid_argument(
        "sample_candidates: need a non-empty cloud with normals");
  if (n == 0)
    throw std::invalid_argument("sample_candidates: n must be positive");

  const double L = gripper.finger_length;
  const double half_ap = gripper.max_aperture / 2.0;
  const double outer_y = half_ap + gripper.finger_thickness;
  const double half_h = gripper.finger_height / 2.0;

  // Every point that can fall inside a finger or the closing region over a
  // retraction of at most one finger length lies in this ball around the seed.
  const double cull_radius =
      std::sqrt(2.25 * L * L + outer_y * outer_y + half_h * half_h);
  // Clearance added past each blocking point so the final strict containment
  // test cannot flip on rounding.
  constexpr double kRetreatMargin = 1e-9;

  const KdIndex index(object);
  Rng rng(seed);
  const std::size_t budget = params.seed_budget_factor * n;
  const double cos_gamma = std::cos(params.friction_half_angle);

  std::vector<GraspCandidate> out;
  out.reserve(n);

  std::vector<std::pair<double, double>> blocked;
  for (std::size_t trial = 0; trial < budget && out.size() < n; ++trial) {
    const std::size_t seed_idx = rng.index(object.size());
    const Vec3& seed_pt = object.points[seed_idx];
    const Vec3 xhat = -object.normals[seed_idx];

    Vec3 t1, t2;
    tangent_basis(xhat, t1, t2);
    const std::vector<std::size_t> local = index.radius(seed_pt, cull_radius);

    for (std::size_t k = 0; k < params.yaw_steps && out.size() < n; ++k) {
      const double ang =
          2.0 * std::numbers::pi * static_cast<double>(k) /
          static_cast<double>(params.yaw_steps);
      const Vec3 yhat = std::cos(ang) * t1 + std::sin(ang) * t2;
      const Vec3 zhat = xhat.cross(yhat);

      Pose pose;
      pose.rotation.col(0) = xhat;
      pose.rotation.col(1) = yhat;
      pose.rotation.col(2) = zhat;
      pose.frame = object.frame;

      // Initial placement: the seed sits at the closing-region center.
      const Vec3 origin0 = seed_pt - (L / 2.0) * xhat;

      // Retraction intervals blocked by points in the finger footprints.
      blocked.clear();
      for (std::size_t j : local) {
        const Vec3 d = object.points[j] - seed_pt;
        const double ly = d.dot(yhat);
        const double lz = d.dot(zhat);
        const double ay = std::abs(ly);
        if (!(ay > half_ap && ay < outer_y && std::abs(lz) < half_h)) continue;
        const double lx0 = d.dot(xhat) + L / 2.0;
        blocked.emplace_back(-lx0 - kRetreatMargin, L - lx0 + kRetreatMargin);
      }
      std::sort(blocked.begin(), blocked.end());

      double retreat = 0.0;
      {
        // Merge-and-sweep over the open blocked intervals.
        double cur_a = 0.0, cur_b = 0.0;
        bool open = false;
        for (const auto& [a, b] : blocked) {
          if (open && a <= cur_b) {
            cur_b = std::max(cur_b, b);
            continue;
          }
          if (open && retreat > cur_a && retreat < cur_b) retreat = cur_b;
          cur_a = a;
          cur_b = b;
          open = true;
        }
        if (open && retreat > cur_a && retreat < cur_b) retreat = cur_b;
      }
      if (retreat > L) continue;

      pose.translation = origin0 - retreat * xhat;

      // Validate from the final pose with the same containment arithmetic the
      // downstream checks use.
      const auto boxes = collision_boxes(gripper, pose);
      bool finger_hit = false;
      for (std::size_t j : local) {
        if (boxes[0].contains(object.points[j]) ||
            boxes[1].contains(object.points[j])) {
          finger_hit = true;
          break;
        }
      }
      if (finger_hit) continue;

      const OrientedBox region = closing_region(gripper, pose);
      std::size_t contained = 0;
      bool plus = false, minus = false;
      double lo = 0.0, hi = 0.0;
      for (std::size_t j : local) {
        const Vec3& p = object.points[j];
        if (!region.contains(p)) continue;
        const double ly = p.dot(yhat);
        if (contained == 0) {
          lo = hi = ly;
        } else {
          lo = std::min(lo, ly);
          hi = std::max(hi, ly);
        }
        ++contained;
        const double ndoty = object.normals[j].dot(yhat);
        plus = plus || ndoty >= cos_gamma;
        minus = minus || -ndoty >= cos_gamma;
      }
      if (contained < params.min_region_points || !plus || !minus) continue;

      GraspCandidate cand;
      cand.pose = pose;
      cand.width = hi - lo;
      cand.seed_index = seed_idx;
      out.push_back(std::move(cand));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Collision filtering
// ---------------------------------------------------------------------------

std::vector<char> collision_keep_mask(
    const std::vector<GraspCandidate>& candidates, const PointCloud& scene,
    const Vec3& target_centroid, const GripperModel& gripper,
    double neighborhood) {
  gripper.validate();
  if (!(neighborhood > 0.0))
    throw std::invalid_argument("collision_filter: neighborhood must be positive");

  std::vector<Vec3> local;
  const double r2 = neighborhood * neighborhood;
  for (const Vec3& p : scene.points)
    if ((p - target_centroid).squaredNorm() <= r2) local.push_back(p);

  std::vector<char> keep(candidates.size(), 1);
  const std::int64_t n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto boxes = collision_boxes(gripper, candidates[i].pose);
    for (const Vec3& p : local) {
      if (boxes[0].contains(p) || boxes[1].contains(p) ||
          boxes[2].contains(p)) {
        keep[i] = 0;
        break;
      }
    }
  }
  return keep;
}

std::vector<GraspCandidate> collision_filter(
    const std::vector<GraspCandidate>& candidates, const PointCloud& scene,
    const Vec3& target_centroid, const GripperModel& gripper,
    double neighborhood) {
  const std::vector<char> keep =
      collision_keep_mask(candidates, scene, target_centroid, gripper, neighborhood);
  std::vector<GraspCandidate> out;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (keep[i]) out.push_back(candidates[i]);
  return out;
}

namespace serial {
std::vector<char> collision_keep_mask(
    const std::vector<GraspCandidate>& candidates, const PointCloud& scene,
    const Vec3& target_centroid, const GripperModel& gripper,
    double neighborhood) {
  gripper.validate();
  if (!(neighborhood > 0.0))
    throw std::invalid_argument("collision_filter: neighborhood must be positive");

  std::vector<char> keep(candidates.size(), 1);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto boxes = collision_boxes(gripper, candidates[i].pose);
    bool hit = false;
    for (const Vec3& p : scene.points) {
      if ((p - target_centroid).norm() > neighborhood) continue;
      for (const OrientedBox& box : boxes) hit = hit || box.contains(p);
    }
    keep[i] = hit ? 0 : 1;
  }
  return keep;
}
}  // namespace serial

// ---------------------------------------------------------------------------
// Scoring and selection
// ---------------------------------------------------------------------------

void CostWeights::validate() const {
  for (double v : {w_theta, w_phi, w_c, r_max, penalty_M, below_threshold})
    if (v < 0.0)
      throw std::invalid_argument("weights: negative value");
  if (penalty_M < w_theta * std::numbers::pi + w_phi + w_c * 10.0)
    throw std::invalid_argument("weights: penalty_M below the finite cost bound");
}

ScoreBreakdown score(const GraspCandidate& candidate, const CostWeights& w,
                     const Vec3& centroid, const Vec3& base) {
  w.validate();
  const Vec3 to_target = centroid - base;
  const double len = to_target.norm();
  if (len == 0.0)
    throw std::invalid_argument("score: base coincides with the centroid");

  const Vec3 xhat = approach_axis(candidate.pose);
  const Vec3& p = candidate.pose.translation;

  ScoreBreakdown b;
  b.delta_theta =
      std::acos(std::clamp(to_target.dot(xhat) / len, -1.0, 1.0));
  b.phi = xhat.z() > w.below_threshold ? 1 : 0;
  b.centroid_dist = (p - centroid).norm();
  b.reach_dist = (p - base).norm();
  b.total = w.w_theta * std::abs(b.delta_theta) + w.w_phi * b.phi +
            w.w_c * b.centroid_dist + (b.reach_dist > w.r_max ? w.penalty_M : 0.0);
  return b;
}

std::pair<GraspCandidate, ScoreBreakdown> select(
    const std::vector<GraspCandidate>& candidates, const CostWeights& w,
    const Vec3& centroid, const Vec3& base) {
  if (candidates.empty()) throw NoFeasibleGrasp();

  std::size_t best = 0;
  ScoreBreakdown best_b = score(candidates[0], w, centroid, base);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const ScoreBreakdown b = score(candidates[i], w, centroid, base);
    if (b.total < best_b.total) {
      best = i;
      best_b = b;
    }
  }
  return {candidates[best], best_b};
}

}  // namespace graspkit
