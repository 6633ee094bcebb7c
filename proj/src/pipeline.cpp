#include "graspkit/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace graspkit {

using nlohmann::ordered_json;

EpisodeMode mode_from_string(const std::string& s) {
  if (s == "full") return EpisodeMode::Full;
  if (s == "baseline") return EpisodeMode::Baseline;
  throw std::invalid_argument("mode must be 'full' or 'baseline', got " + s);
}

std::string to_string(EpisodeMode mode) {
  return mode == EpisodeMode::Full ? "full" : "baseline";
}

std::string resolve_target(const Scene& scene, const std::string& query) {
  if (scene.find(query)) return query;
  std::string match;
  for (const SceneObject& obj : scene.objects) {
    if (obj.id.find(query) == std::string::npos) continue;
    if (!match.empty())
      throw std::invalid_argument("target '" + query + "' is ambiguous");
    match = obj.id;
  }
  if (match.empty())
    throw std::invalid_argument("target '" + query + "' not found in scene");
  return match;
}

namespace {

struct Trace {
  FsmState state = FsmState::make(FsmState::Id::Idle);
  std::vector<std::string> names{"Idle"};
  std::vector<std::string> transitions;

  void step(const Event& ev) {
    const std::string from = to_string(state);
    state = step_fsm(state, ev);
    names.push_back(to_string(state));
    transitions.push_back(from + " -> " + to_string(state) + " on " +
                          to_string(ev.kind));
  }
};

struct Stance {
  Pose base_ground;  // yaw-only pose on the floor
  Vec3 arm_base;     // reach reference at base height
};

Stance draw_stance(const PipelineConfig& config, Rng rng) {
  const double dist =
      rng.uniform(config.stance_distance_min, config.stance_distance_max);
  const double lateral =
      rng.uniform(-config.stance_lateral, config.stance_lateral);

  Stance s;
  const Vec3 pos(-dist, lateral, 0.0);
  const double yaw = std::atan2(-lateral, dist);  // face the table center
  s.base_ground.rotation =
      Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  s.base_ground.translation = pos;
  s.arm_base = Vec3(pos.x(), pos.y(), config.base_height);
  return s;
}

/// Camera for one viewpoint: the stance orbited around the scene center by
/// `yaw_offset`, looking at the tabletop center. `raise` lifts the eye, as
/// the body height varies while moving between viewpoints.
Pose viewpoint_camera(const Scene& scene, const PipelineConfig& config,
                      const Vec3& base_pos, double yaw_offset,
                      double raise = 0.0) {
  const Mat3 orbit =
      Eigen::AngleAxisd(yaw_offset, Vec3::UnitZ()).toRotationMatrix();
  const Vec3 pos = orbit * base_pos;
  const Vec3 at(0.0, 0.0, scene.table_height + 0.10);
  Vec3 forward = at - pos;
  forward.z() = 0.0;
  forward.normalize();
  const Vec3 eye = pos + config.camera_forward * forward +
                   Vec3(0.0, 0.0, config.camera_height + raise);
  return look_at_camera(eye, at);
}

std::vector<double> viewpoint_offsets(const PipelineConfig& config,
                                      EpisodeMode mode) {
  if (mode == EpisodeMode::Baseline || config.viewpoint_count == 1)
    return {0.0};
  std::vector<double> out;
  const std::size_t n = config.viewpoint_count;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back(-config.viewpoint_yaw_span +
                  2.0 * config.viewpoint_yaw_span * t);
  }
  return out;
}

void flip_normals_outward(PointCloud& cloud, const Vec3& center) {
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (cloud.normals[i].dot(cloud.points[i] - center) < 0.0)
      cloud.normals[i] = -cloud.normals[i];
}

TrialResult finish(TrialResult result, const Trace& trace) {
  result.states = trace.names;
  result.transitions = trace.transitions;
  result.success = trace.state.id == FsmState::Id::Done;
  result.failure_mode = trace.state.failure;
  return result;
}

}  // namespace

TrialResult run_episode(const Scene& scene, const std::string& target,
                        const PipelineConfig& config, EpisodeMode mode,
                        std::uint64_t seed, EpisodeArtifacts* artifacts) {
  config.validate();
  scene.validate();
  const std::string target_id = resolve_target(scene, target);

  TrialResult result;
  result.mode = mode;
  result.target = target_id;
  result.seed = seed;

  Trace trace;
  trace.step({Event::Kind::Start});

  const Rng episode_rng(seed);
  const Stance stance =
      draw_stance(config, episode_rng.fork(config.seed_stream_stance));
  Vec3 arm_base = stance.arm_base;

  const std::vector<double> offsets = viewpoint_offsets(config, mode);

  // --- Perceive: render, mask, and extract the partial cloud; retry under
  // the configured bound when the target is not usable from this stance.
  PointCloud partial;
  std::vector<Frame> used_frames;
  std::vector<DepthImage> used_raw_depths;
  Pose cam0;
  for (int attempt = 0; attempt <= config.mask_max_retries; ++attempt) {
    used_frames.clear();
    used_raw_depths.clear();

    const Rng attempt_rng = episode_rng.fork(config.seed_stream_noise)
                                .fork(static_cast<std::uint64_t>(attempt));
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      const double raise = k % 2 == 1 ? config.viewpoint_height_stagger : 0.0;
      const Pose cam = viewpoint_camera(scene, config,
                                        stance.base_ground.translation,
                                        offsets[k], raise);
      if (k == 0) cam0 = cam;
      NoiseModel noise = config.noise;
      noise.seed = attempt_rng.fork(k).next();
      const RenderResult render = render_depth(
          scene, cam, config.camera, config.noise_enabled ? &noise : nullptr);

      const MaskImage* mask = render.mask_for(target_id);
      if (!mask) continue;
      MaskImage eroded = erode_mask(*mask, config.mask_erode_kernel,
                                    config.mask_erode_iterations);
      if (eroded.count() < config.mask_min_pixels) continue;
      used_frames.push_back(Frame{render.depth, std::move(eroded), cam});
      used_raw_depths.push_back(render.depth);
    }

    if (!used_frames.empty()) {
      if (mode == EpisodeMode::Full) {
        partial = accumulate(used_frames, config.camera, config.voxel,
                             config.compensation);
      } else {
        // Raw single-view cloud: no compensation, no accumulation, and no
        // voxel merge, so silhouette geometry stays at sensor resolution.
        partial = extract_masked(used_frames[0].depth, used_frames[0].mask,
                                 config.camera, used_frames[0].cam_pose);
      }
    }

    if (!used_frames.empty() && partial.size() >= config.normals_k) {
      trace.step({Event::Kind::MaskReady});
      break;
    }
    Event ev{Event::Kind::MaskFailed};
    ev.retries_exhausted = attempt == config.mask_max_retries;
    trace.step(ev);
    if (ev.retries_exhausted) return finish(std::move(result), trace);
  }
  result.frames_used = static_cast<int>(used_frames.size());
  if (artifacts) {
    artifacts->partial = partial;
    artifacts->frames = used_frames;
  }

  // --- EstimateGeometry: two-stage completion in full mode, the raw partial
  // cloud in baseline mode.
  PointCloud object_cloud;
  PointCloud mid;
  if (mode == EpisodeMode::Full) {
    // Estimating normals before completion lets every later stage carry them
    // through, so grasp-time normals come from member averaging instead of a
    // second, smearing neighborhood fit on the merged cloud.
    if (partial.size() >= config.normals_k)
      partial = estimate_normals(partial, config.normals_k, cam0.translation);

    CompleterContext ctx;
    ctx.view_dir = (centroid(partial) - cam0.translation).normalized();
    const std::string oracle_id = config.completer.oracle_ref.empty()
                                      ? target_id
                                      : config.completer.oracle_ref;
    ctx.oracle_sampler = [&scene, oracle_id](std::size_t n, std::uint64_t s) {
      return sample_surface(scene, oracle_id, n, s);
    };

    const Rng comp_rng = episode_rng.fork(config.seed_stream_completion);
    const PointCloud synthetic =
        complete_stage1(partial, config.completer, ctx, comp_rng.fork(0).next());
    mid = merge_mid(partial, synthetic);

    PatchSet patches;
    if (mid.size() >= config.patch_size) {
      patches = patch_decompose(mid, config.patch_size, comp_rng.fork(1).next());
    } else {
      // Undersized mid cloud: one whole-cloud patch padded by resampling.
      Rng pad_rng = comp_rng.fork(1);
      patches.patch_size = config.patch_size;
      patches.patches.push_back(resample_exact(mid, config.patch_size, pad_rng));
      std::vector<std::size_t> members(mid.size());
      for (std::size_t i = 0; i < mid.size(); ++i) members[i] = i;
      patches.members.push_back(std::move(members));
    }

    object_cloud =
        refine_stage2(mid, patches, config.completer, ctx,
                      config.patch_refine_budget, config.voxel,
                      comp_rng.fork(2).next());
    result.completion_invoked = true;

    // Residual depth outliers survive the voxel merge as isolated cells with
    // unreliable normals; drop cells with no occupied neighbor cell.
    {
      const KdIndex prune_index(object_cloud);
      PointCloud pruned;
      pruned.frame = object_cloud.frame;
      for (std::size_t i = 0; i < object_cloud.size(); ++i) {
        const auto near =
            prune_index.radius(object_cloud.points[i], 2.2 * config.voxel);
        if (near.size() < 2) continue;  // only itself
        pruned.points.push_back(object_cloud.points[i]);
        if (object_cloud.has_normals())
          pruned.normals.push_back(object_cloud.normals[i]);
      }
      if (pruned.size() >= config.normals_k) object_cloud = std::move(pruned);
    }

    // With the oracle completer the ground-truth surface is the completer's
    // own output; snap normals of on-surface points to a dense oracle
    // sampling so pinch tests see the surface the simulator will judge.
    if (config.completer.kind == CompleterKind::Oracle &&
        object_cloud.has_normals()) {
      const PointCloud dense = ctx.oracle_sampler(16384, comp_rng.fork(3).next());
      const KdIndex dense_index(dense);
      for (std::size_t i = 0; i < object_cloud.size(); ++i) {
        const auto nn = dense_index.knn(object_cloud.points[i], 1);
        if (nn.empty()) continue;
        if ((dense.points[nn[0]] - object_cloud.points[i]).norm() <=
            1.5 * config.voxel)
          object_cloud.normals[i] = dense.normals[nn[0]];
      }
    }
  } else {
    object_cloud = partial;
  }

  if (!object_cloud.has_normals())
    object_cloud =
        estimate_normals(object_cloud, config.normals_k, cam0.translation);
  const Vec3 object_center = centroid(object_cloud);
  // Completed clouds cover the whole object, so their centroid is interior
  // and outward orientation is well defined; a single-view partial keeps the
  // sensor-facing orientation from estimate_normals.
  if (mode == EpisodeMode::Full) flip_normals_outward(object_cloud, object_center);
  trace.step({Event::Kind::GeometryReady});
  if (artifacts) {
    artifacts->mid = mid;
    artifacts->complete = object_cloud;
  }

  // --- PlanGrasp: sample, collision-filter against the observed environment
  // plus the object cloud, and rank.
  PointCloud collision_scene;
  collision_scene.frame = object_cloud.frame;
  {
    PointCloud env;
    env.frame = object_cloud.frame;
    for (std::size_t f = 0; f < used_frames.size(); ++f) {
      const DepthImage treated =
          mode == EpisodeMode::Full
              ? compensate_depth(used_raw_depths[f], config.compensation)
              : used_raw_depths[f];
      const PointCloud full_view =
          backproject(treated, config.camera, used_frames[f].cam_pose);
      env.points.insert(env.points.end(), full_view.points.begin(),
                        full_view.points.end());
      if (mode == EpisodeMode::Baseline) break;  // single view only
    }
    if (!env.empty()) env = voxel_downsample(env, config.voxel);
    collision_scene.points = env.points;
    collision_scene.points.insert(collision_scene.points.end(),
                                  object_cloud.points.begin(),
                                  object_cloud.points.end());
  }

  const std::vector<GraspCandidate> candidates = sample_candidates(
      object_cloud, config.gripper, config.candidates,
      episode_rng.fork(config.seed_stream_sampler).next(), config.sampler);

  // Clearance along the whole insertion: filter at the grasp pose and at
  // retreated poses back to the pre-grasp.
  std::vector<char> keep(candidates.size(), 1);
  for (double fraction : {0.0, 0.5, 1.0}) {
    std::vector<GraspCandidate> shifted = candidates;
    for (GraspCandidate& cand : shifted)
      cand.pose = pre_grasp(cand.pose, fraction * config.exec.delta);
    const std::vector<char> step_keep =
        collision_keep_mask(shifted, collision_scene, object_center,
                            config.gripper, config.collision_neighborhood);
    for (std::size_t i = 0; i < keep.size(); ++i)
      keep[i] = keep[i] && step_keep[i];
  }
  std::vector<GraspCandidate> free;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (keep[i]) free.push_back(candidates[i]);

  if (artifacts) {
    artifacts->candidates = candidates;
    artifacts->keep = keep;
    artifacts->kept_scores.clear();
  }

  GraspCandidate g_star;
  ScoreBreakdown breakdown;
  try {
    if (free.empty()) throw NoFeasibleGrasp();
    auto [cand, bd] = select(free, config.weights, object_center, arm_base);
    g_star = cand;
    breakdown = bd;
  } catch (const NoFeasibleGrasp&) {
    trace.step({Event::Kind::NoFeasibleGrasp});
    return finish(std::move(result), trace);
  }
  if (artifacts) {
    for (const GraspCandidate& cand : free)
      artifacts->kept_scores.push_back(
          score(cand, config.weights, object_center, arm_base));
  }

  const bool out_of_reach = breakdown.reach_dist > config.weights.r_max;
  if (mode == EpisodeMode::Baseline && out_of_reach) {
    // No repositioning available from a fixed stance: reachability failure.
    trace.step({Event::Kind::NoFeasibleGrasp});
    return finish(std::move(result), trace);
  }

  result.grasp = g_star;
  result.breakdown = breakdown;
  Event selected{Event::Kind::GraspSelected};
  selected.out_of_reach = out_of_reach;
  trace.step(selected);

  if (out_of_reach) {
    Pose reach_ref = stance.base_ground;
    reach_ref.translation = arm_base;
    const std::optional<Pose> wp =
        plan_base_waypoint(g_star, reach_ref, config.exec, config.weights.r_max);
    // out_of_reach implies a waypoint; teleport the base there.
    arm_base = wp->translation + Vec3(0.0, 0.0, config.base_height);
    result.repositioned = true;
    trace.step({Event::Kind::BaseArrived});
  }

  // --- Execute: adjudicate against ground truth and replay the outcome
  // through the state machine.
  const Pose g_pre = pre_grasp(g_star.pose, config.exec.delta);
  AdjudicationDetail detail;
  const GraspOutcome outcome =
      check_grasp_success(scene, target_id, g_pre, g_star, config.gripper,
                          config.exec, config.sampler.friction_half_angle,
                          &detail);

  auto collision_event = [&](bool hit_target) {
    Event ev{Event::Kind::CollisionDetected};
    ev.hit_target = hit_target;
    trace.step(ev);
  };

  switch (outcome) {
    case GraspOutcome::Success:
      trace.step({Event::Kind::ReachedPreGrasp});
      trace.step({Event::Kind::InsertionComplete});
      trace.step({Event::Kind::GripperClosed});
      trace.step({Event::Kind::LiftComplete});
      trace.step({Event::Kind::VerifyPassed});
      break;
    case GraspOutcome::FM2:
    case GraspOutcome::FM3:
      if (detail.phase == AdjudicationDetail::Phase::Approach) {
        if (detail.step > 0) trace.step({Event::Kind::ReachedPreGrasp});
        collision_event(outcome == GraspOutcome::FM2);
      } else if (detail.phase == AdjudicationDetail::Phase::Closure) {
        // A bad pinch shows up as a slip at verification.
        trace.step({Event::Kind::ReachedPreGrasp});
        trace.step({Event::Kind::InsertionComplete});
        trace.step({Event::Kind::GripperClosed});
        trace.step({Event::Kind::LiftComplete});
        trace.step({Event::Kind::VerifySlipped});
      } else {
        trace.step({Event::Kind::ReachedPreGrasp});
        trace.step({Event::Kind::InsertionComplete});
        trace.step({Event::Kind::GripperClosed});
        collision_event(false);
      }
      break;
    case GraspOutcome::FM1:
      trace.step({Event::Kind::NoFeasibleGrasp});
      break;
  }
  return finish(std::move(result), trace);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {
ordered_json pose_json(const Pose& pose) {
  ordered_json j;
  j["t"] = {pose.translation.x(), pose.translation.y(), pose.translation.z()};
  std::vector<double> r(9);
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) r[row * 3 + col] = pose.rotation(row, col);
  j["r"] = r;
  return j;
}

ordered_json breakdown_json(const ScoreBreakdown& b) {
  ordered_json j;
  j["delta_theta"] = b.delta_theta;
  j["phi"] = b.phi;
  j["centroid_dist"] = b.centroid_dist;
  j["reach_dist"] = b.reach_dist;
  j["total"] = b.total;
  return j;
}
}  // namespace

std::string trial_to_json(const TrialResult& trial) {
  ordered_json j;
  j["scenario"] = trial.scenario;
  j["run"] = trial.run;
  j["mode"] = to_string(trial.mode);
  j["target"] = trial.target;
  j["success"] = trial.success;
  j["failure_mode"] =
      trial.failure_mode ? ordered_json(to_string(*trial.failure_mode))
                         : ordered_json(nullptr);
  if (trial.grasp) {
    j["grasp"]["pose"] = pose_json(trial.grasp->pose);
    j["grasp"]["width"] = trial.grasp->width;
  } else {
    j["grasp"] = nullptr;
  }
  j["breakdown"] =
      trial.breakdown ? breakdown_json(*trial.breakdown) : ordered_json(nullptr);
  j["states"] = trial.states;
  j["frames_used"] = trial.frames_used;
  j["seed"] = trial.seed;
  return j.dump(2) + "\n";
}

std::string fsm_log(const TrialResult& trial) {
  std::string out;
  for (const std::string& line : trial.transitions) out += line + "\n";
  return out;
}

std::string grasps_to_json(const EpisodeArtifacts& artifacts) {
  ordered_json arr = ordered_json::array();
  std::size_t kept_pos = 0;
  for (std::size_t i = 0; i < artifacts.candidates.size(); ++i) {
    const GraspCandidate& cand = artifacts.candidates[i];
    ordered_json j;
    j["position"] = {cand.pose.translation.x(), cand.pose.translation.y(),
                     cand.pose.translation.z()};
    std::vector<double> r(9);
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 3; ++col)
        r[row * 3 + col] = cand.pose.rotation(row, col);
    j["rotation"] = r;
    j["width"] = cand.width;
    const bool rejected = i < artifacts.keep.size() && !artifacts.keep[i];
    if (!rejected && kept_pos < artifacts.kept_scores.size())
      j["breakdown"] = breakdown_json(artifacts.kept_scores[kept_pos++]);
    else
      j["breakdown"] = nullptr;
    j["rejected"] = rejected;
    j["reject_reason"] = rejected ? ordered_json("collision") : ordered_json(nullptr);
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

}  // namespace graspkit
