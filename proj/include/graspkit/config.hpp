#pragma once

#include "graspkit/completion.hpp"
#include "graspkit/depth.hpp"
#include "graspkit/executor.hpp"
#include "graspkit/grasp.hpp"
#include "graspkit/sim.hpp"

namespace graspkit {

/// Every tunable of the pipeline, round-trippable through JSON. Parsing is
/// strict: unknown keys are rejected.
struct PipelineConfig {
  double voxel = 0.005;
  std::size_t normals_k = 30;

  // Ground-truth mask handling.
  int mask_erode_kernel = 3;
  int mask_erode_iterations = 0;
  std::size_t mask_min_pixels = 30;
  int mask_max_retries = 3;

  CompensationParams compensation;
  CompleterSpec completer{CompleterKind::Oracle, 2048, 8192, ""};
  std::size_t patch_size = 2048;
  std::size_t patch_refine_budget = 2048;

  GripperModel gripper;
  CostWeights weights;
  ExecParams exec;

  std::size_t candidates = 1000;
  SamplerParams sampler;
  double collision_neighborhood = 0.5;

  CameraIntrinsics camera;
  std::size_t viewpoint_count = 5;      // full-mode schedule
  double viewpoint_yaw_span = 70.0 * 0.017453292519943295;  // +/- rad
  double viewpoint_height_stagger = 0.15;  // raise on alternating views, m

  bool noise_enabled = true;
  NoiseModel noise;

  // Robot geometry and the seeded initial stance envelope.
  double base_height = 0.50;
  double camera_height = 0.60;
  double camera_forward = 0.25;
  double stance_distance_min = 0.72;
  double stance_distance_max = 0.95;
  double stance_lateral = 0.15;

  // Fixed per-operation seed streams derived from the episode seed.
  std::uint64_t seed_stream_noise = 1;
  std::uint64_t seed_stream_completion = 2;
  std::uint64_t seed_stream_sampler = 3;
  std::uint64_t seed_stream_stance = 4;

  void validate() const;
};

std::string config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const std::string& json_text);
void save_config(const PipelineConfig& config, const std::string& path);
PipelineConfig load_config(const std::string& path);

}  // namespace graspkit
