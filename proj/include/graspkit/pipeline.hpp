#pragma once

#include "graspkit/config.hpp"
#include "graspkit/sim.hpp"

namespace graspkit {

enum class EpisodeMode { Full, Baseline };

EpisodeMode mode_from_string(const std::string& s);
std::string to_string(EpisodeMode mode);

/// Exported intermediates of one episode, for the CLI and tests.
struct EpisodeArtifacts {
  PointCloud partial;
  PointCloud mid;       // full mode only
  PointCloud complete;  // object cloud used for grasp synthesis
  std::vector<GraspCandidate> candidates;
  std::vector<char> keep;  // collision-filter verdict per candidate
  std::vector<ScoreBreakdown> kept_scores;  // aligned with kept candidates
  std::vector<Frame> frames;               // raw rendered inputs actually used
};

struct TrialResult {
  std::string scenario;
  int run = 0;
  EpisodeMode mode = EpisodeMode::Full;
  std::string target;
  bool success = false;
  std::optional<FailureMode> failure_mode;
  std::optional<GraspCandidate> grasp;
  std::optional<ScoreBreakdown> breakdown;
  std::vector<std::string> states;       // visited states, in order
  std::vector<std::string> transitions;  // "A -> B on Event", one per line
  int frames_used = 0;
  std::uint64_t seed = 0;

  // Instrumentation for trace assertions; not serialized.
  bool completion_invoked = false;
  bool repositioned = false;
};

/// Exact-then-unique-substring match of a target query against scene ids.
std::string resolve_target(const Scene& scene, const std::string& query);

/// One full pipeline episode against the simulator: perception, geometry
/// estimation, grasp planning, and state-machine execution with ground-truth
/// adjudication. Baseline mode plans on the raw single-view partial cloud and
/// never repositions the base.
TrialResult run_episode(const Scene& scene, const std::string& target,
                        const PipelineConfig& config, EpisodeMode mode,
                        std::uint64_t seed,
                        EpisodeArtifacts* artifacts = nullptr);

std::string trial_to_json(const TrialResult& trial);
std::string fsm_log(const TrialResult& trial);
std::string grasps_to_json(const EpisodeArtifacts& artifacts);

}  // namespace graspkit
