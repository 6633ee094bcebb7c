#pragma once

#include "graspkit/grasp.hpp"

#include <optional>

namespace graspkit {

enum class FailureMode {
  FM1_Reachability,
  FM2_ApproachCollisionTarget,
  FM3_ApproachCollisionClutter,
  PerceptionFailure,
};

std::string to_string(FailureMode m);

/// Execution state. `failure` is set exactly when id == Failed.
struct FsmState {
  enum class Id {
    Idle,
    Perceive,
    EstimateGeometry,
    PlanGrasp,
    RepositionBase,
    PreGrasp,
    Insert,
    Close,
    Lift,
    Verify,
    Done,
    Failed,
  };

  Id id = Id::Idle;
  std::optional<FailureMode> failure;

  bool terminal() const { return id == Id::Done || id == Id::Failed; }
  bool operator==(const FsmState&) const = default;

  static FsmState make(Id id) { return FsmState{id, std::nullopt}; }
  static FsmState failed(FailureMode m) { return FsmState{Id::Failed, m}; }
};

std::string to_string(FsmState::Id id);
std::string to_string(const FsmState& s);

struct Event {
  enum class Kind {
    Start,
    MaskReady,
    MaskFailed,
    GeometryReady,
    GraspSelected,
    NoFeasibleGrasp,
    BaseArrived,
    ReachedPreGrasp,
    CollisionDetected,
    InsertionComplete,
    GripperClosed,
    LiftComplete,
    VerifyPassed,
    VerifySlipped,
  };

  Kind kind;
  bool out_of_reach = false;       // GraspSelected: target beyond r_max
  bool hit_target = false;         // CollisionDetected: target vs clutter
  bool retries_exhausted = false;  // MaskFailed: perception budget spent
};

std::string to_string(Event::Kind k);

/// Undefined (state, event) pairs are protocol errors, never ignored.
struct ProtocolError : std::logic_error {
  ProtocolError(const FsmState& state, const Event& event);
};

/// One transition of the execution state machine.
FsmState step_fsm(const FsmState& state, const Event& event);

/// Execution parameters, meters.
struct ExecParams {
  double delta = 0.05;             // pre-grasp offset along the approach axis
  double insertion_length = 0.05;  // Cartesian insertion from the pre-grasp
  double standoff = 0.65;          // base waypoint distance from the grasp
  double lift_height = 0.10;
  double sweep_step = 0.005;       // collision-sweep increment

  void validate() const;
};

/// Retreat delta along the grasp's local approach axis; insertion of the same
/// length lands back on the grasp.
Pose pre_grasp(const Pose& g_star, double delta);

/// Ground-plane base waypoint along the grasp approach direction, or nullopt
/// when the grasp is already within reach. Yaw faces the target; when the
/// approach axis is within 5 degrees of vertical the horizontal base-to-target
/// direction is used instead.
std::optional<Pose> plan_base_waypoint(const GraspCandidate& g_star,
                                       const Pose& base,
                                       const ExecParams& params, double r_max);

}  // namespace graspkit
