#include "graspkit/executor.hpp"

#include <cmath>

namespace graspkit {

std::string to_string(FailureMode m) {
  switch (m) {
    case FailureMode::FM1_Reachability: return "FM1";
    case FailureMode::FM2_ApproachCollisionTarget: return "FM2";
    case FailureMode::FM3_ApproachCollisionClutter: return "FM3";
    case FailureMode::PerceptionFailure: return "PERCEPTION";
  }
  return "?";
}

std::string to_string(FsmState::Id id) {
  switch (id) {
    case FsmState::Id::Idle: return "Idle";
    case FsmState::Id::Perceive: return "Perceive";
    case FsmState::Id::EstimateGeometry: return "EstimateGeometry";
    case FsmState::Id::PlanGrasp: return "PlanGrasp";
    case FsmState::Id::RepositionBase: return "RepositionBase";
    case FsmState::Id::PreGrasp: return "PreGrasp";
    case FsmState::Id::Insert: return "Insert";
    case FsmState::Id::Close: return "Close";
    case FsmState::Id::Lift: return "Lift";
    case FsmState::Id::Verify: return "Verify";
    case FsmState::Id::Done: return "Done";
    case FsmState::Id::Failed: return "Failed";
  }
  return "?";
}

std::string to_string(const FsmState& s) {
  if (s.id == FsmState::Id::Failed && s.failure)
    return "Failed(" + to_string(*s.failure) + ")";
  return to_string(s.id);
}

std::string to_string(Event::Kind k) {
  switch (k) {
    case Event::Kind::Start: return "Start";
    case Event::Kind::MaskReady: return "MaskReady";
    case Event::Kind::MaskFailed: return "MaskFailed";
    case Event::Kind::GeometryReady: return "GeometryReady";
    case Event::Kind::GraspSelected: return "GraspSelected";
    case Event::Kind::NoFeasibleGrasp: return "NoFeasibleGrasp";
    case Event::Kind::BaseArrived: return "BaseArrived";
    case Event::Kind::ReachedPreGrasp: return "ReachedPreGrasp";
    case Event::Kind::CollisionDetected: return "CollisionDetected";
    case Event::Kind::InsertionComplete: return "InsertionComplete";
    case Event::Kind::GripperClosed: return "GripperClosed";
    case Event::Kind::LiftComplete: return "LiftComplete";
    case Event::Kind::VerifyPassed: return "VerifyPassed";
    case Event::Kind::VerifySlipped: return "VerifySlipped";
  }
  return "?";
}

ProtocolError::ProtocolError(const FsmState& state, const Event& event)
    : std::logic_error("fsm: event " + to_string(event.kind) +
                       " undefined in state " + to_string(state)) {}

FsmState step_fsm(const FsmState& state, const Event& event) {
  using Id = FsmState::Id;
  using K = Event::Kind;

  // Collision events are accepted while the gripper is moving.
  const bool approach_state =
      state.id == Id::PreGrasp || state.id == Id::Insert || state.id == Id::Lift;
  if (event.kind == K::CollisionDetected && approach_state) {
    return FsmState::failed(event.hit_target
                                ? FailureMode::FM2_ApproachCollisionTarget
                                : FailureMode::FM3_ApproachCollisionClutter);
  }

  switch (state.id) {
    case Id::Idle:
      if (event.kind == K::Start) return FsmState::make(Id::Perceive);
      break;
    case Id::Perceive:
      if (event.kind == K::MaskReady) return FsmState::make(Id::EstimateGeometry);
      if (event.kind == K::MaskFailed) {
        if (event.retries_exhausted)
          return FsmState::failed(FailureMode::PerceptionFailure);
        return FsmState::make(Id::Perceive);
      }
      break;
    case Id::EstimateGeometry:
      if (event.kind == K::GeometryReady) return FsmState::make(Id::PlanGrasp);
      break;
    case Id::PlanGrasp:
      if (event.kind == K::GraspSelected)
        return FsmState::make(event.out_of_reach ? Id::RepositionBase
                                                 : Id::PreGrasp);
      if (event.kind == K::NoFeasibleGrasp)
        return FsmState::failed(FailureMode::FM1_Reachability);
      break;
    case Id::RepositionBase:
      if (event.kind == K::BaseArrived) return FsmState::make(Id::PreGrasp);
      break;
    case Id::PreGrasp:
      if (event.kind == K::ReachedPreGrasp) return FsmState::make(Id::Insert);
      break;
    case Id::Insert:
      if (event.kind == K::InsertionComplete) return FsmState::make(Id::Close);
      break;
    case Id::Close:
      if (event.kind == K::GripperClosed) return FsmState::make(Id::Lift);
      break;
    case Id::Lift:
      if (event.kind == K::LiftComplete) return FsmState::make(Id::Verify);
      break;
    case Id::Verify:
      if (event.kind == K::VerifyPassed) return FsmState::make(Id::Done);
      if (event.kind == K::VerifySlipped)
        return FsmState::failed(FailureMode::FM2_ApproachCollisionTarget);
      break;
    case Id::Done:
    case Id::Failed:
      break;  // terminal
  }
  throw ProtocolError(state, event);
}

void ExecParams::validate() const {
  for (double v : {delta, insertion_length, standoff, lift_height, sweep_step})
    if (!(v > 0.0))
      throw std::invalid_argument("exec params: values must be positive");
}

Pose pre_grasp(const Pose& g_star, double delta) {
  if (delta < 0.0)
    throw std::invalid_argument("pre_grasp: delta must be non-negative");
  Pose pre = g_star;
  pre.translation = g_star.translation - delta * g_star.rotation.col(0);
  return pre;
}

std::optional<Pose> plan_base_waypoint(const GraspCandidate& g_star,
                                       const Pose& base,
                                       const ExecParams& params, double r_max) {
  params.validate();
  if (params.standoff > r_max)
    throw std::invalid_argument("plan_base_waypoint: standoff exceeds r_max");

  const Vec3& p = g_star.pose.translation;
  if ((p - base.translation).norm() <= r_max) return std::nullopt;

  const Vec3 xhat = approach_axis(g_star.pose);
  Vec3 dir(xhat.x(), xhat.y(), 0.0);
  constexpr double kSin5Deg = 0.08715574274765817;
  if (dir.norm() < kSin5Deg) {
    // Near-vertical approach: fall back to the horizontal base-to-target line.
    dir = Vec3(p.x() - base.translation.x(), p.y() - base.translation.y(), 0.0);
    if (dir.norm() < 1e-12) dir = Vec3(1.0, 0.0, 0.0);
  }
  dir.normalize();

  Pose wp;
  wp.frame = base.frame;
  wp.translation = Vec3(p.x() - params.standoff * dir.x(),
                        p.y() - params.standoff * dir.y(), 0.0);
  wp.rotation.col(0) = dir;
  wp.rotation.col(1) = Vec3(-dir.y(), dir.x(), 0.0);
  wp.rotation.col(2) = Vec3(0.0, 0.0, 1.0);
  return wp;
}

}  // namespace graspkit
