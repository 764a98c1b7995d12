#pragma once

#include <optional>
#include <vector>

#include "stokeswim/controllability.hpp"
#include "stokeswim/swimmer.hpp"

// Integrates the equations of motion under prescribed controls, records
// trajectories, and evaluates the physical diagnostics (net displacement,
// power expended, scallop and commutator experiments).
//
// The integrator is a Munthe-Kaas RK4: stage twists are pulled back with the
// truncated dexp-inverse and the pose is reconstructed with the closed-form
// SE(3) exponential, so SO(3) is preserved to round-off. The shape dynamics
// (s_dot = u) integrate exactly.

namespace stokeswim {

struct ControlSignal {
  struct Phase {
    Eigen::VectorXd u;
    double duration = 0.0;
  };
  std::vector<Phase> phases;
  double lo = -1.0;  // per-channel bounds [lo, hi]
  double hi = 1.0;

  double horizon() const;
  int channels() const { return phases.empty() ? 0 : static_cast<int>(phases[0].u.size()); }

  // all values within [lo, hi], durations > 0, consistent channel counts
  void validate(int expected_channels) const;

  // zero-order-hold sampled grid: one phase of length dt per column
  static ControlSignal from_samples(const Eigen::MatrixXd& values, double dt, double lo,
                                    double hi);
};

struct TrajectorySample {
  double t = 0.0;
  Pose pose;
  ShapeState shape;
  BodyTwist twist;          // body twist under `control` at this state
  Eigen::VectorXd control;  // control applied on [t, t_next); last sample holds
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double dt = 0.0;
  LinkChain chain;
  DragCoefficients drag;

  const TrajectorySample& front() const { return samples.front(); }
  const TrajectorySample& back() const { return samples.back(); }
  double duration() const { return samples.empty() ? 0.0 : samples.back().t - samples.front().t; }
};

// One RKMK4 step under a constant control.
std::pair<Pose, ShapeState> step(const Pose& pose, const ShapeState& shape,
                                 const Eigen::VectorXd& control, const LinkChain& chain,
                                 const DragCoefficients& drag, double dt);

// Deterministic integration of a piecewise-constant signal. Steps are split
// at phase breakpoints so control discontinuities align with step boundaries.
Trajectory simulate(const LinkChain& chain, const DragCoefficients& drag, const Pose& start,
                    const ShapeState& shape0, const ControlSignal& signal, double dt);

struct Displacement {
  Vec3 delta_x = Vec3::Zero();
  double rotation_angle = 0.0;  // angle of R(0)^T R(T)
};

Displacement net_displacement(const Trajectory& traj);

struct ScallopReport {
  double net_displacement_norm = 0.0;
  double rotation_angle = 0.0;
  double max_plane_deviation = 0.0;  // distance from the plane span{e3, (cos t0, sin t0, 0)}
  Vec3 plane_normal = Vec3::Zero();
  Trajectory trajectory;
};

// Reciprocal-stroke experiment at c_tau = 0: phi follows the closed waypoint
// loop at unit rate with theta held, starting from the identity pose. Throws
// PreconditionViolation unless c_tau = 0 and the loop is closed.
ScallopReport scallop_experiment(const DragCoefficients& drag, double L,
                                 const std::vector<double>& phi_loop, double theta0,
                                 double dt);

// Plane-confinement check for an arbitrary signal at c_tau = 0 (the motion
// must stay in the plane fixed by the initial theta).
ScallopReport scallop_plane_confinement(const DragCoefficients& drag, double L,
                                        const ShapeState& shape0, const ControlSignal& signal,
                                        double dt);

struct CommutatorResult {
  Pose final_pose;
  Vec6 pose_log = Vec6::Zero();        // log of the net pose
  Vec6 predicted_twist = Vec6::Zero(); // [V1,V2] twist at shape0 (geometric)
  double eps = 0.0;
  double cosine = 0.0;                 // direction cosine pose_log vs predicted
};

// Four-phase flow u = (1,0), (0,1), (-1,0), (0,-1) on the first two channels,
// each for time eps. The shape returns exactly; the net pose log approaches
// eps^2 [V1,V2] as eps -> 0.
CommutatorResult commutator_maneuver(const LinkChain& chain, const DragCoefficients& drag,
                                     const ShapeState& shape0, double eps,
                                     int steps_per_phase = 64);

// Time integral (trapezoid on the recorded grid) of the instantaneous power
// transferred to the fluid along the trajectory.
double power_expended(const Trajectory& traj);

}  // namespace stokeswim
