#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "stokeswim/simulator.hpp"

// Desk-scale trajectory optimization: evaluates the cost functionals and
// searches piecewise-constant plans reaching a target pose, minimizing either
// time (bang-bang phase templates, free switching durations) or power
// expended (fixed horizon, free phase values). Direct shooting against the
// simulator; derivative-free descent with restarts.

namespace stokeswim {

enum class CostKind { MinTime, Power };

struct ManeuverPlan {
  std::vector<ControlSignal::Phase> phases;
  CostKind kind = CostKind::MinTime;
  double lo = -1.0;
  double hi = 1.0;
  double pos_tol = 0.0;
  double ang_tol = 0.0;
  bool converged = false;

  double horizon() const;
  ControlSignal to_signal() const;
};

struct PlanOptions {
  double lo = -1.0;  // control bounds [lo, hi] per channel
  double hi = 1.0;
  int phase_count = 12;
  int restarts = 8;
  std::uint64_t seed = 0;
  double pos_tol = -1.0;  // <= 0 selects the default 1e-2 * max link length
  double ang_tol = 1e-2;
  double dt = 5e-3;
  double power_horizon = 0.0;  // fixed t_f, Power mode only
  int max_iterations = 350;
  // small-displacement regime accepted for goals
  double goal_displacement_factor = 0.2;  // * max link length
  double goal_rotation_limit = 0.2;       // radians
  std::optional<ManeuverPlan> warm_start;  // extra restart candidate (Power mode)

  void validate(CostKind kind) const;  // throws InfeasibleOptions
};

struct CostReport {
  double cost = 0.0;
  double position_error = 0.0;
  double rotation_error = 0.0;
};

// The two-term quadratic form of the power integrand for the equal-length
// 2-link swimmer; exact in (u1, u2) = (phi_dot, theta_dot).
double lagrangian_power(double phi, double u1, double u2, const DragCoefficients& drag,
                        double L);

// Simulates the plan and reports cost (horizon for MinTime, integrated power
// for Power) plus terminal pose errors against the goal.
CostReport evaluate_cost(const ManeuverPlan& plan, CostKind kind, const LinkChain& chain,
                         const DragCoefficients& drag, const Pose& start,
                         const ShapeState& shape0, const Pose& goal, double dt);

// Searches for a plan steering (start, shape0) to the goal pose. Returns the
// best plan found; `converged` is set only when the terminal errors meet the
// tolerances at dt and again at dt/2. Goals outside the small-displacement
// regime throw PreconditionViolation.
ManeuverPlan plan_to_pose(const LinkChain& chain, const DragCoefficients& drag,
                          const Pose& start, const ShapeState& shape0, const Pose& goal,
                          CostKind kind, const PlanOptions& options = {});

// Standard Nelder-Mead on an unconstrained vector (used by the planner; the
// simplex update sequence is deterministic).
struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
};
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, double step, int max_iterations,
                             double ftol = 1e-10);

}  // namespace stokeswim
