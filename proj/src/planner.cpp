#include "stokeswim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "stokeswim/parallel.hpp"

namespace stokeswim {

double ManeuverPlan::horizon() const {
  double t = 0.0;
  for (const auto& p : phases) t += p.duration;
  return t;
}

ControlSignal ManeuverPlan::to_signal() const {
  ControlSignal s;
  s.lo = lo;
  s.hi = hi;
  s.phases = phases;
  return s;
}

void PlanOptions::validate(CostKind kind) const {
  if (!(lo < hi)) throw InfeasibleOptions("bounds must satisfy lo < hi");
  if (phase_count < 4) throw InfeasibleOptions("phase_count must be >= 4");
  if (restarts < 1) throw InfeasibleOptions("restarts must be >= 1");
  if (ang_tol <= 0.0) throw InfeasibleOptions("ang_tol must be > 0");
  if (!(dt > 0.0)) throw InfeasibleOptions("dt must be > 0");
  if (max_iterations < 10) throw InfeasibleOptions("max_iterations must be >= 10");
  if (kind == CostKind::Power && !(power_horizon > 0.0)) {
    throw InfeasibleOptions("Power mode needs a positive power_horizon");
  }
  if (!(goal_displacement_factor > 0.0) || !(goal_rotation_limit > 0.0)) {
    throw InfeasibleOptions("goal regime limits must be > 0");
  }
}

double lagrangian_power(double phi, double u1, double u2, const DragCoefficients& drag,
                        double L) {
  const double cpa = drag.c_par, cpe = drag.c_perp, ct = drag.c_tau;
  const double L3 = L * L * L;
  const double c = std::cos(phi);
  const double a = L3 * cpe * (4.0 * cpa + cpe + (4.0 * cpa - cpe) * c) /
                   (24.0 * (cpa + cpe + (cpa - cpe) * c));
  const double den = -36.0 * ct * c + 45.0 * ct +
                     std::cos(2.0 * phi) * (15.0 * ct - 2.0 * cpe * L * L) +
                     2.0 * cpe * L * L;
  const double s = std::sin(phi);
  const double b = 12.0 * ct * ct * cpe * L3 * s * s *
                   (5.0 * (std::cos(2.0 * phi) + 3.0) - 12.0 * c) / (den * den);
  return a * u1 * u1 + b * u2 * u2;
}

CostReport evaluate_cost(const ManeuverPlan& plan, CostKind kind, const LinkChain& chain,
                         const DragCoefficients& drag, const Pose& start,
                         const ShapeState& shape0, const Pose& goal, double dt) {
  CostReport report;
  if (plan.phases.empty()) {
    report.cost = 0.0;
    report.position_error = (goal.translation - start.translation).norm();
    report.rotation_error = rotation_angle(start.R().transpose() * goal.R());
    return report;
  }
  const Trajectory traj = simulate(chain, drag, start, shape0, plan.to_signal(), dt);
  const Pose& end = traj.back().pose;
  report.position_error = (goal.translation - end.translation).norm();
  report.rotation_error = rotation_angle(end.R().transpose() * goal.R());
  report.cost = kind == CostKind::MinTime ? plan.horizon() : power_expended(traj);
  return report;
}

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, double step, int max_iterations,
                             double ftol) {
  const int n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> x(n + 1, x0);
  std::vector<double> fx(n + 1);
  for (int i = 1; i <= n; ++i) x[i](i - 1) += step;
  for (int i = 0; i <= n; ++i) fx[i] = f(x[i]);

  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    // order best..worst
    std::vector<int> idx(n + 1);
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    {
      std::vector<Eigen::VectorXd> xs(n + 1);
      std::vector<double> fs(n + 1);
      for (int i = 0; i <= n; ++i) {
        xs[i] = x[idx[i]];
        fs[i] = fx[idx[i]];
      }
      x.swap(xs);
      fx.swap(fs);
    }
    if (std::abs(fx[n] - fx[0]) <= ftol * (std::abs(fx[0]) + 1e-12)) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += x[i];
    centroid /= n;

    const Eigen::VectorXd xr = centroid + (centroid - x[n]);  // reflection
    const double fr = f(xr);
    if (fr < fx[0]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (xr - centroid);  // expansion
      const double fe = f(xe);
      if (fe < fr) {
        x[n] = xe;
        fx[n] = fe;
      } else {
        x[n] = xr;
        fx[n] = fr;
      }
    } else if (fr < fx[n - 1]) {
      x[n] = xr;
      fx[n] = fr;
    } else {
      const bool outside = fr < fx[n];
      const Eigen::VectorXd xc =
          outside ? centroid + 0.5 * (xr - centroid) : centroid + 0.5 * (x[n] - centroid);
      const double fc = f(xc);
      if (fc < (outside ? fr : fx[n])) {
        x[n] = xc;
        fx[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {  // shrink
          x[i] = x[0] + 0.5 * (x[i] - x[0]);
          fx[i] = f(x[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= n; ++i)
    if (fx[i] < fx[best]) best = i;
  return {x[best], fx[best], iter};
}

namespace {

struct Problem {
  LinkChain chain;
  DragCoefficients drag;
  Pose start;
  ShapeState shape0;
  Pose goal;
  CostKind kind;
  PlanOptions opt;
  double pos_tol;
  double ang_tol;
  double bound_mag;  // max(|lo|, |hi|)
  int channels;
};

struct Candidate {
  ManeuverPlan plan;
  double cost = std::numeric_limits<double>::infinity();
  double penalty = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

std::pair<double, double> terminal_errors(const Problem& pb, const ManeuverPlan& plan,
                                          double dt) {
  const CostReport r =
      evaluate_cost(plan, pb.kind, pb.chain, pb.drag, pb.start, pb.shape0, pb.goal, dt);
  return {r.position_error, r.rotation_error};
}

// terminal pose defect as a 6-vector, rows scaled by the tolerances so both
// error channels are commensurate
Vec6 terminal_log_error(const Problem& pb, const ManeuverPlan& plan) {
  Pose end = pb.start;
  if (!plan.phases.empty()) {
    const Trajectory traj =
        simulate(pb.chain, pb.drag, pb.start, pb.shape0, plan.to_signal(), pb.opt.dt);
    end = traj.back().pose;
  }
  Vec6 e = log_pose(end.inverse() * pb.goal);
  e.head<3>() /= pb.pos_tol;
  e.tail<3>() /= pb.ang_tol;
  return e;
}

// bang pattern entry true -> hi, false -> lo
ManeuverPlan bang_plan(const Problem& pb, const std::vector<std::vector<bool>>& pattern,
                       const Eigen::VectorXd& log_durations) {
  ManeuverPlan plan;
  plan.kind = pb.kind;
  plan.lo = pb.opt.lo;
  plan.hi = pb.opt.hi;
  plan.pos_tol = pb.pos_tol;
  plan.ang_tol = pb.ang_tol;
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    Eigen::VectorXd u(pb.channels);
    for (int c = 0; c < pb.channels; ++c) u(c) = pattern[k][c] ? pb.opt.hi : pb.opt.lo;
    const double d = std::exp(std::clamp(log_durations(static_cast<Eigen::Index>(k)), -9.0, 4.0));
    plan.phases.push_back({u, d});
  }
  return plan;
}

ManeuverPlan value_plan(const Problem& pb, const Eigen::VectorXd& values) {
  ManeuverPlan plan;
  plan.kind = pb.kind;
  plan.lo = pb.opt.lo;
  plan.hi = pb.opt.hi;
  plan.pos_tol = pb.pos_tol;
  plan.ang_tol = pb.ang_tol;
  const int K = pb.opt.phase_count;
  const double d = pb.opt.power_horizon / K;
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd u(pb.channels);
    for (int c = 0; c < pb.channels; ++c) {
      u(c) = std::clamp(values(k * pb.channels + c), pb.opt.lo, pb.opt.hi);
    }
    plan.phases.push_back({u, d});
  }
  return plan;
}

// the four-phase loop pattern on channels 0/1 with every channel at a bound:
// (hi,lo), (hi,hi), (lo,hi), (lo,lo) traces a closed square in shape space
std::vector<std::vector<bool>> loop_pattern(int phases, int channels, std::mt19937_64& rng) {
  static const bool square[4][2] = {{true, false}, {true, true}, {false, true}, {false, false}};
  std::vector<std::vector<bool>> pattern(static_cast<std::size_t>(phases));
  std::bernoulli_distribution coin(0.5);
  for (int k = 0; k < phases; ++k) {
    pattern[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(channels));
    for (int c = 0; c < channels; ++c) {
      pattern[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)] =
          c < 2 ? square[k % 4][c] : coin(rng);
    }
  }
  return pattern;
}

std::vector<std::vector<bool>> random_pattern(int phases, int channels, std::mt19937_64& rng) {
  std::vector<std::vector<bool>> pattern(static_cast<std::size_t>(phases));
  std::bernoulli_distribution coin(0.5);
  for (auto& row : pattern) {
    row.resize(static_cast<std::size_t>(channels));
    for (int c = 0; c < channels; ++c) row[static_cast<std::size_t>(c)] = coin(rng);
  }
  return pattern;
}

// Levenberg-damped Gauss-Newton on a plan parametrization, driving the
// terminal pose defect to zero. The defect and the anchor pull are invariant
// under the bound/duration rescaling, so this stage is scale-equivariant.
// The rotation rows of the defect bound the true rotation error exactly; the
// translation rows agree with it to second order, hence the safety factor
// before declaring success.
bool gauss_newton_reach_impl(const Problem& pb,
                             const std::function<ManeuverPlan(const Eigen::VectorXd&)>& make_plan,
                             Eigen::VectorXd& x, double clamp_lo, double clamp_hi, double mu,
                             const Eigen::VectorXd& anchor_x) {
  const int K = static_cast<int>(x.size());

  const auto error_at = [&](const Eigen::VectorXd& xx) -> Vec6 {
    return terminal_log_error(pb, make_plan(xx));
  };
  const auto surrogate_ok = [](const Vec6& e) {
    return e.head<3>().norm() <= 0.7 && e.tail<3>().norm() <= 0.7;
  };
  const auto feasible_exact = [&](const Eigen::VectorXd& xx) {
    const auto [pe, re] = terminal_errors(pb, make_plan(xx), pb.opt.dt);
    return pe <= 0.9 * pb.pos_tol && re <= 0.9 * pb.ang_tol;
  };

  Vec6 e = error_at(x);
  double lambda = 1e-3;
  Eigen::Matrix<double, 6, Eigen::Dynamic> J(6, K);

  const auto refresh_jacobian = [&] {
    const double h = 1e-4;
    for (int k = 0; k < K; ++k) {
      Eigen::VectorXd xp = x;
      xp(k) += h;
      J.col(k) = (error_at(xp) - e) / h;
    }
  };
  refresh_jacobian();

  for (int iter = 0; iter < 30; ++iter) {
    if (surrogate_ok(e)) return feasible_exact(x);

    bool stepped = false;
    bool refreshed_this_iter = false;
    for (int attempt = 0; attempt < 6 && !stepped; ++attempt) {
      // damped least squares with a weak pull toward the anchor
      const Eigen::MatrixXd JtJ = J.transpose() * J +
                                  (lambda + mu) * Eigen::MatrixXd::Identity(K, K);
      const Eigen::VectorXd rhs = -J.transpose() * e - mu * (x - anchor_x);
      const Eigen::VectorXd dx = JtJ.ldlt().solve(rhs);
      for (double alpha : {1.0, 0.5, 0.25}) {
        Eigen::VectorXd xn = x + alpha * dx;
        for (int k = 0; k < K; ++k) xn(k) = std::clamp(xn(k), clamp_lo, clamp_hi);
        const Vec6 en = error_at(xn);
        if (en.norm() < e.norm() * (1.0 - 1e-4)) {
          // Broyden update keeps the Jacobian fresh without K extra runs
          const Eigen::VectorXd step = xn - x;
          const double s2 = step.squaredNorm();
          if (s2 > 0.0) J += ((en - e) - J * step) * (step.transpose() / s2);
          x = xn;
          e = en;
          lambda = std::max(lambda * 0.5, 1e-6);
          stepped = true;
          break;
        }
      }
      if (!stepped) {
        if (!refreshed_this_iter) {
          refresh_jacobian();  // stale secant model: rebuild before damping more
          refreshed_this_iter = true;
        } else {
          lambda *= 10.0;
        }
      }
    }
    if (!stepped) break;
  }
  return surrogate_ok(e) && feasible_exact(x);
}

bool gauss_newton_reach(const Problem& pb, const std::vector<std::vector<bool>>& pattern,
                        Eigen::VectorXd& x) {
  const double anchor = std::log(0.4 / pb.bound_mag);  // keeps durations desk-scale
  return gauss_newton_reach_impl(
      pb, [&](const Eigen::VectorXd& xx) { return bang_plan(pb, pattern, xx); }, x, -9.0, 3.0,
      0.03, Eigen::VectorXd::Constant(x.size(), anchor));
}

Candidate solve_min_time_restart(const Problem& pb, int restart) {
  std::mt19937_64 rng(pb.opt.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(restart + 1));
  const int K = pb.opt.phase_count;

  std::vector<std::vector<bool>> pattern;
  double duration_scale;  // characteristic per-phase shape excursion
  if (restart == 0) {
    // seed from the commutator maneuver: eps^2 |[V1,V2]| ~ |log goal|
    pattern = loop_pattern(K, pb.channels, rng);
    const auto fields = model_fields(pb.chain, pb.drag);
    ShapeState probe = pb.shape0;
    if (std::abs(probe.angles[0].phi) < 0.2) probe.angles[0].phi = M_PI / 2.0;
    const double bnorm =
        mixed_bracket(fields[0], fields[1], probe).twist.stacked().norm();
    const double gnorm = log_pose(pb.start.inverse() * pb.goal).norm();
    duration_scale = std::clamp(std::sqrt(gnorm / std::max(bnorm, 1e-9)), 0.02, 1.5);
  } else {
    pattern = random_pattern(K, pb.channels, rng);
    duration_scale = std::uniform_real_distribution<double>(0.05, 0.6)(rng);
  }

  // log-duration parametrization; init scales as 1/bound so the search is
  // exactly equivariant under enlarging the bounds
  Eigen::VectorXd x0(K);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  for (int k = 0; k < K; ++k) {
    x0(k) = std::log(duration_scale / pb.bound_mag) + jitter(rng);
  }

  double kappa = 1.0;
  const auto objective = [&](const Eigen::VectorXd& x) {
    const ManeuverPlan plan = bang_plan(pb, pattern, x);
    try {
      const auto [pe, re] = terminal_errors(pb, plan, pb.opt.dt);
      return plan.horizon() +
             kappa / pb.bound_mag * (pe / pb.pos_tol + re / pb.ang_tol);
    } catch (const Error&) {
      return 1e9;
    }
  };

  Eigen::VectorXd x = x0;
  Candidate cand;
  const auto consider = [&](bool* feasible_out) {
    ManeuverPlan plan = bang_plan(pb, pattern, x);
    const auto [pe, re] = terminal_errors(pb, plan, pb.opt.dt);
    const double penalty = pe / pb.pos_tol + re / pb.ang_tol;
    const bool feasible = pe <= pb.pos_tol && re <= pb.ang_tol;
    const bool better = feasible ? (!cand.feasible || plan.horizon() < cand.cost)
                                 : (!cand.feasible && penalty < cand.penalty);
    if (better) {
      cand.plan = plan;
      cand.cost = plan.horizon();
      cand.penalty = penalty;
      cand.feasible = feasible;
    }
    *feasible_out = feasible;
  };

  // reach first: drive the terminal defect to zero for this pattern; on a
  // stall, one greedy sweep of single-entry pattern flips (scored by the
  // defect at the current durations) before retrying
  bool reached = gauss_newton_reach(pb, pattern, x);
  if (!reached) {
    double best_defect = terminal_log_error(pb, bang_plan(pb, pattern, x)).norm();
    for (int k = 0; k < K; ++k) {
      for (int c = 0; c < pb.channels; ++c) {
        const auto flip = [&] {
          auto bit = pattern[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
          pattern[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)] = !bit;
        };
        flip();
        const double defect = terminal_log_error(pb, bang_plan(pb, pattern, x)).norm();
        if (defect < best_defect * (1.0 - 1e-6)) {
          best_defect = defect;
        } else {
          flip();
        }
      }
    }
    reached = gauss_newton_reach(pb, pattern, x);
  }
  bool feasible = false;
  consider(&feasible);
  if (!reached || !feasible) return cand;  // best effort, flagged by the caller

  // shorten: penalized horizon descent, then re-projection onto the reachable
  // manifold so feasibility is not traded away
  {
    const NelderMeadResult res = nelder_mead(objective, x, 0.35, pb.opt.max_iterations);
    Eigen::VectorXd xn = res.x;
    if (gauss_newton_reach(pb, pattern, xn)) {
      x = xn;
      consider(&feasible);
    }
  }

  // uniform shrink with re-projection: trade shape-path length against the
  // terminal defect until the projection fails
  for (int shrink = 0; shrink < 12; ++shrink) {
    Eigen::VectorXd xs = x + Eigen::VectorXd::Constant(K, std::log(0.9));
    if (!gauss_newton_reach(pb, pattern, xs)) break;
    const double before = bang_plan(pb, pattern, x).horizon();
    const double after = bang_plan(pb, pattern, xs).horizon();
    if (after >= before) break;
    x = xs;
    consider(&feasible);
  }
  return cand;
}

Candidate solve_power_restart(const Problem& pb, int restart, double penalty_scale) {
  std::mt19937_64 rng(pb.opt.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(restart + 1));
  const int K = pb.opt.phase_count;
  const int n = K * pb.channels;

  Eigen::VectorXd x0(n);
  const bool has_warm =
      pb.opt.warm_start && pb.opt.warm_start->phases.size() > 0 &&
      pb.opt.warm_start->phases.front().u.size() == pb.channels;
  if (has_warm && restart == 1) {
    // resample the warm-start plan onto the uniform K-grid
    const ManeuverPlan& w = *pb.opt.warm_start;
    for (int k = 0; k < K; ++k) {
      const double tmid = (k + 0.5) * pb.opt.power_horizon / K;
      double acc = 0.0;
      Eigen::VectorXd u = Eigen::VectorXd::Zero(pb.channels);
      for (const auto& ph : w.phases) {
        if (tmid < acc + ph.duration) {
          u = ph.u;
          break;
        }
        acc += ph.duration;
      }
      for (int c = 0; c < pb.channels; ++c) x0(k * pb.channels + c) = u(c);
    }
  } else if (restart == 0) {
    std::mt19937_64 rng0(pb.opt.seed + 1);
    const auto pattern = loop_pattern(K, pb.channels, rng0);
    for (int k = 0; k < K; ++k)
      for (int c = 0; c < pb.channels; ++c)
        x0(k * pb.channels + c) = 0.5 * (pattern[k][c] ? pb.opt.hi : pb.opt.lo);
  } else {
    std::uniform_real_distribution<double> val(pb.opt.lo + 0.1 * (pb.opt.hi - pb.opt.lo),
                                               pb.opt.hi - 0.1 * (pb.opt.hi - pb.opt.lo));
    for (int i = 0; i < n; ++i) x0(i) = val(rng);
  }

  double kappa = 1.0;
  const auto objective = [&](const Eigen::VectorXd& v) {
    const ManeuverPlan plan = value_plan(pb, v);
    try {
      const CostReport r = evaluate_cost(plan, CostKind::Power, pb.chain, pb.drag, pb.start,
                                         pb.shape0, pb.goal, pb.opt.dt);
      return r.cost + kappa * penalty_scale *
                          (r.position_error / pb.pos_tol + r.rotation_error / pb.ang_tol);
    } catch (const Error&) {
      return 1e9;
    }
  };

  Eigen::VectorXd x = x0;
  Candidate cand;
  const auto consider = [&]() {
    const ManeuverPlan plan = value_plan(pb, x);
    const CostReport r = evaluate_cost(plan, CostKind::Power, pb.chain, pb.drag, pb.start,
                                       pb.shape0, pb.goal, pb.opt.dt);
    const double penalty = r.position_error / pb.pos_tol + r.rotation_error / pb.ang_tol;
    const bool feasible = r.position_error <= pb.pos_tol && r.rotation_error <= pb.ang_tol;
    const bool better = feasible ? (!cand.feasible || r.cost < cand.cost)
                                 : (!cand.feasible && penalty < cand.penalty);
    if (better) {
      cand.plan = plan;
      cand.cost = r.cost;
      cand.penalty = penalty;
      cand.feasible = feasible;
    }
    return feasible;
  };

  const auto reach = [&](Eigen::VectorXd& v) {
    return gauss_newton_reach_impl(
        pb, [&](const Eigen::VectorXd& vv) { return value_plan(pb, vv); }, v, pb.opt.lo,
        pb.opt.hi, 0.01, x0);
  };

  if (!reach(x)) {
    consider();
    return cand;  // best effort, flagged by the caller
  }
  consider();

  // descend the power cost under a feasibility penalty, then re-project
  for (int round = 0; round < 2; ++round) {
    const NelderMeadResult res =
        nelder_mead(objective, x, 0.15 * (pb.opt.hi - pb.opt.lo), pb.opt.max_iterations);
    Eigen::VectorXd xn = res.x;
    for (int i = 0; i < xn.size(); ++i) xn(i) = std::clamp(xn(i), pb.opt.lo, pb.opt.hi);
    if (!reach(xn)) break;
    x = xn;
    const bool feasible = consider();
    if (!feasible) break;
    kappa *= 5.0;
  }
  return cand;
}

}  // namespace

ManeuverPlan plan_to_pose(const LinkChain& chain, const DragCoefficients& drag,
                          const Pose& start, const ShapeState& shape0, const Pose& goal,
                          CostKind kind, const PlanOptions& options) {
  chain.validate();
  drag.validate();
  options.validate(kind);

  Problem pb{chain, drag, start, shape0, goal, kind, options, 0.0, 0.0, 0.0,
             chain.shape_dim()};
  const double L = *std::max_element(chain.lengths.begin(), chain.lengths.end());
  pb.pos_tol = options.pos_tol > 0.0 ? options.pos_tol : 1e-2 * L;
  pb.ang_tol = options.ang_tol;
  pb.bound_mag = std::max(std::abs(options.lo), std::abs(options.hi));

  // goal must be inside the configured small-displacement regime
  const double goal_dist = (goal.translation - start.translation).norm();
  const double goal_rot = rotation_angle(start.R().transpose() * goal.R());
  if (goal_dist > options.goal_displacement_factor * L + 1e-15 ||
      goal_rot > options.goal_rotation_limit + 1e-15) {
    throw PreconditionViolation("goal outside the small-displacement regime");
  }

  // trivial goal: empty plan
  ManeuverPlan empty;
  empty.kind = kind;
  empty.lo = options.lo;
  empty.hi = options.hi;
  empty.pos_tol = pb.pos_tol;
  empty.ang_tol = pb.ang_tol;
  if (goal_dist <= pb.pos_tol && goal_rot <= pb.ang_tol) {
    empty.converged = true;
    return empty;
  }

  // power-mode penalty scale: the cost of running every channel at the upper
  // bound over the horizon (a deterministic, problem-sized reference)
  double penalty_scale = 1.0;
  if (kind == CostKind::Power) {
    ManeuverPlan full;
    full.kind = kind;
    full.lo = options.lo;
    full.hi = options.hi;
    full.phases.push_back(
        {Eigen::VectorXd::Constant(pb.channels, options.hi), options.power_horizon});
    const CostReport r =
        evaluate_cost(full, CostKind::Power, chain, drag, start, shape0, goal, options.dt);
    penalty_scale = std::max(r.cost, 1e-12);
  }

  // restarts run in fixed chunks; once a chunk yields a feasible plan the
  // remaining chunks are skipped. Chunk boundaries do not depend on the
  // worker count, so results are reproducible under any STOKESWIM_THREADS.
  std::vector<Candidate> candidates(static_cast<std::size_t>(options.restarts));
  constexpr int kChunk = 4;
  int computed = 0;
  while (computed < options.restarts) {
    const int end = std::min(computed + kChunk, options.restarts);
    const int base = computed;
    parallel_for(static_cast<std::size_t>(end - base), [&](std::size_t i) {
      const int r = base + static_cast<int>(i);
      candidates[static_cast<std::size_t>(r)] =
          kind == CostKind::MinTime
              ? solve_min_time_restart(pb, r)
              : solve_power_restart(pb, r, penalty_scale);
    });
    computed = end;
    bool any_feasible = false;
    for (int r = 0; r < computed; ++r) {
      any_feasible = any_feasible || candidates[static_cast<std::size_t>(r)].feasible;
    }
    if (any_feasible) break;
  }

  // deterministic merge: feasibility first, then cost, then restart index
  int best = 0;
  for (int r = 1; r < computed; ++r) {
    const Candidate& a = candidates[static_cast<std::size_t>(r)];
    const Candidate& b = candidates[static_cast<std::size_t>(best)];
    if (a.feasible != b.feasible) {
      if (a.feasible) best = r;
    } else if (a.feasible ? a.cost < b.cost : a.penalty < b.penalty) {
      best = r;
    }
  }
  ManeuverPlan plan = candidates[static_cast<std::size_t>(best)].plan;

  // converged only when the tolerances re-validate at dt and dt/2
  const auto [pe1, re1] = terminal_errors(pb, plan, options.dt);
  const auto [pe2, re2] = terminal_errors(pb, plan, options.dt / 2.0);
  plan.converged = pe1 <= pb.pos_tol && re1 <= pb.ang_tol && pe2 <= pb.pos_tol &&
                   re2 <= pb.ang_tol;
  return plan;
}

}  // namespace stokeswim
