// Acceptance suite: one check per criterion, each printing a pass/fail line
// with the measured extremes and its wall time. The process exits with the
// number of failed criteria.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "stokeswim/planner.hpp"
#include "test_support.hpp"

using namespace stokeswim;
using swtest::max_rel_err;
using swtest::rel_err;

namespace {

int failures = 0;

struct Criterion {
  const char* label;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  explicit Criterion(const char* l) : label(l) {}
  void report(bool ok, const std::string& detail) const {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %s (%s; %.1f s)\n", ok ? "PASS" : "FAIL", label, detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

// --- 1. closed-form vs numeric control fields ------------------------------
void criterion_field_equivalence() {
  Criterion c("1. closed-form vs numeric field equivalence");
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const DragCoefficients drag = swtest::random_drag(rng);
    const double L = swtest::random_length(rng);
    const LinkChain chain = LinkChain::two_link(L);
    for (int k = 0; k < 100; ++k) {
      const ShapeState shape = swtest::random_regular_shape(rng, 1e-3);
      const auto fields = control_fields(chain, shape, drag);
      const auto cf =
          closed_form_fields(shape.angles[0].theta, shape.angles[0].phi, drag, L);
      worst = std::max(worst, max_rel_err(fields[0].stacked(), cf.v1));
      worst = std::max(worst, max_rel_err(fields[1].stacked(), cf.v2));
    }
  }
  c.report(worst <= 1e-9, fmt("max rel err %.2e", worst));
}

// --- 2. bracket certificate vs printed closed forms ------------------------
void criterion_bracket_certificate() {
  Criterion c("2. bracket certificate V3..V6 vs closed forms");
  std::mt19937_64 rng(102);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const DragCoefficients drag = swtest::random_drag(rng);
    const double L = swtest::random_length(rng);
    const auto got = swtest::certificate_twists(drag, L, BracketConvention::Coordinate);
    const Vec6 refs[4] = {swtest::v3_reference(drag, L), swtest::v4_reference(drag, L),
                          swtest::v5_reference(drag, L), swtest::v6_reference(drag, L)};
    for (int i = 0; i < 4; ++i) worst = std::max(worst, max_rel_err(got[i], refs[i]));
  }
  c.report(worst <= 1e-6, fmt("max rel err %.2e", worst));
}

// --- 3. determinant identity ------------------------------------------------
void criterion_determinant_identity() {
  Criterion c("3. delta determinant = closed form p/q");
  std::mt19937_64 rng(103);
  double worst = 0.0;
  bool q_positive = true;
  for (int t = 0; t < 20; ++t) {
    const DragCoefficients drag = swtest::random_drag(rng);
    const double L = swtest::random_length(rng);
    worst = std::max(worst, rel_err(delta_determinant(drag, L), delta_closed_form(drag, L)));
    q_positive = q_positive && delta_q(drag, L) > 0.0;
  }
  c.report(worst <= 1e-6 && q_positive, fmt("max rel err %.2e", worst));
}

// --- 4. controllability rank -------------------------------------------------
void criterion_rank() {
  Criterion c("4. rank 6 generically, rank <= 5 without torsion");
  std::mt19937_64 rng(104);
  const ShapeState cert_shape(0.0, M_PI / 2);
  int min_rank = 6, max_degenerate = 0;
  for (int t = 0; t < 50; ++t) {
    const DragCoefficients drag = swtest::random_drag(rng);
    const double L = swtest::random_length(rng);
    const LinkChain chain = LinkChain::two_link(L);
    min_rank = std::min(min_rank, lie_rank(chain, cert_shape, drag, 3).rank);
    DragCoefficients no_tau = drag;
    no_tau.c_tau = 0.0;
    max_degenerate = std::max(max_degenerate, lie_rank(chain, cert_shape, no_tau, 4).rank);
  }
  c.report(min_rank == 6 && max_degenerate <= 5,
           fmt("min generic rank %.0f, max degenerate rank %.0f",
               static_cast<double>(min_rank), static_cast<double>(max_degenerate)));
}

// --- 5. scallop simulation ----------------------------------------------------
void criterion_scallop() {
  Criterion c("5. scallop: no net motion, plane confinement");
  const DragCoefficients scallop{1.0, 2.0, 0.0};
  const double L = 1.0;
  const ScallopReport stroke =
      scallop_experiment(scallop, L, {0.0, M_PI / 4, 0.0}, 0.3, 1e-4);

  ControlSignal sig;
  sig.phases.push_back({Eigen::Vector2d(0.8, 0.5), 0.7});
  sig.phases.push_back({Eigen::Vector2d(-0.2, -0.9), 0.5});
  sig.phases.push_back({Eigen::Vector2d(0.4, 0.6), 0.8});
  const ScallopReport confined =
      scallop_plane_confinement(scallop, L, ShapeState(0.4, 0.9), sig, 1e-3);

  const bool ok = stroke.net_displacement_norm <= 1e-8 * L &&
                  stroke.rotation_angle <= 1e-8 &&
                  stroke.max_plane_deviation <= 1e-8 * L &&
                  confined.max_plane_deviation <= 1e-8 * L;
  c.report(ok, fmt("|dx| %.2e, plane dev %.2e", stroke.net_displacement_norm,
                   std::max(stroke.max_plane_deviation, confined.max_plane_deviation)));
}

// --- 6. commutator eps^2 law --------------------------------------------------
void criterion_commutator() {
  Criterion c("6. commutator maneuver eps^2 law and direction");
  const DragCoefficients drag{1.0, 2.0, 1.0};
  const LinkChain chain = LinkChain::two_link(1.0);
  const ShapeState shape0(0.0, M_PI / 2);

  const std::vector<double> eps_list = {0.2, 0.1, 0.05, 0.025};
  double sx = 0, sy = 0, sxx = 0, sxy = 0, cosine = 0;
  for (double eps : eps_list) {
    const CommutatorResult r = commutator_maneuver(chain, drag, shape0, eps);
    const double x = std::log(eps), y = std::log(r.pose_log.norm());
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    cosine = r.cosine;
  }
  const double n = static_cast<double>(eps_list.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  c.report(std::abs(slope - 2.0) <= 0.1 && cosine >= 0.99,
           fmt("slope %.3f, cosine %.4f", slope, cosine));
}

// --- 7. N-link reduction -------------------------------------------------------
void criterion_reduction() {
  Criterion c("7. N-link reduction to the 2-link");
  const DragCoefficients drag{1.0, 2.0, 1.0};
  double worst_delta = 0.0, worst_field = 0.0;
  bool ok = true;
  for (int n : {3, 5}) {
    const ReductionReport r = nlink_reduction_check(n, 1.0, drag);
    ok = ok && r.passed;
    worst_delta = std::max(worst_delta, r.delta_rel_error);
    worst_field = std::max(worst_field, r.max_field_rel_error);
  }
  c.report(ok && worst_delta <= 1e-8,
           fmt("delta rel err %.2e, field rel err %.2e", worst_delta, worst_field));
}

// --- 8. grand resistance structure ---------------------------------------------
void criterion_grand_resistance() {
  Criterion c("8. grand resistance symmetry and positivity");
  std::mt19937_64 rng(108);
  std::uniform_real_distribution<double> len(0.3, 2.0);
  std::uniform_real_distribution<double> th(-M_PI, M_PI);
  double worst_sym = 0.0, min_eig = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 500; ++k) {
    const int links = 2 + static_cast<int>(rng() % 5);
    std::vector<double> lengths;
    for (int i = 0; i < links; ++i) lengths.push_back(len(rng));
    ShapeState shape;
    for (int i = 0; i < links - 1; ++i) shape.angles.push_back({th(rng), th(rng)});
    const GrandResistance gr =
        resistance_blocks(LinkChain(lengths), shape, swtest::random_drag(rng));
    worst_sym = std::max(worst_sym, gr.symmetry_defect());
    min_eig = std::min(min_eig, gr.min_eigenvalue());
  }
  c.report(worst_sym <= 1e-12 && min_eig > 0.0,
           fmt("max sym defect %.2e, min eigenvalue %.2e", worst_sym, min_eig));
}

// --- 9. power functional ---------------------------------------------------------
void criterion_power() {
  Criterion c("9. power functional anchors and route agreement");
  const DragCoefficients drag{1.0, 2.0, 1.0};
  const double L = 1.0;
  const LinkChain chain = LinkChain::two_link(L);

  // exact degree-2 homogeneity
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  bool homogeneous = true;
  for (int k = 0; k < 100; ++k) {
    const double phi = u(rng), u1 = u(rng), u2 = u(rng);
    homogeneous = homogeneous && lagrangian_power(phi, 2.0 * u1, 2.0 * u2, drag, L) ==
                                     4.0 * lagrangian_power(phi, u1, u2, drag, L);
  }

  // held-phi anchor
  Trajectory held;
  held.chain = chain;
  held.drag = drag;
  held.dt = 0.5;
  const ShapeState held_shape(0.0, M_PI / 2);
  const Eigen::VectorXd hold_u = Eigen::Vector2d(1.0, 0.0);
  for (double t : {0.0, 0.5, 1.0}) {
    TrajectorySample smp;
    smp.t = t;
    smp.shape = held_shape;
    smp.control = hold_u;
    smp.twist = body_velocity(chain, held_shape, hold_u, drag);
    held.samples.push_back(smp);
  }
  const double anchor = L * L * L * drag.c_perp * (4.0 * drag.c_par + drag.c_perp) /
                        (24.0 * (drag.c_par + drag.c_perp));
  const double anchor_err = std::abs(power_expended(held) - anchor);

  // general wrench-velocity integral vs the closed-form integrand
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const DragCoefficients d = swtest::random_drag(rng);
    const double length = swtest::random_length(rng);
    const LinkChain c2 = LinkChain::two_link(length);
    ControlSignal sig;
    const int phases = 1 + static_cast<int>(rng() % 3);
    for (int p = 0; p < phases; ++p) {
      sig.phases.push_back({Eigen::Vector2d(u(rng) / 2.0, u(rng) / 2.0),
                            0.2 + 0.3 * std::abs(u(rng))});
    }
    const ShapeState shape0 = swtest::random_regular_shape(rng, 0.3);
    const Trajectory traj = simulate(c2, d, Pose::identity(), shape0, sig, 1e-3);
    const double general = power_expended(traj);

    // independent route: trapezoid of the closed-form integrand on the grid
    double closed = 0.0;
    for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i) {
      const auto& a = traj.samples[i];
      const auto& b = traj.samples[i + 1];
      const double pa =
          lagrangian_power(a.shape.angles[0].phi, a.control(0), a.control(1), d, length);
      const double pb =
          lagrangian_power(b.shape.angles[0].phi, a.control(0), a.control(1), d, length);
      closed += 0.5 * (b.t - a.t) * (pa + pb);
    }
    worst = std::max(worst, rel_err(general, closed));
  }
  c.report(homogeneous && anchor_err <= 1e-10 && worst <= 1e-6,
           fmt("anchor err %.2e, route rel err %.2e", anchor_err, worst));
}

// --- 10. planner benchmarks -------------------------------------------------------
void criterion_planner() {
  const DragCoefficients drag{1.0, 2.0, 1.0};
  const LinkChain chain = LinkChain::two_link(1.0);
  const ShapeState shape0(0.0, M_PI / 2);

  struct Goal {
    const char* name;
    Pose pose;
  };
  std::vector<Goal> goals;
  const auto make = [](Vec3 w, Vec3 t) {
    Pose g;
    g.rotation.r = rotation_exp(w);
    g.translation = t;
    return g;
  };
  goals.push_back({"rot z +0.05", make(Vec3(0, 0, 0.05), Vec3::Zero())});
  goals.push_back({"rot z -0.04", make(Vec3(0, 0, -0.04), Vec3::Zero())});
  goals.push_back({"rot x +0.04", make(Vec3(0.04, 0, 0), Vec3::Zero())});
  goals.push_back({"shift y -0.03", make(Vec3::Zero(), Vec3(0.0, -0.03, 0.0))});
  goals.push_back({"mixed", make(Vec3(0, 0, 0.03), Vec3(0.02, 0.0, 0.0))});

  bool all_ok = true;
  for (const auto& goal : goals) {
    Criterion c("10. planner benchmark");
    PlanOptions opt;
    opt.seed = 5;
    opt.dt = 1e-2;
    const ManeuverPlan plan = plan_to_pose(chain, drag, Pose::identity(), shape0, goal.pose,
                                           CostKind::MinTime, opt);
    const CostReport fine = evaluate_cost(plan, CostKind::MinTime, chain, drag,
                                          Pose::identity(), shape0, goal.pose, opt.dt / 2.0);
    const bool ok = plan.converged && fine.position_error <= plan.pos_tol &&
                    fine.rotation_error <= plan.ang_tol;
    all_ok = all_ok && ok;
    c.report(ok, std::string(goal.name) +
                     fmt(": T %.3f, pos err %.1e", plan.horizon(), fine.position_error));
  }
  (void)all_ok;
}

}  // namespace

int main() {
  criterion_field_equivalence();
  criterion_bracket_certificate();
  criterion_determinant_identity();
  criterion_rank();
  criterion_scallop();
  criterion_commutator();
  criterion_reduction();
  criterion_grand_resistance();
  criterion_power();
  criterion_planner();

  std::printf("%s: %d criterion failure(s)\n", failures == 0 ? "OK" : "FAILED", failures);
  return failures;
}
