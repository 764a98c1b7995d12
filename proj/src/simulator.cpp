#include "stokeswim/simulator.hpp"

#include <cmath>

namespace stokeswim {

double ControlSignal::horizon() const {
  double t = 0.0;
  for (const auto& p : phases) t += p.duration;
  return t;
}

void ControlSignal::validate(int expected_channels) const {
  if (!(lo < hi)) throw PreconditionViolation("control bounds must satisfy lo < hi");
  for (const auto& p : phases) {
    if (p.u.size() != expected_channels) {
      throw PreconditionViolation("control phase has wrong channel count");
    }
    if (!(p.duration > 0.0)) throw PreconditionViolation("phase durations must be > 0");
    for (int i = 0; i < p.u.size(); ++i) {
      if (p.u(i) < lo - 1e-12 || p.u(i) > hi + 1e-12) {
        throw PreconditionViolation("control value outside [lo, hi]");
      }
    }
  }
}

ControlSignal ControlSignal::from_samples(const Eigen::MatrixXd& values, double dt, double lo,
                                          double hi) {
  if (!(dt > 0.0)) throw PreconditionViolation("sample spacing must be > 0");
  ControlSignal s;
  s.lo = lo;
  s.hi = hi;
  s.phases.reserve(static_cast<std::size_t>(values.cols()));
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    s.phases.push_back({values.col(c), dt});
  }
  return s;
}

namespace {

// Stage pullback for the left-trivialized equation g' = g xi(t) with the
// update g <- g exp(Omega): Omega' = dexpinv_{-Omega}(xi), i.e. the bracket
// series b + [a,b]/2 + [a,[a,b]]/12, truncated after the double bracket
// (enough for fourth order).
Vec6 dexpinv_left(const Vec6& a, const Vec6& b) {
  const Vec6 ab = commutator(a, b);
  return b + 0.5 * ab + (1.0 / 12.0) * commutator(a, ab);
}

}  // namespace

std::pair<Pose, ShapeState> step(const Pose& pose, const ShapeState& shape,
                                 const Eigen::VectorXd& control, const LinkChain& chain,
                                 const DragCoefficients& drag, double dt) {
  if (!(dt > 0.0)) throw PreconditionViolation("dt must be > 0");
  const Eigen::VectorXd s0 = shape.coords();
  const auto xi = [&](double t) {
    return model::body_velocity_t<double>(chain.lengths, s0 + t * control, control, drag);
  };

  const Vec6 k1 = xi(0.0);
  const Vec6 xm = xi(0.5 * dt);
  const Vec6 xe = xi(dt);
  const Vec6 k2 = dexpinv_left(0.5 * dt * k1, xm);
  const Vec6 k3 = dexpinv_left(0.5 * dt * k2, xm);
  const Vec6 k4 = dexpinv_left(dt * k3, xe);
  const Vec6 omega = (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  Pose next_pose = exp_step(pose, BodyTwist::from_stacked(omega), 1.0);
  ShapeState next_shape = ShapeState::from_coords(s0 + dt * control);
  next_shape.normalize();
  return {next_pose, next_shape};
}

Trajectory simulate(const LinkChain& chain, const DragCoefficients& drag, const Pose& start,
                    const ShapeState& shape0, const ControlSignal& signal, double dt) {
  chain.validate();
  drag.validate();
  signal.validate(chain.shape_dim());
  if (!(dt > 0.0)) throw PreconditionViolation("dt must be > 0");

  Trajectory traj;
  traj.dt = dt;
  traj.chain = chain;
  traj.drag = drag;

  Pose pose = start;
  ShapeState shape = shape0;
  double t = 0.0;

  const auto record = [&](const Eigen::VectorXd& u) {
    TrajectorySample smp;
    smp.t = t;
    smp.pose = pose;
    smp.shape = shape;
    smp.control = u;
    smp.twist = body_velocity(chain, shape, u, drag);
    traj.samples.push_back(std::move(smp));
  };

  if (!signal.phases.empty()) record(signal.phases.front().u);

  for (const auto& phase : signal.phases) {
    const int n = std::max(1, static_cast<int>(std::ceil(phase.duration / dt - 1e-9)));
    const double h = phase.duration / n;
    for (int k = 0; k < n; ++k) {
      std::tie(pose, shape) = step(pose, shape, phase.u, chain, drag, h);
      t += h;
      record(phase.u);
    }
  }
  return traj;
}

Displacement net_displacement(const Trajectory& traj) {
  if (traj.samples.empty()) throw PreconditionViolation("empty trajectory");
  Displacement d;
  const Pose& a = traj.front().pose;
  const Pose& b = traj.back().pose;
  d.delta_x = b.translation - a.translation;
  d.rotation_angle = rotation_angle(a.R().transpose() * b.R());
  return d;
}

namespace {

ScallopReport scallop_report_from(const Trajectory& traj, double theta0) {
  ScallopReport report;
  report.trajectory = traj;
  const Displacement d = net_displacement(traj);
  report.net_displacement_norm = d.delta_x.norm();
  report.rotation_angle = d.rotation_angle;
  report.plane_normal = Vec3(-std::sin(theta0), std::cos(theta0), 0.0);
  const Vec3 x0 = traj.front().pose.translation;
  for (const auto& smp : traj.samples) {
    report.max_plane_deviation =
        std::max(report.max_plane_deviation,
                 std::abs(report.plane_normal.dot(smp.pose.translation - x0)));
  }
  return report;
}

}  // namespace

ScallopReport scallop_experiment(const DragCoefficients& drag, double L,
                                 const std::vector<double>& phi_loop, double theta0,
                                 double dt) {
  if (drag.c_tau != 0.0) {
    throw PreconditionViolation("scallop experiment requires c_tau = 0");
  }
  if (phi_loop.size() < 2 || std::abs(phi_loop.front() - phi_loop.back()) > 1e-12) {
    throw PreconditionViolation("phi loop must be closed (start = end)");
  }
  ControlSignal signal;
  for (std::size_t k = 0; k + 1 < phi_loop.size(); ++k) {
    const double delta = phi_loop[k + 1] - phi_loop[k];
    if (delta == 0.0) continue;
    Eigen::VectorXd u(2);
    u << (delta > 0.0 ? 1.0 : -1.0), 0.0;
    signal.phases.push_back({u, std::abs(delta)});
  }
  const Trajectory traj = simulate(LinkChain::two_link(L), drag, Pose::identity(),
                                   ShapeState(theta0, phi_loop.front()), signal, dt);
  return scallop_report_from(traj, theta0);
}

ScallopReport scallop_plane_confinement(const DragCoefficients& drag, double L,
                                        const ShapeState& shape0, const ControlSignal& signal,
                                        double dt) {
  if (drag.c_tau != 0.0) {
    throw PreconditionViolation("plane confinement requires c_tau = 0");
  }
  const Trajectory traj =
      simulate(LinkChain::two_link(L), drag, Pose::identity(), shape0, signal, dt);
  return scallop_report_from(traj, shape0.angles[0].theta);
}

CommutatorResult commutator_maneuver(const LinkChain& chain, const DragCoefficients& drag,
                                     const ShapeState& shape0, double eps,
                                     int steps_per_phase) {
  if (!(eps > 0.0)) throw PreconditionViolation("eps must be > 0");
  const int m = chain.shape_dim();
  ControlSignal signal;
  const auto phase = [&](int channel, double sign) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
    u(channel) = sign;
    signal.phases.push_back({u, eps});
  };
  phase(0, 1.0);
  phase(1, 1.0);
  phase(0, -1.0);
  phase(1, -1.0);

  const double dt = eps / steps_per_phase;
  const Trajectory traj = simulate(chain, drag, Pose::identity(), shape0, signal, dt);

  CommutatorResult result;
  result.eps = eps;
  result.final_pose = traj.back().pose;
  result.pose_log = log_pose(result.final_pose);

  const auto fields = model_fields(chain, drag);
  result.predicted_twist = mixed_bracket(fields[0], fields[1], shape0).twist.stacked();
  const double denom = result.pose_log.norm() * result.predicted_twist.norm();
  result.cosine = denom > 0.0 ? result.pose_log.dot(result.predicted_twist) / denom : 0.0;
  return result;
}

double power_expended(const Trajectory& traj) {
  if (traj.samples.size() < 2) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < traj.samples.size(); ++k) {
    const auto& a = traj.samples[k];
    const auto& b = traj.samples[k + 1];
    const Eigen::VectorXd& u = a.control;  // control active on [t_k, t_{k+1})
    const double p0 = power_density(traj.chain, a.shape, u, a.twist, traj.drag);
    const BodyTwist tw_b = body_velocity(traj.chain, b.shape, u, traj.drag);
    const double p1 = power_density(traj.chain, b.shape, u, tw_b, traj.drag);
    total += 0.5 * (b.t - a.t) * (p0 + p1);
  }
  return total;
}

}  // namespace stokeswim
