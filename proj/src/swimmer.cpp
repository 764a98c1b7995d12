#include "stokeswim/swimmer.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace stokeswim {

void DragCoefficients::validate() const {
  if (!(c_par > 0.0) || !(c_par < c_perp)) {
    throw PreconditionViolation("drag coefficients must satisfy 0 < c_par < c_perp");
  }
  if (!(c_tau >= 0.0)) {
    throw PreconditionViolation("c_tau must be >= 0");
  }
}

void LinkChain::validate() const {
  if (lengths.size() < 2) {
    throw PreconditionViolation("a link chain needs at least 2 links");
  }
  int positive = 0;
  for (double l : lengths) {
    if (l < 0.0) throw PreconditionViolation("link lengths must be >= 0");
    if (l > 0.0) ++positive;
  }
  if (positive < 2) {
    throw PreconditionViolation("a link chain needs at least two strictly positive lengths");
  }
}

ShapeState ShapeState::zeros(int link_count) {
  ShapeState s;
  s.angles.assign(static_cast<std::size_t>(link_count - 1), LinkAngles{});
  return s;
}

Eigen::VectorXd ShapeState::coords() const {
  Eigen::VectorXd s(dim());
  for (std::size_t k = 0; k < angles.size(); ++k) {
    s(2 * k) = angles[k].phi;
    s(2 * k + 1) = angles[k].theta;
  }
  return s;
}

ShapeState ShapeState::from_coords(const Eigen::VectorXd& s) {
  ShapeState out;
  out.angles.resize(static_cast<std::size_t>(s.size() / 2));
  for (std::size_t k = 0; k < out.angles.size(); ++k) {
    out.angles[k].phi = s(2 * k);
    out.angles[k].theta = s(2 * k + 1);
  }
  return out;
}

void ShapeState::normalize() {
  for (auto& a : angles) a.phi = wrap_angle(a.phi);
}

double GrandResistance::symmetry_defect() const {
  const double scale = m.norm();
  return scale > 0.0 ? (m - m.transpose()).norm() / scale : 0.0;
}

double GrandResistance::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Mat6> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().minCoeff();
}

Vec6 ShapeWrench::stacked() const {
  Vec6 w;
  w.head<3>() = force;
  w.tail<3>() = torque;
  return w;
}

Eigen::VectorXd ConfigField::stacked() const {
  Eigen::VectorXd v(6 + shape_rates.size());
  v.head<6>() = twist.stacked();
  v.tail(shape_rates.size()) = shape_rates;
  return v;
}

Vec3 link_direction(const ShapeState& shape, int i) {
  if (i < 1 || i > shape.link_count()) {
    throw IndexOutOfRange("link index " + std::to_string(i) + " out of range [1, " +
                          std::to_string(shape.link_count()) + "]");
  }
  if (i == 1) return Vec3(0.0, 0.0, 1.0);
  const LinkAngles& a = shape.angles[static_cast<std::size_t>(i - 2)];
  return model::link_direction_t<double>(a.theta, a.phi);
}

Mat3 cross_matrix(const Vec3& e) { return skew3<double>(e); }

namespace {

void check_sizes(const LinkChain& chain, const ShapeState& shape) {
  if (shape.link_count() != chain.link_count()) {
    throw PreconditionViolation("chain and shape sizes disagree");
  }
}

}  // namespace

GrandResistance resistance_blocks(const LinkChain& chain, const ShapeState& shape,
                                  const DragCoefficients& drag) {
  chain.validate();
  drag.validate();
  check_sizes(chain, shape);
  GrandResistance gr;
  gr.m = model::grand_resistance_t<double>(chain.lengths, shape.coords(), drag);
  // symmetric by construction; anything beyond round-off is an assembly bug
  if (gr.symmetry_defect() > 1e-10) {
    throw std::logic_error("grand resistance assembly produced an asymmetric matrix");
  }
  bool zero_pivot = false;
  (void)model::solve_psd<double, 6>(gr.m, Vec6::Zero(), 1e-12, &zero_pivot);
  if (zero_pivot && drag.c_tau > 0.0) {
    throw NotPositiveDefinite("grand resistance matrix is singular with c_tau > 0");
  }
  return gr;
}

ShapeWrench shape_wrench(const LinkChain& chain, const ShapeState& shape,
                         const Eigen::VectorXd& shape_velocity,
                         const DragCoefficients& drag) {
  chain.validate();
  check_sizes(chain, shape);
  if (shape_velocity.size() != chain.shape_dim()) {
    throw PreconditionViolation("shape velocity has wrong dimension");
  }
  const Vec6 w = model::shape_wrench_t<double>(chain.lengths, shape.coords(),
                                               shape_velocity, drag);
  return {w.head<3>(), w.tail<3>()};
}

BodyTwist body_velocity(const LinkChain& chain, const ShapeState& shape,
                        const Eigen::VectorXd& shape_velocity,
                        const DragCoefficients& drag) {
  chain.validate();
  drag.validate();
  check_sizes(chain, shape);
  if (shape_velocity.size() != chain.shape_dim()) {
    throw PreconditionViolation("shape velocity has wrong dimension");
  }
  const Vec6 tw =
      model::body_velocity_t<double>(chain.lengths, shape.coords(), shape_velocity, drag);
  return BodyTwist::from_stacked(tw);
}

std::vector<ConfigField> control_fields(const LinkChain& chain, const ShapeState& shape,
                                        const DragCoefficients& drag) {
  chain.validate();
  drag.validate();
  check_sizes(chain, shape);
  const int m = chain.shape_dim();
  const Eigen::VectorXd s = shape.coords();
  std::vector<ConfigField> fields;
  fields.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const Eigen::VectorXd v = model::control_field_t<double>(chain.lengths, s, j, drag);
    ConfigField f;
    f.twist = BodyTwist::from_stacked(v.head<6>());
    f.shape_rates = v.tail(m);
    fields.push_back(std::move(f));
  }
  return fields;
}

ClosedFormFields closed_form_fields(double theta, double phi, const DragCoefficients& drag,
                                    double L, bool scallop_branch) {
  if (scallop_branch && drag.c_tau != 0.0) {
    throw PreconditionViolation("scallop branch requires c_tau = 0");
  }
  if (!scallop_branch && drag.c_tau == 0.0) {
    throw DegenerateClosedForm(
        "closed-form V2 requires c_tau > 0; request the scallop branch for c_tau = 0");
  }
  ClosedFormFields out;
  out.v1 = model::closed_form_field_t<double>(theta, phi, drag, L, 0, scallop_branch);
  out.v2 = model::closed_form_field_t<double>(theta, phi, drag, L, 1, scallop_branch);
  return out;
}

double power_density(const LinkChain& chain, const ShapeState& shape,
                     const Eigen::VectorXd& shape_velocity, const BodyTwist& twist,
                     const DragCoefficients& drag) {
  check_sizes(chain, shape);
  const int n = chain.link_count();
  const Eigen::VectorXd s = shape.coords();
  const Vec3 v = twist.linear, w = twist.angular;

  double power = 0.0;
  Vec3 torque_total = Vec3::Zero();
  Vec3 b = Vec3::Zero(), bdot = Vec3::Zero();

  for (int i = 1; i <= n; ++i) {
    const double l = chain.lengths[static_cast<std::size_t>(i - 1)];
    Vec3 e, edot;
    if (i == 1) {
      e = Vec3(0, 0, 1);
      edot = Vec3::Zero();
    } else {
      const double phi = s(2 * (i - 2)), theta = s(2 * (i - 2) + 1);
      const double phidot = shape_velocity(2 * (i - 2));
      const double thetadot = shape_velocity(2 * (i - 2) + 1);
      e = model::link_direction_t<double>(theta, phi);
      edot = model::ddtheta_link_direction_t<double>(theta, phi) * thetadot +
             model::ddphi_link_direction_t<double>(theta, phi) * phidot;
    }
    const Mat3 D = model::drag_tensor<double>(e, drag);
    // material velocity of the point at arclength u: p + u*q
    const Vec3 p = v + w.cross(b) + bdot;
    const Vec3 q = w.cross(e) + edot;
    power += l * p.dot(D * p) + l * l * p.dot(D * q) + (l * l * l / 3.0) * q.dot(D * q);

    const Mat3 B = skew3<double>(b);
    const Mat3 E = skew3<double>(e);
    torque_total += l * (B * (D * p)) + 0.5 * l * l * (B * (D * q) + E * (D * p)) +
                    (l * l * l / 3.0) * (E * (D * q));
    if (i == 1) torque_total += l * drag.c_tau * e.dot(w) * e;

    if (i >= 2) {
      b += l * e;
      bdot += l * edot;
    }
  }
  // the torque term vanishes along self-propelled motion; kept for fidelity
  power += torque_total.dot(w);
  return power;
}

}  // namespace stokeswim
