#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stokeswim/errors.hpp"
#include "stokeswim/lie.hpp"

// Resistive-force-theory hydrodynamics of the N-link swimmer: link kinematics,
// grand resistance matrix, shape-induced wrench, and the control vector fields
// (the N-link assembly route and the 2-link closed forms).
//
// Conventions, used everywhere downstream:
//  * link 1 points along +z in the co-moving frame; links i >= 2 have
//    direction (costh sinph, sinth sinph, cosph) from angles (theta_i, phi_i);
//  * the flattened shape-coordinate / shape-rate / control ordering is
//    (phi_2, theta_2, phi_3, theta_3, ...): control channel 2k drives phi of
//    link k+2, channel 2k+1 drives theta. This matches the state ordering of
//    the equations of motion (phi_dot listed before theta_dot) and makes
//    field 1 the unit-phi_dot field V1 and field 2 the unit-theta_dot field V2.

namespace stokeswim {

struct DragCoefficients {
  double c_par = 1.0;   // C_parallel
  double c_perp = 2.0;  // C_perp
  double c_tau = 1.0;   // torsional coefficient of link 1

  // 0 < c_par < c_perp; c_tau >= 0 (zero only to realize the scallop case).
  void validate() const;
};

struct LinkChain {
  std::vector<double> lengths;  // N >= 2 entries, each >= 0

  LinkChain() = default;
  explicit LinkChain(std::vector<double> l) : lengths(std::move(l)) { validate(); }
  static LinkChain two_link(double L) { return LinkChain({L, L}); }

  int link_count() const { return static_cast<int>(lengths.size()); }
  int shape_dim() const { return 2 * (link_count() - 1); }

  // N >= 2, lengths >= 0, and at least two strictly positive lengths.
  void validate() const;
};

struct LinkAngles {
  double theta = 0.0;  // unbounded
  double phi = 0.0;    // wrapped to (-pi, pi]
};

struct ShapeState {
  std::vector<LinkAngles> angles;  // links 2..N

  ShapeState() = default;
  explicit ShapeState(std::vector<LinkAngles> a) : angles(std::move(a)) {}
  // 2-link convenience.
  ShapeState(double theta2, double phi2) : angles{{theta2, phi2}} {}
  static ShapeState zeros(int link_count);

  int link_count() const { return static_cast<int>(angles.size()) + 1; }
  int dim() const { return 2 * static_cast<int>(angles.size()); }

  // Flat coordinates in the canonical (phi, theta) per-link ordering.
  Eigen::VectorXd coords() const;
  static ShapeState from_coords(const Eigen::VectorXd& s);

  void normalize();  // wrap each phi to (-pi, pi]
};

// 6x6 grand resistance matrix with the block structure [[K, C^T], [C, J]].
struct GrandResistance {
  Mat6 m = Mat6::Zero();

  Mat3 K() const { return m.block<3, 3>(0, 0); }
  Mat3 C() const { return m.block<3, 3>(3, 0); }
  Mat3 J() const { return m.block<3, 3>(3, 3); }

  double symmetry_defect() const;  // ||m - m^T||_F / ||m||_F
  double min_eigenvalue() const;
};

struct ShapeWrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();

  Vec6 stacked() const;
};

// One control vector field evaluated at a shape: body twist plus shape rates.
struct ConfigField {
  BodyTwist twist;
  Eigen::VectorXd shape_rates;

  Eigen::VectorXd stacked() const;  // (6 + 2(N-1))-vector
};

// ---------------------------------------------------------------------------
// Public (double) API
// ---------------------------------------------------------------------------

// Direction of link i (1-based). i = 1 is always +z.
Vec3 link_direction(const ShapeState& shape, int i);

// Antisymmetric matrix E with E v = e x v.
Mat3 cross_matrix(const Vec3& e);

// Assembles the grand resistance matrix. Throws NotPositiveDefinite when the
// matrix fails the tolerant LDLT probe (negative pivot, or a zero pivot with
// c_tau > 0 -- with c_tau = 0 an aligned chain legitimately loses the
// torsional mode and stays usable as a semidefinite system).
GrandResistance resistance_blocks(const LinkChain& chain, const ShapeState& shape,
                                  const DragCoefficients& drag);

// Viscous force/torque produced by the shape motion alone (frozen frame).
// shape_velocity uses the canonical flat ordering.
ShapeWrench shape_wrench(const LinkChain& chain, const ShapeState& shape,
                         const Eigen::VectorXd& shape_velocity,
                         const DragCoefficients& drag);

// Unique body twist solving M * twist = -(F_sh; T_sh); linear in the rates.
BodyTwist body_velocity(const LinkChain& chain, const ShapeState& shape,
                        const Eigen::VectorXd& shape_velocity,
                        const DragCoefficients& drag);

// The 2(N-1) control fields: field j carries the twist response to the unit
// shape rate e_j plus the rate itself. Zero-length links yield pure shape
// motion (zero twist).
std::vector<ConfigField> control_fields(const LinkChain& chain, const ShapeState& shape,
                                        const DragCoefficients& drag);

// The printed 2-link equal-length closed forms, as 8-vectors
// (twist; phi_dot; theta_dot). With scallop_branch the c_tau = 0 variant is
// returned (V1 unchanged, V2 = (0,0,0,0,0,-1,0,1)); requesting the generic
// branch with c_tau = 0 (or the scallop branch with c_tau > 0) throws
// DegenerateClosedForm / PreconditionViolation.
struct ClosedFormFields {
  Eigen::Matrix<double, 8, 1> v1;
  Eigen::Matrix<double, 8, 1> v2;
};
ClosedFormFields closed_form_fields(double theta, double phi, const DragCoefficients& drag,
                                    double L, bool scallop_branch = false);

// Instantaneous power transferred to the fluid (force density dotted with
// the material velocity, plus torque density dotted with omega), integrated
// exactly over arclength. `twist` must be the body twist of the motion.
double power_density(const LinkChain& chain, const ShapeState& shape,
                     const Eigen::VectorXd& shape_velocity, const BodyTwist& twist,
                     const DragCoefficients& drag);

// ---------------------------------------------------------------------------
// Scalar-generic core (used by the bracket engine through dual numbers)
// ---------------------------------------------------------------------------

namespace model {

template <class T> using V3 = Eigen::Matrix<T, 3, 1>;
template <class T> using M3 = Eigen::Matrix<T, 3, 3>;
template <class T> using V6 = Eigen::Matrix<T, 6, 1>;
template <class T> using M6 = Eigen::Matrix<T, 6, 6>;
template <class T> using VX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
V3<T> link_direction_t(const T& theta, const T& phi) {
  return V3<T>(cos(theta) * sin(phi), sin(theta) * sin(phi), cos(phi));
}

template <class T>
V3<T> ddtheta_link_direction_t(const T& theta, const T& phi) {
  return V3<T>(-sin(theta) * sin(phi), cos(theta) * sin(phi), T(0));
}

template <class T>
V3<T> ddphi_link_direction_t(const T& theta, const T& phi) {
  return V3<T>(cos(theta) * cos(phi), sin(theta) * cos(phi), -sin(phi));
}

// Local drag tensor (C_par - C_perp) e e^T + C_perp I of one link.
template <class T>
M3<T> drag_tensor(const V3<T>& e, const DragCoefficients& drag) {
  return T(drag.c_par - drag.c_perp) * (e * e.transpose()) +
         T(drag.c_perp) * M3<T>::Identity();
}

// Solves the symmetric positive (semi)definite system A x = b by LDLT without
// pivoting. Pivots below rel_tol * max_diag are treated as exact zero modes
// (their response is zeroed); pivots below -rel_tol * max_diag throw.
// If zero_pivot_seen is non-null it is set instead of consulting c_tau here.
template <class T, int N>
Eigen::Matrix<T, N, 1> solve_psd(const Eigen::Matrix<T, N, N>& A,
                                 const Eigen::Matrix<T, N, 1>& b,
                                 double rel_tol = 1e-12,
                                 bool* zero_pivot_seen = nullptr) {
  Eigen::Matrix<T, N, N> L = Eigen::Matrix<T, N, N>::Identity();
  Eigen::Matrix<T, N, 1> d;
  bool live[N];
  double max_diag = 0.0;
  for (int i = 0; i < N; ++i) max_diag = std::max(max_diag, std::abs(scalar_value(A(i, i))));
  const double tol = rel_tol * std::max(max_diag, 1e-300);

  for (int j = 0; j < N; ++j) {
    T dj = A(j, j);
    for (int k = 0; k < j; ++k)
      if (live[k]) dj -= L(j, k) * L(j, k) * d(k);
    const double djv = scalar_value(dj);
    if (djv <= tol) {
      if (djv < -tol) {
        throw NotPositiveDefinite("grand resistance matrix has a negative pivot (" +
                                  std::to_string(djv) + ")");
      }
      if (zero_pivot_seen) *zero_pivot_seen = true;
      live[j] = false;
      d(j) = T(0);
      continue;
    }
    live[j] = true;
    d(j) = dj;
    for (int i = j + 1; i < N; ++i) {
      T lij = A(i, j);
      for (int k = 0; k < j; ++k)
        if (live[k]) lij -= L(i, k) * L(j, k) * d(k);
      L(i, j) = lij / dj;
    }
  }

  // forward solve L z = b, scale, back solve L^T x = y; dead modes stay zero.
  Eigen::Matrix<T, N, 1> x = b;
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < i; ++k)
      if (live[k]) x(i) -= L(i, k) * x(k);
  for (int i = 0; i < N; ++i) x(i) = live[i] ? T(x(i) / d(i)) : T(0);
  for (int i = N - 1; i >= 0; --i)
    for (int k = i + 1; k < N; ++k)
      if (live[i]) x(i) -= L(k, i) * x(k);
  return x;
}

// Grand resistance assembly, Eqs. of the N-link model. `s` is the flat shape
// coordinate vector; lengths has N entries.
template <class T>
M6<T> grand_resistance_t(const std::vector<double>& lengths, const VX<T>& s,
                         const DragCoefficients& drag) {
  const int n = static_cast<int>(lengths.size());
  M3<T> K = M3<T>::Zero(), C = M3<T>::Zero(), J = M3<T>::Zero();
  V3<T> b = V3<T>::Zero();  // moment arm sum_{j=2}^{i-1} l_j e_j
  const T cperp(drag.c_perp);

  for (int i = 1; i <= n; ++i) {
    const double l = lengths[i - 1];
    V3<T> e;
    if (i == 1) {
      e = V3<T>(T(0), T(0), T(1));
    } else {
      const T& phi = s(2 * (i - 2));
      const T& theta = s(2 * (i - 2) + 1);
      e = link_direction_t<T>(theta, phi);
    }
    const M3<T> D = drag_tensor<T>(e, drag);
    const M3<T> E = skew3<T>(e);
    const M3<T> B = skew3<T>(b);

    K += T(l) * D;
    C += T(l) * B * D + T(0.5 * l * l) * cperp * E;
    J += T(-l) * B * D * B - T(0.5 * l * l) * cperp * (E * B + B * E) +
         T(l * l * l / 3.0) * cperp * (M3<T>::Identity() - e * e.transpose());
    if (i == 1) {
      J += T(l * drag.c_tau) * (e * e.transpose());
    }
    if (i >= 2) b += T(l) * e;
  }

  M6<T> M;
  M.template block<3, 3>(0, 0) = K;
  M.template block<3, 3>(0, 3) = C.transpose();
  M.template block<3, 3>(3, 0) = C;
  M.template block<3, 3>(3, 3) = J;
  return M;
}

// Shape-induced wrench (force; torque) for the given flat shape rates.
template <class T>
V6<T> shape_wrench_t(const std::vector<double>& lengths, const VX<T>& s,
                     const VX<T>& rate, const DragCoefficients& drag) {
  const int n = static_cast<int>(lengths.size());
  V3<T> F = V3<T>::Zero(), Tq = V3<T>::Zero();
  V3<T> b = V3<T>::Zero(), bdot = V3<T>::Zero();
  const T cperp(drag.c_perp);

  for (int i = 2; i <= n; ++i) {
    const double l = lengths[i - 1];
    const T& phi = s(2 * (i - 2));
    const T& theta = s(2 * (i - 2) + 1);
    const T& phidot = rate(2 * (i - 2));
    const T& thetadot = rate(2 * (i - 2) + 1);
    const V3<T> e = link_direction_t<T>(theta, phi);
    const V3<T> edot = ddtheta_link_direction_t<T>(theta, phi) * thetadot +
                       ddphi_link_direction_t<T>(theta, phi) * phidot;
    const M3<T> D = drag_tensor<T>(e, drag);
    const M3<T> E = skew3<T>(e);
    const M3<T> B = skew3<T>(b);

    F += D * (T(l) * bdot + T(0.5 * l * l) * edot);
    Tq += T(l) * B * (D * bdot) + T(0.5 * l * l) * (B * (D * edot) + E * (D * bdot)) +
          T(l * l * l / 3.0) * (E * (D * edot));

    b += T(l) * e;
    bdot += T(l) * edot;
  }

  V6<T> out;
  out.template head<3>() = F;
  out.template tail<3>() = Tq;
  return out;
}

template <class T>
V6<T> body_velocity_t(const std::vector<double>& lengths, const VX<T>& s,
                      const VX<T>& rate, const DragCoefficients& drag,
                      bool* zero_pivot_seen = nullptr) {
  const M6<T> M = grand_resistance_t<T>(lengths, s, drag);
  const V6<T> w = shape_wrench_t<T>(lengths, s, rate, drag);
  bool zp = false;
  V6<T> tw = solve_psd<T, 6>(M, V6<T>(-w), 1e-12, &zp);
  if (zp && drag.c_tau > 0.0) {
    throw NotPositiveDefinite("zero pivot with c_tau > 0: degenerate chain");
  }
  if (zero_pivot_seen) *zero_pivot_seen = zp;
  return tw;
}

// Control field j (0-based channel in the canonical ordering), stacked as
// (twist; shape rates).
template <class T>
VX<T> control_field_t(const std::vector<double>& lengths, const VX<T>& s, int channel,
                      const DragCoefficients& drag) {
  const int m = static_cast<int>(s.size());
  VX<T> rate = VX<T>::Zero(m);
  rate(channel) = T(1);
  VX<T> out(6 + m);
  out.template head<6>() = body_velocity_t<T>(lengths, s, rate, drag);
  out.template tail(m) = rate;
  return out;
}

// Closed-form 2-link fields, Eqs. (15)/(16N) verbatim, as 8-vectors.
// channel 0 = V1 (unit phi_dot), channel 1 = V2 (unit theta_dot);
// scallop = true selects the c_tau = 0 variant (V2 = -e6 twist).
template <class T>
Eigen::Matrix<T, 8, 1> closed_form_field_t(const T& theta, const T& phi,
                                           const DragCoefficients& drag, double L,
                                           int channel, bool scallop = false) {
  Eigen::Matrix<T, 8, 1> v = Eigen::Matrix<T, 8, 1>::Zero();
  const double cpa = drag.c_par, cpe = drag.c_perp, ct = drag.c_tau;
  if (channel == 0) {
    const T den = T(2.0) * (T(cpe + cpa) + T(cpa - cpe) * cos(phi));
    const T s_half = sin(phi * T(0.5));
    v(0) = T(L * cpe) * cos(theta) * s_half * s_half / den;
    v(1) = T(L * cpe) * sin(theta) * s_half * s_half / den;
    v(2) = T(L * cpe) * sin(phi) / (T(2.0) * den);
    v(3) = sin(theta) * T(0.5);
    v(4) = -cos(theta) * T(0.5);
    v(6) = T(1);
    return v;
  }
  if (scallop) {
    v(5) = T(-1);
    v(7) = T(1);
    return v;
  }
  const T den = T(36.0 * ct) * cos(phi) - T(45.0 * ct) +
                cos(T(2.0) * phi) * T(2.0 * cpe * L * L - 15.0 * ct) - T(2.0 * cpe * L * L);
  const T s_half = sin(phi * T(0.5));
  const T c_half = cos(phi * T(0.5));
  v(0) = T(-24.0 * ct * L) * sin(theta) * s_half * s_half * sin(phi) / den;
  v(1) = T(48.0 * ct * L) * cos(theta) * s_half * s_half * s_half * c_half / den;
  v(3) = T(-3.0 * ct) * cos(theta) * (T(5.0) * sin(T(2.0) * phi) - T(6.0) * sin(phi)) / den;
  v(4) = T(-3.0 * ct) * sin(theta) * (T(5.0) * sin(T(2.0) * phi) - T(6.0) * sin(phi)) / den;
  v(5) = T(4.0 * L * L * cpe) * sin(phi) * sin(phi) / den;
  v(7) = T(1);
  return v;
}

}  // namespace model

}  // namespace stokeswim
