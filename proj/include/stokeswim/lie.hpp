#pragma once

#include <Eigen/Dense>

#include "stokeswim/dual.hpp"
#include "stokeswim/errors.hpp"

// Minimal SE(3)/se(3) toolbox: the hat/vee isomorphism between R^6 and se(3),
// the matrix commutator, the closed-form group exponential (and log), and the
// pose/twist value types. Twist ordering is fixed as (linear; angular):
// y1..y3 is the translation column of hat(y), y4..y6 fills the skew block.

namespace stokeswim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// 3x3 skew matrix: skew3(w) * v == w x v.
template <class T>
Eigen::Matrix<T, 3, 3> skew3(const Eigen::Matrix<T, 3, 1>& w) {
  Eigen::Matrix<T, 3, 3> m;
  m(0, 0) = T(0);   m(0, 1) = -w(2);  m(0, 2) = w(1);
  m(1, 0) = w(2);   m(1, 1) = T(0);   m(1, 2) = -w(0);
  m(2, 0) = -w(1);  m(2, 1) = w(0);   m(2, 2) = T(0);
  return m;
}

template <class T>
Eigen::Matrix<T, 3, 1> cross3(const Eigen::Matrix<T, 3, 1>& a,
                              const Eigen::Matrix<T, 3, 1>& b) {
  Eigen::Matrix<T, 3, 1> c;
  c(0) = a(1) * b(2) - a(2) * b(1);
  c(1) = a(2) * b(0) - a(0) * b(2);
  c(2) = a(0) * b(1) - a(1) * b(0);
  return c;
}

template <class T>
Eigen::Matrix<T, 4, 4> hat_t(const Eigen::Matrix<T, 6, 1>& y) {
  Eigen::Matrix<T, 4, 4> m = Eigen::Matrix<T, 4, 4>::Zero();
  m.template block<3, 3>(0, 0) = skew3<T>(y.template tail<3>());
  m.template block<3, 1>(0, 3) = y.template head<3>();
  return m;
}

Mat4 hat(const Vec6& y);

// Inverse of hat. Throws StructureViolation if the 3x3 block's antisymmetry
// defect or the last row exceeds `tol` (relative to the matrix scale).
Vec6 vee(const Mat4& m, double tol = 1e-10);

// Matrix commutator vee(hat(a)hat(b) - hat(b)hat(a)), written out so it also
// runs on dual scalars: ([w1 x v2 - w2 x v1]; [w1 x w2]).
template <class T>
Eigen::Matrix<T, 6, 1> se3_commutator(const Eigen::Matrix<T, 6, 1>& a,
                                      const Eigen::Matrix<T, 6, 1>& b) {
  Eigen::Matrix<T, 3, 1> va = a.template head<3>(), wa = a.template tail<3>();
  Eigen::Matrix<T, 3, 1> vb = b.template head<3>(), wb = b.template tail<3>();
  Eigen::Matrix<T, 6, 1> out;
  out.template head<3>() = cross3<T>(wa, vb) - cross3<T>(wb, va);
  out.template tail<3>() = cross3<T>(wa, wb);
  return out;
}

Vec6 commutator(const Vec6& a, const Vec6& b);

// Rotation matrix with validity checks (not enforced on mutation; callers
// that care invoke require_valid, the integrator preserves validity anyway).
struct RotationMatrix {
  Mat3 r = Mat3::Identity();

  double orthogonality_defect() const;        // ||R^T R - I||_F
  double determinant_defect() const;          // |det R - 1|
  bool is_valid(double tol = 1e-12) const;
  void require_valid(double tol = 1e-12) const;  // throws StructureViolation
};

struct Pose {
  RotationMatrix rotation;
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  const Mat3& R() const { return rotation.r; }

  Pose operator*(const Pose& o) const;
  Pose inverse() const;
  bool is_valid(double tol = 1e-12) const { return rotation.is_valid(tol); }
};

// Body-frame twist (R^-1 x_dot; R^-1 omega).
struct BodyTwist {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();

  Vec6 stacked() const;
  static BodyTwist from_stacked(const Vec6& y);
  bool is_finite() const;
};

// Rodrigues rotation exp: exp(skew3(w)).
Mat3 rotation_exp(const Vec3& w);

// SO(3) log as a rotation vector; handles angles near 0 and pi.
Vec3 rotation_log(const Mat3& r);

// Angle of a rotation matrix in [0, pi].
double rotation_angle(const Mat3& r);

// One step of the closed-form SE(3) exponential: pose * exp(dt * hat(xi)).
// Exact for a twist held constant over [0, dt]; preserves SO(3) to round-off.
// The small-angle branch (|w| dt < 1e-6) uses the Taylor series of the
// Rodrigues coefficients to avoid 0/0.
Pose exp_step(const Pose& pose, const BodyTwist& xi, double dt);

// SE(3) log of a pose, as a (linear; angular) 6-vector.
Vec6 log_pose(const Pose& g);

// Wraps an angle to (-pi, pi].
double wrap_angle(double x);

}  // namespace stokeswim
