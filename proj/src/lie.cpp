#include "stokeswim/lie.hpp"

#include <cmath>

namespace stokeswim {

Mat4 hat(const Vec6& y) { return hat_t<double>(y); }

Vec6 vee(const Mat4& m, double tol) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const Mat3 a = m.block<3, 3>(0, 0);
  const double sym_defect = 0.5 * (a + a.transpose()).norm();
  const double row_defect = m.row(3).norm();
  if (sym_defect > tol * scale || row_defect > tol * scale) {
    throw StructureViolation("vee: matrix is not se(3) within tolerance (defect " +
                             std::to_string(std::max(sym_defect, row_defect)) + ")");
  }
  const Mat3 skew = 0.5 * (a - a.transpose());
  Vec6 y;
  y.head<3>() = m.block<3, 1>(0, 3);
  y(3) = skew(2, 1);
  y(4) = skew(0, 2);
  y(5) = skew(1, 0);
  return y;
}

Vec6 commutator(const Vec6& a, const Vec6& b) { return se3_commutator<double>(a, b); }

double RotationMatrix::orthogonality_defect() const {
  return (r.transpose() * r - Mat3::Identity()).norm();
}

double RotationMatrix::determinant_defect() const { return std::abs(r.determinant() - 1.0); }

bool RotationMatrix::is_valid(double tol) const {
  return orthogonality_defect() <= tol && determinant_defect() <= tol;
}

void RotationMatrix::require_valid(double tol) const {
  if (!is_valid(tol)) {
    throw StructureViolation("rotation matrix violates SO(3) invariants");
  }
}

Pose Pose::operator*(const Pose& o) const {
  Pose out;
  out.rotation.r = R() * o.R();
  out.translation = translation + R() * o.translation;
  return out;
}

Pose Pose::inverse() const {
  Pose out;
  out.rotation.r = R().transpose();
  out.translation = -(R().transpose() * translation);
  return out;
}

Vec6 BodyTwist::stacked() const {
  Vec6 y;
  y.head<3>() = linear;
  y.tail<3>() = angular;
  return y;
}

BodyTwist BodyTwist::from_stacked(const Vec6& y) { return {y.head<3>(), y.tail<3>()}; }

bool BodyTwist::is_finite() const {
  return linear.allFinite() && angular.allFinite();
}

namespace {

// Rodrigues coefficients a1 = sin(t)/t, a2 = (1-cos t)/t^2, a3 = (t-sin t)/t^3
// with Taylor fallbacks below the small-angle threshold.
struct ExpCoeffs {
  double a1, a2, a3;
};

ExpCoeffs exp_coeffs(double t) {
  if (t < 1e-6) {
    const double t2 = t * t;
    return {1.0 - t2 / 6.0, 0.5 - t2 / 24.0, 1.0 / 6.0 - t2 / 120.0};
  }
  const double s = std::sin(t), c = std::cos(t);
  return {s / t, (1.0 - c) / (t * t), (t - s) / (t * t * t)};
}

}  // namespace

Mat3 rotation_exp(const Vec3& w) {
  const double t = w.norm();
  const ExpCoeffs k = exp_coeffs(t);
  const Mat3 wx = skew3<double>(w);
  return Mat3::Identity() + k.a1 * wx + k.a2 * wx * wx;
}

Vec3 rotation_log(const Mat3& r) {
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double angle = std::acos(c);
  if (angle < 1e-10) {
    // first-order: log ~ skew part
    return Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)) * 0.5;
  }
  if (angle > M_PI - 1e-6) {
    // near pi the skew part is ill-conditioned; use the symmetric part.
    // R = I + 2 sin^2(a/2) (nn^T - I) + sin(a) [n]x ; recover n from diagonal.
    Mat3 s = 0.5 * (r + Mat3::Identity());  // close to n n^T at a = pi
    int k = 0;
    s.diagonal().maxCoeff(&k);
    Vec3 n = s.col(k) / std::sqrt(std::max(s(k, k), 1e-300));
    n.normalize();
    // fix sign with the skew part (vanishes exactly at pi, any sign is valid there)
    const Vec3 skew(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    if (skew.dot(n) < 0.0) n = -n;
    return angle * n;
  }
  const Vec3 skew(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return (angle / (2.0 * std::sin(angle))) * skew;
}

double rotation_angle(const Mat3& r) {
  return std::acos(std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0));
}

Pose exp_step(const Pose& pose, const BodyTwist& xi, double dt) {
  const Vec3 w = xi.angular * dt;
  const Vec3 v = xi.linear * dt;
  const double t = w.norm();
  const ExpCoeffs k = exp_coeffs(t);
  const Mat3 wx = skew3<double>(w);
  const Mat3 r_step = Mat3::Identity() + k.a1 * wx + k.a2 * wx * wx;
  const Mat3 v_mat = Mat3::Identity() + k.a2 * wx + k.a3 * wx * wx;
  Pose out;
  out.rotation.r = pose.R() * r_step;
  out.translation = pose.translation + pose.R() * (v_mat * v);
  return out;
}

Vec6 log_pose(const Pose& g) {
  const Vec3 w = rotation_log(g.R());
  const double t = w.norm();
  const Mat3 wx = skew3<double>(w);
  Mat3 v_inv;
  if (t < 1e-6) {
    v_inv = Mat3::Identity() - 0.5 * wx + (1.0 / 12.0 + t * t / 720.0) * wx * wx;
  } else {
    const double half = 0.5 * t;
    const double coef = (1.0 - half * std::cos(half) / std::sin(half)) / (t * t);
    v_inv = Mat3::Identity() - 0.5 * wx + coef * wx * wx;
  }
  Vec6 out;
  out.head<3>() = v_inv * g.translation;
  out.tail<3>() = w;
  return out;
}

double wrap_angle(double x) {
  const double two_pi = 2.0 * M_PI;
  double y = std::fmod(x, two_pi);
  if (y <= -M_PI) y += two_pi;
  if (y > M_PI) y -= two_pi;
  return y;
}

}  // namespace stokeswim
