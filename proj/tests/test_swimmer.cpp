#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "test_support.hpp"

using namespace stokeswim;
using swtest::max_rel_err;

namespace {

ShapeState random_nlink_shape(std::mt19937_64& rng, int links) {
  std::uniform_real_distribution<double> th(-M_PI, M_PI);
  std::uniform_real_distribution<double> ph(-M_PI + 0.05, M_PI - 0.05);
  ShapeState s;
  for (int i = 0; i < links - 1; ++i) s.angles.push_back({th(rng), ph(rng)});
  return s;
}

LinkChain random_chain(std::mt19937_64& rng, int links) {
  std::uniform_real_distribution<double> len(0.3, 2.0);
  std::vector<double> lengths;
  for (int i = 0; i < links; ++i) lengths.push_back(len(rng));
  return LinkChain(lengths);
}

}  // namespace

TEST_CASE("type invariants are enforced") {
  CHECK_THROWS_AS((DragCoefficients{2.0, 1.0, 0.5}.validate()), PreconditionViolation);
  CHECK_THROWS_AS((DragCoefficients{0.0, 1.0, 0.5}.validate()), PreconditionViolation);
  CHECK_THROWS_AS((DragCoefficients{1.0, 2.0, -0.1}.validate()), PreconditionViolation);
  CHECK_NOTHROW((DragCoefficients{1.0, 2.0, 0.0}.validate()));

  CHECK_THROWS_AS(LinkChain({1.0}), PreconditionViolation);
  CHECK_THROWS_AS(LinkChain({1.0, 0.0}), PreconditionViolation);      // one positive only
  CHECK_THROWS_AS(LinkChain({1.0, -0.5}), PreconditionViolation);
  CHECK_NOTHROW(LinkChain({1.0, 0.0, 2.0}));

  ShapeState s(0.3, 4.0);
  s.normalize();
  CHECK(s.angles[0].phi == doctest::Approx(4.0 - 2.0 * M_PI));
  CHECK(s.angles[0].theta == 0.3);  // theta stays unbounded

  // coords round trip uses the canonical (phi, theta) flattening
  const Eigen::VectorXd c = s.coords();
  CHECK(c(0) == s.angles[0].phi);
  CHECK(c(1) == s.angles[0].theta);
  const ShapeState back = ShapeState::from_coords(c);
  CHECK(back.angles[0].theta == s.angles[0].theta);
}

TEST_CASE("link_direction: anchors and unit norm") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 20; ++k) {
    const ShapeState s = random_nlink_shape(rng, 4);
    CHECK((link_direction(s, 1) - Vec3(0, 0, 1)).norm() == 0.0);
    for (int i = 2; i <= 4; ++i) {
      CHECK(std::abs(link_direction(s, i).norm() - 1.0) <= 1e-14);
    }
  }
  CHECK((link_direction(ShapeState(0.0, M_PI / 2), 2) - Vec3(1, 0, 0)).norm() <= 1e-15);
  CHECK((link_direction(ShapeState(M_PI / 2, M_PI / 2), 2) - Vec3(0, 1, 0)).norm() <= 1e-15);
  CHECK_THROWS_AS(link_direction(ShapeState(0.0, 0.0), 3), IndexOutOfRange);
  CHECK_THROWS_AS(link_direction(ShapeState(0.0, 0.0), 0), IndexOutOfRange);
}

TEST_CASE("cross_matrix") {
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  CHECK((cross_matrix(Vec3(0, 0, 1)) - expected).norm() == 0.0);

  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const Vec3 e(u(rng), u(rng), u(rng));
    const Vec3 v(u(rng), u(rng), u(rng));
    CHECK((cross_matrix(e) * v - e.cross(v)).norm() <= 1e-15);
    CHECK((cross_matrix(e).transpose() + cross_matrix(e)).norm() == 0.0);
    CHECK((cross_matrix(e) * e).norm() <= 1e-16);
  }
}

TEST_CASE("resistance_blocks: aligned 2-link closed form") {
  const double L = 1.3;
  const DragCoefficients drag{1.0, 2.5, 0.7};
  const GrandResistance gr =
      resistance_blocks(LinkChain::two_link(L), ShapeState(0.4, 0.0), drag);

  Mat3 K_expected = 2.0 * L * Vec3(drag.c_perp, drag.c_perp, drag.c_par).asDiagonal();
  CHECK((gr.K() - K_expected).norm() <= 1e-14 * K_expected.norm());

  Mat3 J_expected = Vec3(2.0 * L * L * L * drag.c_perp / 3.0,
                         2.0 * L * L * L * drag.c_perp / 3.0, L * drag.c_tau)
                        .asDiagonal();
  CHECK((gr.J() - J_expected).norm() <= 1e-14 * J_expected.norm());
}

TEST_CASE("resistance_blocks: zero-length links reduce to the 2-link matrix") {
  std::mt19937_64 rng(23);
  const DragCoefficients drag{0.8, 1.9, 1.1};
  const double L = 0.9;
  for (int k = 0; k < 10; ++k) {
    ShapeState shape4 = random_nlink_shape(rng, 4);
    const ShapeState shape2(shape4.angles[0].theta, shape4.angles[0].phi);
    const GrandResistance g4 =
        resistance_blocks(LinkChain({L, L, 0.0, 0.0}), shape4, drag);
    const GrandResistance g2 = resistance_blocks(LinkChain::two_link(L), shape2, drag);
    CHECK((g4.m - g2.m).norm() <= 1e-14 * g2.m.norm());
  }
}

TEST_CASE("grand resistance symmetry and positive definiteness") {
  std::mt19937_64 rng(24);
  for (int k = 0; k < 500; ++k) {
    const int links = 2 + static_cast<int>(rng() % 5);  // N <= 6
    const LinkChain chain = random_chain(rng, links);
    const ShapeState shape = random_nlink_shape(rng, links);
    const DragCoefficients drag = swtest::random_drag(rng);
    const GrandResistance gr = resistance_blocks(chain, shape, drag);
    CHECK(gr.symmetry_defect() <= 1e-12);
    CHECK(gr.min_eigenvalue() > 0.0);
  }
}

TEST_CASE("solver rejects non-positive-definite systems") {
  Mat6 bad = Mat6::Identity();
  bad(3, 3) = -1.0;
  CHECK_THROWS_AS((model::solve_psd<double, 6>(bad, Vec6::Ones())), NotPositiveDefinite);

  // semidefinite with a coordinate zero mode: solvable, response zeroed
  Mat6 semi = Mat6::Identity();
  semi(5, 5) = 0.0;
  Vec6 rhs = Vec6::Ones();
  rhs(5) = 0.0;
  const Vec6 x = model::solve_psd<double, 6>(semi, rhs);
  CHECK(x(5) == 0.0);
  CHECK((semi * x - rhs).norm() <= 1e-14);
}

TEST_CASE("shape_wrench: anchors and linearity") {
  const double L = 1.0;
  const DragCoefficients drag{1.0, 2.0, 1.0};
  const LinkChain chain = LinkChain::two_link(L);
  const ShapeState shape(0.0, M_PI / 2);

  const ShapeWrench zero = shape_wrench(chain, shape, Eigen::Vector2d(0, 0), drag);
  CHECK(zero.force.norm() == 0.0);
  CHECK(zero.torque.norm() == 0.0);

  // phi_dot = 1: e_dot = (0,0,-1), F = (0,0,-L^2 C_perp / 2)
  const ShapeWrench w = shape_wrench(chain, shape, Eigen::Vector2d(1, 0), drag);
  CHECK((w.force - Vec3(0, 0, -L * L * drag.c_perp / 2.0)).norm() <= 1e-15);

  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const Eigen::Vector2d v(u(rng), u(rng));
    const ShapeWrench w1 = shape_wrench(chain, shape, v, drag);
    const ShapeWrench w2 = shape_wrench(chain, shape, 2.0 * v, drag);
    CHECK((w2.stacked() - 2.0 * w1.stacked()).norm() <= 1e-14 * (1.0 + w1.stacked().norm()));
  }
}

TEST_CASE("body_velocity: anchors, linearity, closed-form cross-check") {
  const DragCoefficients drag{1.0, 2.0, 1.0};
  const double L = 1.0;
  const LinkChain chain = LinkChain::two_link(L);

  CHECK(body_velocity(chain, ShapeState(0.7, 1.1), Eigen::Vector2d(0, 0), drag)
            .stacked()
            .norm() == 0.0);

  // phi_dot = 1 at (0,0): the twist is (0,0,0,0,-1/2,0)
  const BodyTwist tw = body_velocity(chain, ShapeState(0.0, 0.0), Eigen::Vector2d(1, 0), drag);
  Vec6 expected = Vec6::Zero();
  expected(4) = -0.5;
  CHECK((tw.stacked() - expected).norm() <= 1e-14);

  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int k = 0; k < 30; ++k) {
    const ShapeState shape = swtest::random_regular_shape(rng);
    // theta_dot = 1 matches the closed-form second field
    const BodyTwist tv =
        body_velocity(chain, shape, Eigen::Vector2d(0, 1), drag);
    const auto cf = closed_form_fields(shape.angles[0].theta, shape.angles[0].phi, drag, L);
    CHECK(max_rel_err(tv.stacked(), cf.v2.head<6>()) <= 1e-9);

    // linearity in the shape velocity
    const Eigen::Vector2d a(u(rng), u(rng)), b(u(rng), u(rng));
    const double al = u(rng), be = u(rng);
    const Vec6 lhs = body_velocity(chain, shape, al * a + be * b, drag).stacked();
    const Vec6 rhs = al * body_velocity(chain, shape, a, drag).stacked() +
                     be * body_velocity(chain, shape, b, drag).stacked();
    CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
  }
}

TEST_CASE("control_fields: shape parts, zero-length links, closed-form match") {
  const DragCoefficients drag{1.0, 2.0, 1.0};
  const LinkChain chain = LinkChain::two_link(1.0);

  const auto fields = control_fields(chain, ShapeState(0.3, 0.9), drag);
  REQUIRE(fields.size() == 2);
  CHECK((fields[0].shape_rates - Eigen::Vector2d(1, 0)).norm() == 0.0);
  CHECK((fields[1].shape_rates - Eigen::Vector2d(0, 1)).norm() == 0.0);

  // zero-length link: its fields are pure shape motions
  const LinkChain chain3({1.0, 1.0, 0.0});
  ShapeState shape3 = ShapeState::zeros(3);
  shape3.angles[0] = {0.4, 1.2};
  shape3.angles[1] = {-0.3, 0.8};
  const auto fields3 = control_fields(chain3, shape3, drag);
  REQUIRE(fields3.size() == 4);
  CHECK(fields3[2].twist.stacked().norm() <= 1e-15);
  CHECK(fields3[3].twist.stacked().norm() <= 1e-15);
  CHECK(fields3[2].shape_rates(2) == 1.0);
  CHECK(fields3[3].shape_rates(3) == 1.0);

  // certificate point
  const auto at_cert = control_fields(chain, ShapeState(0.0, M_PI / 2), drag);
  const auto cf = closed_form_fields(0.0, M_PI / 2, drag, 1.0);
  CHECK(max_rel_err(at_cert[0].stacked(), cf.v1) <= 1e-10);
  CHECK(max_rel_err(at_cert[1].stacked(), cf.v2) <= 1e-10);
}

TEST_CASE("closed_form_fields: printed anchors and branches") {
  const DragCoefficients drag{1.0, 2.0, 1.0};
  const double L = 1.0;

  const auto at_zero = closed_form_fields(0.0, 0.0, drag, L);
  Eigen::Matrix<double, 8, 1> v1_expected;
  v1_expected << 0, 0, 0, 0, -0.5, 0, 1, 0;
  CHECK((at_zero.v1 - v1_expected).norm() <= 1e-15);

  // at phi = 0 the second field is pure shape rotation for any theta
  for (double theta : {0.0, 0.7, -2.0}) {
    const auto cf = closed_form_fields(theta, 0.0, drag, L);
    Eigen::Matrix<double, 8, 1> v2_expected = Eigen::Matrix<double, 8, 1>::Zero();
    v2_expected(7) = 1.0;
    CHECK((cf.v2 - v2_expected).norm() <= 1e-15);
  }

  // sixth component at (0, pi/2)
  const auto at_half = closed_form_fields(0.0, M_PI / 2, drag, L);
  const double expected6 =
      -2.0 * L * L * drag.c_perp / (15.0 * drag.c_tau + 2.0 * drag.c_perp * L * L);
  CHECK(at_half.v2(5) == doctest::Approx(expected6).epsilon(1e-12));

  const DragCoefficients scallop{1.0, 2.0, 0.0};
  CHECK_THROWS_AS(closed_form_fields(0.1, 0.5, scallop, L), DegenerateClosedForm);
  CHECK_THROWS_AS(closed_form_fields(0.1, 0.5, drag, L, true), PreconditionViolation);

  const auto branch = closed_form_fields(0.3, 1.1, scallop, L, true);
  Eigen::Matrix<double, 8, 1> v2s = Eigen::Matrix<double, 8, 1>::Zero();
  v2s(5) = -1.0;
  v2s(7) = 1.0;
  CHECK((branch.v2 - v2s).norm() == 0.0);
  // V1 is unchanged by c_tau
  const auto generic = closed_form_fields(0.3, 1.1, drag, L);
  CHECK((branch.v1 - generic.v1).norm() == 0.0);
}

TEST_CASE("closed-form vs numeric fields across random shapes and parameters") {
  std::mt19937_64 rng(27);
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
  CHECK(worst <= 1e-9);
}

TEST_CASE("N-link reduction of the fields") {
  std::mt19937_64 rng(28);
  const DragCoefficients drag{1.1, 2.4, 0.9};
  const double L = 1.2;
  const LinkChain big({L, L, 0.0, 0.0, 0.0});
  const LinkChain two = LinkChain::two_link(L);
  for (int k = 0; k < 10; ++k) {
    ShapeState shape = random_nlink_shape(rng, 5);
    const ShapeState small(shape.angles[0].theta, shape.angles[0].phi);
    const auto fb = control_fields(big, shape, drag);
    const auto fs = control_fields(two, small, drag);
    for (int c = 0; c < 2; ++c) {
      CHECK(max_rel_err(fb[c].twist.stacked(), fs[c].twist.stacked()) <= 1e-10);
    }
  }
}

TEST_CASE("parametrization redundancy: (theta + pi, -phi) is the same point") {
  std::mt19937_64 rng(29);
  const DragCoefficients drag{1.0, 2.3, 0.8};
  const LinkChain chain = LinkChain::two_link(1.1);
  for (int k = 0; k < 20; ++k) {
    const ShapeState s = swtest::random_regular_shape(rng);
    ShapeState mirrored(s.angles[0].theta + M_PI, -s.angles[0].phi);

    CHECK((link_direction(s, 2) - link_direction(mirrored, 2)).norm() <= 1e-14);
    const GrandResistance ga = resistance_blocks(chain, s, drag);
    const GrandResistance gb = resistance_blocks(chain, mirrored, drag);
    CHECK((ga.m - gb.m).norm() <= 1e-13 * ga.m.norm());

    // rates transform as (phi_dot, theta_dot) -> (-phi_dot, theta_dot)
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Eigen::Vector2d rate(u(rng), u(rng));
    const Eigen::Vector2d mirrored_rate(-rate(0), rate(1));
    const Vec6 va = body_velocity(chain, s, rate, drag).stacked();
    const Vec6 vb = body_velocity(chain, mirrored, mirrored_rate, drag).stacked();
    CHECK((va - vb).norm() <= 1e-12 * (1.0 + va.norm()));
  }
}

TEST_CASE("power density is nonnegative along self-propelled motion") {
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const DragCoefficients drag = swtest::random_drag(rng);
    const int links = 2 + static_cast<int>(rng() % 3);
    const LinkChain chain = random_chain(rng, links);
    const ShapeState shape = random_nlink_shape(rng, links);
    Eigen::VectorXd rate(chain.shape_dim());
    for (int i = 0; i < rate.size(); ++i) rate(i) = u(rng);
    const BodyTwist tw = body_velocity(chain, shape, rate, drag);
    CHECK(power_density(chain, shape, rate, tw, drag) >= -1e-12);
  }
}
