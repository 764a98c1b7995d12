#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "stokeswim/swimmer.hpp"

// Lie brackets of the control fields on SE(3) x shape-space, Lie-algebra rank
// certification, the controllability determinant delta (numeric and closed
// form), the scallop degeneracy check, the N-link reduction check, and the
// parameter scan.
//
// A shape-dependent field is evaluable on dual-lifted shape coordinates, so a
// bracket's shape-Jacobian terms are exact at any nesting level up to tree
// height 3 (one more than the certificate needs). The 5-point central finite
// difference route is kept as the black-box alternative and is cross-checked
// against the exact one in the tests.

namespace stokeswim {

class ControlField {
 public:
  explicit ControlField(int shape_dim, std::string name, int height = 0)
      : shape_dim_(shape_dim), name_(std::move(name)), height_(height) {}
  virtual ~ControlField() = default;

  int shape_dim() const { return shape_dim_; }
  int total_dim() const { return 6 + shape_dim_; }
  const std::string& name() const { return name_; }
  int height() const { return height_; }  // bracket tree height, 0 for base fields

  virtual model::VX<double> operator()(const model::VX<double>& s) const = 0;
  virtual model::VX<Dual1> operator()(const model::VX<Dual1>& s) const = 0;
  virtual model::VX<Dual2> operator()(const model::VX<Dual2>& s) const = 0;
  virtual model::VX<Dual3> operator()(const model::VX<Dual3>& s) const = 0;

 private:
  int shape_dim_;
  std::string name_;
  int height_;
};

using FieldPtr = std::shared_ptr<const ControlField>;

// Field j of the N-link model (resistance assembly + solve route).
class ModelField final : public ControlField {
 public:
  ModelField(LinkChain chain, DragCoefficients drag, int channel);

  model::VX<double> operator()(const model::VX<double>& s) const override;
  model::VX<Dual1> operator()(const model::VX<Dual1>& s) const override;
  model::VX<Dual2> operator()(const model::VX<Dual2>& s) const override;
  model::VX<Dual3> operator()(const model::VX<Dual3>& s) const override;

 private:
  template <class T>
  model::VX<T> eval(const model::VX<T>& s) const;

  LinkChain chain_;
  DragCoefficients drag_;
  int channel_;
};

// Closed-form 2-link field (Eqs. (15)/(16N), or the scallop variant).
class ClosedFormField final : public ControlField {
 public:
  ClosedFormField(DragCoefficients drag, double L, int channel, bool scallop = false);

  model::VX<double> operator()(const model::VX<double>& s) const override;
  model::VX<Dual1> operator()(const model::VX<Dual1>& s) const override;
  model::VX<Dual2> operator()(const model::VX<Dual2>& s) const override;
  model::VX<Dual3> operator()(const model::VX<Dual3>& s) const override;

 private:
  template <class T>
  model::VX<T> eval(const model::VX<T>& s) const;

  DragCoefficients drag_;
  double L_;
  int channel_;
  bool scallop_;
};

// Two bracket conventions coexist:
//  * Geometric is the Jacobi-Lie bracket of the fields on SE(3) x shape-space,
//    twist part [xi1, xi2]_se3 + (D_s xi2) sigma1 - (D_s xi1) sigma2. This is
//    what alternating flows physically generate (the commutator maneuver
//    follows it) and what rank certification uses.
//  * Coordinate drops the se(3) commutator term, i.e. it is the Euclidean
//    bracket of the left-trivialized coordinate representatives,
//    (D_s xi2) sigma1 - (D_s xi1) sigma2. The printed certificate vectors and
//    the closed-form determinant identity p/q follow this convention (they
//    differ from the geometric ones by exactly the commutator of the values).
enum class BracketConvention { Geometric, Coordinate };

// Mixed bracket of two fields:
//   twist part = [xi1, xi2]_se3 (Geometric only)
//                + (D_s xi2) sigma1 - (D_s xi1) sigma2,
//   shape part = (D_s sigma2) sigma1 - (D_s sigma1) sigma2,
// where sigma_i is field i's shape-rate part. Directional derivatives are
// propagated with one extra dual level per bracket, so evaluating a field of
// height 3 at plain doubles bottoms out exactly at Dual3.
class BracketField final : public ControlField {
 public:
  BracketField(FieldPtr f1, FieldPtr f2,
               BracketConvention convention = BracketConvention::Geometric);

  model::VX<double> operator()(const model::VX<double>& s) const override;
  model::VX<Dual1> operator()(const model::VX<Dual1>& s) const override;
  model::VX<Dual2> operator()(const model::VX<Dual2>& s) const override;
  [[noreturn]] model::VX<Dual3> operator()(const model::VX<Dual3>& s) const override;

 private:
  template <class T>
  model::VX<T> eval(const model::VX<T>& s) const;

  FieldPtr f1_, f2_;
  BracketConvention convention_;
};

FieldPtr bracket(FieldPtr f1, FieldPtr f2,
                 BracketConvention convention = BracketConvention::Geometric);

// Base fields of a chain as shared pointers (channel order as in swimmer.hpp).
std::vector<FieldPtr> model_fields(const LinkChain& chain, const DragCoefficients& drag);

// Exact-derivative mixed bracket at a shape. Throws NumericalJacobianFailure
// when a nested evaluation fails (propagated model errors).
ConfigField mixed_bracket(const ControlField& f1, const ControlField& f2,
                          const ShapeState& shape,
                          BracketConvention convention = BracketConvention::Geometric);
ConfigField mixed_bracket(const FieldPtr& f1, const FieldPtr& f2, const ShapeState& shape,
                          BracketConvention convention = BracketConvention::Geometric);

// Black-box variant: shape-Jacobians by 5-point central differences with
// step h = h_scale * max(1, |s_i|) per coordinate.
ConfigField mixed_bracket_fd(const ControlField& f1, const ControlField& f2,
                             const ShapeState& shape, double h_scale = 1e-5,
                             BracketConvention convention = BracketConvention::Geometric);

// The certificate words V3 = [V1,V2], V4 = [V1,V3], V5 = [V2,V3],
// V6 = [V1,V5] over the given base pair, in the requested convention.
std::array<FieldPtr, 4> certificate_words(const FieldPtr& f1, const FieldPtr& f2,
                                          BracketConvention convention);

// Twist parts of V1..V6 of the equal-length 2-link swimmer at
// (theta, phi) = (0, pi/2), stacked as columns; Coordinate convention matches
// the closed-form determinant, Geometric the physical flows.
Eigen::Matrix<double, 6, 6> certificate_matrix(const DragCoefficients& drag, double L,
                                               BracketConvention convention);

// One evaluated node of the bracket generation process.
struct BracketNode {
  std::string expression;
  int height = 0;
  ConfigField value;
};

struct RankReport {
  int rank = 0;
  std::array<double, 6> singular_values{};  // descending, zero-padded
  double tolerance = 0.0;                   // relative threshold used
  std::vector<std::string> words;           // expressions whose twists were stacked
};

// Evaluated bracket words at `shape`. depth 1: base fields only. depth >= 2:
// the Theorem-style certificate sequence over the first two channels first
// ([V1,V2], [V1,.], [V2,.], [V1,[V2,.]]), then, while the twist span is
// deficient, brackets of base fields against everything generated so far
// (tree height capped at 3).
std::vector<BracketNode> bracket_basis(const LinkChain& chain, const ShapeState& shape,
                                       const DragCoefficients& drag, int depth);

// Rank of the stacked twist parts (SVD, threshold tol relative to the largest
// singular value). rank 6 certifies the fiber-controllability condition.
RankReport lie_rank(const LinkChain& chain, const ShapeState& shape,
                    const DragCoefficients& drag, int depth, double tol = 1e-8);

// det(v1|...|v6) of the certificate twists at (theta, phi) = (0, pi/2) for the
// equal-length 2-link swimmer, via the numeric field route (Coordinate
// convention; the one the closed form p/q reproduces).
double delta_determinant(const DragCoefficients& drag, double L);

// The printed rational closed form p/q of the same determinant.
double delta_closed_form(const DragCoefficients& drag, double L);
double delta_p(const DragCoefficients& drag, double L);
double delta_q(const DragCoefficients& drag, double L);

struct ScallopCheckReport {
  bool v2_is_minus_e6 = false;   // twist of V2 equals (0,0,0,0,0,-1) at all samples
  double max_v2_defect = 0.0;
  int max_rank = 0;              // over sampled shapes
  std::vector<ShapeState> shapes;
  bool passed() const { return v2_is_minus_e6 && max_rank <= 5; }
};

// Proposition-style degeneracy check; requires c_tau = 0. Shapes default to a
// spread of samples with phi away from 0 and pi.
ScallopCheckReport scallop_check(const DragCoefficients& drag, double L,
                                 std::vector<ShapeState> shapes = {});

struct ReductionReport {
  double delta_nlink = 0.0;
  double delta_2link = 0.0;
  double delta_rel_error = 0.0;
  double max_field_rel_error = 0.0;  // link-2 fields vs 2-link fields, sampled shapes
  bool passed = false;
};

// Sets lengths (L, L, 0, ..., 0) and confirms the N-link link-2 fields and the
// determinant reproduce the 2-link ones within rel_tol.
ReductionReport nlink_reduction_check(int n_links, double L, const DragCoefficients& drag,
                                      double rel_tol = 1e-8);

// delta of an arbitrary chain from the brackets of the first two channels at
// (theta_2, phi_2) = (0, pi/2), other links at their zero angles.
double delta_determinant_chain(const LinkChain& chain, const DragCoefficients& drag);

struct ScanRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct ScanRanges {
  ScanRange c_par{0.5, 1.5};
  ScanRange c_perp{2.0, 4.0};
  ScanRange c_tau{0.5, 2.0};
  ScanRange length{0.5, 2.0};

  // 0 < c_par < c_perp must hold for every possible draw.
  void validate() const;
};

struct ScanRow {
  double c_par, c_perp, c_tau, length;
  double delta;
  int rank;
};

struct ScanTable {
  std::vector<ScanRow> rows;
  double rank6_fraction() const;
};

// Deterministic given the seed (per-sample seeding; workers only partition
// the index range, capped by STOKESWIM_THREADS).
ScanTable parameter_scan(const ScanRanges& ranges, int samples, std::uint64_t seed);

}  // namespace stokeswim
