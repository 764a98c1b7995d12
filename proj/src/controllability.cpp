#include "stokeswim/controllability.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>

#include "stokeswim/parallel.hpp"

namespace stokeswim {

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

ModelField::ModelField(LinkChain chain, DragCoefficients drag, int channel)
    : ControlField(chain.shape_dim(), "V" + std::to_string(channel + 1)),
      chain_(std::move(chain)),
      drag_(drag),
      channel_(channel) {
  chain_.validate();
  drag_.validate();
  if (channel < 0 || channel >= chain_.shape_dim()) {
    throw IndexOutOfRange("field channel out of range");
  }
}

template <class T>
model::VX<T> ModelField::eval(const model::VX<T>& s) const {
  return model::control_field_t<T>(chain_.lengths, s, channel_, drag_);
}

model::VX<double> ModelField::operator()(const model::VX<double>& s) const { return eval(s); }
model::VX<Dual1> ModelField::operator()(const model::VX<Dual1>& s) const { return eval(s); }
model::VX<Dual2> ModelField::operator()(const model::VX<Dual2>& s) const { return eval(s); }
model::VX<Dual3> ModelField::operator()(const model::VX<Dual3>& s) const { return eval(s); }

ClosedFormField::ClosedFormField(DragCoefficients drag, double L, int channel, bool scallop)
    : ControlField(2, std::string(channel == 0 ? "V1cf" : "V2cf")),
      drag_(drag),
      L_(L),
      channel_(channel),
      scallop_(scallop) {
  if (channel != 0 && channel != 1) throw IndexOutOfRange("closed-form channel must be 0 or 1");
  if (scallop && drag.c_tau != 0.0) {
    throw PreconditionViolation("scallop branch requires c_tau = 0");
  }
  if (!scallop && drag.c_tau == 0.0) {
    throw DegenerateClosedForm("closed-form fields need c_tau > 0 (or the scallop branch)");
  }
}

template <class T>
model::VX<T> ClosedFormField::eval(const model::VX<T>& s) const {
  const T& phi = s(0);
  const T& theta = s(1);
  Eigen::Matrix<T, 8, 1> v =
      model::closed_form_field_t<T>(theta, phi, drag_, L_, channel_, scallop_);
  model::VX<T> out(8);
  out = v;
  return out;
}

model::VX<double> ClosedFormField::operator()(const model::VX<double>& s) const { return eval(s); }
model::VX<Dual1> ClosedFormField::operator()(const model::VX<Dual1>& s) const { return eval(s); }
model::VX<Dual2> ClosedFormField::operator()(const model::VX<Dual2>& s) const { return eval(s); }
model::VX<Dual3> ClosedFormField::operator()(const model::VX<Dual3>& s) const { return eval(s); }

BracketField::BracketField(FieldPtr f1, FieldPtr f2, BracketConvention convention)
    : ControlField(f1->shape_dim(), "[" + f1->name() + "," + f2->name() + "]",
                   1 + std::max(f1->height(), f2->height())),
      f1_(std::move(f1)),
      f2_(std::move(f2)),
      convention_(convention) {
  if (f1_->shape_dim() != f2_->shape_dim()) {
    throw PreconditionViolation("bracket of fields with different shape dimensions");
  }
  if (height() > 3) {
    throw NumericalJacobianFailure("bracket tree height " + std::to_string(height()) +
                                   " exceeds the exact-derivative budget (3)");
  }
}

template <class T>
model::VX<T> BracketField::eval(const model::VX<T>& s) const {
  using D = Dual<T>;
  const int m = shape_dim();
  const model::VX<T> a = (*f1_)(s);
  const model::VX<T> b = (*f2_)(s);

  // lift the shape with the other field's shape rates as the direction
  model::VX<D> s1(s.size()), s2(s.size());
  for (int i = 0; i < s.size(); ++i) {
    s1(i) = D(s(i), a(6 + i));
    s2(i) = D(s(i), b(6 + i));
  }
  const model::VX<D> db = (*f2_)(s1);  // derivative slot = D_{sigma1} f2
  const model::VX<D> da = (*f1_)(s2);  // derivative slot = D_{sigma2} f1

  model::V6<T> comm = model::V6<T>::Zero();
  if (convention_ == BracketConvention::Geometric) {
    comm = se3_commutator<T>(model::V6<T>(a.template head<6>()),
                             model::V6<T>(b.template head<6>()));
  }
  model::VX<T> out(6 + m);
  for (int i = 0; i < 6; ++i) out(i) = comm(i) + db(i).d - da(i).d;
  for (int i = 0; i < m; ++i) out(6 + i) = db(6 + i).d - da(6 + i).d;
  return out;
}

model::VX<double> BracketField::operator()(const model::VX<double>& s) const { return eval(s); }
model::VX<Dual1> BracketField::operator()(const model::VX<Dual1>& s) const { return eval(s); }
model::VX<Dual2> BracketField::operator()(const model::VX<Dual2>& s) const { return eval(s); }
model::VX<Dual3> BracketField::operator()(const model::VX<Dual3>&) const {
  throw NumericalJacobianFailure("bracket evaluation exceeded the dual nesting budget");
}

FieldPtr bracket(FieldPtr f1, FieldPtr f2, BracketConvention convention) {
  return std::make_shared<BracketField>(std::move(f1), std::move(f2), convention);
}

std::vector<FieldPtr> model_fields(const LinkChain& chain, const DragCoefficients& drag) {
  std::vector<FieldPtr> out;
  const int m = chain.shape_dim();
  out.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) out.push_back(std::make_shared<ModelField>(chain, drag, j));
  return out;
}

namespace {

ConfigField to_config_field(const model::VX<double>& v) {
  ConfigField f;
  f.twist = BodyTwist::from_stacked(v.head<6>());
  f.shape_rates = v.tail(v.size() - 6);
  return f;
}

}  // namespace

ConfigField mixed_bracket(const ControlField& f1, const ControlField& f2,
                          const ShapeState& shape, BracketConvention convention) {
  // transient non-owning wrappers; the bracket field only lives for this call
  struct Ref final : ControlField {
    const ControlField* f;
    explicit Ref(const ControlField* p) : ControlField(p->shape_dim(), p->name(), p->height()), f(p) {}
    model::VX<double> operator()(const model::VX<double>& s) const override { return (*f)(s); }
    model::VX<Dual1> operator()(const model::VX<Dual1>& s) const override { return (*f)(s); }
    model::VX<Dual2> operator()(const model::VX<Dual2>& s) const override { return (*f)(s); }
    model::VX<Dual3> operator()(const model::VX<Dual3>& s) const override { return (*f)(s); }
  };
  BracketField b(std::make_shared<Ref>(&f1), std::make_shared<Ref>(&f2), convention);
  try {
    return to_config_field(b(model::VX<double>(shape.coords())));
  } catch (const NotPositiveDefinite& e) {
    throw NumericalJacobianFailure(std::string("bracket evaluation failed: ") + e.what());
  }
}

ConfigField mixed_bracket(const FieldPtr& f1, const FieldPtr& f2, const ShapeState& shape,
                          BracketConvention convention) {
  return mixed_bracket(*f1, *f2, shape, convention);
}

ConfigField mixed_bracket_fd(const ControlField& f1, const ControlField& f2,
                             const ShapeState& shape, double h_scale,
                             BracketConvention convention) {
  const Eigen::VectorXd s0 = shape.coords();
  const int m = static_cast<int>(s0.size());

  const auto eval = [&](const ControlField& f, const Eigen::VectorXd& s) {
    try {
      return f(model::VX<double>(s));
    } catch (const Error& e) {
      throw NumericalJacobianFailure(std::string("stencil evaluation failed: ") + e.what());
    }
  };

  // 5-point central difference Jacobian, h per coordinate
  const auto jacobian = [&](const ControlField& f) {
    Eigen::MatrixXd J(6 + m, m);
    for (int j = 0; j < m; ++j) {
      const double h = h_scale * std::max(1.0, std::abs(s0(j)));
      Eigen::VectorXd sp = s0, sm = s0, sp2 = s0, sm2 = s0;
      sp(j) += h;
      sm(j) -= h;
      sp2(j) += 2 * h;
      sm2(j) -= 2 * h;
      J.col(j) = (eval(f, sm2) - 8.0 * eval(f, sm) + 8.0 * eval(f, sp) - eval(f, sp2)) / (12.0 * h);
    }
    return J;
  };

  const Eigen::VectorXd a = eval(f1, s0);
  const Eigen::VectorXd b = eval(f2, s0);
  const Eigen::MatrixXd J1 = jacobian(f1);
  const Eigen::MatrixXd J2 = jacobian(f2);

  const Eigen::VectorXd sigma1 = a.tail(m), sigma2 = b.tail(m);
  const Eigen::VectorXd d2 = J2 * sigma1;
  const Eigen::VectorXd d1 = J1 * sigma2;
  Eigen::VectorXd out(6 + m);
  Vec6 comm = Vec6::Zero();
  if (convention == BracketConvention::Geometric) {
    comm = commutator(Vec6(a.head<6>()), Vec6(b.head<6>()));
  }
  out.head<6>() = comm + d2.head<6>() - d1.head<6>();
  out.tail(m) = d2.tail(m) - d1.tail(m);
  return to_config_field(out);
}

// ---------------------------------------------------------------------------
// Rank / determinant
// ---------------------------------------------------------------------------

namespace {

int svd_rank(const Eigen::MatrixXd& twists, double tol, std::array<double, 6>* sv_out) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(twists);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv_out) {
    sv_out->fill(0.0);
    for (int i = 0; i < std::min<int>(6, static_cast<int>(sv.size())); ++i) (*sv_out)[i] = sv(i);
  }
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * sv(0)) ++rank;
  return rank;
}

Eigen::MatrixXd stack_twists(const std::vector<BracketNode>& nodes) {
  Eigen::MatrixXd m(6, static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = nodes[k].value.twist.stacked();
  return m;
}

BracketNode eval_node(const FieldPtr& f, const Eigen::VectorXd& s) {
  BracketNode n;
  n.expression = f->name();
  n.height = f->height();
  n.value = to_config_field((*f)(model::VX<double>(s)));
  return n;
}

}  // namespace

std::vector<BracketNode> bracket_basis(const LinkChain& chain, const ShapeState& shape,
                                       const DragCoefficients& drag, int depth) {
  if (depth < 1) throw PreconditionViolation("depth must be >= 1");
  const Eigen::VectorXd s = shape.coords();
  const std::vector<FieldPtr> base = model_fields(chain, drag);

  std::vector<FieldPtr> words(base);
  std::vector<BracketNode> nodes;
  for (const auto& f : base) nodes.push_back(eval_node(f, s));
  if (depth == 1) return nodes;

  const auto rank_now = [&]() { return svd_rank(stack_twists(nodes), 1e-8, nullptr); };

  // the certificate sequence of the controllability theorem, over the first
  // two channels: [V1,V2], [V1,.], [V2,.], [V1,[V2,[V1,V2]]]
  if (base.size() >= 2) {
    for (const auto& f : certificate_words(base[0], base[1], BracketConvention::Geometric)) {
      words.push_back(f);
      nodes.push_back(eval_node(f, s));
    }
  }
  if (rank_now() >= 6) return nodes;

  // fallback closure: bracket base fields against everything generated so
  // far; tree height capped by the exact-derivative budget
  constexpr std::size_t kMaxWords = 64;
  for (std::size_t i = 0; i < words.size() && words.size() < kMaxWords; ++i) {
    if (words[i]->height() >= 3) continue;
    for (const auto& b : base) {
      if (words.size() >= kMaxWords) break;
      if (b.get() == words[i].get()) continue;
      const FieldPtr w = bracket(b, words[i]);
      words.push_back(w);
      nodes.push_back(eval_node(w, s));
      if (rank_now() >= 6) return nodes;
    }
  }
  return nodes;
}

RankReport lie_rank(const LinkChain& chain, const ShapeState& shape,
                    const DragCoefficients& drag, int depth, double tol) {
  const std::vector<BracketNode> nodes = bracket_basis(chain, shape, drag, depth);
  RankReport report;
  report.tolerance = tol;
  report.rank = svd_rank(stack_twists(nodes), tol, &report.singular_values);
  for (const auto& n : nodes) report.words.push_back(n.expression);
  return report;
}

std::array<FieldPtr, 4> certificate_words(const FieldPtr& f1, const FieldPtr& f2,
                                          BracketConvention convention) {
  const FieldPtr v3 = bracket(f1, f2, convention);
  const FieldPtr v4 = bracket(f1, v3, convention);
  const FieldPtr v5 = bracket(f2, v3, convention);
  const FieldPtr v6 = bracket(f1, v5, convention);
  return {v3, v4, v5, v6};
}

namespace {

// certificate twists v1..v6 of the given pair of base fields at a shape
Eigen::Matrix<double, 6, 6> certificate_columns(const FieldPtr& f1, const FieldPtr& f2,
                                                const Eigen::VectorXd& s,
                                                BracketConvention convention) {
  const auto words = certificate_words(f1, f2, convention);
  Eigen::Matrix<double, 6, 6> m;
  const FieldPtr fields[6] = {f1, f2, words[0], words[1], words[2], words[3]};
  for (int k = 0; k < 6; ++k) {
    m.col(k) = (*fields[k])(model::VX<double>(s)).head<6>();
  }
  return m;
}

}  // namespace

Eigen::Matrix<double, 6, 6> certificate_matrix(const DragCoefficients& drag, double L,
                                               BracketConvention convention) {
  const LinkChain chain = LinkChain::two_link(L);
  const auto fields = model_fields(chain, drag);
  const ShapeState shape(0.0, M_PI / 2.0);
  return certificate_columns(fields[0], fields[1], shape.coords(), convention);
}

double delta_determinant_chain(const LinkChain& chain, const DragCoefficients& drag) {
  ShapeState shape = ShapeState::zeros(chain.link_count());
  shape.angles[0] = LinkAngles{0.0, M_PI / 2.0};
  const auto fields = model_fields(chain, drag);
  return certificate_columns(fields[0], fields[1], shape.coords(),
                             BracketConvention::Coordinate)
      .determinant();
}

double delta_determinant(const DragCoefficients& drag, double L) {
  return delta_determinant_chain(LinkChain::two_link(L), drag);
}

double delta_p(const DragCoefficients& drag, double L) {
  const double cpa = drag.c_par, cpe = drag.c_perp, ct = drag.c_tau;
  const double L2 = L * L, L4 = L2 * L2, L5 = L4 * L, L6 = L4 * L2;
  const double a = 27.0 * ct * ct * (11.0 * cpe * cpe + 32.0 * cpe * cpa - 4.0 * cpa * cpa) +
                   6.0 * ct * cpe * L2 * (cpe * cpe + 25.0 * cpe * cpa + 4.0 * cpa * cpa) +
                   4.0 * cpe * cpe * cpe * cpa * L4;
  const double b = 8.0 * cpe * cpe * cpe * cpe * cpa * L6 -
                   81.0 * ct * ct * ct *
                       (61.0 * cpe * cpe + 160.0 * cpe * cpa + 164.0 * cpa * cpa) +
                   12.0 * ct * cpe * cpe * L4 * (cpe * cpe + 30.0 * cpe * cpa + 4.0 * cpa * cpa) +
                   18.0 * ct * ct * cpe * L2 *
                       (18.0 * cpe * cpe + 85.0 * cpe * cpa - 72.0 * cpa * cpa);
  return cpe * cpe * L5 * a * b;
}

double delta_q(const DragCoefficients& drag, double L) {
  const double s = drag.c_perp + drag.c_par;
  const double t = 15.0 * drag.c_tau + 2.0 * drag.c_perp * L * L;
  const double s5 = s * s * s * s * s;
  const double t6 = t * t * t * t * t * t;
  return 32.0 * s5 * t6;
}

double delta_closed_form(const DragCoefficients& drag, double L) {
  return delta_p(drag, L) / delta_q(drag, L);
}

// ---------------------------------------------------------------------------
// Scallop / reduction / scan
// ---------------------------------------------------------------------------

ScallopCheckReport scallop_check(const DragCoefficients& drag, double L,
                                 std::vector<ShapeState> shapes) {
  if (drag.c_tau != 0.0) {
    throw PreconditionViolation("scallop_check requires c_tau = 0");
  }
  if (shapes.empty()) {
    shapes = {ShapeState(0.3, 1.1),  ShapeState(-1.2, 2.0), ShapeState(2.0, -0.7),
              ShapeState(0.0, M_PI / 2.0), ShapeState(1.0, 2.5)};
  }
  const LinkChain chain = LinkChain::two_link(L);
  const auto fields = model_fields(chain, drag);
  Vec6 minus_e6 = Vec6::Zero();
  minus_e6(5) = -1.0;

  ScallopCheckReport report;
  report.shapes = shapes;
  report.v2_is_minus_e6 = true;
  for (const auto& shape : shapes) {
    const Vec6 v2 = (*fields[1])(model::VX<double>(shape.coords())).head<6>();
    report.max_v2_defect = std::max(report.max_v2_defect, (v2 - minus_e6).norm());
    if ((v2 - minus_e6).norm() > 1e-9) report.v2_is_minus_e6 = false;
    report.max_rank = std::max(report.max_rank, lie_rank(chain, shape, drag, 4).rank);
  }
  return report;
}

ReductionReport nlink_reduction_check(int n_links, double L, const DragCoefficients& drag,
                                      double rel_tol) {
  if (n_links < 3) throw PreconditionViolation("nlink_reduction_check needs N >= 3");
  std::vector<double> lengths(static_cast<std::size_t>(n_links), 0.0);
  lengths[0] = lengths[1] = L;
  const LinkChain chain(lengths);
  const LinkChain two = LinkChain::two_link(L);

  ReductionReport report;
  report.delta_nlink = delta_determinant_chain(chain, drag);
  report.delta_2link = delta_closed_form(drag, L);
  report.delta_rel_error = std::abs(report.delta_nlink - report.delta_2link) /
                           std::max(std::abs(report.delta_2link), 1e-300);

  // link-2 fields against the 2-link fields over a shape sample
  const std::vector<std::pair<double, double>> probes = {
      {0.0, M_PI / 2}, {0.7, 1.2}, {-1.0, 2.2}, {2.5, -1.3}, {0.2, 0.4}};
  const auto nfields = model_fields(chain, drag);
  const auto tfields = model_fields(two, drag);
  for (const auto& [theta, phi] : probes) {
    ShapeState big = ShapeState::zeros(n_links);
    big.angles[0] = LinkAngles{theta, phi};
    const ShapeState small(theta, phi);
    for (int c = 0; c < 2; ++c) {
      const Vec6 wn = (*nfields[c])(model::VX<double>(big.coords())).head<6>();
      const Vec6 w2 = (*tfields[c])(model::VX<double>(small.coords())).head<6>();
      const double scale = std::max(w2.cwiseAbs().maxCoeff(), 1e-300);
      report.max_field_rel_error =
          std::max(report.max_field_rel_error, (wn - w2).cwiseAbs().maxCoeff() / scale);
    }
  }
  report.passed = report.delta_rel_error <= rel_tol && report.max_field_rel_error <= 1e-10;
  return report;
}

void ScanRanges::validate() const {
  const auto bad = [](const ScanRange& r) { return !(r.lo > 0.0) || !(r.hi >= r.lo); };
  if (bad(c_par) || bad(c_perp) || bad(c_tau) || bad(length)) {
    throw PreconditionViolation("scan ranges must be positive with lo <= hi");
  }
  if (!(c_par.hi < c_perp.lo)) {
    throw PreconditionViolation(
        "scan ranges must keep c_par below c_perp for every draw (c_par.hi < c_perp.lo)");
  }
}

double ScanTable::rank6_fraction() const {
  if (rows.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& r : rows)
    if (r.rank == 6) ++n;
  return static_cast<double>(n) / static_cast<double>(rows.size());
}

ScanTable parameter_scan(const ScanRanges& ranges, int samples, std::uint64_t seed) {
  ranges.validate();
  if (samples < 1) throw PreconditionViolation("samples must be >= 1");

  ScanTable table;
  table.rows.resize(static_cast<std::size_t>(samples));
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t k) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(k + 1));
    const auto draw = [&rng](const ScanRange& r) {
      return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
    };
    ScanRow row{};
    row.c_par = draw(ranges.c_par);
    row.c_perp = draw(ranges.c_perp);
    row.c_tau = draw(ranges.c_tau);
    row.length = draw(ranges.length);
    const DragCoefficients drag{row.c_par, row.c_perp, row.c_tau};
    row.delta = delta_determinant(drag, row.length);
    row.rank =
        lie_rank(LinkChain::two_link(row.length), ShapeState(0.0, M_PI / 2.0), drag, 3).rank;
    table.rows[k] = row;
  });
  return table;
}

}  // namespace stokeswim
