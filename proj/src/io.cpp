#include "stokeswim/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

namespace stokeswim {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  const int links = traj.chain.link_count();
  const int m = traj.chain.shape_dim();
  os << "t,x1,x2,x3";
  for (int r = 1; r <= 3; ++r)
    for (int c = 1; c <= 3; ++c) os << ",r" << r << c;
  for (int i = 2; i <= links; ++i) os << ",theta_" << i << ",phi_" << i;
  for (int j = 1; j <= m; ++j) os << ",u_" << j;
  os << ",power_density\n";

  for (const auto& smp : traj.samples) {
    os << format_double(smp.t);
    for (int i = 0; i < 3; ++i) os << ',' << format_double(smp.pose.translation(i));
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) os << ',' << format_double(smp.pose.R()(r, c));
    for (const auto& a : smp.shape.angles) {
      os << ',' << format_double(a.theta) << ',' << format_double(a.phi);
    }
    for (int j = 0; j < m; ++j) os << ',' << format_double(smp.control(j));
    os << ','
       << format_double(
              power_density(traj.chain, smp.shape, smp.control, smp.twist, traj.drag))
       << '\n';
  }
}

Json drag_to_json(const DragCoefficients& drag) {
  return Json{{"c_par", drag.c_par}, {"c_perp", drag.c_perp}, {"c_tau", drag.c_tau}};
}

DragCoefficients drag_from_json(const Json& j) {
  DragCoefficients d;
  d.c_par = j.at("c_par").get<double>();
  d.c_perp = j.at("c_perp").get<double>();
  d.c_tau = j.at("c_tau").get<double>();
  return d;
}

Json signal_to_json(const ControlSignal& signal) {
  Json phases = Json::array();
  for (const auto& p : signal.phases) {
    Json u = Json::array();
    for (int i = 0; i < p.u.size(); ++i) u.push_back(p.u(i));
    phases.push_back(Json{{"u", u}, {"duration", p.duration}});
  }
  return Json{{"phases", phases}, {"lo", signal.lo}, {"hi", signal.hi}};
}

ControlSignal signal_from_json(const Json& j) {
  ControlSignal s;
  s.lo = j.value("lo", -1.0);
  s.hi = j.value("hi", 1.0);
  for (const auto& p : j.at("phases")) {
    const auto& u = p.at("u");
    Eigen::VectorXd v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) v(static_cast<Eigen::Index>(i)) = u[i].get<double>();
    s.phases.push_back({v, p.at("duration").get<double>()});
  }
  return s;
}

Json trajectory_meta_json(const Trajectory& traj, const ControlSignal& signal,
                          std::uint64_t seed) {
  Json chain = Json::array();
  for (double l : traj.chain.lengths) chain.push_back(l);
  return Json{{"chain", Json{{"lengths", chain}}},
              {"drag", drag_to_json(traj.drag)},
              {"signal", signal_to_json(signal)},
              {"dt", traj.dt},
              {"seed", seed}};
}

void write_scan_csv(const ScanTable& table, std::ostream& os) {
  os << "c_par,c_perp,c_tau,L,delta,rank\n";
  for (const auto& r : table.rows) {
    os << format_double(r.c_par) << ',' << format_double(r.c_perp) << ','
       << format_double(r.c_tau) << ',' << format_double(r.length) << ','
       << format_double(r.delta) << ',' << r.rank << '\n';
  }
}

Json plan_to_json(const ManeuverPlan& plan) {
  Json phases = Json::array();
  for (const auto& p : plan.phases) {
    Json u = Json::array();
    for (int i = 0; i < p.u.size(); ++i) u.push_back(p.u(i));
    phases.push_back(Json{{"u", u}, {"dt", p.duration}});
  }
  return Json{{"phases", phases},
              {"kind", plan.kind == CostKind::MinTime ? "min_time" : "power"},
              {"bounds", Json::array({plan.lo, plan.hi})},
              {"tolerances", Json{{"pos", plan.pos_tol}, {"ang", plan.ang_tol}}},
              {"converged", plan.converged}};
}

ManeuverPlan plan_from_json(const Json& j) {
  ManeuverPlan plan;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "min_time") {
    plan.kind = CostKind::MinTime;
  } else if (kind == "power") {
    plan.kind = CostKind::Power;
  } else {
    throw ConfigInvalid("plan.kind: expected \"min_time\" or \"power\"");
  }
  plan.lo = j.at("bounds").at(0).get<double>();
  plan.hi = j.at("bounds").at(1).get<double>();
  plan.pos_tol = j.at("tolerances").at("pos").get<double>();
  plan.ang_tol = j.at("tolerances").at("ang").get<double>();
  plan.converged = j.value("converged", false);
  for (const auto& p : j.at("phases")) {
    const auto& u = p.at("u");
    Eigen::VectorXd v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) v(static_cast<Eigen::Index>(i)) = u[i].get<double>();
    plan.phases.push_back({v, p.at("dt").get<double>()});
  }
  return plan;
}

Json rank_report_json(const RankReport& report) {
  Json sv = Json::array();
  for (double s : report.singular_values) sv.push_back(s);
  Json words = Json::array();
  for (const auto& w : report.words) words.push_back(w);
  return Json{{"rank", report.rank},
              {"singular_values", sv},
              {"tolerance", report.tolerance},
              {"words", words}};
}

void write_json_file(const Json& j, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << j.dump(2) << '\n';
}

void write_text_file(const std::string& text, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << text;
}

}  // namespace stokeswim
