#include "stokeswim/cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace stokeswim {

namespace {

const Json& require(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigInvalid(where + "." + key + ": missing");
  return j.at(key);
}

double require_number(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = require(j, key, where);
  if (!v.is_number()) throw ConfigInvalid(where + "." + key + ": expected a number");
  return v.get<double>();
}

ShapeState shape_from_json(const Json& j, int link_count, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != link_count - 1) {
    throw ConfigInvalid(where + ": expected " + std::to_string(link_count - 1) +
                        " [theta, phi] pairs");
  }
  ShapeState shape;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2) {
      throw ConfigInvalid(where + ": each entry must be [theta, phi]");
    }
    shape.angles.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
  }
  return shape;
}

std::string artifact_path(const ExperimentConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void note(const ExperimentConfig& cfg, std::ostream& log, const std::string& msg) {
  if (!cfg.quiet) log << msg << '\n';
}

// requires the 2-link equal-length swimmer (closed forms, delta)
double equal_two_link_length(const ExperimentConfig& cfg, const std::string& where) {
  if (cfg.chain.link_count() != 2 ||
      cfg.chain.lengths[0] != cfg.chain.lengths[1]) {
    throw ConfigInvalid(where + ": needs a 2-link swimmer with equal lengths");
  }
  return cfg.chain.lengths[0];
}

int run_simulate(const ExperimentConfig& cfg, std::ostream& log) {
  const std::string where = "experiment";
  const ShapeState shape0 =
      shape_from_json(require(cfg.experiment, "initial_shape", where), cfg.chain.link_count(),
                      where + ".initial_shape");
  ControlSignal signal;
  try {
    signal = signal_from_json(require(cfg.experiment, "signal", where));
  } catch (const Json::exception& e) {
    throw ConfigInvalid(where + ".signal: " + e.what());
  }
  try {
    signal.validate(cfg.chain.shape_dim());
  } catch (const Error& e) {
    throw ConfigInvalid(where + ".signal: " + e.what());
  }

  const Trajectory traj =
      simulate(cfg.chain, cfg.drag, Pose::identity(), shape0, signal, cfg.dt);

  std::ostringstream csv;
  write_trajectory_csv(traj, csv);
  write_text_file(csv.str(), artifact_path(cfg, "trajectory.csv"));
  write_json_file(trajectory_meta_json(traj, signal, cfg.seed),
                  artifact_path(cfg, "trajectory_meta.json"));

  std::ostringstream xyz;
  xyz << "t,x,y,z\n";
  for (const auto& smp : traj.samples) {
    xyz << format_double(smp.t) << ',' << format_double(smp.pose.translation(0)) << ','
        << format_double(smp.pose.translation(1)) << ','
        << format_double(smp.pose.translation(2)) << '\n';
  }
  write_text_file(xyz.str(), artifact_path(cfg, "plot_xyz.csv"));

  const Displacement d = net_displacement(traj);
  write_json_file(Json{{"net_displacement", {d.delta_x(0), d.delta_x(1), d.delta_x(2)}},
                       {"net_displacement_norm", d.delta_x.norm()},
                       {"rotation_angle", d.rotation_angle},
                       {"power_expended", power_expended(traj)},
                       {"samples", traj.samples.size()}},
                  artifact_path(cfg, "report.json"));
  note(cfg, log, "simulate: " + std::to_string(traj.samples.size()) + " samples");
  return 0;
}

int run_fields(const ExperimentConfig& cfg, std::ostream& log) {
  const ShapeState shape =
      shape_from_json(require(cfg.experiment, "shape", "experiment"), cfg.chain.link_count(),
                      "experiment.shape");
  const auto fields = control_fields(cfg.chain, shape, cfg.drag);
  Json out;
  Json jfields = Json::array();
  for (const auto& f : fields) {
    Json v = Json::array();
    const Eigen::VectorXd stacked = f.stacked();
    for (int i = 0; i < stacked.size(); ++i) v.push_back(stacked(i));
    jfields.push_back(v);
  }
  out["fields"] = jfields;

  // closed forms and the cross-check are only defined for the equal 2-link
  if (cfg.chain.link_count() == 2 && cfg.chain.lengths[0] == cfg.chain.lengths[1] &&
      cfg.drag.c_tau > 0.0) {
    const auto cf = closed_form_fields(shape.angles[0].theta, shape.angles[0].phi, cfg.drag,
                                       cfg.chain.lengths[0]);
    Json j1 = Json::array(), j2 = Json::array();
    double max_rel = 0.0;
    for (int i = 0; i < 8; ++i) {
      j1.push_back(cf.v1(i));
      j2.push_back(cf.v2(i));
      const double scale = std::max({std::abs(cf.v1(i)), std::abs(cf.v2(i)), 1e-12});
      max_rel = std::max(max_rel, std::abs(cf.v1(i) - fields[0].stacked()(i)) / scale);
      max_rel = std::max(max_rel, std::abs(cf.v2(i) - fields[1].stacked()(i)) / scale);
    }
    out["closed_form"] = Json{{"v1", j1}, {"v2", j2}, {"max_rel_error", max_rel}};
  }
  write_json_file(out, artifact_path(cfg, "fields.json"));
  note(cfg, log, "fields: " + std::to_string(fields.size()) + " control fields");
  return 0;
}

int run_rank(const ExperimentConfig& cfg, std::ostream& log) {
  const ShapeState shape =
      shape_from_json(require(cfg.experiment, "shape", "experiment"), cfg.chain.link_count(),
                      "experiment.shape");
  const int depth = cfg.experiment.value("depth", 3);
  const double tol = cfg.experiment.value("tol", 1e-8);
  if (depth < 1) throw ConfigInvalid("experiment.depth: must be >= 1");
  const RankReport report = lie_rank(cfg.chain, shape, cfg.drag, depth, tol);
  write_json_file(rank_report_json(report), artifact_path(cfg, "rank.json"));
  note(cfg, log, "rank: " + std::to_string(report.rank));
  return 0;
}

int run_delta(const ExperimentConfig& cfg, std::ostream& log) {
  const double L = equal_two_link_length(cfg, "delta");
  if (!(cfg.drag.c_tau > 0.0)) throw ConfigInvalid("swimmer.drag.c_tau: delta needs c_tau > 0");
  const double num = delta_determinant(cfg.drag, L);
  const double cf = delta_closed_form(cfg.drag, L);
  const double rel = std::abs(num - cf) / std::max(std::abs(cf), 1e-300);
  write_json_file(Json{{"delta_numeric", num}, {"delta_closed_form", cf}, {"rel_error", rel}},
                  artifact_path(cfg, "delta.json"));
  note(cfg, log, "delta: " + format_double(num) + " (rel err " + format_double(rel) + ")");
  return 0;
}

int run_scan(const ExperimentConfig& cfg, std::ostream& log) {
  const int samples = cfg.experiment.value("samples", 1000);
  if (samples < 1) throw ConfigInvalid("experiment.samples: must be >= 1");
  ScanRanges ranges;
  if (cfg.experiment.contains("ranges")) {
    const Json& r = cfg.experiment.at("ranges");
    const auto read = [&](const char* key, ScanRange& out) {
      if (r.contains(key)) {
        out.lo = r.at(key).at(0).get<double>();
        out.hi = r.at(key).at(1).get<double>();
      }
    };
    read("c_par", ranges.c_par);
    read("c_perp", ranges.c_perp);
    read("c_tau", ranges.c_tau);
    read("L", ranges.length);
  }
  try {
    ranges.validate();
  } catch (const Error& e) {
    throw ConfigInvalid(std::string("experiment.ranges: ") + e.what());
  }
  const ScanTable table = parameter_scan(ranges, samples, cfg.seed);
  std::ostringstream csv;
  write_scan_csv(table, csv);
  write_text_file(csv.str(), artifact_path(cfg, "scan.csv"));
  write_json_file(Json{{"samples", samples},
                       {"seed", cfg.seed},
                       {"rank6_fraction", table.rank6_fraction()}},
                  artifact_path(cfg, "scan_summary.json"));
  note(cfg, log, "scan: rank-6 fraction " + format_double(table.rank6_fraction()));
  return 0;
}

int run_scallop(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.drag.c_tau != 0.0) {
    throw ConfigInvalid("swimmer.drag.c_tau: the scallop experiment needs c_tau = 0");
  }
  const double L = equal_two_link_length(cfg, "scallop");
  const Json& jloop = require(cfg.experiment, "phi_loop", "experiment");
  if (!jloop.is_array() || jloop.size() < 2) {
    throw ConfigInvalid("experiment.phi_loop: expected at least two waypoints");
  }
  std::vector<double> loop;
  for (const auto& v : jloop) loop.push_back(v.get<double>());
  const double theta0 = cfg.experiment.value("theta0", 0.0);

  ScallopReport report;
  try {
    report = scallop_experiment(cfg.drag, L, loop, theta0, cfg.dt);
  } catch (const PreconditionViolation& e) {
    throw ConfigInvalid(std::string("experiment.phi_loop: ") + e.what());
  }

  std::ostringstream csv;
  csv << "t,displacement_norm,plane_deviation\n";
  const Vec3 x0 = report.trajectory.front().pose.translation;
  for (const auto& smp : report.trajectory.samples) {
    csv << format_double(smp.t) << ','
        << format_double((smp.pose.translation - x0).norm()) << ','
        << format_double(std::abs(report.plane_normal.dot(smp.pose.translation - x0))) << '\n';
  }
  write_text_file(csv.str(), artifact_path(cfg, "scallop.csv"));
  write_json_file(Json{{"net_displacement_norm", report.net_displacement_norm},
                       {"rotation_angle", report.rotation_angle},
                       {"max_plane_deviation", report.max_plane_deviation}},
                  artifact_path(cfg, "scallop.json"));
  note(cfg, log, "scallop: |dx| = " + format_double(report.net_displacement_norm));
  return 0;
}

int run_commutator(const ExperimentConfig& cfg, std::ostream& log) {
  const ShapeState shape =
      shape_from_json(require(cfg.experiment, "shape", "experiment"), cfg.chain.link_count(),
                      "experiment.shape");
  std::vector<double> eps_list = {0.2, 0.1, 0.05, 0.025};
  if (cfg.experiment.contains("eps_list")) {
    eps_list.clear();
    for (const auto& v : cfg.experiment.at("eps_list")) eps_list.push_back(v.get<double>());
    if (eps_list.size() < 2) throw ConfigInvalid("experiment.eps_list: need >= 2 values");
  }

  std::ostringstream csv;
  csv << "eps,pose_log_norm,cosine\n";
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double last_cosine = 0.0;
  for (double eps : eps_list) {
    const CommutatorResult r = commutator_maneuver(cfg.chain, cfg.drag, shape, eps);
    csv << format_double(eps) << ',' << format_double(r.pose_log.norm()) << ','
        << format_double(r.cosine) << '\n';
    const double lx = std::log(eps), ly = std::log(r.pose_log.norm());
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    last_cosine = r.cosine;
  }
  const double n = static_cast<double>(eps_list.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  write_text_file(csv.str(), artifact_path(cfg, "commutator.csv"));
  write_json_file(Json{{"slope", slope}, {"cosine_at_smallest_eps", last_cosine}},
                  artifact_path(cfg, "commutator.json"));
  note(cfg, log, "commutator: slope " + format_double(slope));
  return 0;
}

int run_plan(const ExperimentConfig& cfg, std::ostream& log) {
  const std::string where = "experiment";
  const Json& jgoal = require(cfg.experiment, "goal", where);
  Pose goal;
  if (jgoal.contains("translation")) {
    const auto& t = jgoal.at("translation");
    if (!t.is_array() || t.size() != 3) {
      throw ConfigInvalid("experiment.goal.translation: expected 3 numbers");
    }
    for (int i = 0; i < 3; ++i) goal.translation(i) = t.at(i).get<double>();
  }
  if (jgoal.contains("rotation_axis_angle")) {
    const auto& aa = jgoal.at("rotation_axis_angle");
    if (!aa.is_array() || aa.size() != 3) {
      throw ConfigInvalid("experiment.goal.rotation_axis_angle: expected 3 numbers");
    }
    Vec3 w;
    for (int i = 0; i < 3; ++i) w(i) = aa.at(i).get<double>();
    goal.rotation.r = rotation_exp(w);
  }

  const std::string kind_str = cfg.experiment.value("kind", "min_time");
  CostKind kind;
  if (kind_str == "min_time") {
    kind = CostKind::MinTime;
  } else if (kind_str == "power") {
    kind = CostKind::Power;
  } else {
    throw ConfigInvalid("experiment.kind: expected \"min_time\" or \"power\"");
  }

  PlanOptions opt;
  opt.seed = cfg.seed;
  opt.dt = cfg.experiment.value("plan_dt", opt.dt);
  opt.lo = cfg.experiment.value("lo", opt.lo);
  opt.hi = cfg.experiment.value("hi", opt.hi);
  opt.phase_count = cfg.experiment.value("phase_count", opt.phase_count);
  opt.restarts = cfg.experiment.value("restarts", opt.restarts);
  opt.pos_tol = cfg.experiment.value("pos_tol", opt.pos_tol);
  opt.ang_tol = cfg.experiment.value("ang_tol", opt.ang_tol);
  opt.power_horizon = cfg.experiment.value("power_horizon", opt.power_horizon);

  ShapeState shape0 = ShapeState::zeros(cfg.chain.link_count());
  if (cfg.experiment.contains("initial_shape")) {
    shape0 = shape_from_json(cfg.experiment.at("initial_shape"), cfg.chain.link_count(),
                             "experiment.initial_shape");
  }

  ManeuverPlan plan;
  try {
    plan = plan_to_pose(cfg.chain, cfg.drag, Pose::identity(), shape0, goal, kind, opt);
  } catch (const InfeasibleOptions& e) {
    throw ConfigInvalid(std::string("experiment: ") + e.what());
  } catch (const PreconditionViolation& e) {
    throw ConfigInvalid(std::string("experiment.goal: ") + e.what());
  }

  const CostReport report = evaluate_cost(plan, kind, cfg.chain, cfg.drag, Pose::identity(),
                                          shape0, goal, opt.dt / 2.0);
  write_json_file(plan_to_json(plan), artifact_path(cfg, "plan.json"));
  write_json_file(Json{{"cost", report.cost},
                       {"position_error", report.position_error},
                       {"rotation_error", report.rotation_error},
                       {"converged", plan.converged}},
                  artifact_path(cfg, "plan_report.json"));
  note(cfg, log,
       "plan: cost " + format_double(report.cost) + (plan.converged ? "" : " (NOT converged)"));
  return plan.converged ? 0 : 3;
}

}  // namespace

ExperimentConfig parse_config(const Json& j, const CliOverrides& overrides) {
  ExperimentConfig cfg;

  const Json& swimmer = require(j, "swimmer", "config");
  const Json& lengths = require(swimmer, "lengths", "swimmer");
  if (!lengths.is_array() || lengths.size() < 2) {
    throw ConfigInvalid("swimmer.lengths: expected an array of at least 2 lengths");
  }
  std::vector<double> ls;
  for (const auto& v : lengths) {
    if (!v.is_number()) throw ConfigInvalid("swimmer.lengths: entries must be numbers");
    ls.push_back(v.get<double>());
  }
  try {
    cfg.chain = LinkChain(ls);
  } catch (const Error& e) {
    throw ConfigInvalid(std::string("swimmer.lengths: ") + e.what());
  }

  const Json& jdrag = require(swimmer, "drag", "swimmer");
  cfg.drag.c_par = require_number(jdrag, "c_par", "swimmer.drag");
  cfg.drag.c_perp = require_number(jdrag, "c_perp", "swimmer.drag");
  cfg.drag.c_tau = require_number(jdrag, "c_tau", "swimmer.drag");
  try {
    cfg.drag.validate();
  } catch (const Error& e) {
    throw ConfigInvalid(std::string("swimmer.drag: ") + e.what());
  }

  const Json& experiment = require(j, "experiment", "config");
  const Json& kind = require(experiment, "kind", "experiment");
  if (!kind.is_string()) throw ConfigInvalid("experiment.kind: expected a string");
  cfg.kind = kind.get<std::string>();
  static const char* kinds[] = {"simulate", "fields", "rank",       "delta",
                                "scan",     "scallop", "commutator", "plan"};
  if (std::find_if(std::begin(kinds), std::end(kinds),
                   [&](const char* k) { return cfg.kind == k; }) == std::end(kinds)) {
    throw ConfigInvalid("experiment.kind: unknown kind \"" + cfg.kind + "\"");
  }
  cfg.experiment = experiment;

  if (j.contains("output")) {
    cfg.out_dir = j.at("output").value("dir", cfg.out_dir);
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.dt = j.value("dt", cfg.dt);
  if (!(cfg.dt > 0.0)) throw ConfigInvalid("dt: must be > 0");

  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.dt) {
    cfg.dt = *overrides.dt;
    if (!(cfg.dt > 0.0)) throw ConfigInvalid("--dt: must be > 0");
  }
  cfg.quiet = overrides.quiet;
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const CliOverrides& overrides) {
  std::ifstream is(path);
  if (!is) throw ConfigInvalid("config: cannot read " + path);
  Json j;
  try {
    j = Json::parse(is);
  } catch (const Json::exception& e) {
    throw ConfigInvalid(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(j, overrides);
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw ConfigInvalid("output.dir: cannot create " + cfg.out_dir);

  if (cfg.kind == "simulate") return run_simulate(cfg, log);
  if (cfg.kind == "fields") return run_fields(cfg, log);
  if (cfg.kind == "rank") return run_rank(cfg, log);
  if (cfg.kind == "delta") return run_delta(cfg, log);
  if (cfg.kind == "scan") return run_scan(cfg, log);
  if (cfg.kind == "scallop") return run_scallop(cfg, log);
  if (cfg.kind == "commutator") return run_commutator(cfg, log);
  if (cfg.kind == "plan") return run_plan(cfg, log);
  throw ConfigInvalid("experiment.kind: unknown kind \"" + cfg.kind + "\"");
}

}  // namespace stokeswim
