#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stokeswim/cli.hpp"

using namespace stokeswim;
namespace fs = std::filesystem;

namespace {

Json base_config(const std::string& kind) {
  return Json{{"swimmer",
               {{"lengths", {1.0, 1.0}}, {"drag", {{"c_par", 1.0}, {"c_perp", 2.0}, {"c_tau", 1.0}}}}},
              {"experiment", {{"kind", kind}}},
              {"seed", 3},
              {"dt", 1e-3}};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("stokeswim_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  REQUIRE(is);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_quiet(const Json& config) {
  std::ostringstream sink;
  CliOverrides overrides;
  overrides.quiet = true;
  return run_experiment(parse_config(config, overrides), sink);
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  for (double x : {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, M_PI, 2.0 / 7.0}) {
    CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
  }
}

TEST_CASE("config validation reports the failing field") {
  Json cfg = base_config("delta");

  SUBCASE("missing swimmer") {
    cfg.erase("swimmer");
    CHECK_THROWS_WITH_AS(parse_config(cfg), "config.swimmer: missing", ConfigInvalid);
  }
  SUBCASE("drag ordering enforced") {
    cfg["swimmer"]["drag"]["c_par"] = 3.0;
    CHECK_THROWS_AS(parse_config(cfg), ConfigInvalid);
  }
  SUBCASE("unknown kind") {
    cfg["experiment"]["kind"] = "warp";
    CHECK_THROWS_AS(parse_config(cfg), ConfigInvalid);
  }
  SUBCASE("bad lengths") {
    cfg["swimmer"]["lengths"] = {1.0};
    CHECK_THROWS_AS(parse_config(cfg), ConfigInvalid);
  }
  SUBCASE("bad dt") {
    cfg["dt"] = -1.0;
    CHECK_THROWS_AS(parse_config(cfg), ConfigInvalid);
  }
}

TEST_CASE("delta experiment writes the cross-check report") {
  const fs::path dir = fresh_dir("delta");
  Json cfg = base_config("delta");
  cfg["output"] = {{"dir", dir.string()}};
  CHECK(run_quiet(cfg) == 0);

  const Json report = Json::parse(slurp(dir / "delta.json"));
  CHECK(report.at("rel_error").get<double>() <= 1e-6);
  CHECK(report.at("delta_numeric").get<double>() != 0.0);
}

TEST_CASE("scan experiment is byte-identical under a fixed seed") {
  const fs::path dir1 = fresh_dir("scan1");
  const fs::path dir2 = fresh_dir("scan2");
  Json cfg = base_config("scan");
  cfg["experiment"]["samples"] = 40;

  cfg["output"] = {{"dir", dir1.string()}};
  CHECK(run_quiet(cfg) == 0);
  cfg["output"] = {{"dir", dir2.string()}};
  CHECK(run_quiet(cfg) == 0);

  const std::string csv1 = slurp(dir1 / "scan.csv");
  CHECK(csv1 == slurp(dir2 / "scan.csv"));
  CHECK(csv1.substr(0, csv1.find('\n')) == "c_par,c_perp,c_tau,L,delta,rank");

  const Json summary = Json::parse(slurp(dir1 / "scan_summary.json"));
  CHECK(summary.at("rank6_fraction").get<double>() == 1.0);
}

TEST_CASE("scallop experiment reports displacement and plane deviation") {
  const fs::path dir = fresh_dir("scallop");
  Json cfg = base_config("scallop");
  cfg["swimmer"]["drag"]["c_tau"] = 0.0;
  cfg["experiment"]["phi_loop"] = {0.0, M_PI / 4, 0.0};
  cfg["experiment"]["theta0"] = 0.2;
  cfg["dt"] = 1e-3;
  cfg["output"] = {{"dir", dir.string()}};
  CHECK(run_quiet(cfg) == 0);

  const Json report = Json::parse(slurp(dir / "scallop.json"));
  CHECK(report.at("net_displacement_norm").get<double>() <= 1e-6);
  const std::string csv = slurp(dir / "scallop.csv");
  CHECK(csv.substr(0, csv.find('\n')) == "t,displacement_norm,plane_deviation");

  // requesting the scallop run with torsional drag is a config error
  Json bad = base_config("scallop");
  bad["experiment"]["phi_loop"] = {0.0, 0.5, 0.0};
  CHECK_THROWS_AS(run_quiet(bad), ConfigInvalid);
}

TEST_CASE("simulate experiment writes trajectory artifacts") {
  const fs::path dir = fresh_dir("simulate");
  Json cfg = base_config("simulate");
  cfg["experiment"]["initial_shape"] = {{0.0, 1.0}};
  cfg["experiment"]["signal"] = {
      {"phases", {{{"u", {0.5, -0.3}}, {"duration", 0.4}}}}, {"lo", -1.0}, {"hi", 1.0}};
  cfg["dt"] = 1e-2;
  cfg["output"] = {{"dir", dir.string()}};
  CHECK(run_quiet(cfg) == 0);

  const std::string csv = slurp(dir / "trajectory.csv");
  CHECK(csv.substr(0, csv.find('\n')) ==
        "t,x1,x2,x3,r11,r12,r13,r21,r22,r23,r31,r32,r33,theta_2,phi_2,u_1,u_2,power_density");
  CHECK(fs::exists(dir / "trajectory_meta.json"));
  CHECK(fs::exists(dir / "plot_xyz.csv"));
  const Json report = Json::parse(slurp(dir / "report.json"));
  CHECK(report.at("power_expended").get<double>() > 0.0);

  const Json meta = Json::parse(slurp(dir / "trajectory_meta.json"));
  CHECK(meta.at("seed").get<std::uint64_t>() == 3);
  CHECK(meta.at("chain").at("lengths").size() == 2);
}

TEST_CASE("rank, fields and commutator experiments") {
  const fs::path dir = fresh_dir("misc");
  Json cfg = base_config("rank");
  cfg["experiment"]["shape"] = {{0.0, M_PI / 2}};
  cfg["output"] = {{"dir", dir.string()}};
  CHECK(run_quiet(cfg) == 0);
  CHECK(Json::parse(slurp(dir / "rank.json")).at("rank").get<int>() == 6);

  Json fcfg = base_config("fields");
  fcfg["experiment"]["shape"] = {{0.3, 1.1}};
  fcfg["output"] = {{"dir", dir.string()}};
  CHECK(run_quiet(fcfg) == 0);
  const Json fields = Json::parse(slurp(dir / "fields.json"));
  CHECK(fields.at("fields").size() == 2);
  CHECK(fields.at("closed_form").at("max_rel_error").get<double>() <= 1e-9);

  Json ccfg = base_config("commutator");
  ccfg["experiment"]["shape"] = {{0.0, M_PI / 2}};
  ccfg["experiment"]["eps_list"] = {0.2, 0.1, 0.05};
  ccfg["output"] = {{"dir", dir.string()}};
  CHECK(run_quiet(ccfg) == 0);
  const Json comm = Json::parse(slurp(dir / "commutator.json"));
  CHECK(comm.at("slope").get<double>() == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("plan experiment writes plan and report") {
  const fs::path dir = fresh_dir("plan");
  Json cfg = base_config("plan");
  cfg["experiment"]["goal"] = {{"rotation_axis_angle", {0.0, 0.0, 0.05}}};
  cfg["experiment"]["initial_shape"] = {{0.0, M_PI / 2}};
  cfg["experiment"]["kind"] = "plan";  // config kind; planner mode below
  cfg["experiment"]["restarts"] = 3;
  cfg["experiment"]["plan_dt"] = 1e-2;
  cfg["output"] = {{"dir", dir.string()}};
  CHECK(run_quiet(cfg) == 0);

  const Json plan = Json::parse(slurp(dir / "plan.json"));
  CHECK(plan.at("kind").get<std::string>() == "min_time");
  CHECK(plan.at("converged").get<bool>());
  const Json report = Json::parse(slurp(dir / "plan_report.json"));
  CHECK(report.at("position_error").get<double>() <= 1e-2);
}

#ifdef STOKESWIM_CLI_PATH
TEST_CASE("command-line binary: exit codes and artifacts") {
  const fs::path dir = fresh_dir("cli_bin");
  const fs::path cfg_path = dir / "delta.json";
  {
    Json cfg = base_config("delta");
    std::ofstream os(cfg_path);
    os << cfg.dump(2);
  }

  const std::string base = std::string(STOKESWIM_CLI_PATH);
  const std::string out = (dir / "out").string();
  CHECK(std::system((base + " delta --config " + cfg_path.string() + " --out " + out +
                     " --quiet")
                        .c_str()) == 0);
  CHECK(fs::exists(fs::path(out) / "delta.json"));

  // subcommand / config kind mismatch
  int rc = std::system(
      (base + " rank --config " + cfg_path.string() + " --quiet >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(rc) == 2);

  // invalid config
  const fs::path bad_path = dir / "bad.json";
  {
    std::ofstream os(bad_path);
    os << "{\"swimmer\": {}}";
  }
  rc = std::system(
      (base + " run --config " + bad_path.string() + " >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(rc) == 2);

  // run dispatches on the config kind
  CHECK(std::system((base + " run --config " + cfg_path.string() + " --out " + out +
                     " --quiet")
                        .c_str()) == 0);
}
#endif
