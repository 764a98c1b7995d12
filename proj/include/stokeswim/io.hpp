#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "stokeswim/controllability.hpp"
#include "stokeswim/planner.hpp"
#include "stokeswim/simulator.hpp"

// CSV / JSON serialization. Floating-point values are written with 17
// significant digits so a round-trip through text is exact.

namespace stokeswim {

using Json = nlohmann::json;

std::string format_double(double x);

// columns: t, x1..x3, r11..r33 (row-major), theta_i, phi_i per link,
// u_1.., power_density
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

// sidecar metadata: chain, drag, signal, dt, seed
Json trajectory_meta_json(const Trajectory& traj, const ControlSignal& signal,
                          std::uint64_t seed);

// columns: c_par, c_perp, c_tau, L, delta, rank
void write_scan_csv(const ScanTable& table, std::ostream& os);

Json drag_to_json(const DragCoefficients& drag);
DragCoefficients drag_from_json(const Json& j);

Json signal_to_json(const ControlSignal& signal);
ControlSignal signal_from_json(const Json& j);

// {phases: [{u: [...], dt: ...}], kind, bounds, tolerances, converged}
Json plan_to_json(const ManeuverPlan& plan);
ManeuverPlan plan_from_json(const Json& j);

Json rank_report_json(const RankReport& report);

void write_json_file(const Json& j, const std::string& path);
void write_text_file(const std::string& text, const std::string& path);

}  // namespace stokeswim
