#pragma once

// Plain-CSV file formats: I-V samples, state tables, trajectories, events
// and bifurcation data. Numbers are written in shortest round-trip form so
// identical runs produce identical bytes.

#include "memchua/analysis.hpp"
#include "memchua/device.hpp"
#include "memchua/integrate.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace memchua::io {

inline constexpr const char* kIVHeader = "voltage_V,current_A";
inline constexpr const char* kStateTableHeader = "r_prog_ohm,v_set_V,v_stop_V,p1,p2,p3,p4,p5";
inline constexpr const char* kTrajectoryHeader = "t_s,v1_V,v2_V,iL_A";
inline constexpr const char* kEventsHeader = "t_s,kind,value";
inline constexpr const char* kBifurcationHeader = "r_prog_ohm,extremum_v1_V,class";

/// Shortest decimal representation that parses back to the same double.
[[nodiscard]] std::string format_number(double x);

/// Throws Error(parse) with the 1-based line number on malformed input.
[[nodiscard]] std::vector<IVSample> read_iv_csv(std::istream& in);
[[nodiscard]] std::vector<IVSample> read_iv_csv(const std::filesystem::path& path);

[[nodiscard]] StateTable read_state_table_csv(std::istream& in);
[[nodiscard]] StateTable read_state_table_csv(const std::filesystem::path& path);

void write_iv_csv(std::ostream& out, std::span<const IVSample> samples);
void write_state_table_csv(std::ostream& out, std::span<const DeviceState> states);
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_events_csv(std::ostream& out, const Trajectory& traj);

/// One row per extremum: r_prog, v1 extremum, class label.
void write_bifurcation_rows(std::ostream& out, double r_prog, std::span<const double> extrema, TrajectoryLabel label);
void write_bifurcation_csv(std::ostream& out, std::span<const SweepPoint> points);

}  // namespace memchua::io
