#pragma once

#include "memchua/analysis.hpp"
#include "memchua/design.hpp"
#include "memchua/device.hpp"
#include "memchua/integrate.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace memchua {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kConfigEnvVar = "MEMCHUA_CONFIG";

struct DeviceSource {
    std::optional<std::filesystem::path> state_table;
    std::optional<DevicePoly::Coefficients> coefficients;
    std::optional<double> r_prog;
    double v_set = kReferenceVSetMag;
    double v_stop = kReferenceVStop;
};

/// Explicit component values replacing the computed design.
struct CircuitOverride {
    double c1;
    double c2;
    double l;
    double r;
    double r_n;
};

struct SweepSettings {
    SweepMode mode = SweepMode::fixed;
    std::optional<double> r_min;
    std::optional<double> r_max;
    std::optional<double> reference_r_prog;
    std::size_t n_points = 32;
    double sigma = 0.0;
    unsigned threads = 0;
};

/// Everything one experiment needs; every field has a default so an empty
/// document reproduces the reference design.
struct RunConfig {
    int schema_version = kConfigSchemaVersion;
    DeviceSource device;
    DesignSpec design;
    std::optional<CircuitOverride> circuit;
    IntegrationConfig integration;
    StateVector init{0.1, 0.0, 0.0};
    ClassifyConfig analysis;
    SweepSettings sweep;
    std::uint64_t seed = 1;
};

/// Parses a JSON document. Unknown keys and a mismatched schema_version are
/// rejected with Error(parse). Relative paths resolve against base_dir.
[[nodiscard]] RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Table of programmed states: the configured CSV, or a single row built from
/// the configured (default: reference) coefficients.
[[nodiscard]] StateTable resolve_table(const RunConfig& cfg);

/// Programmed state used for design and simulation.
[[nodiscard]] DeviceState resolve_state(const RunConfig& cfg, const StateTable& table);

/// Default reference resistance: device.r_prog, else the single row, else the
/// highest-resistance row.
[[nodiscard]] double reference_r_prog(const RunConfig& cfg, const StateTable& table);

[[nodiscard]] SweepConfig make_sweep_config(const RunConfig& cfg, const StateTable& table);

}  // namespace memchua
