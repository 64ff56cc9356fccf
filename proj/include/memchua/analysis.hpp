#pragma once

#include "memchua/circuit.hpp"
#include "memchua/design.hpp"
#include "memchua/device.hpp"
#include "memchua/integrate.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace memchua {

enum class ExtremumKind { max, min };

struct Extremum {
    double time;
    double value;
    ExtremumKind kind;
};

/// Strict interior maxima and minima of a sampled signal. Flat runs count as a
/// single extremum at the run's midpoint; isolated extrema are refined by the
/// vertex of the parabola through the three bracketing samples.
[[nodiscard]] std::vector<Extremum> local_extrema(std::span<const double> times, std::span<const double> values);

enum class TrajectoryLabel { fixed_point, periodic, single_scroll, double_scroll, diverged, inconclusive };
enum class ScrollSide { positive, negative, both, none };

const char* to_string(TrajectoryLabel label);
const char* to_string(ScrollSide side);

struct LyapunovResult {
    double per_second;
    /// per_second * R * C2
    double dimensionless;
    std::size_t renormalizations;
};

struct TrajectoryClass {
    TrajectoryLabel label = TrajectoryLabel::inconclusive;
    ScrollSide scroll_side = ScrollSide::none;
    std::optional<LyapunovResult> lyapunov;
    std::size_t n_extrema_clusters = 0;
};

/// Classifier thresholds. All distances are measured in the scaled state
/// (v1, v2, i_L / G) so they read in volts.
struct ClassifyConfig {
    /// Neighborhood radius of P+ / P- as a fraction of their |v1|.
    double visit_fraction = 0.3;
    /// Extremum clustering tolerance as a fraction of the observed v1 span.
    double cluster_fraction = 0.01;
    std::size_t max_clusters = 8;
    /// Largest dimensionless exponent still counted as periodic.
    double lambda_periodic = 0.01;
    double fixed_point_eps = 1e-4;
    std::size_t min_samples = 64;

    void validate() const;
};

/// Sequential gap clustering of extremum values with tolerance tol.
[[nodiscard]] std::size_t count_clusters(std::vector<double> values, double tol);

/// Smallest scaled distance between any recorded state and `target`.
[[nodiscard]] double min_distance(const Trajectory& traj, const StateVector& target, const CircuitParams& params);

/// Decision procedure over a trajectory whose transient has been discarded:
/// diverged, fixed point, neighborhood visits, extremum clusters and the
/// Lyapunov exponent (when supplied), then single/double scroll.
[[nodiscard]] TrajectoryClass classify(const Trajectory& traj, std::span<const EquilibriumPoint> equilibria,
                                       const CircuitParams& params, const ClassifyConfig& cfg,
                                       const std::optional<LyapunovResult>& lyapunov = std::nullopt);

struct LyapunovConfig {
    double dt = 1e-6;
    double t_end = 0.5;
    double t_transient = 0.1;
    double d0 = 1e-8;
    /// 0 selects R * C2.
    double renorm_interval = 0.0;

    void validate() const;
};

/// Two-trajectory (Benettin) estimate: a shadow offset by d0 in v1 is pulled
/// back to distance d0 after every renormalization interval. Throws
/// Error(divergence) if either trajectory blows up.
[[nodiscard]] LyapunovResult largest_lyapunov(const CircuitParams& params, const StateVector& init,
                                              const LyapunovConfig& cfg);

[[nodiscard]] LyapunovConfig lyapunov_config_for(const IntegrationConfig& cfg);

/// Each coefficient multiplied by an independent lognormal factor (median 1,
/// log-std sigma). Reproducible for a given seed.
[[nodiscard]] DevicePoly perturb(const DevicePoly& poly, double sigma, std::uint64_t seed);

struct SimulationResult {
    Trajectory trajectory;
    std::vector<Extremum> extrema;
    std::vector<EquilibriumPoint> equilibria;
    TrajectoryClass verdict;
};

/// Integrate, estimate the exponent and classify one configuration.
[[nodiscard]] SimulationResult simulate(const CircuitParams& params, const StateVector& init,
                                        const IntegrationConfig& integration, const ClassifyConfig& classify_cfg);

enum class SweepMode { fixed, redesign };
const char* to_string(SweepMode mode);

struct SweepConfig {
    SweepMode mode = SweepMode::fixed;
    double r_min = 0.0;
    double r_max = 0.0;
    std::size_t n_points = 32;
    /// State used for the component design held fixed across the sweep.
    double reference_r_prog = 0.0;
    DesignSpec design;
    IntegrationConfig integration;
    ClassifyConfig classify;
    StateVector init{0.1, 0.0, 0.0};
    /// Cycle-to-cycle spread applied to each point's coefficients.
    double sigma = 0.0;
    std::uint64_t seed = 1;
    /// 0 uses the hardware concurrency.
    unsigned threads = 0;

    void validate() const;
};

struct SweepPoint {
    double r_prog;
    std::vector<double> extrema;
    TrajectoryClass verdict;
    std::uint64_t seed;
    bool soa_event = false;
    std::string note;
};

/// Log-spaced resistances from r_min to r_max inclusive.
[[nodiscard]] std::vector<double> sweep_grid(double r_min, double r_max, std::size_t n_points);

/// Per-point seed derived from the sweep seed and the point index.
[[nodiscard]] std::uint64_t point_seed(std::uint64_t seed, std::size_t index) noexcept;

/// Bifurcation sweep over programmed resistance. Points run in parallel and are
/// returned in grid order; a failing point is reported inconclusive with a note.
[[nodiscard]] std::vector<SweepPoint> sweep(const StateTable& table, const SweepConfig& cfg);

}  // namespace memchua
