#pragma once

#include "memchua/circuit.hpp"

#include <cstddef>
#include <variant>
#include <vector>

namespace memchua {

enum class SoaPolicy { warn, abort };

struct FixedStep {
    double dt = 1e-6;
};

/// Dormand-Prince 5(4). abs_tol applies to voltages in volts; the inductor
/// current uses abs_tol scaled by the circuit's current-to-voltage conductance.
struct AdaptiveStep {
    double abs_tol = 1e-9;
    double rel_tol = 1e-8;
    /// 0 selects t_end / 100.
    double max_step = 0.0;
};

struct IntegrationConfig {
    std::variant<FixedStep, AdaptiveStep> stepping = FixedStep{};
    double t_end = 0.5;
    double t_transient = 0.1;
    std::size_t record_stride = 10;
    SoaPolicy soa_policy = SoaPolicy::warn;

    void validate() const;
};

enum class EventKind { soa_low, soa_high, diverged };
const char* to_string(EventKind kind);

struct Event {
    double time;
    EventKind kind;
    double value;  // v1 at the event, in volts
};

enum class StopReason { completed, soa_abort, diverged, step_underflow };
const char* to_string(StopReason reason);

struct Trajectory {
    std::vector<double> times;
    std::vector<StateVector> states;
    std::vector<Event> events;
    StopReason stop = StopReason::completed;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    double t_final = 0.0;
    StateVector final_state;

    [[nodiscard]] bool has_event(EventKind kind) const noexcept;
    [[nodiscard]] std::vector<double> v1() const;
};

/// One classical Runge-Kutta step. Throws Error(divergence) on a non-finite result.
[[nodiscard]] StateVector step_rk4(const CircuitParams& params, const StateVector& s, double dt);

/// Fixed-step RK4 integration; cfg.stepping must hold FixedStep.
[[nodiscard]] Trajectory integrate(const CircuitParams& params, const StateVector& init, const IntegrationConfig& cfg);

/// Adaptive integration; cfg.stepping must hold AdaptiveStep.
[[nodiscard]] Trajectory integrate_adaptive(const CircuitParams& params, const StateVector& init,
                                            const IntegrationConfig& cfg);

/// Dispatches on cfg.stepping.
[[nodiscard]] Trajectory run_integration(const CircuitParams& params, const StateVector& init,
                                         const IntegrationConfig& cfg);

/// Magnitude beyond which a state is treated as divergent: 1e3 times the
/// natural voltage and current scales.
inline constexpr double kDivergenceFactor = 1e3;

[[nodiscard]] bool is_divergent(const CircuitParams& params, const StateVector& s) noexcept;

}  // namespace memchua
