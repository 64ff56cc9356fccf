#pragma once

#include "memchua/circuit.hpp"
#include "memchua/device.hpp"

#include <optional>
#include <string>
#include <vector>

namespace memchua {

/// Design targets: P+ at v_eq, C1, and the dimensionless pair
/// alpha = C2/C1, beta = R^2 C2 / L.
struct DesignSpec {
    double v_eq = 0.9;
    double c1 = 10e-9;
    double alpha = 10.0;
    double beta = 14.22;

    void validate() const;
};

struct ReactiveValues {
    double c2;
    double l;
};

/// G = (C2/C1) * (i_M(v_eq)/v_eq - p1), with C2 = alpha * C1.
///
/// The chord conductance uses the memristor current alone. Using the full
/// block current makes G negative once the equilibrium condition is applied.
/// Throws Error(infeasible) if the result is not positive.
[[nodiscard]] double design_g(const DevicePoly& poly, const DesignSpec& spec);

/// G_N that zeroes the Jacobian trace at P0: G + (C1/C2) G + p1.
[[nodiscard]] double design_gn(double g, double c1, double c2, double p1);

/// C2 = alpha C1, L = C2 / (beta G^2).
[[nodiscard]] ReactiveValues design_reactive(double c1, double g, const DesignSpec& spec);

struct DesignCheck {
    std::string name;
    bool passed;
    double value;
    std::string detail;
};

struct DesignReport {
    CircuitParams params;
    double r;
    double r_n;
    std::vector<DesignCheck> checks;
    std::vector<EquilibriumPoint> equilibria;

    [[nodiscard]] bool all_passed() const noexcept;
    [[nodiscard]] std::optional<DesignCheck> first_failure() const;
};

/// Full design chain followed by the validation checks named
/// existence, p0-trace, three-equilibria, all-unstable, equilibria-in-window.
/// Throws Error(safe_window) when v_eq >= |V_SET| and Error(infeasible) from design_g.
[[nodiscard]] DesignReport design_circuit(const DeviceState& state, const DesignSpec& spec);

/// alpha and beta recomputed from component values.
[[nodiscard]] double alpha_of(const CircuitParams& params) noexcept;
[[nodiscard]] double beta_of(const CircuitParams& params) noexcept;

}  // namespace memchua
