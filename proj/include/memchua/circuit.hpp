#pragma once

#include "memchua/device.hpp"

#include <array>
#include <complex>
#include <vector>

namespace memchua {

struct StateVector {
    double v1{};   // V, across C1 and the nonlinear block
    double v2{};   // V, across C2
    double i_l{};  // A, inductor current

    StateVector& operator+=(const StateVector& o) noexcept
    {
        v1 += o.v1;
        v2 += o.v2;
        i_l += o.i_l;
        return *this;
    }
    friend StateVector operator+(StateVector a, const StateVector& b) noexcept { return a += b; }
    friend StateVector operator-(const StateVector& a, const StateVector& b) noexcept
    {
        return {a.v1 - b.v1, a.v2 - b.v2, a.i_l - b.i_l};
    }
    friend StateVector operator*(double s, const StateVector& a) noexcept { return {s * a.v1, s * a.v2, s * a.i_l}; }

    bool operator==(const StateVector&) const = default;
};

[[nodiscard]] bool is_finite(const StateVector& s) noexcept;

/// Component values of the memristive Chua circuit. The nonlinear block is the
/// device in parallel with an ideal negative conductance -g_n.
///
/// g and g_n may be zero so the same type covers the lossless LC and passive
/// RLC reference networks used for verification.
class CircuitParams {
public:
    CircuitParams(double c1, double c2, double l, double g, double g_n, DevicePoly device);

    [[nodiscard]] double c1() const noexcept { return c1_; }
    [[nodiscard]] double c2() const noexcept { return c2_; }
    [[nodiscard]] double l() const noexcept { return l_; }
    [[nodiscard]] double g() const noexcept { return g_; }
    [[nodiscard]] double g_n() const noexcept { return g_n_; }
    [[nodiscard]] const DevicePoly& device() const noexcept { return device_; }

    [[nodiscard]] CircuitParams with_device(DevicePoly device) const;
    [[nodiscard]] CircuitParams with_g_n(double g_n) const;

    /// R*C2, or sqrt(L*C2) for the lossless network.
    [[nodiscard]] double time_scale() const noexcept;
    /// Largest window bound magnitude, in volts.
    [[nodiscard]] double voltage_scale() const noexcept;
    /// g * v_max, or sqrt(C2/L) * v_max for the lossless network.
    [[nodiscard]] double current_scale() const noexcept;
    /// Conductance used to express i_L in volts when measuring distances.
    [[nodiscard]] double current_to_voltage() const noexcept;

private:
    double c1_;
    double c2_;
    double l_;
    double g_;
    double g_n_;
    DevicePoly device_;
};

/// i_R(v) = i_M(v) - g_n * v.
[[nodiscard]] double nonlinear_current(const CircuitParams& params, double v) noexcept;
/// di_R/dv.
[[nodiscard]] double nonlinear_conductance(const CircuitParams& params, double v) noexcept;

/// True iff di_R/dv(0) = p1 - g_n < -g, the condition for P+ and P- to exist.
[[nodiscard]] bool existence_condition(const CircuitParams& params) noexcept;

[[nodiscard]] StateVector vector_field(const CircuitParams& params, const StateVector& s) noexcept;

using Matrix3 = std::array<std::array<double, 3>, 3>;

[[nodiscard]] Matrix3 jacobian(const CircuitParams& params, const StateVector& s) noexcept;
[[nodiscard]] double trace(const Matrix3& m) noexcept;

using Eigenvalues = std::array<std::complex<double>, 3>;

/// Eigenvalues from the characteristic cubic, sorted by descending real part.
[[nodiscard]] Eigenvalues eigenvalues(const Matrix3& m);

/// Roots of x^3 + a x^2 + b x + c, sorted by descending real part.
[[nodiscard]] Eigenvalues solve_monic_cubic(double a, double b, double c);

enum class EquilibriumLabel { p0, p_plus, p_minus };
const char* to_string(EquilibriumLabel label);

struct EquilibriumPoint {
    StateVector state;
    EquilibriumLabel label;
    Eigenvalues eigenvalues;
    bool stable;
    /// False when v1 lies in the search margin outside the device window.
    bool in_window;
};

/// P0 plus the nonzero real roots of i_R(v) + g v = 0 found on the device
/// window padded by 10% of its width, sorted by ascending v1.
[[nodiscard]] std::vector<EquilibriumPoint> find_equilibria(const CircuitParams& params);

struct StabilityVerdict {
    bool unstable;
    /// One real eigenvalue and a complex pair whose real parts have opposite signs.
    bool saddle_focus;
    double max_real_part;
};

[[nodiscard]] StabilityVerdict classify_stability(const EquilibriumPoint& eq) noexcept;
[[nodiscard]] StabilityVerdict classify_stability(const Eigenvalues& ev) noexcept;

}  // namespace memchua
