#pragma once

// Memristor static I-V model: a fifth-order polynomial without constant
// term, valid on the window [-|V_SET|, V_STOP], and the family of
// programmed high-resistance states.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace memchua {

/// Polynomial coefficients p1..p5 (A/V^k) and the voltage window in which the
/// device behaves as a static nonlinearity.
class DevicePoly {
public:
    using Coefficients = std::array<double, 5>;

    DevicePoly(const Coefficients& coeffs, double v_min, double v_max);

    [[nodiscard]] const Coefficients& coeffs() const noexcept { return coeffs_; }
    /// Coefficient of v^k, k in [1, 5].
    [[nodiscard]] double p(int k) const { return coeffs_.at(static_cast<std::size_t>(k - 1)); }
    [[nodiscard]] double v_min() const noexcept { return v_min_; }
    [[nodiscard]] double v_max() const noexcept { return v_max_; }

    [[nodiscard]] DevicePoly scaled(double factor) const;
    [[nodiscard]] DevicePoly with_coeffs(const Coefficients& coeffs) const;

    bool operator==(const DevicePoly&) const = default;

private:
    Coefficients coeffs_;
    double v_min_;
    double v_max_;
};

/// i_M(v) in nested (Horner) form. Defined for any finite v.
[[nodiscard]] double eval_current(const DevicePoly& poly, double v) noexcept;

/// di_M/dv.
[[nodiscard]] double eval_conductance(const DevicePoly& poly, double v) noexcept;

/// The linear coefficient; the low-bias conductance of the device.
[[nodiscard]] double small_signal_conductance(const DevicePoly& poly) noexcept;

/// Chord resistance at the 0.1 V read voltage used to label programmed states.
[[nodiscard]] double read_resistance(const DevicePoly& poly, double v_read = 0.1);

struct IVSample {
    double v;
    double i;
};

struct FitReport {
    DevicePoly poly;
    double rms_residual;
    double max_abs_residual;
    /// Condition number of the column-scaled design matrix.
    double condition;
    std::size_t samples_used;
};

/// Least-squares fit over the basis {v, v^2, v^3, v^4, v^5} using the samples
/// inside [v_min, v_max]. Throws Error(underdetermined) with fewer than five
/// distinct nonzero voltages and Error(singular) when the scaled design matrix
/// is numerically rank deficient.
[[nodiscard]] FitReport fit_poly(std::span<const IVSample> samples, double v_min, double v_max);

/// Default fit window: [-0.9 * |V_SET|, V_STOP].
struct FitWindow {
    double v_min;
    double v_max;
};
[[nodiscard]] FitWindow default_fit_window(double v_set_mag, double v_stop);

class DeviceState {
public:
    DeviceState(double r_prog, double v_set_mag, double v_stop, const DevicePoly::Coefficients& coeffs);

    [[nodiscard]] double r_prog() const noexcept { return r_prog_; }
    [[nodiscard]] double v_set_mag() const noexcept { return v_set_mag_; }
    [[nodiscard]] double v_stop() const noexcept { return v_stop_; }
    [[nodiscard]] const DevicePoly& poly() const noexcept { return poly_; }

    bool operator==(const DeviceState&) const = default;

private:
    double r_prog_;
    double v_set_mag_;
    double v_stop_;
    DevicePoly poly_;
};

/// Programmed states sorted by strictly increasing r_prog.
class StateTable {
public:
    explicit StateTable(std::vector<DeviceState> states);

    [[nodiscard]] std::span<const DeviceState> states() const noexcept { return states_; }
    [[nodiscard]] std::size_t size() const noexcept { return states_.size(); }
    [[nodiscard]] const DeviceState& front() const { return states_.front(); }
    [[nodiscard]] const DeviceState& back() const { return states_.back(); }

private:
    std::vector<DeviceState> states_;
};

/// State programmed to r_prog. Exact rows are returned unchanged; between rows
/// coefficients, |V_SET| and V_STOP are interpolated linearly in log(r_prog);
/// outside the table the nearest row is scaled by p_i(r) = p_i(ref) * r_ref / r
/// with its |V_SET| and V_STOP kept.
[[nodiscard]] DeviceState state_at(const StateTable& table, double r_prog);

/// Coefficients of the device programmed with V_STOP = 2.6 V used for the
/// reference circuit design.
inline constexpr DevicePoly::Coefficients kReferenceCoeffs{1.91e-6, 3.11e-7, 1.91e-5, -5.20e-6, 1.77e-6};
inline constexpr double kReferenceVStop = 2.6;
/// |V_SET| at V_STOP = 2.6 V is only known graphically; 1.2 V sits above the
/// 0.9 V design equilibrium.
inline constexpr double kReferenceVSetMag = 1.2;

/// Reference state with r_prog taken as the 0.1 V read resistance of the polynomial.
[[nodiscard]] DeviceState reference_state();

}  // namespace memchua
