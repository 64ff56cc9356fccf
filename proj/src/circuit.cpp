#include "memchua/circuit.hpp"

#include "memchua/error.hpp"

#include <algorithm>
#include <cmath>

namespace memchua {

namespace {

constexpr int kScanPoints = 4096;
constexpr double kBisectionWidth = 1e-14;
constexpr double kOriginMerge = 1e-9;
constexpr double kStabilityTol = 1e-9;

double max_abs_entry(const Matrix3& m) noexcept
{
    double s = 0.0;
    for (const auto& row : m) {
        for (double x : row) {
            s = std::max(s, std::abs(x));
        }
    }
    return s;
}

double cubic(double a, double b, double c, double x) noexcept
{
    return ((x + a) * x + b) * x + c;
}

double polish_cubic_root(double a, double b, double c, double x) noexcept
{
    for (int it = 0; it < 3; ++it) {
        const double f = cubic(a, b, c, x);
        const double df = (3.0 * x + 2.0 * a) * x + b;
        if (df == 0.0) {
            break;
        }
        const double next = x - f / df;
        if (!(std::abs(cubic(a, b, c, next)) < std::abs(f))) {
            break;
        }
        x = next;
    }
    return x;
}

}  // namespace

bool is_finite(const StateVector& s) noexcept
{
    return std::isfinite(s.v1) && std::isfinite(s.v2) && std::isfinite(s.i_l);
}

CircuitParams::CircuitParams(double c1, double c2, double l, double g, double g_n, DevicePoly device)
    : c1_(c1), c2_(c2), l_(l), g_(g), g_n_(g_n), device_(std::move(device))
{
    if (!(c1 > 0.0 && c2 > 0.0 && l > 0.0) || !std::isfinite(c1) || !std::isfinite(c2) || !std::isfinite(l)) {
        throw Error(ErrorKind::invalid_argument, "C1, C2 and L must be positive");
    }
    if (!(g >= 0.0 && g_n >= 0.0) || !std::isfinite(g) || !std::isfinite(g_n)) {
        throw Error(ErrorKind::invalid_argument, "G and G_N must be non-negative");
    }
}

CircuitParams CircuitParams::with_device(DevicePoly device) const
{
    return CircuitParams(c1_, c2_, l_, g_, g_n_, std::move(device));
}

CircuitParams CircuitParams::with_g_n(double g_n) const
{
    return CircuitParams(c1_, c2_, l_, g_, g_n, device_);
}

double CircuitParams::time_scale() const noexcept
{
    return g_ > 0.0 ? c2_ / g_ : std::sqrt(l_ * c2_);
}

double CircuitParams::voltage_scale() const noexcept
{
    return std::max(-device_.v_min(), device_.v_max());
}

double CircuitParams::current_to_voltage() const noexcept
{
    return g_ > 0.0 ? g_ : std::sqrt(c2_ / l_);
}

double CircuitParams::current_scale() const noexcept
{
    return current_to_voltage() * device_.v_max();
}

double nonlinear_current(const CircuitParams& params, double v) noexcept
{
    return eval_current(params.device(), v) - params.g_n() * v;
}

double nonlinear_conductance(const CircuitParams& params, double v) noexcept
{
    return eval_conductance(params.device(), v) - params.g_n();
}

bool existence_condition(const CircuitParams& params) noexcept
{
    return small_signal_conductance(params.device()) - params.g_n() < -params.g();
}

StateVector vector_field(const CircuitParams& params, const StateVector& s) noexcept
{
    const double g = params.g();
    return {((s.v2 - s.v1) * g - nonlinear_current(params, s.v1)) / params.c1(),
            ((s.v1 - s.v2) * g + s.i_l) / params.c2(),
            -s.v2 / params.l()};
}

Matrix3 jacobian(const CircuitParams& params, const StateVector& s) noexcept
{
    const double g = params.g();
    const double c1 = params.c1();
    const double c2 = params.c2();
    return Matrix3{{{(-g - nonlinear_conductance(params, s.v1)) / c1, g / c1, 0.0},
                    {g / c2, -g / c2, 1.0 / c2},
                    {0.0, -1.0 / params.l(), 0.0}}};
}

double trace(const Matrix3& m) noexcept
{
    return m[0][0] + m[1][1] + m[2][2];
}

Eigenvalues solve_monic_cubic(double a, double b, double c)
{
    // Depressed form t^3 + p t + q with x = t - a/3.
    const double shift = a / 3.0;
    const double p = b - a * shift;
    const double q = (2.0 * shift * shift - b) * shift + c;
    const double half_q = 0.5 * q;
    const double third_p = p / 3.0;
    const double disc = half_q * half_q + third_p * third_p * third_p;

    double real_root = 0.0;
    if (disc > 0.0) {
        const double u = std::cbrt(-half_q - std::copysign(std::sqrt(disc), half_q));
        real_root = (u != 0.0 ? u - third_p / u : 0.0) - shift;
    } else {
        // Three real roots; deflate on the one of largest magnitude.
        const double m = 2.0 * std::sqrt(std::max(0.0, -third_p));
        double best = 0.0;
        if (m > 0.0) {
            const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
            const double theta = std::acos(arg) / 3.0;
            for (int k = 0; k < 3; ++k) {
                const double t = m * std::cos(theta - 2.0 * M_PI * k / 3.0);
                if (std::abs(t - shift) > std::abs(best)) {
                    best = t - shift;
                }
            }
        } else {
            best = std::cbrt(-q) - shift;
        }
        real_root = best;
    }
    real_root = polish_cubic_root(a, b, c, real_root);

    // x^2 + q1 x + q0 from synthetic division.
    const double q1 = a + real_root;
    const double q0 = b + real_root * q1;
    std::complex<double> r1;
    std::complex<double> r2;
    const double d = q1 * q1 - 4.0 * q0;
    if (d >= 0.0) {
        const double big = -0.5 * (q1 + std::copysign(std::sqrt(d), q1));
        r1 = big;
        r2 = big != 0.0 ? q0 / big : 0.0;
        r1 = polish_cubic_root(a, b, c, r1.real());
        r2 = polish_cubic_root(a, b, c, r2.real());
    } else {
        const double im = 0.5 * std::sqrt(-d);
        r1 = {-0.5 * q1, im};
        r2 = {-0.5 * q1, -im};
    }

    Eigenvalues roots{std::complex<double>(real_root, 0.0), r1, r2};
    std::ranges::sort(roots, [](const auto& x, const auto& y) {
        return x.real() != y.real() ? x.real() > y.real() : x.imag() > y.imag();
    });
    return roots;
}

Eigenvalues eigenvalues(const Matrix3& m)
{
    const double scale = max_abs_entry(m);
    if (scale == 0.0) {
        return {};
    }
    Matrix3 n = m;
    for (auto& row : n) {
        for (double& x : row) {
            x /= scale;
        }
    }
    const double tr = trace(n);
    const double minors = n[0][0] * n[1][1] - n[0][1] * n[1][0] + n[0][0] * n[2][2] - n[0][2] * n[2][0] +
                          n[1][1] * n[2][2] - n[1][2] * n[2][1];
    const double det = n[0][0] * (n[1][1] * n[2][2] - n[1][2] * n[2][1]) -
                       n[0][1] * (n[1][0] * n[2][2] - n[1][2] * n[2][0]) +
                       n[0][2] * (n[1][0] * n[2][1] - n[1][1] * n[2][0]);
    Eigenvalues ev = solve_monic_cubic(-tr, minors, -det);
    for (auto& x : ev) {
        x *= scale;
    }
    return ev;
}

const char* to_string(EquilibriumLabel label)
{
    switch (label) {
    case EquilibriumLabel::p0: return "P0";
    case EquilibriumLabel::p_plus: return "P+";
    case EquilibriumLabel::p_minus: return "P-";
    }
    return "?";
}

StabilityVerdict classify_stability(const Eigenvalues& ev) noexcept
{
    double radius = 0.0;
    double max_re = -std::numeric_limits<double>::infinity();
    for (const auto& x : ev) {
        radius = std::max(radius, std::abs(x));
        max_re = std::max(max_re, x.real());
    }
    const double tol = kStabilityTol * radius;

    bool saddle_focus = false;
    const auto complex_it = std::ranges::find_if(ev, [tol](const auto& x) { return std::abs(x.imag()) > tol; });
    if (complex_it != ev.end()) {
        const auto real_it = std::ranges::find_if(ev, [tol](const auto& x) { return std::abs(x.imag()) <= tol; });
        if (real_it != ev.end()) {
            const double a = real_it->real();
            const double b = complex_it->real();
            saddle_focus = (a > tol && b < -tol) || (a < -tol && b > tol);
        }
    }
    return StabilityVerdict{max_re > tol, saddle_focus, max_re};
}

StabilityVerdict classify_stability(const EquilibriumPoint& eq) noexcept
{
    return classify_stability(eq.eigenvalues);
}

std::vector<EquilibriumPoint> find_equilibria(const CircuitParams& params)
{
    const auto& dev = params.device();
    const auto& p = dev.coeffs();
    const double c0 = p[0] + params.g() - params.g_n();
    // i_R(v) + g v = v * q(v).
    auto q = [&](double v) { return c0 + v * (p[1] + v * (p[2] + v * (p[3] + v * p[4]))); };
    auto residual = [&](double v) { return nonlinear_current(params, v) + params.g() * v; };

    const double margin = 0.1 * (dev.v_max() - dev.v_min());
    const double lo = dev.v_min() - margin;
    const double hi = dev.v_max() + margin;
    const double step = (hi - lo) / (kScanPoints - 1);

    std::vector<double> roots;
    double x_prev = lo;
    double q_prev = q(lo);
    if (q_prev == 0.0) {
        roots.push_back(lo);
    }
    for (int k = 1; k < kScanPoints; ++k) {
        const double x = k == kScanPoints - 1 ? hi : lo + step * k;
        const double qx = q(x);
        if (qx == 0.0) {
            roots.push_back(x);
        } else if (q_prev != 0.0 && std::signbit(q_prev) != std::signbit(qx)) {
            double a = x_prev;
            double b = x;
            double qa = q_prev;
            while (b - a > kBisectionWidth) {
                const double mid = 0.5 * (a + b);
                if (mid <= a || mid >= b) {
                    break;
                }
                const double qm = q(mid);
                if (qm == 0.0) {
                    a = b = mid;
                    break;
                }
                if (std::signbit(qm) == std::signbit(qa)) {
                    a = mid;
                    qa = qm;
                } else {
                    b = mid;
                }
            }
            double v = 0.5 * (a + b);
            const double slope = nonlinear_conductance(params, v) + params.g();
            if (slope != 0.0) {
                const double polished = v - residual(v) / slope;
                if (std::abs(residual(polished)) < std::abs(residual(v))) {
                    v = polished;
                }
            }
            roots.push_back(v);
        }
        x_prev = x;
        q_prev = qx;
    }

    std::vector<EquilibriumPoint> out;
    auto make_point = [&](double v, EquilibriumLabel label) {
        const StateVector s{v, 0.0, -params.g() * v};
        const Eigenvalues ev = eigenvalues(jacobian(params, s));
        return EquilibriumPoint{s, label, ev, !classify_stability(ev).unstable,
                                v >= dev.v_min() && v <= dev.v_max()};
    };
    out.push_back(make_point(0.0, EquilibriumLabel::p0));
    for (double v : roots) {
        if (std::abs(v) < kOriginMerge) {
            continue;
        }
        out.push_back(make_point(v, v > 0.0 ? EquilibriumLabel::p_plus : EquilibriumLabel::p_minus));
    }
    std::ranges::sort(out, {}, [](const EquilibriumPoint& e) { return e.state.v1; });
    return out;
}

}  // namespace memchua
