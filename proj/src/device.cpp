#include "memchua/device.hpp"

#include "memchua/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace memchua {

namespace {

constexpr double kMaxFitCondition = 1e12;

void require(bool ok, const char* what)
{
    if (!ok) {
        throw Error(ErrorKind::invalid_argument, what);
    }
}

}  // namespace

DevicePoly::DevicePoly(const Coefficients& coeffs, double v_min, double v_max)
    : coeffs_(coeffs), v_min_(v_min), v_max_(v_max)
{
    require(std::ranges::all_of(coeffs_, [](double c) { return std::isfinite(c); }),
            "device coefficients must be finite");
    require(std::isfinite(v_min) && std::isfinite(v_max) && v_min < 0.0 && 0.0 < v_max,
            "device window must satisfy v_min < 0 < v_max");
}

DevicePoly DevicePoly::scaled(double factor) const
{
    Coefficients c = coeffs_;
    for (double& x : c) {
        x *= factor;
    }
    return DevicePoly(c, v_min_, v_max_);
}

DevicePoly DevicePoly::with_coeffs(const Coefficients& coeffs) const
{
    return DevicePoly(coeffs, v_min_, v_max_);
}

double eval_current(const DevicePoly& poly, double v) noexcept
{
    const auto& p = poly.coeffs();
    return v * (p[0] + v * (p[1] + v * (p[2] + v * (p[3] + v * p[4]))));
}

double eval_conductance(const DevicePoly& poly, double v) noexcept
{
    const auto& p = poly.coeffs();
    return p[0] + v * (2.0 * p[1] + v * (3.0 * p[2] + v * (4.0 * p[3] + v * 5.0 * p[4])));
}

double small_signal_conductance(const DevicePoly& poly) noexcept
{
    return poly.p(1);
}

double read_resistance(const DevicePoly& poly, double v_read)
{
    const double i = eval_current(poly, v_read);
    if (!(i > 0.0) || !(v_read > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "read current must be positive at a positive read voltage");
    }
    return v_read / i;
}

FitReport fit_poly(std::span<const IVSample> samples, double v_min, double v_max)
{
    require(v_min < 0.0 && 0.0 < v_max, "fit window must satisfy v_min < 0 < v_max");

    std::vector<IVSample> used;
    used.reserve(samples.size());
    for (const auto& s : samples) {
        if (!std::isfinite(s.v) || !std::isfinite(s.i)) {
            throw Error(ErrorKind::invalid_argument, "I-V samples must be finite");
        }
        if (s.v >= v_min && s.v <= v_max) {
            used.push_back(s);
        }
    }

    std::vector<double> distinct;
    for (const auto& s : used) {
        if (s.v != 0.0) {
            distinct.push_back(s.v);
        }
    }
    std::ranges::sort(distinct);
    const auto n_distinct = static_cast<std::size_t>(
        std::distance(distinct.begin(), std::unique(distinct.begin(), distinct.end())));
    if (n_distinct < 5) {
        std::ostringstream msg;
        msg << "underdetermined fit: " << n_distinct << " distinct nonzero voltages in window, need 5";
        throw Error(ErrorKind::underdetermined, msg.str());
    }

    const auto rows = static_cast<Eigen::Index>(used.size());
    Eigen::MatrixXd a(rows, 5);
    Eigen::VectorXd b(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const double v = used[static_cast<std::size_t>(r)].v;
        double pw = v;
        for (int k = 0; k < 5; ++k) {
            a(r, k) = pw;
            pw *= v;
        }
        b(r) = used[static_cast<std::size_t>(r)].i;
    }

    // Powers of v span several decades; equilibrate columns before factoring.
    Eigen::VectorXd col_scale = a.colwise().norm().transpose();
    for (int k = 0; k < 5; ++k) {
        if (col_scale(k) == 0.0) {
            col_scale(k) = 1.0;
        }
        a.col(k) /= col_scale(k);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    const auto& r = qr.matrixR();
    const double r_max = std::abs(r(0, 0));
    const double r_min = std::abs(r(4, 4));
    const double condition = r_min > 0.0 ? r_max / r_min : std::numeric_limits<double>::infinity();
    if (qr.rank() < 5 || !(condition < kMaxFitCondition)) {
        std::ostringstream msg;
        msg << "singular fit system: condition estimate " << condition << " (rank " << qr.rank() << ")";
        throw Error(ErrorKind::singular, msg.str());
    }

    const Eigen::VectorXd x = qr.solve(b);
    DevicePoly::Coefficients coeffs{};
    for (int k = 0; k < 5; ++k) {
        coeffs[static_cast<std::size_t>(k)] = x(k) / col_scale(k);
    }
    DevicePoly poly(coeffs, v_min, v_max);

    double sum_sq = 0.0;
    double max_abs = 0.0;
    for (const auto& s : used) {
        const double res = s.i - eval_current(poly, s.v);
        sum_sq += res * res;
        max_abs = std::max(max_abs, std::abs(res));
    }
    return FitReport{poly, std::sqrt(sum_sq / static_cast<double>(used.size())), max_abs, condition,
                     used.size()};
}

FitWindow default_fit_window(double v_set_mag, double v_stop)
{
    require(v_set_mag > 0.0 && v_stop > 0.0, "|V_SET| and V_STOP must be positive");
    return FitWindow{-0.9 * v_set_mag, v_stop};
}

DeviceState::DeviceState(double r_prog, double v_set_mag, double v_stop, const DevicePoly::Coefficients& coeffs)
    : r_prog_(r_prog), v_set_mag_(v_set_mag), v_stop_(v_stop), poly_(coeffs, -v_set_mag, v_stop)
{
    require(std::isfinite(r_prog) && r_prog > 0.0, "r_prog must be positive");
    require(std::isfinite(v_set_mag) && v_set_mag > 0.0, "|V_SET| must be positive");
    require(std::isfinite(v_stop) && v_stop > 0.0, "V_STOP must be positive");
}

StateTable::StateTable(std::vector<DeviceState> states) : states_(std::move(states))
{
    require(!states_.empty(), "state table needs at least one entry");
    for (std::size_t k = 1; k < states_.size(); ++k) {
        require(states_[k - 1].r_prog() < states_[k].r_prog(), "state table r_prog must be strictly increasing");
    }
}

DeviceState state_at(const StateTable& table, double r_prog)
{
    if (!(r_prog > 0.0) || !std::isfinite(r_prog)) {
        throw Error(ErrorKind::invalid_argument, "r_prog must be positive");
    }
    const auto rows = table.states();

    auto scaled_from = [r_prog](const DeviceState& ref) {
        DevicePoly::Coefficients c = ref.poly().coeffs();
        const double factor = ref.r_prog() / r_prog;
        for (double& x : c) {
            x *= factor;
        }
        return DeviceState(r_prog, ref.v_set_mag(), ref.v_stop(), c);
    };

    if (r_prog < rows.front().r_prog()) {
        return scaled_from(rows.front());
    }
    if (r_prog > rows.back().r_prog()) {
        return scaled_from(rows.back());
    }

    const auto hi = std::ranges::lower_bound(rows, r_prog, {}, &DeviceState::r_prog);
    if (hi->r_prog() == r_prog) {
        return *hi;
    }
    const auto& upper = *hi;
    const auto& lower = *std::prev(hi);
    const double t = (std::log(r_prog) - std::log(lower.r_prog())) /
                     (std::log(upper.r_prog()) - std::log(lower.r_prog()));
    auto lerp = [t](double a, double b) { return a + t * (b - a); };

    DevicePoly::Coefficients c{};
    for (std::size_t k = 0; k < c.size(); ++k) {
        c[k] = lerp(lower.poly().coeffs()[k], upper.poly().coeffs()[k]);
    }
    return DeviceState(r_prog, lerp(lower.v_set_mag(), upper.v_set_mag()), lerp(lower.v_stop(), upper.v_stop()), c);
}

DeviceState reference_state()
{
    const DevicePoly poly(kReferenceCoeffs, -kReferenceVSetMag, kReferenceVStop);
    return DeviceState(read_resistance(poly), kReferenceVSetMag, kReferenceVStop, kReferenceCoeffs);
}

}  // namespace memchua
