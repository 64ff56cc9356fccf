#include "memchua/integrate.hpp"

#include "memchua/error.hpp"

#include <algorithm>
#include <cmath>

namespace memchua {

namespace {

constexpr double kMinStep = 1e-15;

StateVector rk4(const CircuitParams& params, const StateVector& s, double dt) noexcept
{
    const StateVector k1 = vector_field(params, s);
    const StateVector k2 = vector_field(params, s + (0.5 * dt) * k1);
    const StateVector k3 = vector_field(params, s + (0.5 * dt) * k2);
    const StateVector k4 = vector_field(params, s + dt * k3);
    return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Shared bookkeeping for both steppers: SOA monitoring, divergence and recording.
class Monitor {
public:
    Monitor(const CircuitParams& params, const IntegrationConfig& cfg, Trajectory& out)
        : params_(params), cfg_(cfg), out_(out)
    {
    }

    // Returns false when integration must stop.
    bool accept(double t, const StateVector& s)
    {
        if (!is_finite(s) || is_divergent(params_, s)) {
            out_.events.push_back({t, EventKind::diverged, s.v1});
            out_.stop = StopReason::diverged;
            return false;
        }
        out_.t_final = t;
        out_.final_state = s;

        const auto& dev = params_.device();
        const bool low = s.v1 < dev.v_min();
        const bool high = s.v1 > dev.v_max();
        bool violated = false;
        if (low && !was_low_) {
            out_.events.push_back({t, EventKind::soa_low, s.v1});
            violated = true;
        }
        if (high && !was_high_) {
            out_.events.push_back({t, EventKind::soa_high, s.v1});
            violated = true;
        }
        was_low_ = low;
        was_high_ = high;

        if (t >= cfg_.t_transient && count_ % cfg_.record_stride == 0) {
            out_.times.push_back(t);
            out_.states.push_back(s);
        }
        ++count_;

        if (violated && cfg_.soa_policy == SoaPolicy::abort) {
            out_.stop = StopReason::soa_abort;
            return false;
        }
        return true;
    }

private:
    const CircuitParams& params_;
    const IntegrationConfig& cfg_;
    Trajectory& out_;
    std::size_t count_ = 0;
    bool was_low_ = false;
    bool was_high_ = false;
};

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                 b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

}  // namespace

void IntegrationConfig::validate() const
{
    if (const auto* fixed = std::get_if<FixedStep>(&stepping)) {
        if (!(fixed->dt > 0.0)) {
            throw Error(ErrorKind::invalid_argument, "integration dt must be positive");
        }
    } else {
        const auto& ad = std::get<AdaptiveStep>(stepping);
        if (!(ad.abs_tol > 0.0 && ad.rel_tol > 0.0) || ad.max_step < 0.0) {
            throw Error(ErrorKind::invalid_argument, "adaptive tolerances must be positive");
        }
    }
    if (!(t_end > 0.0) || !(t_transient >= 0.0) || !(t_transient < t_end)) {
        throw Error(ErrorKind::invalid_argument, "integration needs 0 <= t_transient < t_end");
    }
    if (record_stride == 0) {
        throw Error(ErrorKind::invalid_argument, "record_stride must be at least 1");
    }
}

const char* to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::soa_low: return "soa_low";
    case EventKind::soa_high: return "soa_high";
    case EventKind::diverged: return "diverged";
    }
    return "?";
}

const char* to_string(StopReason reason)
{
    switch (reason) {
    case StopReason::completed: return "completed";
    case StopReason::soa_abort: return "soa_abort";
    case StopReason::diverged: return "diverged";
    case StopReason::step_underflow: return "step_underflow";
    }
    return "?";
}

bool Trajectory::has_event(EventKind kind) const noexcept
{
    return std::ranges::any_of(events, [kind](const Event& e) { return e.kind == kind; });
}

std::vector<double> Trajectory::v1() const
{
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) {
        out.push_back(s.v1);
    }
    return out;
}

bool is_divergent(const CircuitParams& params, const StateVector& s) noexcept
{
    const double v_lim = kDivergenceFactor * params.voltage_scale();
    const double i_lim = kDivergenceFactor * params.current_scale();
    return std::abs(s.v1) > v_lim || std::abs(s.v2) > v_lim || std::abs(s.i_l) > i_lim;
}

StateVector step_rk4(const CircuitParams& params, const StateVector& s, double dt)
{
    if (!(dt > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "dt must be positive");
    }
    const StateVector next = rk4(params, s, dt);
    if (!is_finite(next)) {
        throw Error(ErrorKind::divergence, "non-finite state after RK4 step");
    }
    return next;
}

Trajectory integrate(const CircuitParams& params, const StateVector& init, const IntegrationConfig& cfg)
{
    cfg.validate();
    const auto* fixed = std::get_if<FixedStep>(&cfg.stepping);
    if (fixed == nullptr) {
        throw Error(ErrorKind::invalid_argument, "integrate() needs a fixed-step configuration");
    }
    if (!is_finite(init)) {
        throw Error(ErrorKind::invalid_argument, "initial state must be finite");
    }

    const double dt = fixed->dt;
    const auto n_steps = static_cast<std::size_t>(std::ceil(cfg.t_end / dt - 1e-9));

    Trajectory out;
    Monitor monitor(params, cfg, out);
    StateVector s = init;
    if (!monitor.accept(0.0, s)) {
        return out;
    }
    for (std::size_t n = 1; n <= n_steps; ++n) {
        const double t_prev = static_cast<double>(n - 1) * dt;
        const double t = n == n_steps ? cfg.t_end : static_cast<double>(n) * dt;
        s = rk4(params, s, t - t_prev);
        ++out.accepted_steps;
        if (!monitor.accept(t, s)) {
            break;
        }
    }
    return out;
}

Trajectory integrate_adaptive(const CircuitParams& params, const StateVector& init, const IntegrationConfig& cfg)
{
    cfg.validate();
    const auto* ad = std::get_if<AdaptiveStep>(&cfg.stepping);
    if (ad == nullptr) {
        throw Error(ErrorKind::invalid_argument, "integrate_adaptive() needs tolerances");
    }
    if (!is_finite(init)) {
        throw Error(ErrorKind::invalid_argument, "initial state must be finite");
    }

    const double h_max = ad->max_step > 0.0 ? ad->max_step : cfg.t_end / 100.0;
    const double i_scale = params.current_to_voltage();
    const double atol_v = ad->abs_tol;
    const double atol_i = ad->abs_tol * i_scale;
    const double rtol = ad->rel_tol;

    auto err_norm = [&](const StateVector& y, const StateVector& y_new, const StateVector& err) {
        const double sv1 = atol_v + rtol * std::max(std::abs(y.v1), std::abs(y_new.v1));
        const double sv2 = atol_v + rtol * std::max(std::abs(y.v2), std::abs(y_new.v2));
        const double si = atol_i + rtol * std::max(std::abs(y.i_l), std::abs(y_new.i_l));
        return std::max({std::abs(err.v1) / sv1, std::abs(err.v2) / sv2, std::abs(err.i_l) / si});
    };

    Trajectory out;
    Monitor monitor(params, cfg, out);
    StateVector y = init;
    double t = 0.0;
    if (!monitor.accept(t, y)) {
        return out;
    }

    StateVector k1 = vector_field(params, y);

    // Starting step from the derivative magnitude relative to the tolerance.
    double h = h_max;
    {
        const StateVector zero{};
        const double d0 = err_norm(y, y, y - zero);
        const double d1 = err_norm(y, y, k1);
        if (d0 > 1e-5 && d1 > 1e-5) {
            h = std::min(h_max, 0.01 * d0 / d1);
        } else if (d1 > 1e-5) {
            h = std::min(h_max, 1e-6 / d1);
        }
    }

    while (t < cfg.t_end) {
        h = std::min(h, cfg.t_end - t);
        if (h < kMinStep) {
            out.stop = StopReason::step_underflow;
            break;
        }
        const StateVector k2 = vector_field(params, y + (h * a21) * k1);
        const StateVector k3 = vector_field(params, y + h * (a31 * k1 + a32 * k2));
        const StateVector k4 = vector_field(params, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const StateVector k5 = vector_field(params, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const StateVector k6 =
            vector_field(params, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const StateVector y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const StateVector k7 = vector_field(params, y_new);
        const StateVector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double en = is_finite(y_new) ? err_norm(y, y_new, err) : std::numeric_limits<double>::infinity();
        if (en <= 1.0) {
            t = (cfg.t_end - (t + h) < kMinStep) ? cfg.t_end : t + h;
            y = y_new;
            k1 = k7;
            ++out.accepted_steps;
            if (!monitor.accept(t, y)) {
                break;
            }
            const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
            h = std::min(h * fac, h_max);
        } else {
            ++out.rejected_steps;
            const double fac = std::isfinite(en) ? std::clamp(0.9 * std::pow(en, -0.2), 0.2, 1.0) : 0.2;
            h *= fac;
        }
    }
    return out;
}

Trajectory run_integration(const CircuitParams& params, const StateVector& init, const IntegrationConfig& cfg)
{
    if (std::holds_alternative<FixedStep>(cfg.stepping)) {
        return integrate(params, init, cfg);
    }
    return integrate_adaptive(params, init, cfg);
}

}  // namespace memchua
