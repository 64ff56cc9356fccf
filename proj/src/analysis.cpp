#include "memchua/analysis.hpp"

#include "memchua/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace memchua {

namespace {

double scaled_distance(const StateVector& a, const StateVector& b, double i_to_v) noexcept
{
    const double dv1 = a.v1 - b.v1;
    const double dv2 = a.v2 - b.v2;
    const double di = (a.i_l - b.i_l) / i_to_v;
    return std::sqrt(dv1 * dv1 + dv2 * dv2 + di * di);
}

ScrollSide side_of(EquilibriumLabel label) noexcept
{
    switch (label) {
    case EquilibriumLabel::p_plus: return ScrollSide::positive;
    case EquilibriumLabel::p_minus: return ScrollSide::negative;
    case EquilibriumLabel::p0: return ScrollSide::none;
    }
    return ScrollSide::none;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::vector<Extremum> local_extrema(std::span<const double> times, std::span<const double> values)
{
    if (times.size() != values.size()) {
        throw Error(ErrorKind::invalid_argument, "times and values differ in length");
    }
    std::vector<Extremum> out;
    const std::size_t n = values.size();
    if (n < 3) {
        return out;
    }

    std::size_t i = 1;
    while (i + 1 < n) {
        std::size_t j = i;
        while (j + 1 < n && values[j + 1] == values[i]) {
            ++j;
        }
        if (j + 1 >= n) {
            break;
        }
        const double left = values[i - 1];
        const double right = values[j + 1];
        const double y = values[i];
        const bool is_max = y > left && y > right;
        const bool is_min = y < left && y < right;
        if (is_max || is_min) {
            const ExtremumKind kind = is_max ? ExtremumKind::max : ExtremumKind::min;
            if (j > i) {
                out.push_back({0.5 * (times[i] + times[j]), y, kind});
            } else {
                // Parabola y1 + b u + a u^2 in u = t - t1.
                const double h0 = times[i - 1] - times[i];
                const double h2 = times[i + 1] - times[i];
                const double d0 = (left - y) / h0;
                const double d2 = (right - y) / h2;
                const double a = (d2 - d0) / (h2 - h0);
                const double b = d0 - a * h0;
                double u = 0.0;
                double value = y;
                if (a != 0.0) {
                    u = std::clamp(-b / (2.0 * a), h0, h2);
                    value = y + u * (b + a * u);
                }
                out.push_back({times[i] + u, value, kind});
            }
        }
        i = j + 1;
    }
    return out;
}

const char* to_string(TrajectoryLabel label)
{
    switch (label) {
    case TrajectoryLabel::fixed_point: return "fixed_point";
    case TrajectoryLabel::periodic: return "periodic";
    case TrajectoryLabel::single_scroll: return "single_scroll";
    case TrajectoryLabel::double_scroll: return "double_scroll";
    case TrajectoryLabel::diverged: return "diverged";
    case TrajectoryLabel::inconclusive: return "inconclusive";
    }
    return "?";
}

const char* to_string(ScrollSide side)
{
    switch (side) {
    case ScrollSide::positive: return "positive";
    case ScrollSide::negative: return "negative";
    case ScrollSide::both: return "both";
    case ScrollSide::none: return "none";
    }
    return "?";
}

void ClassifyConfig::validate() const
{
    if (!(visit_fraction > 0.0 && cluster_fraction > 0.0 && max_clusters > 0 && lambda_periodic > 0.0 &&
          fixed_point_eps > 0.0 && min_samples >= 3)) {
        throw Error(ErrorKind::invalid_argument, "classifier thresholds must be positive");
    }
}

std::size_t count_clusters(std::vector<double> values, double tol)
{
    if (values.empty()) {
        return 0;
    }
    std::ranges::sort(values);
    std::size_t n = 1;
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (values[k] - values[k - 1] > tol) {
            ++n;
        }
    }
    return n;
}

double min_distance(const Trajectory& traj, const StateVector& target, const CircuitParams& params)
{
    const double i_to_v = params.current_to_voltage();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : traj.states) {
        best = std::min(best, scaled_distance(s, target, i_to_v));
    }
    return best;
}

TrajectoryClass classify(const Trajectory& traj, std::span<const EquilibriumPoint> equilibria,
                         const CircuitParams& params, const ClassifyConfig& cfg,
                         const std::optional<LyapunovResult>& lyapunov)
{
    cfg.validate();
    TrajectoryClass out;
    out.lyapunov = lyapunov;

    if (traj.stop == StopReason::diverged || traj.has_event(EventKind::diverged)) {
        out.label = TrajectoryLabel::diverged;
        return out;
    }
    if (traj.states.size() < cfg.min_samples) {
        return out;
    }

    const double i_to_v = params.current_to_voltage();
    const StateVector& last = traj.states.back();
    const StateVector& mid = traj.states[traj.states.size() / 2];
    for (const auto& eq : equilibria) {
        const double d_end = scaled_distance(last, eq.state, i_to_v);
        if (d_end < cfg.fixed_point_eps && d_end <= scaled_distance(mid, eq.state, i_to_v)) {
            out.label = TrajectoryLabel::fixed_point;
            out.scroll_side = side_of(eq.label);
            return out;
        }
    }

    bool visited_plus = false;
    bool visited_minus = false;
    double dead_plus = std::numeric_limits<double>::infinity();
    double dead_minus = std::numeric_limits<double>::infinity();
    for (const auto& eq : equilibria) {
        if (eq.label == EquilibriumLabel::p0) {
            continue;
        }
        const double radius = cfg.visit_fraction * std::abs(eq.state.v1);
        const bool visited = min_distance(traj, eq.state, params) < radius;
        if (eq.label == EquilibriumLabel::p_plus) {
            visited_plus = visited_plus || visited;
            dead_plus = std::min(dead_plus, radius);
        } else {
            visited_minus = visited_minus || visited;
            dead_minus = std::min(dead_minus, radius);
        }
    }
    out.scroll_side = visited_plus && visited_minus ? ScrollSide::both
                      : visited_plus                ? ScrollSide::positive
                      : visited_minus               ? ScrollSide::negative
                                                    : ScrollSide::none;

    const auto v1 = traj.v1();
    const auto extrema = local_extrema(traj.times, v1);
    if (extrema.empty()) {
        return out;
    }
    const auto [lo, hi] = std::ranges::minmax(v1);
    std::vector<double> values;
    values.reserve(extrema.size());
    for (const auto& e : extrema) {
        values.push_back(e.value);
    }
    out.n_extrema_clusters = count_clusters(values, cfg.cluster_fraction * (hi - lo));

    const bool regular = !lyapunov || lyapunov->dimensionless < cfg.lambda_periodic;
    if (out.n_extrema_clusters <= cfg.max_clusters && regular) {
        out.label = TrajectoryLabel::periodic;
        return out;
    }

    const bool both_signs = std::ranges::any_of(values, [&](double v) { return v > dead_plus; }) &&
                            std::ranges::any_of(values, [&](double v) { return v < -dead_minus; });
    out.label = out.scroll_side == ScrollSide::both && both_signs ? TrajectoryLabel::double_scroll
                                                                  : TrajectoryLabel::single_scroll;
    return out;
}

void LyapunovConfig::validate() const
{
    if (!(dt > 0.0 && d0 > 0.0 && t_end > 0.0 && t_transient >= 0.0 && t_transient < t_end &&
          renorm_interval >= 0.0)) {
        throw Error(ErrorKind::invalid_argument, "invalid Lyapunov configuration");
    }
}

LyapunovConfig lyapunov_config_for(const IntegrationConfig& cfg)
{
    LyapunovConfig out;
    if (const auto* fixed = std::get_if<FixedStep>(&cfg.stepping)) {
        out.dt = fixed->dt;
    }
    out.t_end = cfg.t_end;
    out.t_transient = cfg.t_transient;
    return out;
}

LyapunovResult largest_lyapunov(const CircuitParams& params, const StateVector& init, const LyapunovConfig& cfg)
{
    cfg.validate();
    const double tau = cfg.renorm_interval > 0.0 ? cfg.renorm_interval : params.time_scale();
    const auto steps_per_interval = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(tau / cfg.dt)));
    const double interval = static_cast<double>(steps_per_interval) * cfg.dt;
    const auto n_steps = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
    const double i_to_v = params.current_to_voltage();

    StateVector ref = init;
    StateVector shadow = init + StateVector{cfg.d0, 0.0, 0.0};
    double acc = 0.0;
    std::size_t n_renorm = 0;
    for (std::size_t n = 1; n <= n_steps; ++n) {
        ref = step_rk4(params, ref, cfg.dt);
        shadow = step_rk4(params, shadow, cfg.dt);
        if (n % steps_per_interval != 0) {
            continue;
        }
        if (is_divergent(params, ref) || is_divergent(params, shadow)) {
            throw Error(ErrorKind::divergence, "trajectory diverged during Lyapunov estimation");
        }
        const double d = scaled_distance(shadow, ref, i_to_v);
        if (!std::isfinite(d) || d == 0.0) {
            throw Error(ErrorKind::divergence, "shadow trajectory separation degenerated");
        }
        if (static_cast<double>(n) * cfg.dt > cfg.t_transient) {
            acc += std::log(d / cfg.d0);
            ++n_renorm;
        }
        shadow = ref + (cfg.d0 / d) * (shadow - ref);
    }
    if (n_renorm == 0) {
        throw Error(ErrorKind::invalid_argument, "no renormalization interval after the transient");
    }
    const double lambda = acc / (static_cast<double>(n_renorm) * interval);
    return LyapunovResult{lambda, lambda * params.time_scale(), n_renorm};
}

DevicePoly perturb(const DevicePoly& poly, double sigma, std::uint64_t seed)
{
    if (!(sigma >= 0.0)) {
        throw Error(ErrorKind::invalid_argument, "sigma must be non-negative");
    }
    if (sigma == 0.0) {
        return poly;
    }
    std::mt19937_64 rng(seed);
    std::lognormal_distribution<double> factor(0.0, sigma);
    DevicePoly::Coefficients c = poly.coeffs();
    for (double& x : c) {
        x *= factor(rng);
    }
    return poly.with_coeffs(c);
}

SimulationResult simulate(const CircuitParams& params, const StateVector& init, const IntegrationConfig& integration,
                          const ClassifyConfig& classify_cfg)
{
    SimulationResult out{run_integration(params, init, integration), {}, find_equilibria(params), {}};
    out.extrema = local_extrema(out.trajectory.times, out.trajectory.v1());

    std::optional<LyapunovResult> lyap;
    if (out.trajectory.stop == StopReason::completed) {
        try {
            lyap = largest_lyapunov(params, init, lyapunov_config_for(integration));
        } catch (const Error&) {
            lyap.reset();
        }
    }
    out.verdict = classify(out.trajectory, out.equilibria, params, classify_cfg, lyap);
    return out;
}

const char* to_string(SweepMode mode)
{
    return mode == SweepMode::fixed ? "fixed" : "redesign";
}

void SweepConfig::validate() const
{
    if (n_points == 0) {
        throw Error(ErrorKind::invalid_argument, "sweep needs at least one point");
    }
    if (!(r_min > 0.0 && r_max >= r_min) || !std::isfinite(r_max)) {
        throw Error(ErrorKind::invalid_argument, "sweep range must satisfy 0 < r_min <= r_max");
    }
    if (mode == SweepMode::fixed && !(reference_r_prog > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "fixed-mode sweep needs a positive reference r_prog");
    }
    if (!(sigma >= 0.0)) {
        throw Error(ErrorKind::invalid_argument, "sigma must be non-negative");
    }
    design.validate();
    integration.validate();
    classify.validate();
}

std::vector<double> sweep_grid(double r_min, double r_max, std::size_t n_points)
{
    std::vector<double> out;
    out.reserve(n_points);
    if (n_points == 1) {
        out.push_back(r_min);
        return out;
    }
    const double ratio = std::log(r_max / r_min);
    for (std::size_t k = 0; k < n_points; ++k) {
        out.push_back(k + 1 == n_points
                          ? r_max
                          : r_min * std::exp(ratio * static_cast<double>(k) / static_cast<double>(n_points - 1)));
    }
    return out;
}

std::uint64_t point_seed(std::uint64_t seed, std::size_t index) noexcept
{
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index)));
}

std::vector<SweepPoint> sweep(const StateTable& table, const SweepConfig& cfg)
{
    cfg.validate();
    const auto grid = sweep_grid(cfg.r_min, cfg.r_max, cfg.n_points);

    std::optional<CircuitParams> fixed_params;
    if (cfg.mode == SweepMode::fixed) {
        const DesignReport ref = design_circuit(state_at(table, cfg.reference_r_prog), cfg.design);
        if (const auto failure = ref.first_failure()) {
            throw Error(ErrorKind::infeasible, "reference design fails check " + failure->name);
        }
        fixed_params = ref.params;
    }

    auto run_point = [&](std::size_t index) {
        SweepPoint point{grid[index], {}, {}, point_seed(cfg.seed, index), false, {}};
        try {
            const DeviceState state = state_at(table, point.r_prog);
            const DevicePoly poly = perturb(state.poly(), cfg.sigma, point.seed);
            std::optional<CircuitParams> params;
            if (fixed_params) {
                params = fixed_params->with_device(poly);
            } else {
                const DesignReport rep = design_circuit(
                    DeviceState(point.r_prog, state.v_set_mag(), state.v_stop(), poly.coeffs()), cfg.design);
                if (const auto failure = rep.first_failure()) {
                    point.note = "design check failed: " + failure->name;
                    return point;
                }
                params = rep.params;
            }
            const SimulationResult sim = simulate(*params, cfg.init, cfg.integration, cfg.classify);
            point.verdict = sim.verdict;
            point.soa_event = sim.trajectory.has_event(EventKind::soa_low) ||
                              sim.trajectory.has_event(EventKind::soa_high);
            point.extrema.reserve(sim.extrema.size());
            for (const auto& e : sim.extrema) {
                point.extrema.push_back(e.value);
            }
        } catch (const Error& e) {
            point.verdict = TrajectoryClass{};
            point.note = e.what();
        }
        return point;
    };

    std::vector<std::optional<SweepPoint>> results(grid.size());
    unsigned n_threads = cfg.threads != 0 ? cfg.threads : std::max(1U, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, grid.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < grid.size(); k = next++) {
            results[k] = run_point(k);
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker);
        }
    }

    std::vector<SweepPoint> out;
    out.reserve(results.size());
    for (auto& r : results) {
        out.push_back(std::move(*r));
    }
    return out;
}

}  // namespace memchua
