#include "memchua/design.hpp"

#include "memchua/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace memchua {

namespace {

constexpr double kTraceTol = 1e-9;

}  // namespace

void DesignSpec::validate() const
{
    if (!(v_eq > 0.0 && c1 > 0.0 && alpha > 0.0 && beta > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "design spec needs positive v_eq, c1, alpha and beta");
    }
}

double design_g(const DevicePoly& poly, const DesignSpec& spec)
{
    spec.validate();
    const double chord = eval_current(poly, spec.v_eq) / spec.v_eq - small_signal_conductance(poly);
    const double g = spec.alpha * chord;
    if (!(g > 0.0)) {
        std::ostringstream msg;
        msg << "infeasible-G: i_M(v_eq)/v_eq - p1 = " << chord << " S is not positive at v_eq = " << spec.v_eq
            << " V";
        throw Error(ErrorKind::infeasible, msg.str());
    }
    return g;
}

double design_gn(double g, double c1, double c2, double p1)
{
    return g + (c1 / c2) * g + p1;
}

ReactiveValues design_reactive(double c1, double g, const DesignSpec& spec)
{
    if (!(c1 > 0.0 && g > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "C1 and G must be positive");
    }
    spec.validate();
    const double c2 = spec.alpha * c1;
    return ReactiveValues{c2, c2 / (spec.beta * g * g)};
}

bool DesignReport::all_passed() const noexcept
{
    return std::ranges::all_of(checks, &DesignCheck::passed);
}

std::optional<DesignCheck> DesignReport::first_failure() const
{
    const auto it = std::ranges::find_if(checks, [](const DesignCheck& c) { return !c.passed; });
    if (it == checks.end()) {
        return std::nullopt;
    }
    return *it;
}

DesignReport design_circuit(const DeviceState& state, const DesignSpec& spec)
{
    spec.validate();
    if (spec.v_eq >= state.v_set_mag()) {
        std::ostringstream msg;
        msg << "safe-window: v_eq = " << spec.v_eq << " V is not below |V_SET| = " << state.v_set_mag() << " V";
        throw Error(ErrorKind::safe_window, msg.str());
    }

    const DevicePoly& poly = state.poly();
    const double g = design_g(poly, spec);
    const auto [c2, l] = design_reactive(spec.c1, g, spec);
    const double g_n = design_gn(g, spec.c1, c2, small_signal_conductance(poly));
    CircuitParams params(spec.c1, c2, l, g, g_n, poly);

    std::vector<DesignCheck> checks;
    const double margin = small_signal_conductance(poly) - g_n + g;
    checks.push_back({"existence", existence_condition(params), margin, "p1 - G_N + G must be negative"});

    const double tr = trace(jacobian(params, StateVector{}));
    const double tr_scale = g / spec.c1;
    checks.push_back({"p0-trace", std::abs(tr) <= kTraceTol * tr_scale, tr / tr_scale,
                      "Jacobian trace at P0 relative to G/C1"});

    auto equilibria = find_equilibria(params);
    checks.push_back({"three-equilibria", equilibria.size() == 3, static_cast<double>(equilibria.size()),
                      "number of equilibria found"});

    const auto n_unstable = std::ranges::count_if(
        equilibria, [](const EquilibriumPoint& e) { return classify_stability(e).unstable; });
    checks.push_back({"all-unstable", n_unstable == static_cast<long>(equilibria.size()) && equilibria.size() == 3,
                      static_cast<double>(n_unstable), "number of unstable equilibria"});

    bool in_window = equilibria.size() == 3;
    double worst = 0.0;
    for (const auto& e : equilibria) {
        in_window = in_window && e.in_window;
        worst = std::max(worst, std::abs(e.state.v1));
    }
    checks.push_back({"equilibria-in-window", in_window, worst, "largest |v1| of P+ and P-"});

    return DesignReport{params, 1.0 / g, 1.0 / g_n, std::move(checks), std::move(equilibria)};
}

double alpha_of(const CircuitParams& params) noexcept
{
    return params.c2() / params.c1();
}

double beta_of(const CircuitParams& params) noexcept
{
    return params.c2() / (params.g() * params.g() * params.l());
}

}  // namespace memchua
