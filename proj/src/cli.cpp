#include "memchua/cli.hpp"

#include "memchua/analysis.hpp"
#include "memchua/config.hpp"
#include "memchua/csv_io.hpp"
#include "memchua/design.hpp"
#include "memchua/error.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <optional>

namespace memchua::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<std::size_t> n_points;
    std::optional<unsigned> threads;
    // fit
    std::string iv_path;
    std::optional<double> v_set;
    std::optional<double> v_stop;
};

RunConfig load_run_config(const Options& opt)
{
    std::string path = opt.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') {
            path = env;
        }
    }
    RunConfig cfg = path.empty() ? RunConfig{} : load_config(path);
    if (opt.seed) {
        cfg.seed = *opt.seed;
    }
    if (opt.mode) {
        cfg.sweep.mode = *opt.mode == "redesign" ? SweepMode::redesign : SweepMode::fixed;
    }
    if (opt.n_points) {
        cfg.sweep.n_points = *opt.n_points;
    }
    if (opt.threads) {
        cfg.sweep.threads = *opt.threads;
    }
    return cfg;
}

std::ofstream open_output(const fs::path& dir, const std::string& name)
{
    fs::create_directories(dir);
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) {
        throw Error(ErrorKind::invalid_argument, "cannot write " + (dir / name).string());
    }
    return f;
}

json to_json(const EquilibriumPoint& e)
{
    json ev = json::array();
    for (const auto& x : e.eigenvalues) {
        ev.push_back({{"re", x.real()}, {"im", x.imag()}});
    }
    const auto verdict = classify_stability(e);
    return {{"label", to_string(e.label)},  {"v1_V", e.state.v1},        {"v2_V", e.state.v2},
            {"iL_A", e.state.i_l},          {"eigenvalues", ev},         {"unstable", verdict.unstable},
            {"saddle_focus", verdict.saddle_focus}, {"in_window", e.in_window}};
}

json to_json(const TrajectoryClass& c)
{
    json j{{"label", to_string(c.label)},
           {"scroll_side", to_string(c.scroll_side)},
           {"n_extrema_clusters", c.n_extrema_clusters}};
    if (c.lyapunov) {
        j["lambda1_per_s"] = c.lyapunov->per_second;
        j["lambda1_dimensionless"] = c.lyapunov->dimensionless;
    } else {
        j["lambda1_per_s"] = nullptr;
        j["lambda1_dimensionless"] = nullptr;
    }
    return j;
}

json design_json(const DesignReport& rep)
{
    json checks = json::array();
    for (const auto& c : rep.checks) {
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"detail", c.detail}});
    }
    json eq = json::array();
    for (const auto& e : rep.equilibria) {
        eq.push_back(to_json(e));
    }
    const auto& p = rep.params;
    return {{"passed", rep.all_passed()},
            {"R_ohm", rep.r},
            {"R_N_ohm", rep.r_n},
            {"L_H", p.l()},
            {"C1_F", p.c1()},
            {"C2_F", p.c2()},
            {"G_S", p.g()},
            {"G_N_S", p.g_n()},
            {"alpha", alpha_of(p)},
            {"beta", beta_of(p)},
            {"checks", checks},
            {"equilibria", eq}};
}

void write_json(const fs::path& dir, const std::string& name, const json& j)
{
    auto f = open_output(dir, name);
    f << j.dump(2) << '\n';
}

// Circuit for simulate/equilibria: the explicit override or the computed design.
CircuitParams build_circuit(const RunConfig& cfg, const DeviceState& state)
{
    if (cfg.circuit) {
        const auto& c = *cfg.circuit;
        return CircuitParams(c.c1, c.c2, c.l, 1.0 / c.r, 1.0 / c.r_n, state.poly());
    }
    const DesignReport rep = design_circuit(state, cfg.design);
    if (const auto failure = rep.first_failure()) {
        throw Error(ErrorKind::infeasible, failure->name + ": design validation failed");
    }
    return rep.params;
}

int cmd_fit(const Options& opt, std::ostream& out)
{
    const auto samples = io::read_iv_csv(fs::path(opt.iv_path));
    if (samples.empty()) {
        throw Error(ErrorKind::underdetermined, "no samples in " + opt.iv_path);
    }
    const auto [v_lo, v_hi] = std::ranges::minmax(samples, {}, &IVSample::v);
    double v_set = 0.0;
    if (opt.v_set) {
        v_set = *opt.v_set;
    } else if (v_lo.v < 0.0) {
        v_set = -v_lo.v;
    } else {
        throw Error(ErrorKind::parse, "no negative voltages to infer |V_SET| from; pass --v-set");
    }
    const double v_stop = opt.v_stop.value_or(v_hi.v > 0.0 ? v_hi.v : 0.0);
    if (!(v_stop > 0.0)) {
        throw Error(ErrorKind::parse, "no positive voltages to infer V_STOP from; pass --v-stop");
    }

    const FitWindow window = default_fit_window(v_set, v_stop);
    const FitReport fit = fit_poly(samples, window.v_min, window.v_max);
    const DeviceState card(read_resistance(fit.poly), v_set, v_stop, fit.poly.coeffs());

    const fs::path dir(opt.out_dir);
    {
        auto f = open_output(dir, "device_card.csv");
        const std::vector<DeviceState> rows{card};
        io::write_state_table_csv(f, rows);
    }
    write_json(dir, "fit_report.json",
               {{"samples_used", fit.samples_used},
                {"window_V", {window.v_min, window.v_max}},
                {"coefficients", fit.poly.coeffs()},
                {"r_prog_ohm", card.r_prog()},
                {"rms_residual_A", fit.rms_residual},
                {"max_abs_residual_A", fit.max_abs_residual},
                {"condition", fit.condition}});
    out << "fit: " << fit.samples_used << " samples, rms residual " << fit.rms_residual << " A, r_prog "
        << card.r_prog() << " ohm\n";
    return kOk;
}

int cmd_design(const Options& opt, std::ostream& out, std::ostream& err)
{
    const RunConfig cfg = load_run_config(opt);
    const StateTable table = resolve_table(cfg);
    const DeviceState state = resolve_state(cfg, table);
    const fs::path dir(opt.out_dir);
    DesignReport rep = [&] {
        try {
            return design_circuit(state, cfg.design);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::safe_window || e.kind() == ErrorKind::infeasible) {
                const std::string name = e.kind() == ErrorKind::safe_window ? "safe-window" : "infeasible-G";
                write_json(dir, "design.json", {{"passed", false}, {"failure", name}, {"message", e.what()}});
            }
            throw;
        }
    }();
    write_json(dir, "design.json", design_json(rep));
    out << "R = " << rep.r << " ohm, R_N = " << rep.r_n << " ohm, L = " << rep.params.l() << " H, C2 = "
        << rep.params.c2() << " F\n";
    if (const auto failure = rep.first_failure()) {
        err << "design check failed: " << failure->name << " (" << failure->detail << ", value " << failure->value
            << ")\n";
        return kDesignFailure;
    }
    return kOk;
}

int cmd_equilibria(const Options& opt, std::ostream& out)
{
    const RunConfig cfg = load_run_config(opt);
    const StateTable table = resolve_table(cfg);
    const CircuitParams params = build_circuit(cfg, resolve_state(cfg, table));
    const auto eq = find_equilibria(params);

    auto f = open_output(fs::path(opt.out_dir), "equilibria.csv");
    f << "label,v1_V,v2_V,iL_A,re1,im1,re2,im2,re3,im3,unstable,saddle_focus,in_window\n";
    for (const auto& e : eq) {
        const auto verdict = classify_stability(e);
        f << to_string(e.label) << ',' << io::format_number(e.state.v1) << ',' << io::format_number(e.state.v2)
          << ',' << io::format_number(e.state.i_l);
        for (const auto& x : e.eigenvalues) {
            f << ',' << io::format_number(x.real()) << ',' << io::format_number(x.imag());
        }
        f << ',' << verdict.unstable << ',' << verdict.saddle_focus << ',' << e.in_window << '\n';
        out << to_string(e.label) << " v1 = " << e.state.v1 << " V " << (verdict.unstable ? "unstable" : "stable")
            << '\n';
    }
    return kOk;
}

int cmd_simulate(const Options& opt, std::ostream& out, std::ostream& err)
{
    const RunConfig cfg = load_run_config(opt);
    const StateTable table = resolve_table(cfg);
    const DeviceState state = resolve_state(cfg, table);
    const CircuitParams params = build_circuit(cfg, state);
    const SimulationResult sim = simulate(params, cfg.init, cfg.integration, cfg.analysis);

    const fs::path dir(opt.out_dir);
    {
        auto f = open_output(dir, "trajectory.csv");
        io::write_trajectory_csv(f, sim.trajectory);
    }
    {
        auto f = open_output(dir, "events.csv");
        io::write_events_csv(f, sim.trajectory);
    }
    {
        auto f = open_output(dir, "extrema.csv");
        f << io::kBifurcationHeader << '\n';
        std::vector<double> values;
        for (const auto& e : sim.extrema) {
            values.push_back(e.value);
        }
        io::write_bifurcation_rows(f, state.r_prog(), values, sim.verdict.label);
    }
    json summary = to_json(sim.verdict);
    summary["r_prog_ohm"] = state.r_prog();
    summary["stop"] = to_string(sim.trajectory.stop);
    summary["events"] = sim.trajectory.events.size();
    write_json(dir, "classification.json", summary);

    out << "class " << to_string(sim.verdict.label) << ", scroll side " << to_string(sim.verdict.scroll_side);
    if (sim.verdict.lyapunov) {
        out << ", lambda1*R*C2 = " << sim.verdict.lyapunov->dimensionless;
    }
    out << '\n';
    if (sim.trajectory.stop != StopReason::completed) {
        err << "integration stopped early: " << to_string(sim.trajectory.stop) << " at t = " << sim.trajectory.t_final
            << " s\n";
        return kRuntimeFailure;
    }
    return kOk;
}

int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err)
{
    const RunConfig cfg = load_run_config(opt);
    const StateTable table = resolve_table(cfg);
    const auto points = sweep(table, make_sweep_config(cfg, table));

    const fs::path dir(opt.out_dir);
    {
        auto f = open_output(dir, "bifurcation.csv");
        io::write_bifurcation_csv(f, points);
    }
    std::size_t ok = 0;
    {
        auto f = open_output(dir, "sweep_summary.csv");
        f << "r_prog_ohm,class,scroll_side,lambda1_dimensionless,n_clusters,n_extrema,soa_event,seed,note\n";
        for (const auto& p : points) {
            const auto& v = p.verdict;
            if (v.label != TrajectoryLabel::inconclusive) {
                ++ok;
            }
            f << io::format_number(p.r_prog) << ',' << to_string(v.label) << ',' << to_string(v.scroll_side) << ','
              << (v.lyapunov ? io::format_number(v.lyapunov->dimensionless) : std::string()) << ','
              << v.n_extrema_clusters << ',' << p.extrema.size() << ',' << p.soa_event << ',' << p.seed << ',';
            std::string note = p.note;
            std::ranges::replace(note, ',', ';');
            std::ranges::replace(note, '\n', ' ');
            f << note << '\n';
        }
    }
    out << "sweep: " << points.size() << " points, " << ok << " classified\n";
    if (ok == 0) {
        err << "no sweep point produced a verdict\n";
        return kRuntimeFailure;
    }
    return kOk;
}

int exit_code_for(ErrorKind kind, int fallback)
{
    switch (kind) {
    case ErrorKind::parse: return kInputParse;
    case ErrorKind::underdetermined:
    case ErrorKind::singular: return kFitFailure;
    case ErrorKind::infeasible:
    case ErrorKind::safe_window: return kDesignFailure;
    case ErrorKind::divergence: return kRuntimeFailure;
    case ErrorKind::invalid_argument: return fallback;
    }
    return fallback;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Memristor-based Chua circuit design and simulation"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&opt](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON run configuration (default: $MEMCHUA_CONFIG)");
        sub->add_option("--out", opt.out_dir, "Output directory");
        sub->add_option("--seed", opt.seed, "Base seed");
    };

    auto* fit = app.add_subcommand("fit", "Fit the polynomial I-V model to measured samples");
    fit->add_option("iv_csv", opt.iv_path, "CSV with header voltage_V,current_A")->required();
    fit->add_option("--v-set", opt.v_set, "|V_SET| in volts (default: most negative sample)");
    fit->add_option("--v-stop", opt.v_stop, "V_STOP in volts (default: most positive sample)");
    fit->add_option("--out", opt.out_dir, "Output directory");

    auto* design = app.add_subcommand("design", "Compute component values and validate the design");
    add_common(design);
    auto* equilibria = app.add_subcommand("equilibria", "List equilibria and their eigenvalues");
    add_common(equilibria);
    auto* simulate_cmd = app.add_subcommand("simulate", "Integrate and classify one trajectory");
    add_common(simulate_cmd);
    auto* sweep_cmd = app.add_subcommand("sweep", "Bifurcation sweep over programmed resistance");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--mode", opt.mode, "fixed or redesign")->check(CLI::IsMember({"fixed", "redesign"}));
    sweep_cmd->add_option("--n-points", opt.n_points, "Number of resistance values");
    sweep_cmd->add_option("--threads", opt.threads, "Worker threads (0 = hardware concurrency)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kOk : kUsage;
    }

    const int fallback = fit->parsed() ? kFitFailure : kRuntimeFailure;
    try {
        if (fit->parsed()) {
            return cmd_fit(opt, out);
        }
        if (design->parsed()) {
            return cmd_design(opt, out, err);
        }
        if (equilibria->parsed()) {
            return cmd_equilibria(opt, out);
        }
        if (simulate_cmd->parsed()) {
            return cmd_simulate(opt, out, err);
        }
        return cmd_sweep(opt, out, err);
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code_for(e.kind(), fallback);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
}

}  // namespace memchua::cli
