#include "memchua/config.hpp"

#include "memchua/csv_io.hpp"
#include "memchua/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace memchua {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what)
{
    throw Error(ErrorKind::parse, "config: " + what);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object()) {
        fail(where + " must be an object");
    }
    const std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& item : obj.items()) {
        if (!names.contains(item.key())) {
            fail("unknown key '" + item.key() + "' in " + where);
        }
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out)
{
    if (!obj.contains(key)) {
        return;
    }
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(std::string("bad value for '") + key + "': " + e.what());
    }
}

template <typename T>
void read_opt(const json& obj, const char* key, std::optional<T>& out)
{
    if (!obj.contains(key) || obj.at(key).is_null()) {
        return;
    }
    T value{};
    read(obj, key, value);
    out = value;
}

void parse_device(const json& j, const std::filesystem::path& base, DeviceSource& out)
{
    check_keys(j, "device", {"state_table", "coefficients", "r_prog", "v_set", "v_stop"});
    if (j.contains("state_table") && !j.at("state_table").is_null()) {
        std::string path;
        read(j, "state_table", path);
        out.state_table = base / path;
    }
    if (j.contains("coefficients") && !j.at("coefficients").is_null()) {
        std::vector<double> c;
        read(j, "coefficients", c);
        if (c.size() != 5) {
            fail("device.coefficients needs exactly five values p1..p5");
        }
        out.coefficients = DevicePoly::Coefficients{c[0], c[1], c[2], c[3], c[4]};
    }
    read_opt(j, "r_prog", out.r_prog);
    read(j, "v_set", out.v_set);
    read(j, "v_stop", out.v_stop);
}

void parse_integration(const json& j, IntegrationConfig& out)
{
    check_keys(j, "integration",
               {"method", "dt", "abs_tol", "rel_tol", "max_step", "t_end", "t_transient", "record_stride",
                "soa_policy"});
    std::string method = "rk4";
    read(j, "method", method);
    if (method == "rk4") {
        FixedStep fixed;
        read(j, "dt", fixed.dt);
        out.stepping = fixed;
    } else if (method == "adaptive") {
        AdaptiveStep ad;
        read(j, "abs_tol", ad.abs_tol);
        read(j, "rel_tol", ad.rel_tol);
        read(j, "max_step", ad.max_step);
        out.stepping = ad;
    } else {
        fail("integration.method must be 'rk4' or 'adaptive'");
    }
    read(j, "t_end", out.t_end);
    read(j, "t_transient", out.t_transient);
    read(j, "record_stride", out.record_stride);
    std::string policy = out.soa_policy == SoaPolicy::abort ? "abort" : "warn";
    read(j, "soa_policy", policy);
    if (policy == "warn") {
        out.soa_policy = SoaPolicy::warn;
    } else if (policy == "abort") {
        out.soa_policy = SoaPolicy::abort;
    } else {
        fail("integration.soa_policy must be 'warn' or 'abort'");
    }
}

void parse_sweep(const json& j, SweepSettings& out)
{
    check_keys(j, "sweep", {"mode", "r_min", "r_max", "reference_r_prog", "n_points", "sigma", "threads"});
    std::string mode = to_string(out.mode);
    read(j, "mode", mode);
    if (mode == "fixed") {
        out.mode = SweepMode::fixed;
    } else if (mode == "redesign") {
        out.mode = SweepMode::redesign;
    } else {
        fail("sweep.mode must be 'fixed' or 'redesign'");
    }
    read_opt(j, "r_min", out.r_min);
    read_opt(j, "r_max", out.r_max);
    read_opt(j, "reference_r_prog", out.reference_r_prog);
    read(j, "n_points", out.n_points);
    read(j, "sigma", out.sigma);
    read(j, "threads", out.threads);
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(e.what());
    }
    check_keys(doc, "document",
               {"schema_version", "device", "design", "circuit", "integration", "initial_state", "analysis", "sweep",
                "seed"});

    RunConfig cfg;
    read(doc, "schema_version", cfg.schema_version);
    if (cfg.schema_version != kConfigSchemaVersion) {
        fail("unsupported schema_version " + std::to_string(cfg.schema_version));
    }
    if (doc.contains("device")) {
        parse_device(doc.at("device"), base_dir, cfg.device);
    }
    if (doc.contains("design")) {
        const auto& j = doc.at("design");
        check_keys(j, "design", {"v_eq", "c1", "alpha", "beta"});
        read(j, "v_eq", cfg.design.v_eq);
        read(j, "c1", cfg.design.c1);
        read(j, "alpha", cfg.design.alpha);
        read(j, "beta", cfg.design.beta);
    }
    if (doc.contains("circuit") && !doc.at("circuit").is_null()) {
        const auto& j = doc.at("circuit");
        check_keys(j, "circuit", {"c1", "c2", "l", "r", "r_n"});
        for (const char* key : {"c1", "c2", "l", "r", "r_n"}) {
            if (!j.contains(key)) {
                fail(std::string("circuit.") + key + " is required when circuit is given");
            }
        }
        CircuitOverride c{};
        read(j, "c1", c.c1);
        read(j, "c2", c.c2);
        read(j, "l", c.l);
        read(j, "r", c.r);
        read(j, "r_n", c.r_n);
        cfg.circuit = c;
    }
    if (doc.contains("integration")) {
        parse_integration(doc.at("integration"), cfg.integration);
    }
    if (doc.contains("initial_state")) {
        std::vector<double> s;
        read(doc, "initial_state", s);
        if (s.size() != 3) {
            fail("initial_state needs [v1, v2, iL]");
        }
        cfg.init = StateVector{s[0], s[1], s[2]};
    }
    if (doc.contains("analysis")) {
        const auto& j = doc.at("analysis");
        check_keys(j, "analysis",
                   {"visit_fraction", "cluster_fraction", "max_clusters", "lambda_periodic", "fixed_point_eps",
                    "min_samples"});
        read(j, "visit_fraction", cfg.analysis.visit_fraction);
        read(j, "cluster_fraction", cfg.analysis.cluster_fraction);
        read(j, "max_clusters", cfg.analysis.max_clusters);
        read(j, "lambda_periodic", cfg.analysis.lambda_periodic);
        read(j, "fixed_point_eps", cfg.analysis.fixed_point_eps);
        read(j, "min_samples", cfg.analysis.min_samples);
    }
    if (doc.contains("sweep")) {
        parse_sweep(doc.at("sweep"), cfg.sweep);
    }
    read(doc, "seed", cfg.seed);

    try {
        cfg.design.validate();
        cfg.integration.validate();
        cfg.analysis.validate();
    } catch (const Error& e) {
        fail(e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::parse, "cannot open config " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

StateTable resolve_table(const RunConfig& cfg)
{
    if (cfg.device.state_table) {
        return io::read_state_table_csv(*cfg.device.state_table);
    }
    const auto coeffs = cfg.device.coefficients.value_or(kReferenceCoeffs);
    const double r = cfg.device.r_prog.value_or(
        read_resistance(DevicePoly(coeffs, -cfg.device.v_set, cfg.device.v_stop)));
    return StateTable({DeviceState(r, cfg.device.v_set, cfg.device.v_stop, coeffs)});
}

double reference_r_prog(const RunConfig& cfg, const StateTable& table)
{
    if (cfg.device.r_prog) {
        return *cfg.device.r_prog;
    }
    return table.size() == 1 ? table.front().r_prog() : table.back().r_prog();
}

DeviceState resolve_state(const RunConfig& cfg, const StateTable& table)
{
    return state_at(table, reference_r_prog(cfg, table));
}

SweepConfig make_sweep_config(const RunConfig& cfg, const StateTable& table)
{
    SweepConfig out;
    const double ref = cfg.sweep.reference_r_prog.value_or(reference_r_prog(cfg, table));
    out.mode = cfg.sweep.mode;
    out.reference_r_prog = ref;
    out.r_min = cfg.sweep.r_min.value_or(0.3 * ref);
    out.r_max = cfg.sweep.r_max.value_or(1.5 * ref);
    out.n_points = cfg.sweep.n_points;
    out.design = cfg.design;
    out.integration = cfg.integration;
    out.classify = cfg.analysis;
    out.init = cfg.init;
    out.sigma = cfg.sweep.sigma;
    out.seed = cfg.seed;
    out.threads = cfg.sweep.threads;
    return out;
}

}  // namespace memchua
