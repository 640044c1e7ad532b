#pragma once

// Config-driven front end. parse_config turns a JSON document into a RunConfig
// with every default filled and every violation reported by field path; dispatch
// runs the named pipeline, writes its output, and returns the process exit code:
// 0 success, 1 verification failure, 2 flow breakdown (partial trace written),
// 3 config or input error. The qf binary is a thin argv wrapper around these two
// functions, so the whole contract is unit-testable in process.
//
// Outputs are byte-deterministic for a fixed config. The one nod to reality:
// the suite report omits wall-clock times (the acceptance binary prints them
// instead), because a timed report could never be reproducible.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qf/serialize.hpp"
#include "qf/suite.hpp"

namespace qf {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Command { shape, flow, xi, verify, suite };

inline const char* command_name(Command c) {
    switch (c) {
        case Command::shape: return "shape";
        case Command::flow: return "flow";
        case Command::xi: return "xi";
        case Command::verify: return "verify";
        case Command::suite: return "suite";
    }
    return "?";
}

inline Command command_from_name(const std::string& s) {
    if (s == "shape") return Command::shape;
    if (s == "flow") return Command::flow;
    if (s == "xi") return Command::xi;
    if (s == "verify") return Command::verify;
    if (s == "suite") return Command::suite;
    throw config_error("command: expected one of shape|flow|xi|verify|suite, got \"" + s + "\"");
}

struct XiConfig {
    XiKind kind = XiKind::parametric;
    int k = 2;
    int l = 0;
    int knots = 2000;
    int samples = 512;
};

struct VerifyConfig {
    EnvironmentStamp env;
    bool is_sweep = false;
    SweepSpec sweep;  // mode and env are stamped in at dispatch time
};

struct SuiteConfig {
    double tolerance_scale = 1.0;
    std::vector<int> only;  // criterion ids; empty runs all ten
};

struct OutputConfig {
    std::string path;    // empty writes to the primary stream
    std::string format;  // resolved to the per-command default by parse_config
};

struct RunConfig {
    Command command = Command::shape;
    int n = 2;
    GridMode mode = GridMode::axisym;
    int resolution = 64;
    ShapeSpec shape;
    std::vector<MonitorSpec> monitors;
    FlowSpec flow;
    XiConfig xi;
    VerifyConfig verify;
    SuiteConfig suite;
    OutputConfig output;
    // flag-only knobs, never read from the JSON document
    bool dry_run = false;
    bool verbose = false;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& path,
                           std::initializer_list<const char*> keys) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known)
            throw config_error("unknown field \"" + (path.empty() ? "" : path + ".") + it.key()
                               + "\"");
    }
}

inline const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

inline double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw config_error(path + ": expected a number");
    return j.get<double>();
}

inline int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw config_error(path + ": expected an integer");
    return j.get<int>();
}

inline std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw config_error(path + ": expected a string");
    return j.get<std::string>();
}

inline const json& as_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw config_error(path + ": expected an object");
    return j;
}

inline const json& as_array(const json& j, const std::string& path) {
    if (!j.is_array()) throw config_error(path + ": expected an array");
    return j;
}

inline void parse_shape(const json& j, ShapeSpec& shape) {
    reject_unknown(j, "shape", {"family", "rho0", "eps", "ell"});
    std::string family;
    if (const json* f = find(j, "family")) family = as_string(*f, "shape.family");
    if (const json* f = find(j, "rho0")) shape.rho0 = as_number(*f, "shape.rho0");
    if (const json* f = find(j, "eps")) shape.eps = as_number(*f, "shape.eps");
    if (const json* f = find(j, "ell")) shape.ell = as_int(*f, "shape.ell");
    if (!(shape.rho0 > 0.0) || !(shape.rho0 < pi / 2.0))
        throw config_error("shape.rho0: must lie in (0, pi/2)");
    if (!std::isfinite(shape.eps)) throw config_error("shape.eps: must be finite");
    if (shape.ell < 0) throw config_error("shape.ell: must be a nonnegative integer");
    if (family == "geodesic_sphere" && shape.eps != 0.0)
        throw config_error("shape.family: geodesic_sphere requires eps = 0");
    if (family == "perturbed_sphere" && shape.eps == 0.0)
        throw config_error("shape.family: perturbed_sphere requires a nonzero eps");
    if (!family.empty() && family != "geodesic_sphere" && family != "perturbed_sphere")
        throw config_error("shape.family: expected geodesic_sphere or perturbed_sphere");
}

inline void parse_monitor(const json& j, const std::string& path, int n, MonitorSpec& m) {
    reject_unknown(as_object(j, path), path, {"kind", "k"});
    const json* kind = find(j, "kind");
    if (!kind) throw config_error(path + ".kind: required");
    const std::string name = as_string(*kind, path + ".kind");
    if (name == "minkowski_sq") {
        m.kind = MonitorSpec::minkowski_sq;
        m.k = 0;
        if (find(j, "k")) throw config_error(path + ".k: minkowski_sq takes no index");
    } else if (name == "pair") {
        m.kind = MonitorSpec::pair;
        const json* k = find(j, "k");
        if (!k) throw config_error(path + ".k: required for pair monitors");
        m.k = as_int(*k, path + ".k");
        if (m.k < 1 || m.k > n - 1)
            throw config_error(path + ".k: pair monitor needs 1 <= k <= n-1");
    } else {
        throw config_error(path + ".kind: expected minkowski_sq or pair");
    }
}

inline void parse_flow(const json& j, int n, FlowSpec& spec, std::vector<MonitorSpec>& monitors) {
    reject_unknown(j, "flow",
                   {"law", "k", "dt_init", "cfl_safety", "dt_min", "dt_max", "t_max",
                    "equator_tol", "stationarity_tol", "record_interval", "monitors"});
    if (const json* f = find(j, "law")) {
        try {
            spec.law = flow_law_from_name(as_string(*f, "flow.law"));
        } catch (const std::invalid_argument& e) {
            throw config_error(std::string("flow.law: ") + e.what());
        }
    }
    if (const json* f = find(j, "k")) spec.k = as_int(*f, "flow.k");
    if (const json* f = find(j, "dt_init")) spec.dt_init = as_number(*f, "flow.dt_init");
    if (const json* f = find(j, "cfl_safety")) spec.cfl_safety = as_number(*f, "flow.cfl_safety");
    if (const json* f = find(j, "dt_min")) spec.dt_min = as_number(*f, "flow.dt_min");
    if (const json* f = find(j, "dt_max")) spec.dt_max = as_number(*f, "flow.dt_max");
    if (const json* f = find(j, "t_max")) spec.t_max = as_number(*f, "flow.t_max");
    if (const json* f = find(j, "equator_tol"))
        spec.equator_tol = as_number(*f, "flow.equator_tol");
    if (const json* f = find(j, "stationarity_tol"))
        spec.stationarity_tol = as_number(*f, "flow.stationarity_tol");
    if (const json* f = find(j, "record_interval"))
        spec.record_interval = as_number(*f, "flow.record_interval");
    try {
        validate_flow_spec(spec, n);
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("flow: ") + e.what());
    }
    if (const json* f = find(j, "monitors")) {
        const json& arr = as_array(*f, "flow.monitors");
        monitors.resize(arr.size());
        for (std::size_t i = 0; i < arr.size(); ++i)
            parse_monitor(arr[i], "flow.monitors[" + std::to_string(i) + "]", n, monitors[i]);
    }
}

inline void parse_xi(const json& j, int n, XiConfig& xi) {
    reject_unknown(j, "xi", {"kind", "k", "l", "knots", "samples"});
    if (const json* f = find(j, "kind")) {
        const std::string name = as_string(*f, "xi.kind");
        if (name == "parametric")
            xi.kind = XiKind::parametric;
        else if (name == "closed_minkowski_sq")
            xi.kind = XiKind::closed_minkowski_sq;
        else if (name == "closed_20")
            xi.kind = XiKind::closed_20;
        else if (name == "ode")
            xi.kind = XiKind::ode;
        else
            throw config_error(
                "xi.kind: expected parametric|closed_minkowski_sq|closed_20|ode, got \"" + name
                + "\"");
    }
    if (const json* f = find(j, "k")) xi.k = as_int(*f, "xi.k");
    if (const json* f = find(j, "l")) xi.l = as_int(*f, "xi.l");
    if (const json* f = find(j, "knots")) xi.knots = as_int(*f, "xi.knots");
    if (const json* f = find(j, "samples")) xi.samples = as_int(*f, "xi.samples");
    if (xi.kind == XiKind::parametric) {
        if (xi.k < 0 || xi.k > n - 1) throw config_error("xi.k: needs 0 <= k <= n-1");
        if (xi.l < -1 || xi.l >= xi.k) throw config_error("xi.l: needs -1 <= l < k");
        if (xi.knots < 200) throw config_error("xi.knots: need at least 200");
    } else if (xi.kind != XiKind::closed_minkowski_sq && n < 3) {
        throw config_error("xi.kind: the area-to-A2 comparison needs n >= 3");
    }
    if (xi.samples < 1 || xi.samples > 1000000)
        throw config_error("xi.samples: must lie in 1..1000000");
}

inline void parse_verify(const json& j, const RunConfig& cfg, VerifyConfig& v) {
    reject_unknown(j, "verify", {"pass_tol", "saturation_floor", "xi_knots", "sweep"});
    if (const json* f = find(j, "pass_tol")) v.env.pass_tol = as_number(*f, "verify.pass_tol");
    if (const json* f = find(j, "saturation_floor"))
        v.env.saturation_floor = as_number(*f, "verify.saturation_floor");
    if (const json* f = find(j, "xi_knots")) v.env.xi_knots = as_int(*f, "verify.xi_knots");
    if (!(v.env.pass_tol > 0.0)) throw config_error("verify.pass_tol: must be positive");
    if (!(v.env.saturation_floor > 0.0))
        throw config_error("verify.saturation_floor: must be positive");
    if (v.env.xi_knots < 200) throw config_error("verify.xi_knots: need at least 200");
    if (const json* f = find(j, "sweep")) {
        const json& sw = as_object(*f, "verify.sweep");
        reject_unknown(sw, "verify.sweep",
                       {"n_list", "rho0_list", "eps_list", "ell_list", "resolutions"});
        v.is_sweep = true;
        const auto ints = [&](const char* key, std::vector<int> fallback) {
            const json* a = find(sw, key);
            if (!a) return fallback;
            const std::string path = std::string("verify.sweep.") + key;
            const json& arr = as_array(*a, path);
            if (arr.empty()) throw config_error(path + ": must not be empty");
            std::vector<int> out;
            for (std::size_t i = 0; i < arr.size(); ++i)
                out.push_back(as_int(arr[i], path + "[" + std::to_string(i) + "]"));
            return out;
        };
        const auto numbers = [&](const char* key, std::vector<double> fallback) {
            const json* a = find(sw, key);
            if (!a) return fallback;
            const std::string path = std::string("verify.sweep.") + key;
            const json& arr = as_array(*a, path);
            if (arr.empty()) throw config_error(path + ": must not be empty");
            std::vector<double> out;
            for (std::size_t i = 0; i < arr.size(); ++i)
                out.push_back(as_number(arr[i], path + "[" + std::to_string(i) + "]"));
            return out;
        };
        v.sweep.n_list = ints("n_list", {cfg.n});
        v.sweep.rho0_list = numbers("rho0_list", {cfg.shape.rho0});
        v.sweep.eps_list = numbers("eps_list", {cfg.shape.eps});
        v.sweep.ell_list = ints("ell_list", {cfg.shape.ell});
        v.sweep.resolutions = ints("resolutions", {cfg.resolution});
        for (int nn : v.sweep.n_list)
            if (nn < 2) throw config_error("verify.sweep.n_list: entries must be at least 2");
        for (int res : v.sweep.resolutions)
            if (res < 16)
                throw config_error("verify.sweep.resolutions: entries must be at least 16");
    }
}

inline void parse_suite(const json& j, SuiteConfig& s) {
    reject_unknown(j, "suite", {"tolerance_scale", "only"});
    if (const json* f = find(j, "tolerance_scale"))
        s.tolerance_scale = as_number(*f, "suite.tolerance_scale");
    if (!(s.tolerance_scale > 0.0)) throw config_error("suite.tolerance_scale: must be positive");
    if (const json* f = find(j, "only")) {
        const json& arr = as_array(*f, "suite.only");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const int id = as_int(arr[i], "suite.only[" + std::to_string(i) + "]");
            if (id < 1 || id > 10)
                throw config_error("suite.only[" + std::to_string(i)
                                   + "]: criterion ids run from 1 to 10");
            s.only.push_back(id);
        }
    }
}

inline std::string default_format(Command c) {
    switch (c) {
        case Command::xi: return "csv";
        case Command::suite: return "text";
        default: return "json";
    }
}

inline void parse_output(const json& j, Command command, OutputConfig& out) {
    reject_unknown(j, "output", {"path", "format"});
    if (const json* f = find(j, "path")) out.path = as_string(*f, "output.path");
    if (const json* f = find(j, "format")) out.format = as_string(*f, "output.format");
    if (out.format.empty()) out.format = default_format(command);
    const auto allowed = [&]() -> std::vector<std::string> {
        switch (command) {
            case Command::shape: return {"json"};
            case Command::flow: return {"json", "csv"};
            case Command::xi: return {"csv", "json"};
            case Command::verify: return {"json", "csv", "text"};
            case Command::suite: return {"text", "json"};
        }
        return {};
    }();
    if (std::find(allowed.begin(), allowed.end(), out.format) == allowed.end()) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : "|") + a;
        throw config_error("output.format: " + std::string(command_name(command)) + " supports "
                           + list + ", got \"" + out.format + "\"");
    }
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw config_error("config root must be a JSON object");
    detail::reject_unknown(
        doc, "", {"command", "n", "mode", "resolution", "shape", "flow", "xi", "verify", "suite",
                  "output"});

    RunConfig cfg;
    const nlohmann::json* cmd = detail::find(doc, "command");
    if (!cmd) throw config_error("command: required");
    cfg.command = command_from_name(detail::as_string(*cmd, "command"));

    if (const auto* f = detail::find(doc, "n")) cfg.n = detail::as_int(*f, "n");
    if (cfg.n < 2) throw config_error("n: must be at least 2");
    if (const auto* f = detail::find(doc, "mode")) {
        try {
            cfg.mode = grid_mode_from_name(detail::as_string(*f, "mode"));
        } catch (const std::invalid_argument& e) {
            throw config_error(std::string("mode: ") + e.what());
        }
    }
    if (const auto* f = detail::find(doc, "resolution"))
        cfg.resolution = detail::as_int(*f, "resolution");
    if (cfg.resolution < 16) throw config_error("resolution: must be an integer >= 16");
    if (cfg.mode == GridMode::full2d && cfg.n != 2)
        throw config_error("mode: full2d grids are only available at n = 2");

    if (const auto* f = detail::find(doc, "shape"))
        detail::parse_shape(detail::as_object(*f, "shape"), cfg.shape);
    if (const auto* f = detail::find(doc, "flow"))
        detail::parse_flow(detail::as_object(*f, "flow"), cfg.n, cfg.flow, cfg.monitors);
    else if (cfg.command == Command::flow)
        validate_flow_spec(cfg.flow, cfg.n);  // defaults are valid for every n >= 2, but be sure
    if (const auto* f = detail::find(doc, "xi"))
        detail::parse_xi(detail::as_object(*f, "xi"), cfg.n, cfg.xi);
    else if (cfg.command == Command::xi && cfg.n < 3)
        throw config_error("xi.k: the default comparison (k=2) needs n >= 3; set xi.k and xi.l");
    if (const auto* f = detail::find(doc, "verify"))
        detail::parse_verify(detail::as_object(*f, "verify"), cfg, cfg.verify);
    if (const auto* f = detail::find(doc, "suite"))
        detail::parse_suite(detail::as_object(*f, "suite"), cfg.suite);
    if (const auto* f = detail::find(doc, "output"))
        detail::parse_output(detail::as_object(*f, "output"), cfg.command, cfg.output);
    else
        cfg.output.format = detail::default_format(cfg.command);
    return cfg;
}

namespace detail {

inline void emit(const RunConfig& cfg, std::ostream& out, std::ostream& diag,
                 const std::string& content) {
    if (cfg.output.path.empty()) {
        out << content;
        return;
    }
    write_text_file(cfg.output.path, content);
    if (cfg.verbose) diag << "wrote " << cfg.output.path << "\n";
}

inline std::string shape_eval_json(const RunConfig& cfg, const GeometryFields& f,
                                   const QuermassVector& q) {
    JsonWriter w;
    w.begin_object();
    w.key("mode").value(grid_mode_name(cfg.mode));
    w.key("n").value(cfg.n);
    w.key("resolution").value(cfg.resolution);
    w.key("family").value(cfg.shape.family());
    w.key("rho0").value(cfg.shape.rho0);
    w.key("eps").value(cfg.shape.eps);
    w.key("ell").value(cfg.shape.ell);
    w.key("nodes").value(static_cast<std::uint64_t>(f.nodes));
    w.key("min_kappa").value(f.min_kappa);
    w.key("quermass").begin_object();
    for (int k = -1; k <= cfg.n - 1; ++k) w.key(std::to_string(k)).value(q.a(k));
    w.end_object();
    w.key("sigma_integrals").begin_array();
    for (int m = 0; m <= cfg.n; ++m) {
        double s = 0.0;
        for (std::size_t i = 0; i < f.nodes; ++i) s += f.sig_at(i, m) * f.dmu[i];
        w.value(s);
    }
    w.end_array();
    w.end_object();
    return w.str() + "\n";
}

inline XiFunction build_xi(const RunConfig& cfg) {
    switch (cfg.xi.kind) {
        case XiKind::parametric:
            return xi_parametric(cfg.n, cfg.xi.k, cfg.xi.l, cfg.xi.knots);
        case XiKind::ode: return xi_ode_20(cfg.n);
        default: return xi_closed_function(cfg.n, cfg.xi.kind);
    }
}

inline std::string xi_dump_json(const XiFunction& f, const std::vector<double>& ss) {
    JsonWriter w;
    w.begin_object();
    w.key("kind").value(xi_kind_name(f.kind));
    w.key("n").value(f.n);
    w.key("k").value(f.k);
    w.key("l").value(f.l);
    w.key("squared").value(f.squared);
    w.key("domain_hi").value(f.domain_hi);
    w.key("s").begin_array();
    for (double s : ss) w.value(s);
    w.end_array();
    w.key("xi").begin_array();
    for (double s : ss) w.value(f.eval(s));
    w.end_array();
    w.end_object();
    return w.str() + "\n";
}

inline std::string suite_report_json(const SuiteReport& rep) {
    JsonWriter w;
    w.begin_object();
    w.key("results").begin_array();
    for (const auto& r : rep.results) {
        w.begin_object();
        w.key("id").value(r.id);
        w.key("title").value(r.title);
        w.key("pass").value(r.pass);
        w.key("detail").value(r.detail);
        w.end_object();
    }
    w.end_array();
    w.key("all_pass").value(rep.all_pass());
    w.end_object();
    return w.str() + "\n";
}

inline std::string suite_report_text(const SuiteReport& rep) {
    std::string out;
    std::size_t passed = 0;
    for (const auto& r : rep.results) {
        out += sfmt("%s  %2d. %-38s %s\n", r.pass ? "pass" : "FAIL", r.id, r.title.c_str(),
                    r.detail.c_str());
        if (r.pass) ++passed;
    }
    out += sfmt("%s: %zu/%zu criteria passed\n", rep.all_pass() ? "PASS" : "FAIL", passed,
                rep.results.size());
    return out;
}

inline std::string suite_plan_text() {
    std::string out;
    for (const CriterionInfo& c : acceptance_criteria())
        out += sfmt("%2d. %-38s budget %.0fs\n", c.id, c.title, c.budget_seconds);
    return out;
}

inline int run_shape(const RunConfig& cfg, std::ostream& out, std::ostream& diag) {
    const RadialGraph g = build_shape(cfg.shape, cfg.mode, cfg.n, cfg.resolution);
    const GeometryFields f = compute_geometry(g);
    emit(cfg, out, diag, shape_eval_json(cfg, f, quermass_vector(f)));
    return 0;
}

inline int run_flow(const RunConfig& cfg, std::ostream& out, std::ostream& diag) {
    const RadialGraph g = build_shape(cfg.shape, cfg.mode, cfg.n, cfg.resolution);
    const auto render = [&](const FlowTrace& tr) {
        return cfg.output.format == "csv" ? trace_csv(tr) : trace_json(tr);
    };
    try {
        const FlowTrace tr = flow_run(g, cfg.flow, cfg.monitors);
        emit(cfg, out, diag, render(tr));
        return 0;
    } catch (const flow_breakdown& e) {
        emit(cfg, out, diag, render(e.partial));
        diag << "flow breakdown: " << e.what() << "\n";
        return 2;
    }
}

inline int run_xi(const RunConfig& cfg, std::ostream& out, std::ostream& diag) {
    const XiFunction f = build_xi(cfg);
    std::vector<double> ss(static_cast<std::size_t>(cfg.xi.samples));
    for (int i = 1; i <= cfg.xi.samples; ++i)
        ss[static_cast<std::size_t>(i - 1)] = f.domain_hi * i / (cfg.xi.samples + 1.0);
    emit(cfg, out, diag,
         cfg.output.format == "json" ? xi_dump_json(f, ss) : xi_table_csv(f, ss));
    return 0;
}

inline int run_verify(const RunConfig& cfg, std::ostream& out, std::ostream& diag) {
    if (cfg.verify.is_sweep) {
        SweepSpec spec = cfg.verify.sweep;
        spec.mode = cfg.mode;
        spec.env = cfg.verify.env;
        const SweepResult res = sweep(spec);
        const std::string content = cfg.output.format == "csv"   ? sweep_csv(res)
                                    : cfg.output.format == "text" ? sweep_text(res)
                                                                   : sweep_json(res);
        emit(cfg, out, diag, content);
        return res.summary.all_pass() ? 0 : 1;
    }
    const VerificationReport rep =
        verify_inequalities(cfg.shape, cfg.mode, cfg.n, cfg.resolution, cfg.verify.env);
    const std::string content = cfg.output.format == "csv"   ? report_csv(rep)
                                : cfg.output.format == "text" ? report_text(rep)
                                                               : report_json(rep);
    emit(cfg, out, diag, content);
    return rep.all_pass() ? 0 : 1;
}

inline int run_suite(const RunConfig& cfg, std::ostream& out, std::ostream& diag) {
    if (cfg.dry_run) {
        emit(cfg, out, diag, suite_plan_text());
        return 0;
    }
    SuiteOptions opt;
    opt.tolerance_scale = cfg.suite.tolerance_scale;
    opt.only = cfg.suite.only;
    const SuiteProgress progress = [&](const CriterionResult& r) {
        if (cfg.verbose)
            diag << sfmt("%s  %2d. %s (%.1fs)\n", r.pass ? "pass" : "FAIL", r.id, r.title.c_str(),
                         r.seconds);
    };
    const SuiteReport rep = run_acceptance_suite(opt, progress);
    emit(cfg, out, diag,
         cfg.output.format == "json" ? suite_report_json(rep) : suite_report_text(rep));
    return rep.all_pass() ? 0 : 1;
}

}  // namespace detail

inline int dispatch(const RunConfig& cfg, std::ostream& out = std::cout,
                    std::ostream& diag = std::cerr) {
    try {
        switch (cfg.command) {
            case Command::shape: return detail::run_shape(cfg, out, diag);
            case Command::flow: return detail::run_flow(cfg, out, diag);
            case Command::xi: return detail::run_xi(cfg, out, diag);
            case Command::verify: return detail::run_verify(cfg, out, diag);
            case Command::suite: return detail::run_suite(cfg, out, diag);
        }
    } catch (const std::exception& e) {
        // bad geometry, out-of-domain parameters, unwritable paths: the config
        // named something the pipeline cannot do
        diag << command_name(cfg.command) << ": " << e.what() << "\n";
        return 3;
    }
    return 3;
}

}  // namespace qf
