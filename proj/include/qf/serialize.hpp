#pragma once

// File formats. Everything written here is deterministic: fixed key order, fixed
// row order, and floats printed at 17 significant digits so a reader recovers the
// exact bits. Emission is hand-rolled for that reason; parsing goes through
// nlohmann::json, which accepts anything we emit.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "flow.hpp"
#include "surface.hpp"
#include "verify.hpp"
#include "xi.hpp"

namespace qf {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

// Minimal JSON emitter. nlohmann prints doubles in shortest-round-trip form, which
// is parse-exact but not the fixed 17-digit convention the file contract quotes,
// so output goes through this instead.
class JsonWriter {
public:
    const std::string& str() const { return out_; }

    JsonWriter& begin_object() {
        item();
        out_ += '{';
        stack_.push_back(true);
        return *this;
    }
    JsonWriter& end_object() {
        out_ += '}';
        stack_.pop_back();
        return *this;
    }
    JsonWriter& begin_array() {
        item();
        out_ += '[';
        stack_.push_back(true);
        return *this;
    }
    JsonWriter& end_array() {
        out_ += ']';
        stack_.pop_back();
        return *this;
    }
    JsonWriter& key(const std::string& k) {
        item();
        quoted(k);
        out_ += ':';
        pending_ = true;
        return *this;
    }
    JsonWriter& value(double x) {
        item();
        if (std::isfinite(x))
            out_ += format_double(x);
        else
            out_ += "null";  // JSON has no NaN/Inf literals
        return *this;
    }
    JsonWriter& value(int x) {
        item();
        out_ += std::to_string(x);
        return *this;
    }
    JsonWriter& value(std::uint64_t x) {
        item();
        out_ += std::to_string(x);
        return *this;
    }
    JsonWriter& value(bool b) {
        item();
        out_ += b ? "true" : "false";
        return *this;
    }
    JsonWriter& value(const std::string& s) {
        item();
        quoted(s);
        return *this;
    }
    JsonWriter& value(const char* s) { return value(std::string(s)); }

private:
    void item() {
        if (pending_) {
            pending_ = false;
            return;
        }
        if (!stack_.empty()) {
            if (!stack_.back()) out_ += ',';
            stack_.back() = false;
        }
    }
    void quoted(const std::string& s) {
        out_ += '"';
        for (char c : s) {
            switch (c) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\t': out_ += "\\t"; break;
                case '\r': out_ += "\\r"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", c);
                        out_ += buf;
                    } else {
                        out_ += c;
                    }
            }
        }
        out_ += '"';
    }

    std::string out_;
    std::vector<bool> stack_;
    bool pending_ = false;
};

// RFC 4180 quoting, applied only when the field needs it
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Radial graphs

inline std::string radial_graph_json(const RadialGraph& g) {
    detail::JsonWriter w;
    w.begin_object();
    w.key("mode").value(grid_mode_name(g.grid.mode));
    w.key("n").value(g.grid.n);
    w.key("resolution").value(g.grid.resolution);
    w.key("rho").begin_array();
    for (double r : g.rho) w.value(r);
    w.end_array().end_object();
    return w.str();
}

inline RadialGraph parse_radial_graph(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    RadialGraph g;
    g.grid = build_grid(grid_mode_from_name(j.at("mode").get<std::string>()),
                        j.at("n").get<int>(), j.at("resolution").get<int>());
    g.rho = j.at("rho").get<std::vector<double>>();
    validate_graph(g);
    return g;
}

// ---------------------------------------------------------------------------
// Quermassintegral vectors

inline std::string quermass_json(const QuermassVector& q) {
    detail::JsonWriter w;
    w.begin_object();
    w.key("n").value(q.n);
    w.key("K").value(q.K);
    w.key("A").begin_object();
    for (int k = -1; k <= q.top_index(); ++k) w.key(std::to_string(k)).value(q.a(k));
    w.end_object().end_object();
    return w.str();
}

// ---------------------------------------------------------------------------
// Comparison-function tables

inline std::string xi_table_csv(const XiFunction& f, const std::vector<double>& ss) {
    std::string out = "s,xi\n";
    for (double s : ss) {
        out += format_double(s);
        out += ',';
        out += format_double(f.eval(s));
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Flow traces

inline std::string monitor_column_name(const MonitorSpec& m) {
    return m.kind == MonitorSpec::minkowski_sq ? std::string("Q_minkowski_sq")
                                               : "Q_pair_" + std::to_string(m.k);
}

inline std::string trace_csv(const FlowTrace& tr) {
    std::string out = "t,dt";
    for (int k = -1; k <= tr.n - 1; ++k) out += ",A_" + std::to_string(k);
    out += ",min_kappa,max_speed";
    for (const auto& m : tr.monitors) out += "," + monitor_column_name(m);
    out += '\n';
    for (const auto& rec : tr.records) {
        out += format_double(rec.t);
        out += ',';
        out += format_double(rec.dt);
        for (int k = -1; k <= tr.n - 1; ++k) {
            out += ',';
            out += format_double(rec.q.a(k));
        }
        out += ',';
        out += format_double(rec.min_kappa);
        out += ',';
        out += format_double(rec.max_speed);
        for (double q : rec.monitors) {
            out += ',';
            out += format_double(q);
        }
        out += '\n';
    }
    return out;
}

inline std::string trace_json(const FlowTrace& tr) {
    detail::JsonWriter w;
    w.begin_object();
    w.key("n").value(tr.n);
    w.key("mode").value(grid_mode_name(tr.mode));
    w.key("resolution").value(tr.resolution);
    w.key("spec").begin_object();
    w.key("law").value(flow_law_name(tr.spec.law));
    w.key("k").value(tr.spec.k);
    w.key("dt_init").value(tr.spec.dt_init);
    w.key("cfl_safety").value(tr.spec.cfl_safety);
    w.key("dt_min").value(tr.spec.dt_min);
    w.key("dt_max").value(tr.spec.dt_max);
    w.key("t_max").value(tr.spec.t_max);
    w.key("equator_tol").value(tr.spec.equator_tol);
    w.key("stationarity_tol").value(tr.spec.stationarity_tol);
    w.key("record_interval").value(tr.spec.record_interval);
    w.end_object();
    w.key("monitors").begin_array();
    for (const auto& m : tr.monitors) {
        w.begin_object();
        w.key("kind").value(m.kind == MonitorSpec::minkowski_sq ? "minkowski_sq" : "pair");
        w.key("k").value(m.k);
        w.end_object();
    }
    w.end_array();
    w.key("stop_reason").value(tr.stop_reason);
    w.key("records").begin_array();
    for (const auto& rec : tr.records) {
        w.begin_object();
        w.key("t").value(rec.t);
        w.key("dt").value(rec.dt);
        w.key("A").begin_object();
        for (int k = -1; k <= tr.n - 1; ++k) w.key(std::to_string(k)).value(rec.q.a(k));
        w.end_object();
        w.key("min_kappa").value(rec.min_kappa);
        w.key("max_speed").value(rec.max_speed);
        w.key("monitors").begin_array();
        for (double q : rec.monitors) w.value(q);
        w.end_array();
        w.key("sigma_integrals").begin_array();
        for (double x : rec.sigma_integrals) w.value(x);
        w.end_array();
        w.key("speed_volume_rate").value(rec.speed_volume_rate);
        w.key("quermass_rates").begin_array();
        for (double x : rec.quermass_rates) w.value(x);
        w.end_array();
        w.key("sigma_rates").begin_array();
        for (double x : rec.sigma_rates) w.value(x);
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.key("final_rho").begin_array();
    for (double r : tr.final_graph.rho) w.value(r);
    w.end_array();
    w.end_object();
    return w.str();
}

inline FlowTrace parse_flow_trace(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    FlowTrace tr;
    tr.n = j.at("n").get<int>();
    tr.mode = grid_mode_from_name(j.at("mode").get<std::string>());
    tr.resolution = j.at("resolution").get<int>();
    const auto& s = j.at("spec");
    tr.spec.law = flow_law_from_name(s.at("law").get<std::string>());
    tr.spec.k = s.at("k").get<int>();
    tr.spec.dt_init = s.at("dt_init").get<double>();
    tr.spec.cfl_safety = s.at("cfl_safety").get<double>();
    tr.spec.dt_min = s.at("dt_min").get<double>();
    tr.spec.dt_max = s.at("dt_max").get<double>();
    tr.spec.t_max = s.at("t_max").get<double>();
    tr.spec.equator_tol = s.at("equator_tol").get<double>();
    tr.spec.stationarity_tol = s.at("stationarity_tol").get<double>();
    tr.spec.record_interval = s.at("record_interval").get<double>();
    for (const auto& m : j.at("monitors")) {
        MonitorSpec ms;
        const std::string kind = m.at("kind").get<std::string>();
        if (kind == "minkowski_sq")
            ms.kind = MonitorSpec::minkowski_sq;
        else if (kind == "pair")
            ms.kind = MonitorSpec::pair;
        else
            throw std::invalid_argument("flow trace: unknown monitor kind '" + kind + "'");
        ms.k = m.at("k").get<int>();
        tr.monitors.push_back(ms);
    }
    tr.stop_reason = j.at("stop_reason").get<std::string>();
    for (const auto& r : j.at("records")) {
        TraceRecord rec;
        rec.t = r.at("t").get<double>();
        rec.dt = r.at("dt").get<double>();
        rec.q.n = tr.n;
        rec.q.values.assign(static_cast<std::size_t>(tr.n) + 1, 0.0);
        for (int k = -1; k <= tr.n - 1; ++k)
            rec.q.a(k) = r.at("A").at(std::to_string(k)).get<double>();
        rec.min_kappa = r.at("min_kappa").get<double>();
        rec.max_speed = r.at("max_speed").get<double>();
        rec.monitors = r.at("monitors").get<std::vector<double>>();
        rec.sigma_integrals = r.at("sigma_integrals").get<std::vector<double>>();
        rec.speed_volume_rate = r.at("speed_volume_rate").get<double>();
        rec.quermass_rates = r.at("quermass_rates").get<std::vector<double>>();
        rec.sigma_rates = r.at("sigma_rates").get<std::vector<double>>();
        tr.records.push_back(std::move(rec));
    }
    tr.final_graph.grid = build_grid(tr.mode, tr.n, tr.resolution);
    tr.final_graph.rho = j.at("final_rho").get<std::vector<double>>();
    validate_graph(tr.final_graph);
    return tr;
}

// ---------------------------------------------------------------------------
// Verification reports

namespace detail {

inline void report_body(JsonWriter& w, const VerificationReport& rep) {
    w.begin_object();
    w.key("experiment").value(rep.experiment);
    w.key("n").value(rep.n);
    w.key("mode").value(grid_mode_name(rep.mode));
    w.key("resolution").value(rep.resolution);
    w.key("family").value(rep.family);
    w.key("rho0").value(rep.rho0);
    w.key("eps").value(rep.eps);
    w.key("ell").value(rep.ell);
    w.key("min_kappa").value(rep.min_kappa);
    w.key("hypothesis_ok").value(rep.hypothesis_ok);
    w.key("status").value(rep.status());
    w.key("error").value(rep.error);
    w.key("rows").begin_array();
    for (const auto& r : rep.rows) {
        w.begin_object();
        w.key("name").value(r.name);
        w.key("lhs").value(r.lhs);
        w.key("rhs").value(r.rhs);
        w.key("gap").value(r.gap);
        w.key("scale").value(r.scale);
        w.key("rel").value(r.rel);
        w.key("has_verdict").value(r.has_verdict);
        w.key("pass").value(r.pass);
        w.key("note").value(r.note);
        w.end_object();
    }
    w.end_array();
    w.key("convergence").begin_array();
    for (const auto& c : rep.convergence) {
        w.begin_object();
        w.key("resolution").value(c.resolution);
        w.key("spacing").value(c.spacing);
        w.key("residual").value(c.residual);
        w.key("step_order").value(c.step_order);
        w.end_object();
    }
    w.end_array();
    w.key("env").begin_object();
    w.key("seed").value(rep.env.seed);
    w.key("pass_tol").value(rep.env.pass_tol);
    w.key("saturation_floor").value(rep.env.saturation_floor);
    w.key("xi_knots").value(rep.env.xi_knots);
    w.end_object();
    w.end_object();
}

}  // namespace detail

inline std::string report_json(const VerificationReport& rep) {
    detail::JsonWriter w;
    detail::report_body(w, rep);
    return w.str();
}

inline const char* report_csv_header() {
    return "experiment,name,lhs,rhs,gap,scale,rel,verdict,note\n";
}

inline std::string report_csv_rows(const VerificationReport& rep) {
    std::string out;
    for (const auto& r : rep.rows) {
        out += detail::csv_field(rep.experiment);
        out += ',';
        out += detail::csv_field(r.name);
        out += ',';
        out += format_double(r.lhs);
        out += ',';
        out += format_double(r.rhs);
        out += ',';
        out += format_double(r.gap);
        out += ',';
        out += format_double(r.scale);
        out += ',';
        out += format_double(r.rel);
        out += ',';
        out += r.has_verdict ? (r.pass ? "pass" : "fail") : "none";
        out += ',';
        out += detail::csv_field(r.note.empty() ? rep.error : r.note);
        out += '\n';
    }
    if (rep.rows.empty()) {
        // keep errored experiments visible in the CSV as a single stub row
        out += detail::csv_field(rep.experiment);
        out += ",,,,,,,none,";
        out += detail::csv_field(rep.error);
        out += '\n';
    }
    return out;
}

inline std::string report_csv(const VerificationReport& rep) {
    return report_csv_header() + report_csv_rows(rep);
}

namespace detail {

inline std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

inline std::string pad_right(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace detail

// Aligned, human-facing summary. Floats keep the 17-digit convention, so the table
// is wide; it is meant for terminals and logs, not narrow panes.
inline std::string report_text(const VerificationReport& rep) {
    std::size_t name_w = 4;
    for (const auto& r : rep.rows) name_w = std::max(name_w, r.name.size());
    const std::size_t num_w = 24;

    std::string out = "experiment: " + rep.experiment + "\n";
    out += "status: " + rep.status();
    if (!rep.error.empty()) out += " (" + rep.error + ")";
    out += "\n";
    out += "min principal curvature: " + format_double(rep.min_kappa) + "\n";
    if (!rep.rows.empty()) {
        out += detail::pad_right("name", name_w) + "  " + detail::pad_left("lhs", num_w) + "  "
               + detail::pad_left("rhs", num_w) + "  " + detail::pad_left("gap", num_w) + "  "
               + detail::pad_left("gap/scale", num_w) + "  verdict\n";
        for (const auto& r : rep.rows) {
            out += detail::pad_right(r.name, name_w) + "  "
                   + detail::pad_left(format_double(r.lhs), num_w) + "  "
                   + detail::pad_left(format_double(r.rhs), num_w) + "  "
                   + detail::pad_left(format_double(r.gap), num_w) + "  "
                   + detail::pad_left(format_double(r.rel), num_w) + "  ";
            out += r.has_verdict ? (r.pass ? "pass" : "FAIL") : "none";
            if (!r.note.empty()) out += "  (" + r.note + ")";
            out += '\n';
        }
    }
    if (!rep.convergence.empty()) {
        out += "refinement:\n";
        out += detail::pad_left("resolution", 10) + "  " + detail::pad_left("spacing", num_w)
               + "  " + detail::pad_left("residual", num_w) + "  "
               + detail::pad_left("order", 8) + "\n";
        for (const auto& c : rep.convergence) {
            char ord[16];
            if (std::isfinite(c.step_order))
                std::snprintf(ord, sizeof ord, "%.3f", c.step_order);
            else
                std::snprintf(ord, sizeof ord, "-");
            out += detail::pad_left(std::to_string(c.resolution), 10) + "  "
                   + detail::pad_left(format_double(c.spacing), num_w) + "  "
                   + detail::pad_left(format_double(c.residual), num_w) + "  "
                   + detail::pad_left(ord, 8) + "\n";
        }
    }
    return out;
}

inline std::string sweep_json(const SweepResult& sw) {
    detail::JsonWriter w;
    w.begin_object();
    w.key("reports").begin_array();
    for (const auto& rep : sw.reports) detail::report_body(w, rep);
    w.end_array();
    w.key("summary").begin_object();
    w.key("total").value(sw.summary.total);
    w.key("passed").value(sw.summary.passed);
    w.key("failed").value(sw.summary.failed);
    w.key("hypothesis_violated").value(sw.summary.hypothesis_violated);
    w.key("errors").value(sw.summary.errors);
    w.key("all_pass").value(sw.summary.all_pass());
    w.end_object().end_object();
    return w.str();
}

inline std::string sweep_csv(const SweepResult& sw) {
    std::string out = report_csv_header();
    for (const auto& rep : sw.reports) out += report_csv_rows(rep);
    return out;
}

inline std::string sweep_text(const SweepResult& sw) {
    std::size_t id_w = 10;
    for (const auto& rep : sw.reports) id_w = std::max(id_w, rep.experiment.size());
    std::string out;
    for (const auto& rep : sw.reports) {
        out += detail::pad_right(rep.experiment, id_w) + "  " + rep.status();
        if (!rep.error.empty()) out += " (" + rep.error + ")";
        out += '\n';
    }
    out += "total " + std::to_string(sw.summary.total) + ": " + std::to_string(sw.summary.passed)
           + " passed, " + std::to_string(sw.summary.failed) + " failed, "
           + std::to_string(sw.summary.hypothesis_violated) + " hypothesis violations, "
           + std::to_string(sw.summary.errors) + " errors\n";
    return out;
}

inline std::string study_json(const ConvergenceStudy& st) {
    detail::JsonWriter w;
    w.begin_object();
    w.key("check").value(convergence_check_name(st.check));
    w.key("n").value(st.n);
    w.key("mode").value(grid_mode_name(st.mode));
    w.key("family").value(st.shape.family());
    w.key("rho0").value(st.shape.rho0);
    w.key("eps").value(st.shape.eps);
    w.key("ell").value(st.shape.ell);
    w.key("index").value(st.index);
    w.key("rows").begin_array();
    for (const auto& c : st.rows) {
        w.begin_object();
        w.key("resolution").value(c.resolution);
        w.key("spacing").value(c.spacing);
        w.key("residual").value(c.residual);
        w.key("step_order").value(c.step_order);
        w.end_object();
    }
    w.end_array();
    w.key("saturated").value(st.saturated);
    w.key("order").value(st.order);
    w.key("order_label").value(st.order_label());
    w.end_object();
    return w.str();
}

inline std::string rigidity_json(const RigidityStudy& st) {
    detail::JsonWriter w;
    w.begin_object();
    w.key("n").value(st.n);
    w.key("mode").value(grid_mode_name(st.mode));
    w.key("resolution").value(st.resolution);
    w.key("rho0").value(st.rho0);
    w.key("ell").value(st.ell);
    w.key("eps").begin_array();
    for (double e : st.eps) w.value(e);
    w.end_array();
    w.key("families").begin_array();
    for (const auto& fam : st.families) {
        w.begin_object();
        w.key("name").value(fam.name);
        w.key("gaps").begin_array();
        for (double g : fam.gaps) w.value(g);
        w.end_array();
        w.key("slope").value(fam.slope);
        w.key("positive").value(fam.positive);
        w.end_object();
    }
    w.end_array().end_object();
    return w.str();
}

// ---------------------------------------------------------------------------
// File helpers

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace qf
