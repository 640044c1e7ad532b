#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "qf/serialize.hpp"

using namespace qf;
using Catch::Approx;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                in_quotes = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double parsed(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

}  // namespace

TEST_CASE("floats survive the 17-digit round trip", "[serialize]") {
    for (double x : {pi, 1.0 / 3.0, 0.1, 1e-300, 2.2250738585072014e-308,
                     9007199254740993.0, std::exp(1.0)}) {
        const std::string s = format_double(x);
        CHECK(parsed(s) == x);  // bitwise
    }
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.125) == "0.125");
    CHECK(format_double(-2.5) == "-2.5");
}

TEST_CASE("radial graphs round-trip through JSON", "[serialize]") {
    for (GridMode mode : {GridMode::axisym, GridMode::full2d}) {
        const int n = 2;
        RadialGraph g = perturbed_sphere(build_grid(mode, n, 32), 0.8, 0.05, 2);
        const std::string text = radial_graph_json(g);
        CHECK(text == radial_graph_json(g));  // byte determinism
        const RadialGraph back = parse_radial_graph(text);
        CHECK(back.grid.mode == mode);
        CHECK(back.grid.n == n);
        CHECK(back.grid.resolution == 32);
        CHECK(back.rho == g.rho);  // bitwise
    }

    const std::string text =
        radial_graph_json(geodesic_sphere(build_grid(GridMode::axisym, 3, 32), 0.7));
    CHECK(text.rfind("{\"mode\":\"axisym\",\"n\":3,\"resolution\":32,\"rho\":[", 0) == 0);

    CHECK_THROWS(parse_radial_graph("{not json"));
    CHECK_THROWS(parse_radial_graph("{\"mode\":\"axisym\",\"n\":2}"));  // missing fields
}

TEST_CASE("quermassintegral vectors serialize with signed index keys", "[serialize]") {
    QuermassVector q;
    q.n = 2;
    q.values = {1.0, 2.5, 0.125};
    CHECK(quermass_json(q) == "{\"n\":2,\"K\":1,\"A\":{\"-1\":1,\"0\":2.5,\"1\":0.125}}");
}

TEST_CASE("comparison tables dump as CSV", "[serialize]") {
    const XiFunction f = xi_closed_function(2, XiKind::closed_minkowski_sq);
    const double s = 4.0 * pi * pi;
    const std::string csv = xi_table_csv(f, {s});
    const auto rows = lines_of(csv);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "s,xi");
    CHECK(rows[1] == format_double(s) + "," + format_double(f.eval(s)));
    CHECK(f.eval(s) == Approx(16.0 * pi * pi).epsilon(1e-13));
}

TEST_CASE("flow traces serialize to CSV and JSON", "[serialize]") {
    FlowSpec spec;
    spec.law = FlowLaw::gerhardt;
    spec.k = 1;
    spec.dt_init = spec.dt_min = spec.dt_max = 1e-3;
    spec.t_max = 0.01;
    const RadialGraph g0 = perturbed_sphere(build_grid(GridMode::axisym, 2, 32), 0.7, 0.03, 2);
    const FlowTrace tr =
        flow_run(g0, spec, {MonitorSpec{MonitorSpec::pair, 1}, MonitorSpec{MonitorSpec::minkowski_sq, 0}});
    REQUIRE(tr.records.size() >= 3);

    SECTION("CSV layout") {
        const auto rows = lines_of(trace_csv(tr));
        REQUIRE(rows.size() == tr.records.size() + 1);
        CHECK(rows[0] == "t,dt,A_-1,A_0,A_1,min_kappa,max_speed,Q_pair_1,Q_minkowski_sq");
        const auto fields = split_csv_line(rows[2]);
        REQUIRE(fields.size() == 9);
        const TraceRecord& rec = tr.records[1];
        CHECK(parsed(fields[0]) == rec.t);
        CHECK(parsed(fields[1]) == rec.dt);
        CHECK(parsed(fields[2]) == rec.q.a(-1));
        CHECK(parsed(fields[3]) == rec.q.a(0));
        CHECK(parsed(fields[4]) == rec.q.a(1));
        CHECK(parsed(fields[5]) == rec.min_kappa);
        CHECK(parsed(fields[6]) == rec.max_speed);
        CHECK(parsed(fields[7]) == rec.monitors[0]);
        CHECK(parsed(fields[8]) == rec.monitors[1]);
    }

    SECTION("JSON round trip") {
        const std::string text = trace_json(tr);
        CHECK(text == trace_json(tr));
        const FlowTrace back = parse_flow_trace(text);
        CHECK(back.n == tr.n);
        CHECK(back.mode == tr.mode);
        CHECK(back.resolution == tr.resolution);
        CHECK(back.stop_reason == tr.stop_reason);
        CHECK(back.spec.law == tr.spec.law);
        CHECK(back.spec.dt_max == tr.spec.dt_max);
        CHECK(back.spec.t_max == tr.spec.t_max);
        REQUIRE(back.monitors.size() == 2);
        CHECK(back.monitors[0].kind == MonitorSpec::pair);
        CHECK(back.monitors[1].kind == MonitorSpec::minkowski_sq);
        REQUIRE(back.records.size() == tr.records.size());
        for (std::size_t i = 0; i < tr.records.size(); ++i) {
            CHECK(back.records[i].t == tr.records[i].t);
            CHECK(back.records[i].q.values == tr.records[i].q.values);
            CHECK(back.records[i].monitors == tr.records[i].monitors);
            CHECK(back.records[i].sigma_integrals == tr.records[i].sigma_integrals);
            CHECK(back.records[i].speed_volume_rate == tr.records[i].speed_volume_rate);
            CHECK(back.records[i].quermass_rates == tr.records[i].quermass_rates);
            CHECK(back.records[i].sigma_rates == tr.records[i].sigma_rates);
        }
        CHECK(back.final_graph.rho == tr.final_graph.rho);
        // a reloaded trace still supports the rate checks
        const RateReport rr = rate_check(back, RateQuantity::quermass, 1);
        CHECK(rr.rel == rate_check(tr, RateQuantity::quermass, 1).rel);
    }
}

TEST_CASE("verification reports render as JSON, CSV, and text", "[serialize]") {
    const auto rep = verify_inequalities(ShapeSpec{pi / 4.0, 0.0, 2}, GridMode::axisym, 2, 48);

    const std::string json = report_json(rep);
    CHECK(json == report_json(verify_inequalities(ShapeSpec{pi / 4.0, 0.0, 2}, GridMode::axisym,
                                                  2, 48)));  // reproducible end to end
    CHECK(json.find("\"status\":\"pass\"") != std::string::npos);
    CHECK(json.find("\"experiment\":\"n2-axisym-res48-geodesic_sphere-rho0.785398\"")
          != std::string::npos);
    CHECK(json.find("\"env\":{\"seed\":0,\"pass_tol\":" + format_double(1e-8))
          != std::string::npos);

    const auto csv_rows = lines_of(report_csv(rep));
    REQUIRE(csv_rows.size() == rep.rows.size() + 1);
    CHECK(csv_rows[0] == "experiment,name,lhs,rhs,gap,scale,rel,verdict,note");
    CHECK(split_csv_line(csv_rows[1])[7] == "pass");

    const std::string text = report_text(rep);
    CHECK(text.find("status: pass") != std::string::npos);
    for (const auto& row : rep.rows) CHECK(text.find(row.name) != std::string::npos);
}

TEST_CASE("missing shape parameters serialize as null", "[serialize]") {
    const auto rep =
        verify_inequalities(geodesic_sphere(build_grid(GridMode::axisym, 2, 32), 0.6));
    CHECK(report_json(rep).find("\"rho0\":null") != std::string::npos);
    CHECK(report_json(rep).find("\"family\":\"custom\"") != std::string::npos);
}

TEST_CASE("CSV fields with separators are quoted", "[serialize]") {
    CHECK(detail::csv_field("plain") == "plain");
    CHECK(detail::csv_field("a,b") == "\"a,b\"");
    CHECK(detail::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("sweep results aggregate into one document", "[serialize]") {
    SweepSpec spec;
    spec.n_list = {2};
    spec.rho0_list = {pi / 4.0};
    spec.eps_list = {0.0, 0.05};
    spec.ell_list = {2};
    spec.resolutions = {48};
    const SweepResult sw = sweep(spec);

    const std::string json = sweep_json(sw);
    CHECK(json.find("\"summary\":{\"total\":2,\"passed\":2") != std::string::npos);
    CHECK(json.find("\"all_pass\":true") != std::string::npos);

    const auto text = lines_of(sweep_text(sw));
    REQUIRE(text.size() == 3);
    CHECK(text[2] == "total 2: 2 passed, 0 failed, 0 hypothesis violations, 0 errors");

    const auto csv_rows = lines_of(sweep_csv(sw));
    CHECK(csv_rows.size() == 1 + sw.reports[0].rows.size() + sw.reports[1].rows.size());
}

TEST_CASE("refinement studies serialize with their verdict label", "[serialize]") {
    StudyOptions opt;
    opt.shape = ShapeSpec{pi / 4.0, 0.0, 2};
    const auto study = convergence_study(ConvergenceCheck::minkowski_residual, {32, 64, 128}, opt);
    const std::string json = study_json(study);
    CHECK(json.find("\"check\":\"minkowski_residual\"") != std::string::npos);
    CHECK(json.find("\"order_label\":\"saturated\"") != std::string::npos);
    CHECK(json == study_json(study));
}

TEST_CASE("rigidity studies serialize their slopes", "[serialize]") {
    const auto study = rigidity_sweep(2, GridMode::axisym, 48, pi / 4.0, 3, {0.04, 0.08});
    const std::string json = rigidity_json(study);
    CHECK(json.find("\"families\":[") != std::string::npos);
    CHECK(json.find("\"slope\":") != std::string::npos);
    CHECK(json.find("\"positive\":true") != std::string::npos);
}

TEST_CASE("text files round-trip through the helpers", "[serialize]") {
    const std::string path = "/tmp/qf_serialize_roundtrip.txt";
    const std::string payload = "line one\nline two\n";
    write_text_file(path, payload);
    CHECK(read_text_file(path) == payload);
    std::remove(path.c_str());
    CHECK_THROWS_AS(write_text_file("/nonexistent-dir/of/course/x.txt", "hi"),
                    std::runtime_error);
    CHECK_THROWS_AS(read_text_file("/tmp/qf_no_such_file_here.txt"), std::runtime_error);
}

// ---------------------------------------------------------------------------
// CLI config parsing and dispatch

#include <sstream>

#include "qf/cli.hpp"

namespace {

std::string parse_err(const std::string& text) {
    try {
        qf::parse_config(text);
    } catch (const qf::config_error& e) {
        return e.what();
    }
    return "(no error)";
}

struct DispatchResult {
    int code;
    std::string out;
    std::string diag;
};

DispatchResult run_cli(const std::string& text) {
    qf::RunConfig cfg = qf::parse_config(text);
    std::ostringstream out, diag;
    const int code = qf::dispatch(cfg, out, diag);
    return {code, out.str(), diag.str()};
}

}  // namespace

TEST_CASE("minimal configs fill the documented defaults", "[cli]") {
    const RunConfig cfg = parse_config(R"({"command":"shape"})");
    CHECK(cfg.command == Command::shape);
    CHECK(cfg.n == 2);
    CHECK(cfg.mode == GridMode::axisym);
    CHECK(cfg.resolution == 64);
    CHECK(cfg.shape.rho0 == Approx(pi / 4.0));
    CHECK(cfg.shape.eps == 0.0);
    CHECK(cfg.shape.is_sphere());
    CHECK(cfg.output.path.empty());
    CHECK(cfg.output.format == "json");
    CHECK_FALSE(cfg.dry_run);

    // per-command default formats
    CHECK(parse_config(R"({"command":"xi","n":3})").output.format == "csv");
    CHECK(parse_config(R"({"command":"suite"})").output.format == "text");
    CHECK(parse_config(R"({"command":"flow"})").output.format == "json");
    CHECK(parse_config(R"({"command":"verify"})").output.format == "json");

    const RunConfig fl = parse_config(R"({
        "command":"flow","n":3,"resolution":96,
        "shape":{"rho0":0.8,"eps":0.05,"ell":3},
        "flow":{"law":"cgls","k":1,"dt_max":0.005,"t_max":3.0,
                "monitors":[{"kind":"minkowski_sq"},{"kind":"pair","k":2}]}})");
    CHECK(fl.flow.law == FlowLaw::cgls);
    CHECK(fl.flow.dt_max == Approx(0.005));
    CHECK(fl.flow.dt_init == Approx(1e-3));  // untouched default
    REQUIRE(fl.monitors.size() == 2);
    CHECK(fl.monitors[0].kind == MonitorSpec::Kind::minkowski_sq);
    CHECK(fl.monitors[1].k == 2);
}

TEST_CASE("config errors name the offending field", "[cli]") {
    CHECK(parse_err("{oops").rfind("invalid JSON", 0) == 0);
    CHECK(parse_err("[1,2]") == "config root must be a JSON object");
    CHECK(parse_err("{}") == "command: required");
    CHECK(parse_err(R"({"command":"shpae"})").find("expected one of shape|flow|xi|verify|suite")
          != std::string::npos);
    CHECK(parse_err(R"({"command":"shape","bogus":1})") == "unknown field \"bogus\"");
    CHECK(parse_err(R"({"command":"flow","flow":{"bogus":1}})").find("unknown field \"flow.bogus\"")
          != std::string::npos);
    CHECK(parse_err(R"({"command":"shape","resolution":-4})")
          == "resolution: must be an integer >= 16");
    CHECK(parse_err(R"({"command":"shape","n":1})") == "n: must be at least 2");
    CHECK(parse_err(R"({"command":"shape","n":3,"mode":"full2d"})")
          == "mode: full2d grids are only available at n = 2");
    CHECK(parse_err(R"({"command":"shape","shape":{"rho0":2.0}})")
          == "shape.rho0: must lie in (0, pi/2)");
    CHECK(parse_err(R"({"command":"shape","shape":{"family":"geodesic_sphere","eps":0.1}})")
          == "shape.family: geodesic_sphere requires eps = 0");
    CHECK(parse_err(R"({"command":"flow","flow":{"dt_max":-1}})").rfind("flow: ", 0) == 0);
    CHECK(parse_err(R"({"command":"flow","flow":{"law":"mcf"}})").rfind("flow.law: ", 0) == 0);
    CHECK(parse_err(R"({"command":"flow","flow":{"monitors":[{"kind":"pair","k":1},
                                                             {"kind":"pair"}]}})")
          == "flow.monitors[1].k: required for pair monitors");
    CHECK(parse_err(R"({"command":"flow","flow":{"monitors":[{"kind":"minkowski_sq","k":1}]}})")
          == "flow.monitors[0].k: minkowski_sq takes no index");
    CHECK(parse_err(R"({"command":"flow","n":2,"flow":{"monitors":[{"kind":"pair","k":2}]}})")
          == "flow.monitors[0].k: pair monitor needs 1 <= k <= n-1");
    CHECK(parse_err(R"({"command":"xi","n":3,"xi":{"kind":"magic"}})")
              .find("xi.kind: expected parametric|closed_minkowski_sq|closed_20|ode")
          != std::string::npos);
    CHECK(parse_err(R"({"command":"xi","n":3,"xi":{"k":5}})") == "xi.k: needs 0 <= k <= n-1");
    CHECK(parse_err(R"({"command":"xi","n":3,"xi":{"k":1,"l":1}})")
          == "xi.l: needs -1 <= l < k");
    CHECK(parse_err(R"({"command":"xi","n":2,"xi":{"kind":"closed_20"}})")
          == "xi.kind: the area-to-A2 comparison needs n >= 3");
    CHECK(parse_err(R"({"command":"xi","n":2})")
          == "xi.k: the default comparison (k=2) needs n >= 3; set xi.k and xi.l");
    CHECK(parse_err(R"({"command":"verify","verify":{"pass_tol":0}})")
          == "verify.pass_tol: must be positive");
    CHECK(parse_err(R"({"command":"verify","verify":{"sweep":{"n_list":[1]}}})")
          == "verify.sweep.n_list: entries must be at least 2");
    CHECK(parse_err(R"({"command":"suite","suite":{"tolerance_scale":0}})")
          == "suite.tolerance_scale: must be positive");
    CHECK(parse_err(R"({"command":"suite","suite":{"only":[11]}})")
          == "suite.only[0]: criterion ids run from 1 to 10");
    CHECK(parse_err(R"({"command":"shape","output":{"format":"csv"}})")
              .rfind("output.format: shape supports json", 0)
          == 0);
}

TEST_CASE("shape eval emits deterministic JSON", "[cli]") {
    const std::string text = R"({"command":"shape","n":2,"resolution":48,
                                 "shape":{"rho0":0.6}})";
    const DispatchResult a = run_cli(text);
    const DispatchResult b = run_cli(text);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);  // same config, same bytes
    CHECK(a.out.find("\"family\":\"geodesic_sphere\"") != std::string::npos);
    CHECK(a.out.find("\"quermass\":{\"-1\":") != std::string::npos);

    // the printed numbers match a direct evaluation at full precision
    const auto f = compute_geometry(geodesic_sphere(build_grid(GridMode::axisym, 2, 48), 0.6));
    const QuermassVector q = quermass_vector(f);
    CHECK(a.out.find(format_double(q.values[1])) != std::string::npos);  // A_0
    CHECK(a.out.find(format_double(f.min_kappa)) != std::string::npos);
}

TEST_CASE("verify exit codes reflect the verdict", "[cli]") {
    const DispatchResult ok = run_cli(R"({"command":"verify","n":2,"resolution":48,
        "shape":{"rho0":0.7853981633974483},"output":{"format":"text"}})");
    CHECK(ok.code == 0);
    CHECK(ok.out.find("status: pass") != std::string::npos);

    // concave perturbation: the convexity hypothesis fails, so nothing is checked
    const DispatchResult bad = run_cli(R"({"command":"verify","n":3,"resolution":48,
        "shape":{"rho0":1.1,"eps":0.16,"ell":2},"output":{"format":"text"}})");
    CHECK(bad.code == 1);
    CHECK(bad.out.find("hypothesis violated") != std::string::npos);
}

TEST_CASE("flow breakdown writes the partial trace and exits 2", "[cli]") {
    const DispatchResult r = run_cli(R"({"command":"flow","n":3,"resolution":48,
        "shape":{"rho0":1.1,"eps":0.16,"ell":2},
        "flow":{"law":"cgls","k":2,"t_max":2.0}})");
    CHECK(r.code == 2);
    CHECK(r.diag.find("flow breakdown") != std::string::npos);
    const FlowTrace tr = parse_flow_trace(r.out);
    CHECK(tr.stop_reason == "breakdown");
}

TEST_CASE("xi dump produces the requested table", "[cli]") {
    const DispatchResult csv = run_cli(R"({"command":"xi","n":3,
        "xi":{"kind":"parametric","k":2,"l":0,"knots":400,"samples":64}})");
    REQUIRE(csv.code == 0);
    const auto rows = lines_of(csv.out);
    REQUIRE(rows.size() == 65);
    CHECK(rows[0] == "s,xi");

    const DispatchResult js = run_cli(R"({"command":"xi","n":3,
        "xi":{"kind":"parametric","k":2,"l":0,"knots":400,"samples":8},
        "output":{"format":"json"}})");
    REQUIRE(js.code == 0);
    CHECK(js.out.find("\"kind\":\"parametric\"") != std::string::npos);
    CHECK(js.out.find("\"k\":2") != std::string::npos);
    CHECK(js.out.find("\"s\":[") != std::string::npos);
}

TEST_CASE("suite subsets, dry runs, and the JSON report", "[cli]") {
    const DispatchResult sub = run_cli(R"({"command":"suite","suite":{"only":[2]}})");
    CHECK(sub.code == 0);
    CHECK(sub.out.find("closed-form comparison identities") != std::string::npos);
    CHECK(sub.out.find("1/1") != std::string::npos);

    RunConfig plan = parse_config(R"({"command":"suite"})");
    plan.dry_run = true;
    std::ostringstream out, diag;
    CHECK(dispatch(plan, out, diag) == 0);
    const auto planned = lines_of(out.str());
    REQUIRE(planned.size() == 10);
    for (const auto& line : planned) CHECK(line.find("budget") != std::string::npos);

    const DispatchResult js = run_cli(R"({"command":"suite","suite":{"only":[2]},
                                          "output":{"format":"json"}})");
    CHECK(js.code == 0);
    CHECK(js.out.find("\"id\":2") != std::string::npos);
    CHECK(js.out.find("\"all_pass\":true") != std::string::npos);
    // wall times stay out of the report so reruns are byte-identical
    CHECK(js.out.find("seconds") == std::string::npos);
    CHECK(js.out == run_cli(R"({"command":"suite","suite":{"only":[2]},
                                "output":{"format":"json"}})").out);
}

TEST_CASE("output.path writes the same bytes as the stream", "[cli]") {
    const std::string path = "/tmp/qf_cli_shape_out.json";
    std::remove(path.c_str());
    const DispatchResult to_file = run_cli(R"({"command":"shape","n":2,"resolution":48,
        "shape":{"rho0":0.6},"output":{"path":"/tmp/qf_cli_shape_out.json"}})");
    REQUIRE(to_file.code == 0);
    CHECK(to_file.out.empty());
    const DispatchResult to_stream = run_cli(R"({"command":"shape","n":2,"resolution":48,
        "shape":{"rho0":0.6}})");
    CHECK(read_text_file(path) == to_stream.out);
    std::remove(path.c_str());
}

TEST_CASE("construction failures surface on the diagnostic stream", "[cli]") {
    // parses fine (rho0 < pi/2) but the perturbed graph pokes past the equator
    const DispatchResult r = run_cli(R"({"command":"shape","n":2,"resolution":48,
        "shape":{"rho0":1.5,"eps":0.12,"ell":2}})");
    CHECK(r.code == 3);
    CHECK(r.out.empty());
    CHECK(r.diag.find("rho outside") != std::string::npos);
}

TEST_CASE("verify sweeps run through dispatch", "[cli]") {
    const DispatchResult r = run_cli(R"({"command":"verify","n":2,"resolution":48,
        "shape":{"rho0":0.7853981633974483},
        "verify":{"sweep":{"eps_list":[0.0,0.05],"ell_list":[2]}}})");
    CHECK(r.code == 0);
    CHECK(r.out.find("\"summary\":{\"total\":2,\"passed\":2") != std::string::npos);
    CHECK(r.out.find("\"all_pass\":true") != std::string::npos);
}
