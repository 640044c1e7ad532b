// qf: quermassintegral flows on the round hemisphere.
//
// Everything structural lives in the JSON config (see docs/config.schema.json
// and configs/ for worked examples); flags cover only paths, verbosity, and the
// suite dry run. Exit codes: 0 success, 1 verification failure, 2 flow
// breakdown (partial trace still written), 3 config or input error.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qf/cli.hpp"

namespace {

constexpr const char* kDefaults =
    "Config defaults: n=2, mode=axisym, resolution=64; shape: geodesic sphere at "
    "rho0=pi/4; flow: gerhardt k=1, dt_max=1e-2, t_max=10, records every accepted "
    "step; xi: parametric k=2 l=0, 2000 knots, 512 samples; verify: pass_tol=1e-8; "
    "suite: tolerance_scale=1, all ten criteria. Formats default to json (xi: csv, "
    "suite: text). QF_WORKERS overrides the worker count for sweeps.";

struct Invocation {
    std::string config_path;
    std::string output_override;
    bool verbose = false;
    bool dry_run = false;
};

void add_common_flags(CLI::App* cmd, Invocation& inv, bool config_required) {
    CLI::Option* cfg = cmd->add_option("-c,--config", inv.config_path,
                                       "JSON config file (structure in docs/config.schema.json)");
    if (config_required) cfg->required();
    cmd->add_option("-o,--output", inv.output_override,
                    "write the result here instead of the config's output.path");
    cmd->add_flag("-v,--verbose", inv.verbose, "progress notes on stderr");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"curvature flows, quermassintegrals, and sharp-inequality checks "
                 "on hypersurfaces of the round hemisphere"};
    app.footer(kDefaults);
    app.require_subcommand(1);

    Invocation inv;

    CLI::App* shape = app.add_subcommand("shape", "shape family tools");
    shape->require_subcommand(1);
    CLI::App* shape_eval =
        shape->add_subcommand("eval", "quermassintegral vector and curvature summary");
    add_common_flags(shape_eval, inv, true);

    CLI::App* flow = app.add_subcommand("flow", "curvature flow runs");
    flow->require_subcommand(1);
    CLI::App* flow_run = flow->add_subcommand("run", "integrate a flow and write the trace");
    add_common_flags(flow_run, inv, true);

    CLI::App* xi = app.add_subcommand("xi", "comparison-function tables");
    xi->require_subcommand(1);
    CLI::App* xi_dump = xi->add_subcommand("dump", "tabulate a comparison function");
    add_common_flags(xi_dump, inv, true);

    CLI::App* verify = app.add_subcommand("verify", "inequality verification");
    verify->require_subcommand(1);
    CLI::App* verify_run = verify->add_subcommand("run", "evaluate the inequality battery");
    add_common_flags(verify_run, inv, true);

    CLI::App* suite = app.add_subcommand("suite", "the full acceptance battery");
    add_common_flags(suite, inv, false);
    suite->add_flag("--dry-run", inv.dry_run, "print the plan without running anything");

    CLI11_PARSE(app, argc, argv);

    qf::Command invoked = qf::Command::suite;
    if (shape_eval->parsed()) invoked = qf::Command::shape;
    if (flow_run->parsed()) invoked = qf::Command::flow;
    if (xi_dump->parsed()) invoked = qf::Command::xi;
    if (verify_run->parsed()) invoked = qf::Command::verify;

    qf::RunConfig cfg;
    if (!inv.config_path.empty()) {
        std::string text;
        try {
            text = qf::read_text_file(inv.config_path);
        } catch (const std::exception& e) {
            std::cerr << "config: " << e.what() << "\n";
            return 3;
        }
        try {
            cfg = qf::parse_config(text);
        } catch (const qf::config_error& e) {
            std::cerr << "config: " << e.what() << "\n";
            return 3;
        }
        if (cfg.command != invoked) {
            std::cerr << "config: command \"" << qf::command_name(cfg.command)
                      << "\" does not match the invoked subcommand \""
                      << qf::command_name(invoked) << "\"\n";
            return 3;
        }
    } else {
        cfg.command = invoked;  // suite runs fine on pure defaults
        cfg.output.format = "text";
    }

    if (!inv.output_override.empty()) cfg.output.path = inv.output_override;
    cfg.verbose = inv.verbose;
    cfg.dry_run = inv.dry_run;

    try {
        return qf::dispatch(cfg);
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 3;
    }
}
