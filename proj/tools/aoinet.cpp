// aoinet: age of information for overtake-free paths in networks of FCFS
// M/M/1 queues.
//
// Usage:
//   aoinet validate  --spec net.txt
//   aoinet analyze   --spec net.txt
//   aoinet simulate  --spec net.txt [--seed N] [--horizon T] [--replications R]
//                    [--warmup-frac F] [--wa-node ID] [--trace]
//   aoinet sweep     --spec net.txt --grid lambda.a=0.1:0.9:0.1 [--simulate ...]
//   aoinet reproduce fig3|fig5a|fig5b|all --out DIR
//
// Exit codes: 0 success, 1 validation failure, 2 usage error.

#include <iostream>

#include "CLI11.hpp"

#include "aoinet/commands.hpp"

namespace {

void add_sim_flags(CLI::App* cmd, aoinet::SimConfig& cfg, aoinet::NodeId& wa_node)
{
    cmd->add_option("--seed", cfg.master_seed, "Master random seed");
    cmd->add_option("--horizon", cfg.horizon, "Simulated time per replication");
    cmd->add_option("--replications", cfg.replications, "Independent replications");
    cmd->add_option("--warmup-frac", cfg.warmup_fraction, "Fraction of the horizon discarded as warm-up");
    cmd->add_option("--wa-node", wa_node, "Node at which to sample the W*A product");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Age of information in overtake-free networks of FCFS M/M/1 queues"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string grid_text;
    std::string figure;
    std::string out_dir = ".";
    bool trace = false;
    bool simulate_points = false;
    aoinet::SimConfig cfg;
    aoinet::NodeId wa_node = 0;

    auto* validate = app.add_subcommand("validate", "Solve the traffic equations and check the network");
    validate->add_option("--spec", spec_path, "Network spec file")->required();

    auto* analyze = app.add_subcommand("analyze", "Closed-form ages per class as CSV");
    analyze->add_option("--spec", spec_path, "Network spec file")->required();

    auto* simulate = app.add_subcommand("simulate", "Discrete-event estimates next to the closed form");
    simulate->add_option("--spec", spec_path, "Network spec file")->required();
    add_sim_flags(simulate, cfg, wa_node);
    simulate->add_flag("--trace", trace, "Write class,gen_time,exit_time per exit of replication 0 to stderr");

    auto* sweep = app.add_subcommand("sweep", "Ages over a one-parameter grid");
    sweep->add_option("--spec", spec_path, "Network spec file")->required();
    sweep->add_option("--grid", grid_text, "param=start:stop:step, param is lambda.<class> or mu.<node>")
        ->required();
    sweep->add_flag("--simulate", simulate_points, "Also simulate every stable grid point");
    add_sim_flags(sweep, cfg, wa_node);

    auto* reproduce = app.add_subcommand("reproduce", "Write the tandem and two-class reference sweeps");
    reproduce->add_option("figure", figure, "fig3, fig5a, fig5b or all")->required();
    reproduce->add_option("--out", out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? aoinet::exit_code::ok : aoinet::exit_code::usage;
    }
    if (wa_node != 0)
        cfg.wa_node = wa_node;

    try {
        if (*validate)
            return aoinet::cmd_validate(spec_path, std::cout, std::cerr);
        if (*analyze)
            return aoinet::cmd_analyze(spec_path, std::cout, std::cerr);
        if (*simulate)
            return aoinet::cmd_simulate(spec_path, cfg, std::cout, std::cerr, trace ? &std::cerr : nullptr);
        if (*sweep)
            return aoinet::cmd_sweep(spec_path, aoinet::SweepGrid::parse(grid_text), simulate_points, cfg,
                                     std::cout, std::cerr);
        if (*reproduce)
            return aoinet::cmd_reproduce(figure, out_dir, std::cout, std::cerr);
    } catch (const aoinet::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return aoinet::exit_code::usage;
    }
    return aoinet::exit_code::usage;
}
