#include "droneoff/cli_args.hpp"
#include "droneoff/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

int main(int argc, char **argv)
{
    CLI::App app{"Simulate drone missions that offload computations to shared edge servers"};
    droneoff::ExperimentConfig cfg;
    std::string seeds = "1", levels = "0.2,0.3", policies = "all", safety = "on";
    app.add_option("--scenario", cfg.scenario_path, "Scenario file (JSON) or built-in name: small20, large20, mixed10+10")
        ->required();
    app.add_option("--seeds", seeds, "Seeds, e.g. 1..10 or 1,4,9")->capture_default_str();
    app.add_option("--u", levels, "Flight-time uncertainty levels, comma separated")->capture_default_str();
    app.add_option("--policies", policies, "proposed,follow_plan,opportunistic,oracle or all")->capture_default_str();
    app.add_option("--out", cfg.output_dir, "Output directory")->required();
    app.add_option("--trace-in", cfg.trace_in, "Trace file (single cell) or directory of traces to reuse");
    app.add_option("--trace-out", cfg.trace_out, "Directory to copy every sampled trace into");
    app.add_option("--conservative-safety", safety, "Energy safety rule including the return flight: on|off")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    app.add_option("--max-plan-wait", cfg.planner.max_wait,
                   "Longest queueing delay (s) the offline schedule accepts for an offload")
        ->capture_default_str();
    app.add_flag("--emit-boxplot", cfg.emit_boxplot, "Write boxplot.csv with per-policy quartiles");

    try
    {
        app.parse(argc, argv);
        cfg.seeds = droneoff::cli::parse_seeds(seeds);
        cfg.uncertainty_levels = droneoff::cli::parse_levels(levels);
        cfg.policies = droneoff::cli::parse_policies(policies);
        cfg.conservative_safety = safety == "on";
        cfg.validate();
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    try
    {
        const auto result = droneoff::run_experiment(cfg);
        for (const auto &cell : result.cells)
        {
            std::printf("seed %llu u=%.2f trace %s\n", static_cast<unsigned long long>(cell.seed), cell.u,
                        droneoff::hex64(cell.trace_checksum).c_str());
            for (const auto &row : cell.comparison.rows)
                std::printf("  %-14s min %7.3f%%  mean %7.3f%%  detours %3zu  flight %10.1fs\n",
                            std::string(droneoff::name(row.policy)).c_str(), row.min_reduction * 100.0,
                            row.mean_reduction * 100.0, row.detours, row.flight_seconds);
        }
        return 0;
    }
    catch (const droneoff::ParseError &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    catch (const droneoff::MalformedPath &e)
    {
        std::cerr << "simulation aborted: " << e.what() << '\n';
        return 2;
    }
    catch (const droneoff::DegenerateHop &e)
    {
        std::cerr << "simulation aborted: " << e.what() << '\n';
        return 2;
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    catch (const std::exception &e)
    {
        // Energy, trace, protocol and feasibility violations.
        std::cerr << "simulation aborted: " << e.what() << '\n';
        return 2;
    }
}
