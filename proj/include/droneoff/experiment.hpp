#pragma once

// Batch orchestration: for every (seed, u) cell, sample or load one flight
// time trace, plan once, run every requested policy against that trace and
// write logs, metrics and a manifest.

#include "metrics.hpp"
#include "planner.hpp"
#include "scenario_io.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace droneoff
{
    inline constexpr std::string_view kVersion = "1.0.0";

    struct ExperimentConfig
    {
        std::string scenario_path;
        std::vector<std::uint64_t> seeds;
        std::vector<double> uncertainty_levels{0.2, 0.3};
        std::vector<PolicyKind> policies{kAllPolicies.begin(), kAllPolicies.end()};
        std::string output_dir;
        std::string trace_in;  // file (single cell) or directory of per-cell traces
        std::string trace_out; // directory receiving a copy of every cell's trace
        bool conservative_safety = true;
        bool emit_boxplot = false;
        PlannerOptions planner;

        void validate() const
        {
            if (seeds.empty() || uncertainty_levels.empty() || policies.empty())
                throw std::invalid_argument("at least one seed, one uncertainty level and one policy are required");
            for (double u : uncertainty_levels)
                if (!(u >= 0.0 && u < 1.0))
                    throw std::invalid_argument("uncertainty levels must lie in [0, 1)");
        }
    };

    struct PolicyRun
    {
        PolicyKind policy = PolicyKind::Proposed;
        RunMetrics metrics;
        std::uint64_t events_checksum = 0;
    };

    struct CellResult
    {
        std::uint64_t seed = 0;
        double u = 0.0;
        std::uint64_t trace_checksum = 0;
        std::vector<PolicyRun> runs;
        Comparison comparison;
        std::string directory;
    };

    /// Writes `content` to `path` through a temporary file and a rename.
    inline void write_atomic(const std::filesystem::path &path, const std::string &content)
    {
        std::filesystem::create_directories(path.parent_path());
        std::filesystem::path tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out)
                throw std::runtime_error("cannot write " + tmp.string());
            out << content;
            if (!out)
                throw std::runtime_error("write failed: " + tmp.string());
        }
        std::filesystem::rename(tmp, path);
    }

    inline std::string hex64(std::uint64_t v)
    {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
        return buf;
    }

    inline std::string cell_name(std::uint64_t seed, double u)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "seed%llu_u%.2f", static_cast<unsigned long long>(seed), u);
        return buf;
    }

    inline std::string trace_file_name(std::uint64_t seed, double u) { return "trace_" + cell_name(seed, u) + ".csv"; }

    inline FlightTimeTrace load_trace(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw TraceMismatch("cannot open trace " + path);
        return FlightTimeTrace::read(in);
    }

    /// Runs one (seed, u) cell. Pure with respect to the file system.
    struct CellRun
    {
        FlightTimeTrace trace;
        PlanBundle bundle;
        std::vector<std::pair<PolicyKind, RunResult>> results;
    };

    inline CellRun run_cell(const Scenario &base, std::uint64_t seed, double u, const std::vector<PolicyKind> &policies,
                            SafetyMode safety, const PlannerOptions &popt = {},
                            const FlightTimeTrace *given_trace = nullptr)
    {
        Scenario sc = base;
        sc.uncertainty = u;
        CellRun cell;
        auto defaults = build_default_plans(sc);
        std::vector<std::vector<int>> tours;
        for (const auto &d : defaults)
            tours.push_back(d.tour);
        if (given_trace)
        {
            cell.trace = *given_trace;
            if (cell.trace.uncertainty != u)
                throw TraceMismatch("trace was sampled for a different uncertainty level");
        }
        else
            cell.trace = sample_trace(sc, tours, seed);

        const bool want_oracle =
            std::find(policies.begin(), policies.end(), PolicyKind::Oracle) != policies.end();
        cell.bundle.defaults = std::move(defaults);
        cell.bundle.optimized = build_offline_schedule(sc, cell.bundle.defaults, popt, &cell.bundle.optimized_refine);
        if (want_oracle)
            cell.bundle.oracle = build_oracle_plan(sc, cell.bundle.defaults, cell.trace, popt,
                                                   &cell.bundle.oracle_refine, &cell.bundle.optimized);

        const auto times = cell.bundle.default_times();
        for (PolicyKind p : policies)
        {
            EngineOptions opt;
            opt.policy = p;
            opt.safety = safety;
            opt.assume_actual_times = p == PolicyKind::Oracle;
            const auto &plans = p == PolicyKind::Oracle ? *cell.bundle.oracle : cell.bundle.optimized;
            cell.results.emplace_back(p, run(sc, plans, times, cell.trace, opt));
        }
        return cell;
    }

    struct ExperimentResult
    {
        std::vector<CellResult> cells;
    };

    inline ExperimentResult run_experiment(const ExperimentConfig &cfg)
    {
        cfg.validate();
        const Scenario base = parse_scenario(cfg.scenario_path);
        const SafetyMode safety = cfg.conservative_safety ? SafetyMode::Conservative : SafetyMode::Literal;
        const std::filesystem::path out = cfg.output_dir;
        const std::size_t cell_count = cfg.seeds.size() * cfg.uncertainty_levels.size();
        const bool trace_dir = !cfg.trace_in.empty() && std::filesystem::is_directory(cfg.trace_in);
        if (!cfg.trace_in.empty() && !trace_dir && cell_count != 1)
            throw std::invalid_argument("--trace-in FILE needs exactly one (seed, u) cell; pass a directory otherwise");

        ExperimentResult result;
        std::ostringstream comparison, boxplot, summary;
        comparison << kComparisonHeader << '\n';
        boxplot << kBoxplotHeader << '\n';

        for (double u : cfg.uncertainty_levels)
            for (std::uint64_t seed : cfg.seeds)
            {
                std::optional<FlightTimeTrace> given;
                if (!cfg.trace_in.empty())
                    given = load_trace(trace_dir ? (std::filesystem::path(cfg.trace_in) / trace_file_name(seed, u)).string()
                                                 : cfg.trace_in);
                CellRun cell = run_cell(base, seed, u, cfg.policies, safety, cfg.planner, given ? &*given : nullptr);

                CellResult cr;
                cr.seed = seed;
                cr.u = u;
                cr.trace_checksum = cell.trace.checksum();
                const std::filesystem::path dir = out / cell_name(seed, u);
                cr.directory = dir.string();

                const std::string trace_text = cell.trace.serialize();
                write_atomic(dir / "trace.csv", trace_text);
                if (!cfg.trace_out.empty())
                    write_atomic(std::filesystem::path(cfg.trace_out) / trace_file_name(seed, u), trace_text);
                Scenario cell_sc = base;
                cell_sc.uncertainty = u;
                write_atomic(dir / "scenario.json", scenario_to_json(cell_sc) + "\n");

                std::ostringstream drones, servers;
                drones << kDroneCsvHeader << '\n';
                servers << kServerCsvHeader << '\n';
                std::vector<std::pair<PolicyKind, RunMetrics>> labelled;
                for (auto &[p, r] : cell.results)
                {
                    const std::string events = r.log.serialize();
                    write_atomic(dir / ("events_" + std::string(name(p)) + ".csv"), events);
                    PolicyRun pr{p, summarize(r.log, cell_sc, cell.bundle.default_times()), fnv1a(events)};
                    write_drone_rows(drones, p, pr.metrics);
                    write_server_rows(servers, p, pr.metrics);
                    if (cfg.emit_boxplot)
                        write_boxplot_row(boxplot, seed, u, p, pr.metrics.reductions);
                    labelled.emplace_back(p, pr.metrics);
                    cr.runs.push_back(std::move(pr));
                }
                cr.comparison = compare(labelled);
                std::ostringstream cell_cmp;
                cell_cmp << kComparisonHeader << '\n';
                write_comparison_rows(cell_cmp, seed, u, cr.comparison);
                write_comparison_rows(comparison, seed, u, cr.comparison);
                write_atomic(dir / "metrics.csv", drones.str());
                write_atomic(dir / "servers.csv", servers.str());
                write_atomic(dir / "comparison.csv", cell_cmp.str());

                nlohmann::ordered_json manifest;
                manifest["version"] = std::string(kVersion);
                manifest["scenario"] = base.name;
                manifest["scenario_source"] = cfg.scenario_path;
                manifest["seed"] = seed;
                manifest["uncertainty"] = u;
                manifest["safety"] = cfg.conservative_safety ? "conservative" : "literal";
                manifest["planner_max_wait_s"] = cfg.planner.max_wait;
                std::string config_text = scenario_to_json(cell_sc) + "|" + std::to_string(seed) + "|" +
                                          std::string(cfg.conservative_safety ? "c" : "l") + "|" +
                                          std::to_string(to_micros(cfg.planner.max_wait));
                manifest["policies"] = nlohmann::ordered_json::array();
                for (const auto &pr : cr.runs)
                {
                    manifest["policies"].push_back(std::string(name(pr.policy)));
                    config_text += "|" + std::string(name(pr.policy));
                }
                manifest["config_hash"] = hex64(fnv1a(config_text));
                manifest["trace_checksum"] = hex64(cr.trace_checksum);
                manifest["runs"] = nlohmann::ordered_json::array();
                for (const auto &pr : cr.runs)
                    manifest["runs"].push_back({{"policy", std::string(name(pr.policy))},
                                                {"trace_checksum", hex64(cr.trace_checksum)},
                                                {"events_checksum", hex64(pr.events_checksum)},
                                                {"min_reduction", pr.metrics.min_reduction}});
                write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
                result.cells.push_back(std::move(cr));
            }

        // Mean of each policy's min-reduction per uncertainty level and over all cells.
        summary << "u,policy,cells,mean_min_reduction,mean_mean_reduction\n";
        auto add_summary = [&](const std::string &label, const std::function<bool(const CellResult &)> &take) {
            for (PolicyKind p : cfg.policies)
            {
                double min_sum = 0.0, mean_sum = 0.0;
                std::size_t n = 0;
                for (const auto &c : result.cells)
                    if (take(c))
                        for (const auto &r : c.runs)
                            if (r.policy == p)
                            {
                                min_sum += r.metrics.min_reduction;
                                mean_sum += r.metrics.mean_reduction;
                                ++n;
                            }
                char buf[256];
                std::snprintf(buf, sizeof buf, "%s,%s,%zu,%.9f,%.9f\n", label.c_str(), std::string(name(p)).c_str(),
                              n, n ? min_sum / static_cast<double>(n) : 0.0,
                              n ? mean_sum / static_cast<double>(n) : 0.0);
                summary << buf;
            }
        };
        for (double u : cfg.uncertainty_levels)
        {
            char label[32];
            std::snprintf(label, sizeof label, "%.4f", u);
            add_summary(label, [u](const CellResult &c) { return c.u == u; });
        }
        add_summary("all", [](const CellResult &) { return true; });

        write_atomic(out / "comparison.csv", comparison.str());
        write_atomic(out / "summary.csv", summary.str());
        if (cfg.emit_boxplot)
            write_atomic(out / "boxplot.csv", boxplot.str());
        return result;
    }
}
