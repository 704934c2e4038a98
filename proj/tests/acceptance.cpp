// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace droneoff;

namespace
{
    struct Outcome
    {
        bool ok = true;
        std::string detail;
    };

    std::string fmt(const char *f, auto... args)
    {
        char buf[256];
        std::snprintf(buf, sizeof buf, f, args...);
        return buf;
    }

    constexpr double kInnerShare = 0.80; // share of seed cells
    constexpr double kOracleGapPp = 3.0;
    constexpr double kEps = 1e-12; // rounding slack on per-cell reduction comparisons
    constexpr double kFlightEps = 1e-6;

    const std::vector<std::uint64_t> kGridSeeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const std::vector<double> kGridLevels{0.2, 0.3};
    const char *const kBuiltins[] = {"small20", "large20", "mixed10+10"};

    Scenario builtin_named(const char *name)
    {
        Scenario sc;
        if (!builtin::lookup(name, sc))
            throw std::runtime_error(std::string("unknown builtin ") + name);
        return sc;
    }

    struct GridCell
    {
        std::string scenario;
        double u = 0.0;
        std::uint64_t seed = 0;
        std::map<PolicyKind, RunMetrics> metrics;
        testsupport::CommitmentAudit audit;
        std::size_t runs = 0;

        double min_red(PolicyKind p) const { return metrics.at(p).min_reduction; }
        double flight(PolicyKind p) const
        {
            double s = 0.0;
            for (const auto &d : metrics.at(p).drones)
                s += d.flight_seconds;
            return s;
        }
        bool same_detours(PolicyKind a, PolicyKind b) const
        {
            const auto &x = metrics.at(a).drones, &y = metrics.at(b).drones;
            for (std::size_t i = 0; i < x.size(); ++i)
                if (x[i].detours != y[i].detours)
                    return false;
            return true;
        }
    };

    void merge(testsupport::CommitmentAudit &into, const testsupport::CommitmentAudit &a)
    {
        into.acks += a.acks;
        into.committed_done += a.committed_done;
        into.late += a.late;
        into.resp_max_mismatch += a.resp_max_mismatch;
    }

    std::vector<GridCell> &grid()
    {
        static std::vector<GridCell> cells = [] {
            std::vector<GridCell> out;
            for (const char *name : kBuiltins)
            {
                const Scenario sc = builtin_named(name);
                for (double u : kGridLevels)
                    for (std::uint64_t seed : kGridSeeds)
                    {
                        const CellRun run =
                            run_cell(sc, seed, u, {kAllPolicies.begin(), kAllPolicies.end()}, SafetyMode::Conservative);
                        Scenario at = sc;
                        at.uncertainty = u;
                        GridCell c{name, u, seed, {}, {}, 0};
                        for (const auto &[p, r] : run.results)
                        {
                            c.metrics[p] = summarize(r.log, at, run.bundle.default_times());
                            merge(c.audit, testsupport::audit_commitments(r.log));
                            ++c.runs;
                        }
                        out.push_back(std::move(c));
                    }
            }
            return out;
        }();
        return cells;
    }

    Outcome equation_oracles()
    {
        const DroneSpec d;
        const ServerSpec s;
        std::vector<std::string> bad;
        auto near = [&](const char *what, double got, double want, double tol) {
            if (!(std::abs(got - want) <= tol))
                bad.push_back(fmt("%s=%.12f want %.12f", what, got, want));
        };
        const Scenario local = testsupport::micro(false), off = testsupport::micro(true);
        const MissionPlan plan = build_default_plan(local, 0).plan;
        const double cruise = cruise_time(20.0, d);
        near("cruise", cruise, 8.75, 1e-9);
        near("fly_out", fly_time(plan.path, 0, cruise, d), 13.75, 1e-9);
        near("fly_back", fly_time(plan.path, 1, cruise, d), 28.75, 1e-9);
        const double comp = offload_time(d, s, s.proc_time);
        near("offload", comp, 1.96016, 1e-9);
        near("visit_local", visit_time(d, VisitSite::PointOfInterest, 0.0, d.local_proc_time), 11.0, 1e-9);
        near("visit_depot", visit_time(d, VisitSite::IntermediateDepot, 0.0, 0.0), 180.0, 1e-9);
        const std::vector<double> hops{13.75, 28.75};
        near("mission_local", mission_time(plan, hops, {0.0, 11.0, 0.0}), 53.5, 1e-9);
        near("mission_offload", mission_time(plan, hops, {0.0, 1.0 + comp, 0.0}), 45.46016, 1e-9);
        near("reduction", relative_reduction(1000.0, 738.0), 0.262, 1e-12);

        // The same two missions end to end through the planner and engine.
        const auto run_one = [](const Scenario &sc) {
            return run_cell(sc, 1, 0.0, {PolicyKind::Proposed}, SafetyMode::Conservative)
                .results[0]
                .second.drones[0]
                .mission_time;
        };
        near("engine_local", to_seconds(run_one(local)), 53.5, 1e-9);
        near("engine_offload", to_seconds(run_one(off)), 45.46016, 1e-9);
        std::string detail = "11 values";
        for (const auto &b : bad)
            detail += "; " + b;
        return {bad.empty(), detail};
    }

    Outcome deterministic_replay()
    {
        std::size_t runs = 0, mismatches = 0;
        for (const char *name : kBuiltins)
        {
            const Scenario sc = builtin_named(name);
            const std::vector<PolicyKind> all{kAllPolicies.begin(), kAllPolicies.end()};
            const CellRun a = run_cell(sc, 7, 0.3, all, SafetyMode::Conservative);
            const CellRun b = run_cell(sc, 7, 0.3, all, SafetyMode::Conservative);
            Scenario at = sc;
            at.uncertainty = 0.3;
            for (std::size_t i = 0; i < a.results.size(); ++i)
            {
                ++runs;
                std::ostringstream ma, mb;
                write_drone_rows(ma, a.results[i].first, summarize(a.results[i].second.log, at, a.bundle.default_times()));
                write_drone_rows(mb, b.results[i].first, summarize(b.results[i].second.log, at, b.bundle.default_times()));
                if (a.results[i].second.log.serialize() != b.results[i].second.log.serialize() || ma.str() != mb.str())
                    ++mismatches;
            }
        }
        return {mismatches == 0, fmt("%zu runs, %zu mismatches", runs, mismatches)};
    }

    Outcome energy_safety()
    {
        std::size_t runs = 0, violations = 0, nonpositive = 0;
        double lowest = 1e9;
        for (const char *name : {"small20", "large20"})
        {
            const Scenario sc = builtin_named(name);
            for (double u : {0.2, 0.3})
                for (std::uint64_t seed = 1; seed <= 25; ++seed)
                {
                    ++runs;
                    try
                    {
                        const CellRun c = run_cell(sc, seed, u, {PolicyKind::Proposed}, SafetyMode::Conservative);
                        const double lo = testsupport::min_logged_energy(c.results[0].second.log);
                        lowest = std::min(lowest, lo);
                        nonpositive += !(lo > 0.0);
                    }
                    catch (const EnergyViolation &)
                    {
                        ++violations;
                    }
                }
        }
        return {violations == 0 && nonpositive == 0,
                fmt("%zu runs, %zu violations, %zu runs with energy <= 0, lowest %.4f", runs, violations, nonpositive,
                    lowest)};
    }

    Outcome commitment_safety()
    {
        testsupport::CommitmentAudit total;
        std::size_t runs = 0;
        for (const auto &c : grid())
        {
            merge(total, c.audit);
            runs += c.runs;
        }
        return {total.ok() && total.acks > 0,
                fmt("%zu runs, %zu acks, %zu completed, %zu late, %zu resp_max mismatches", runs, total.acks,
                    total.committed_done, total.late, total.resp_max_mismatch)};
    }

    Outcome ordering()
    {
        bool ok = true;
        std::string detail;
        for (const char *name : kBuiltins)
            for (double u : kGridLevels)
            {
                double o = 0, p = 0, f = 0, q = 0;
                std::size_t n = 0, pf = 0, fq = 0, op = 0;
                for (const auto &c : grid())
                {
                    if (c.scenario != name || c.u != u)
                        continue;
                    ++n;
                    const double co = c.min_red(PolicyKind::Oracle), cp = c.min_red(PolicyKind::Proposed);
                    const double cf = c.min_red(PolicyKind::FollowPlan), cq = c.min_red(PolicyKind::Opportunistic);
                    o += co;
                    p += cp;
                    f += cf;
                    q += cq;
                    pf += cp >= cf - kEps;
                    fq += cf >= cq - kEps;
                    op += co >= cp - kEps;
                }
                const double dn = static_cast<double>(n);
                o /= dn, p /= dn, f /= dn, q /= dn;
                const bool means = o >= p && p > f && f >= q && (o - p) * 100.0 < kOracleGapPp;
                const bool cells = pf >= kInnerShare * dn && fq >= kInnerShare * dn && op == n;
                ok = ok && means && cells;
                detail += fmt("%s%s u=%.1f O/P/F/Opp=%.2f/%.2f/%.2f/%.2f%% P>=F %zu/%zu F>=Opp %zu/%zu O>=P %zu/%zu",
                              detail.empty() ? "" : "; ", name, u, o * 100, p * 100, f * 100, q * 100, pf, n, fq, n, op,
                              n);
            }
        return {ok, detail};
    }

    Outcome detour_behavior()
    {
        std::size_t cells = 0, same = 0, opp_more = 0;
        for (const auto &c : grid())
        {
            if (c.scenario != "mixed10+10" || c.u != 0.3)
                continue;
            ++cells;
            same += c.same_detours(PolicyKind::Proposed, PolicyKind::FollowPlan);
            const auto &pd = c.metrics.at(PolicyKind::Proposed).drones;
            const auto &qd = c.metrics.at(PolicyKind::Opportunistic).drones;
            for (std::size_t i = 0; i < pd.size(); ++i)
                opp_more += qd[i].detours > pd[i].detours;
        }
        return {opp_more >= 1 && same >= kInnerShare * static_cast<double>(cells),
                fmt("drones with more opportunistic detours %zu; proposed==follow_plan detours %zu/%zu cells",
                    opp_more, same, cells)};
    }

    Outcome flight_exploitation()
    {
        std::size_t equal = 0, not_worse = 0, u3 = 0, strict = 0;
        for (const auto &c : grid())
        {
            const double p = c.flight(PolicyKind::Proposed), f = c.flight(PolicyKind::FollowPlan);
            if (c.same_detours(PolicyKind::Proposed, PolicyKind::FollowPlan))
            {
                ++equal;
                not_worse += p <= f + kFlightEps;
            }
            if (c.u == 0.3)
            {
                ++u3;
                strict += p < f - kFlightEps;
            }
        }
        return {not_worse == equal && 2 * strict >= u3,
                fmt("proposed <= follow_plan on %zu/%zu equal-detour cells; strictly lower on %zu/%zu u=0.3 cells",
                    not_worse, equal, strict, u3)};
    }

    Outcome zero_uncertainty()
    {
        std::size_t drones = 0, differ = 0;
        for (const char *name : kBuiltins)
        {
            const CellRun c = run_cell(builtin_named(name), 1, 0.0,
                                       {PolicyKind::Proposed, PolicyKind::FollowPlan, PolicyKind::Oracle},
                                       SafetyMode::Conservative);
            const auto &p = c.results[0].second.drones;
            for (std::size_t m = 0; m < p.size(); ++m)
            {
                ++drones;
                differ += c.results[1].second.drones[m].mission_time != p[m].mission_time ||
                          c.results[2].second.drones[m].mission_time != p[m].mission_time;
            }
        }
        return {differ == 0, fmt("%zu drones, %zu differing", drones, differ)};
    }

    Outcome protocol_termination()
    {
        std::mt19937_64 rng(4242);
        const DroneSpec d;
        std::size_t sessions = 0, over_budget = 0, non_monotone = 0, max_attempts = 0;
        while (sessions < 10'000)
        {
            const int k = 1 + static_cast<int>(rng() % 8);
            std::vector<ServerEndpoint> servers;
            for (int i = 1; i <= k; ++i)
            {
                ServerSpec s;
                s.id = i;
                servers.emplace_back(s, rng() % 4 ? Discipline::PriorityByReduction : Discipline::Fcfs);
                for (int j = static_cast<int>(rng() % 6); j > 0; --j)
                    servers.back().on_direct_request(1000 + j, static_cast<micros>(rng() % 6'000'000), kNever);
            }
            std::vector<ServerEndpoint *> ptrs;
            for (auto &s : servers)
                ptrs.push_back(&s);
            std::vector<micros> free_at(servers.size(), 0);
            micros now = 0;
            for (int drone = 1; drone <= 10; ++drone, ++sessions)
            {
                now += static_cast<micros>(rng() % 2'000'000);
                for (std::size_t i = 0; i < servers.size(); ++i)
                    testsupport::advance(servers[i].state(), now, free_at[i]);
                const double red = static_cast<double>(rng() % 1000) / 1000.0;
                // Another drone may grab capacity between OFFER and RESERVE.
                auto rival = [&, drone](ServerEndpoint &s, micros t) {
                    if (rng() % 3 == 0)
                        s.on_direct_request(5000 + drone, t, kNever);
                };
                const auto r = drone_negotiate(ptrs, d, red, static_cast<micros>(rng() % 4'000'000), now, drone, 0,
                                               rival);
                max_attempts = std::max(max_attempts, r.reserve_attempts);
                over_budget += r.reserve_attempts > 2u * static_cast<std::size_t>(k);
                std::map<int, micros> last;
                for (const auto &o : r.offers_seen)
                {
                    auto it = last.find(o.server);
                    if (it != last.end() && o.resp < it->second)
                    {
                        ++non_monotone;
                        break;
                    }
                    last[o.server] = o.resp;
                }
            }
        }
        return {over_budget == 0 && non_monotone == 0,
                fmt("%zu sessions, max attempts %zu, %zu over 2K, %zu non-monotone", sessions, max_attempts,
                    over_budget, non_monotone)};
    }

    Outcome detour_minimality()
    {
        std::mt19937_64 rng(31337);
        std::size_t checked = 0, with_detours = 0, wrong = 0;
        while (checked < 600)
        {
            const Scenario sc = testsupport::random_detour_instance(rng);
            const auto tour = build_tour(sc, 0);
            const int best = testsupport::min_detours_brute_force(sc, 0, tour);
            std::vector<int> nodes{kDepotNode};
            nodes.insert(nodes.end(), tour.begin(), tour.end());
            nodes.push_back(kDepotNode);
            int got = -1;
            try
            {
                got = static_cast<int>(
                    insert_detours(sc, 0, plan_from_nodes(sc, 0, nodes), worst_case_hops(sc, 0)).detour_count());
            }
            catch (const InfeasibleMission &)
            {
            }
            if (best < 0 && got < 0)
                continue;
            ++checked;
            with_detours += best > 0;
            wrong += got != best;
        }
        return {wrong == 0, fmt("%zu instances (%zu needing detours), %zu mismatches", checked, with_detours, wrong)};
    }
}

int main()
{
    const std::pair<const char *, std::function<Outcome()>> criteria[] = {
        {"equation_oracles", equation_oracles},
        {"deterministic_replay", deterministic_replay},
        {"energy_safety", energy_safety},
        {"commitment_safety", commitment_safety},
        {"ordering", ordering},
        {"detour_behavior", detour_behavior},
        {"flight_exploitation", flight_exploitation},
        {"zero_uncertainty_degeneracy", zero_uncertainty},
        {"protocol_termination", protocol_termination},
        {"detour_minimality", detour_minimality},
    };
    int failed = 0;
    for (const auto &[name, check] : criteria)
    {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = check();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.ok;
        std::cout << (o.ok ? "PASS " : "FAIL ") << name << " [" << fmt("%.1fs", secs) << "] " << o.detail << std::endl;
    }
    std::cout << (failed ? fmt("%d criteria failed", failed) : std::string("all criteria passed")) << std::endl;
    return failed ? 1 : 0;
}
