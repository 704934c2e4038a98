#pragma once

// Offline planning: default (no offloading) plans, the worst-case optimized
// plan handed to the runtime, and the oracle plan built from actual times.

#include "engine.hpp"

#include <optional>
#include <queue>
#include <tuple>
#include <vector>

namespace droneoff
{
    /// Energy walk of a plan with explicit per-hop and per-visit durations.
    /// hops[i] is the flight from path[i] to path[i+1]; visits[i] the time
    /// spent at path[i]. False as soon as the remaining energy reaches zero.
    inline bool verify_feasible(const MissionPlan &plan, const DroneSpec &drone, const std::vector<micros> &hops,
                                const std::vector<micros> &visits)
    {
        if (hops.size() + 1 != plan.size() || visits.size() != plan.size())
            throw std::invalid_argument("verify_feasible: hop/visit vectors do not match the path");
        EnergyMeter meter(drone);
        for (std::size_t i = 0; i + 1 < plan.size(); ++i)
        {
            meter.fly(hops[i]);
            if (meter.remaining() <= 0.0)
                return false;
            if (site_of(plan.path, i + 1) == VisitSite::IntermediateDepot)
            {
                meter.recharge();
                continue;
            }
            meter.hover(visits[i + 1]);
            if (meter.remaining() <= 0.0)
                return false;
        }
        return true;
    }

    /// Same walk with hop times from `hop` and planned visit durations.
    inline bool verify_feasible(const Scenario &sc, std::size_t drone, const MissionPlan &plan, const HopFn &hop)
    {
        const DroneTiming t = DroneTiming::of(sc, drone);
        std::vector<micros> hops, visits;
        for (std::size_t i = 0; i < plan.size(); ++i)
        {
            visits.push_back(planned_visit_us(sc, drone, plan, i, t));
            if (i + 1 < plan.size())
                hops.push_back(hop(node_of(plan.path[i]), node_of(plan.path[i + 1])));
        }
        return verify_feasible(plan, sc.drones.at(drone), hops, visits);
    }

    /// Walks the plan under `hop` times and inserts a depot detour right
    /// before every hop the runtime safety check would refuse, i.e. at the
    /// latest safe position.
    inline MissionPlan insert_detours(const Scenario &sc, std::size_t drone, MissionPlan plan, const HopFn &hop,
                                      SafetyMode mode = SafetyMode::Conservative)
    {
        validate(plan, sc.servers, sc.spacing);
        const DroneTiming t = DroneTiming::of(sc, drone);
        EnergyMeter meter(sc.drones.at(drone));
        for (std::size_t i = 0; i + 1 < plan.size(); ++i)
        {
            const int here = node_of(plan.path[i]);
            if (!plan.path[i + 1].is_depot())
            {
                const int next = node_of(plan.path[i + 1]);
                const micros visit = worst_visit_us(sc, drone, plan, i + 1, t, mode);
                if (needs_detour(meter, hop(here, next), visit, hop(next, kDepotNode), mode))
                {
                    if (here == kDepotNode)
                        throw InfeasibleMission("drone " + std::to_string(drone + 1) + ": point of interest " +
                                                std::to_string(next) + " unreachable on a full battery");
                    insert_depot(plan, i + 1, sc.depot);
                }
            }
            meter.fly(hop(here, node_of(plan.path[i + 1])));
            if (site_of(plan.path, i + 1) == VisitSite::IntermediateDepot)
                meter.recharge();
            else
                meter.hover(planned_visit_us(sc, drone, plan, i + 1, t));
        }
        return plan;
    }

    struct DefaultPlan
    {
        std::vector<int> tour; // POI visiting order
        MissionPlan plan;
        micros time_us = 0;    // analytic mission time under worst-case flights
    };

    inline DefaultPlan build_default_plan(const Scenario &sc, std::size_t drone)
    {
        if (sc.missions.at(drone).empty())
            throw InfeasibleMission("drone " + std::to_string(drone + 1) + " has no points of interest");
        DefaultPlan out;
        out.tour = build_tour(sc, drone);
        std::vector<int> nodes{kDepotNode};
        nodes.insert(nodes.end(), out.tour.begin(), out.tour.end());
        nodes.push_back(kDepotNode);
        const HopFn hop = worst_case_hops(sc, drone);
        out.plan = insert_detours(sc, drone, plan_from_nodes(sc, drone, nodes), hop);
        out.time_us = plan_time_us(sc, drone, out.plan, hop);
        return out;
    }

    namespace detail
    {
        struct GreedyDrone
        {
            std::vector<int> tour;
            std::size_t next = 0; // index into tour of the POI being approached
            MissionPlan plan;
            EnergyMeter meter;
            std::vector<micros> rem_default; // default-plan time still ahead from tour[j] (visit included)
        };

        /// Appends the flight towards tour[d.next] (with a detour when the
        /// safety rule demands one) and returns the arrival time.
        inline micros approach(const Scenario &sc, std::size_t m, GreedyDrone &d, micros now, const HopFn &hop,
                               const DroneTiming &t)
        {
            const int here = node_of(d.plan.path.back());
            const int next = d.tour[d.next];
            MissionPlan probe = d.plan;
            probe.path.push_back(sc.node_waypoint(m, next));
            probe.schedule.push_back(0);
            probe.waits.push_back(0.0);
            const micros visit = worst_visit_us(sc, m, probe, probe.size() - 1, t, SafetyMode::Conservative);
            if (needs_detour(d.meter, hop(here, next), visit, hop(next, kDepotNode), SafetyMode::Conservative))
            {
                if (here == kDepotNode)
                    throw InfeasibleMission("drone " + std::to_string(m + 1) + ": point of interest " +
                                            std::to_string(next) + " unreachable on a full battery");
                const micros back = hop(here, kDepotNode);
                d.meter.fly(back);
                d.meter.recharge();
                now += back + t.depot;
                d.plan.path.push_back(Waypoint::depot(sc.depot));
                d.plan.schedule.push_back(0);
                d.plan.waits.push_back(0.0);
                return approach(sc, m, d, now, hop, t);
            }
            const micros fly = hop(here, next);
            d.meter.fly(fly);
            d.plan.path.push_back(sc.node_waypoint(m, next));
            d.plan.schedule.push_back(0);
            d.plan.waits.push_back(0.0);
            return now + fly;
        }
    }

    /// Greedy global timeline under the given hop times. Drones reach their
    /// POIs in chronological order (ties: lower estimated reduction first,
    /// then lower drone id); at each POI the in-range server with the
    /// earliest predicted completion is taken when waiting plus offloading
    /// beats local computation and the longer visit stays energy safe.
    inline std::vector<MissionPlan> greedy_schedule(const Scenario &sc, const std::vector<DefaultPlan> &defaults,
                                                    const std::vector<HopFn> &hops, micros max_wait = kNever)
    {
        const std::size_t n = sc.drone_count();
        std::vector<detail::GreedyDrone> drones(n);
        std::vector<DroneTiming> timing;
        std::map<int, micros> busy_until;
        for (const auto &s : sc.servers)
            busy_until[s.id] = 0;

        using Key = std::tuple<micros, double, std::size_t>;
        std::priority_queue<Key, std::vector<Key>, std::greater<Key>> arrivals;

        auto red_estimate = [&](std::size_t m, micros at) {
            const auto &d = drones[m];
            return relative_reduction(to_seconds(defaults[m].time_us), to_seconds(at + d.rem_default[d.next]));
        };

        for (std::size_t m = 0; m < n; ++m)
        {
            timing.push_back(DroneTiming::of(sc, m));
            auto &d = drones[m];
            d.tour = defaults[m].tour;
            d.meter = EnergyMeter(sc.drones[m]);
            d.plan = plan_from_nodes(sc, m, {kDepotNode});
            d.rem_default.assign(d.tour.size() + 1, 0);
            const micros local_visit = timing[m].sense + timing[m].local;
            for (std::size_t j = d.tour.size(); j-- > 0;)
            {
                const int after = j + 1 < d.tour.size() ? d.tour[j + 1] : kDepotNode;
                d.rem_default[j] = local_visit + hops[m](d.tour[j], after) + d.rem_default[j + 1];
            }
            const micros at = detail::approach(sc, m, d, 0, hops[m], timing[m]);
            arrivals.emplace(at, red_estimate(m, at), m);
        }

        while (!arrivals.empty())
        {
            const auto [at, red, m] = arrivals.top();
            arrivals.pop();
            (void)red;
            auto &d = drones[m];
            const DroneTiming &t = timing[m];
            const std::size_t i = d.plan.size() - 1;
            const GridPoint where = d.plan.path[i].location;
            const micros ret = hops[m](d.tour[d.next], kDepotNode);

            int best = 0;
            micros best_finish = 0, best_wait = 0;
            for (int k : sc.servers_in_range(where))
            {
                const micros ready = at + t.sense + upload_us(sc, m, k);
                const micros start = std::max(ready, busy_until[k]);
                const micros finish = start + to_micros(sc.server(k).proc_time);
                if (best == 0 || finish < best_finish)
                {
                    best = k;
                    best_finish = finish;
                    best_wait = start - ready;
                }
            }
            micros visit = t.sense + t.local;
            if (best != 0 && best_wait <= max_wait && best_wait + planned_offload_us(sc, m, best) < t.local)
            {
                d.plan.schedule[i] = best;
                d.plan.waits[i] = to_seconds(best_wait);
                const micros worst = worst_visit_us(sc, m, d.plan, i, t, SafetyMode::Conservative);
                if (d.meter.remaining_after(ret, worst) > 0.0)
                {
                    busy_until[best] = best_finish;
                    visit = t.sense + best_wait + planned_offload_us(sc, m, best);
                }
                else
                {
                    d.plan.schedule[i] = 0;
                    d.plan.waits[i] = 0.0;
                }
            }
            d.meter.hover(visit);
            const micros now = at + visit;
            if (++d.next < d.tour.size())
            {
                const micros next_at = detail::approach(sc, m, d, now, hops[m], t);
                arrivals.emplace(next_at, red_estimate(m, next_at), m);
            }
            else
            {
                d.plan.path.push_back(Waypoint::depot(sc.depot));
                d.plan.schedule.push_back(0);
                d.plan.waits.push_back(0.0);
            }
        }

        std::vector<MissionPlan> plans;
        for (auto &d : drones)
            plans.push_back(std::move(d.plan));
        return plans;
    }

    /// Drops offloads that no longer beat local computation.
    inline void keep_beneficial(const Scenario &sc, std::size_t drone, MissionPlan &plan)
    {
        const micros local = to_micros(sc.drones.at(drone).local_proc_time);
        for (std::size_t i = 0; i < plan.size(); ++i)
            if (plan.schedule[i] != 0 &&
                to_micros(plan.waits[i]) + planned_offload_us(sc, drone, plan.schedule[i]) >= local)
            {
                plan.schedule[i] = 0;
                plan.waits[i] = 0.0;
            }
    }

    struct RefineStats
    {
        std::size_t iterations = 0;
        bool converged = false;
    };

    /// Replays the plans through the runtime with flights taking exactly
    /// their assumed times and adopts what was realized (detour positions,
    /// servers and measured waits) until the plans reproduce themselves.
    inline std::vector<MissionPlan> refine_by_replay(const Scenario &sc, std::vector<MissionPlan> plans,
                                                     const std::vector<micros> &default_times,
                                                     const FlightTimeTrace &trace, bool actual_times,
                                                     RefineStats *stats = nullptr, std::size_t max_rounds = 12)
    {
        EngineOptions opt;
        opt.policy = PolicyKind::Proposed;
        opt.record_log = false;
        opt.assume_actual_times = actual_times;
        RefineStats local;
        for (std::size_t round = 0; round < max_rounds; ++round)
        {
            ++local.iterations;
            RunResult r = run(sc, plans, default_times, trace, opt);
            std::vector<MissionPlan> next;
            for (std::size_t m = 0; m < r.drones.size(); ++m)
            {
                MissionPlan p = std::move(r.drones[m].realized);
                keep_beneficial(sc, m, p);
                next.push_back(std::move(p));
            }
            if (next == plans)
            {
                local.converged = true;
                break;
            }
            plans = std::move(next);
        }
        if (stats)
            *stats = local;
        return plans;
    }

    struct PlanBundle
    {
        std::vector<DefaultPlan> defaults;
        std::vector<MissionPlan> optimized;
        std::optional<std::vector<MissionPlan>> oracle;
        RefineStats optimized_refine;
        RefineStats oracle_refine;

        std::vector<micros> default_times() const
        {
            std::vector<micros> out;
            for (const auto &d : defaults)
                out.push_back(d.time_us);
            return out;
        }

        std::vector<std::vector<int>> tours() const
        {
            std::vector<std::vector<int>> out;
            for (const auto &d : defaults)
                out.push_back(d.tour);
            return out;
        }
    };

    inline std::vector<DefaultPlan> build_default_plans(const Scenario &sc)
    {
        std::vector<DefaultPlan> out;
        for (std::size_t m = 0; m < sc.drone_count(); ++m)
            out.push_back(build_default_plan(sc, m));
        return out;
    }

    struct PlannerOptions
    {
        /// Longest queueing delay the offline schedule accepts for an offload.
        double max_wait = 0.0;
    };

    inline std::vector<MissionPlan> build_offline_schedule(const Scenario &sc, const std::vector<DefaultPlan> &defaults,
                                                           const PlannerOptions &opt = {}, RefineStats *stats = nullptr)
    {
        std::vector<HopFn> hops;
        std::vector<std::vector<int>> tours;
        std::vector<micros> times;
        for (std::size_t m = 0; m < sc.drone_count(); ++m)
        {
            hops.push_back(worst_case_hops(sc, m));
            tours.push_back(defaults[m].tour);
            times.push_back(defaults[m].time_us);
        }
        const FlightTimeTrace worst = worst_case_trace(sc, tours);
        return refine_by_replay(sc, greedy_schedule(sc, defaults, hops, to_micros(opt.max_wait)), times, worst, false, stats);
    }

    struct PlanScore
    {
        double min_reduction = 0.0;
        double mean_reduction = 0.0;

        friend bool operator<(const PlanScore &a, const PlanScore &b)
        {
            return a.min_reduction != b.min_reduction ? a.min_reduction < b.min_reduction
                                                      : a.mean_reduction < b.mean_reduction;
        }
    };

    inline PlanScore score_run(const RunResult &r, const std::vector<micros> &default_times)
    {
        PlanScore s{1e300, 0.0};
        for (std::size_t m = 0; m < r.drones.size(); ++m)
        {
            const double red = relative_reduction(to_seconds(default_times[m]), to_seconds(r.drones[m].mission_time));
            s.min_reduction = std::min(s.min_reduction, red);
            s.mean_reduction += red / static_cast<double>(r.drones.size());
        }
        return s;
    }

    inline std::vector<MissionPlan> realized_plans(const Scenario &sc, RunResult &&r)
    {
        std::vector<MissionPlan> out;
        for (std::size_t m = 0; m < r.drones.size(); ++m)
        {
            out.push_back(std::move(r.drones[m].realized));
            keep_beneficial(sc, m, out.back());
        }
        return out;
    }

    /// Offline plan with hindsight: flights take their traced actual times.
    /// Candidates are the greedy schedule built from actual times and, when
    /// `offline` is given, the execution the online policy realizes from that
    /// plan on this very trace (both refined by replay). The candidate whose
    /// plain execution yields the best worst-case reduction wins.
    inline std::vector<MissionPlan> build_oracle_plan(const Scenario &sc, const std::vector<DefaultPlan> &defaults,
                                                      const FlightTimeTrace &trace, const PlannerOptions &opt = {},
                                                      RefineStats *stats = nullptr,
                                                      const std::vector<MissionPlan> *offline = nullptr)
    {
        std::vector<HopFn> hops;
        std::vector<micros> times;
        for (std::size_t m = 0; m < sc.drone_count(); ++m)
        {
            const auto &p = defaults[m].plan;
            for (std::size_t i = 0; i + 1 < p.size(); ++i)
                trace.entry(m, node_of(p.path[i]), node_of(p.path[i + 1]));
            hops.push_back(trace.actual_hops(m));
            times.push_back(defaults[m].time_us);
        }

        std::vector<std::vector<MissionPlan>> candidates;
        std::vector<RefineStats> refine(1);
        candidates.push_back(
            refine_by_replay(sc, greedy_schedule(sc, defaults, hops, to_micros(opt.max_wait)), times, trace, true,
                             &refine[0]));
        if (offline)
        {
            EngineOptions online;
            online.record_log = false;
            auto seen = realized_plans(sc, run(sc, *offline, times, trace, online));
            refine.emplace_back();
            candidates.push_back(refine_by_replay(sc, seen, times, trace, true, &refine.back()));
            refine.emplace_back(RefineStats{0, true});
            candidates.push_back(std::move(seen));
        }

        EngineOptions follow;
        follow.policy = PolicyKind::Oracle;
        follow.record_log = false;
        follow.assume_actual_times = true;
        std::size_t best = 0;
        PlanScore best_score;
        for (std::size_t c = 0; c < candidates.size(); ++c)
        {
            const PlanScore score = score_run(run(sc, candidates[c], times, trace, follow), times);
            if (c == 0 || best_score < score)
            {
                best = c;
                best_score = score;
            }
        }
        if (stats)
            *stats = refine[best];
        return candidates[best];
    }

    inline PlanBundle build_plans(const Scenario &sc, const FlightTimeTrace *trace = nullptr,
                                  const PlannerOptions &opt = {})
    {
        PlanBundle b;
        b.defaults = build_default_plans(sc);
        b.optimized = build_offline_schedule(sc, b.defaults, opt, &b.optimized_refine);
        if (trace)
            b.oracle = build_oracle_plan(sc, b.defaults, *trace, opt, &b.oracle_refine, &b.optimized);
        return b;
    }
}
