#pragma once

// Plan-level timing and energy rules shared by the offline planner and the
// runtime. Both sides must evaluate exactly the same expressions so that a
// plan replayed at its assumed flight times reproduces itself.

#include "scenario.hpp"

#include <vector>

namespace droneoff
{
    /// Which energy safety rule guards hops towards a point of interest.
    enum class SafetyMode : std::uint8_t
    {
        /// Next hop plus worst-case visit, plus the worst-case flight from the
        /// next POI back to the depot (including landing).
        Conservative,
        /// Next hop plus a local-compute visit only.
        Literal,
    };

    inline int node_of(const Waypoint &w) { return w.is_depot() ? kDepotNode : w.poi; }

    /// Fixed timing constants of one drone in microseconds.
    struct DroneTiming
    {
        micros sense = 0;
        micros local = 0;
        micros depot = 0;
        micros negotiation_slack = 0; // worst negotiation time not hidden behind sensing

        static DroneTiming of(const Scenario &sc, std::size_t drone)
        {
            const DroneSpec &d = sc.drones.at(drone);
            DroneTiming t;
            t.sense = to_micros(d.sense_time);
            t.local = to_micros(d.local_proc_time);
            t.depot = to_micros(d.depot_service_time);
            micros latency = 0;
            for (const auto &s : sc.servers)
                latency = std::max(latency, to_micros(s.msg_latency));
            // INQUIRY + OFFER, then at most 2K RESERVE round trips.
            const micros worst = static_cast<micros>(2 + 4 * sc.servers.size()) * latency;
            t.negotiation_slack = std::max<micros>(0, worst - t.sense);
            return t;
        }
    };

    /// Planned computation time at a POI served by `server` (proc + transfers).
    inline micros planned_offload_us(const Scenario &sc, std::size_t drone, int server)
    {
        const DroneSpec &d = sc.drones.at(drone);
        const ServerSpec &s = sc.server(server);
        return to_micros(offload_time(d, s, s.proc_time));
    }

    inline micros upload_us(const Scenario &sc, std::size_t drone, int server)
    {
        return to_micros(sc.server(server).transfer_time(sc.drones.at(drone).data_in));
    }

    inline micros download_us(const Scenario &sc, std::size_t drone, int server)
    {
        return to_micros(sc.server(server).transfer_time(sc.drones.at(drone).data_out));
    }

    /// Planned visit duration at path index i: POI, intermediate depot or terminal depot.
    inline micros planned_visit_us(const Scenario &sc, std::size_t drone, const MissionPlan &plan, std::size_t i,
                                   const DroneTiming &t)
    {
        switch (site_of(plan.path, i))
        {
        case VisitSite::TerminalDepot:
            return 0;
        case VisitSite::IntermediateDepot:
            return t.depot;
        case VisitSite::PointOfInterest:
            break;
        }
        const int k = plan.schedule[i];
        if (k == 0)
            return t.sense + t.local;
        return t.sense + to_micros(plan.waits[i]) + planned_offload_us(sc, drone, k);
    }

    /// Longest the drone may spend at POI i under its planned action: a local
    /// computation, after a planned offload that was turned down at the last
    /// moment when the plan asks for one.
    inline micros worst_visit_us(const Scenario &sc, std::size_t drone, const MissionPlan &plan, std::size_t i,
                                 const DroneTiming &t, SafetyMode mode)
    {
        if (mode == SafetyMode::Literal)
            return t.sense + t.local;
        micros v = t.sense + t.local + t.negotiation_slack;
        const int k = plan.schedule[i];
        if (k != 0)
            v += to_micros(plan.waits[i]) + upload_us(sc, drone, k) + to_micros(sc.server(k).msg_latency);
        return v;
    }

    /// True when the hop towards a POI must be preceded by a depot detour.
    /// The comparison is non-strict: an exactly exhausted battery is unsafe.
    inline bool needs_detour(const EnergyMeter &meter, micros hop, micros visit, micros ret, SafetyMode mode)
    {
        const micros extra_fly = mode == SafetyMode::Conservative ? hop + ret : hop;
        return meter.remaining_after(extra_fly, visit) <= 0.0;
    }

    /// Largest hover duration h with remaining_after(extra_fly, h) > 0.
    inline micros max_hover_us(const EnergyMeter &meter, micros extra_fly, double gamma)
    {
        const double left = meter.remaining_after(extra_fly, 0);
        if (left <= 0.0)
            return -1;
        micros h = static_cast<micros>(left / gamma * 1e6);
        while (h > 0 && meter.remaining_after(extra_fly, h) <= 0.0)
            --h;
        while (meter.remaining_after(extra_fly, h + 1) > 0.0)
            ++h;
        return h;
    }

    /// Analytic time to finish the plan from path index i (exclusive of the
    /// visit at i), using `hop` for flights and planned visit durations.
    inline micros remaining_time_us(const Scenario &sc, std::size_t drone, const MissionPlan &plan, std::size_t i,
                                    const HopFn &hop, const DroneTiming &t)
    {
        micros total = 0;
        for (std::size_t j = i; j + 1 < plan.size(); ++j)
            total += hop(node_of(plan.path[j]), node_of(plan.path[j + 1])) + planned_visit_us(sc, drone, plan, j + 1, t);
        return total;
    }

    inline micros plan_time_us(const Scenario &sc, std::size_t drone, const MissionPlan &plan, const HopFn &hop)
    {
        const DroneTiming t = DroneTiming::of(sc, drone);
        return planned_visit_us(sc, drone, plan, 0, t) + remaining_time_us(sc, drone, plan, 0, hop, t);
    }

    inline MissionPlan plan_from_nodes(const Scenario &sc, std::size_t drone, const std::vector<int> &nodes)
    {
        MissionPlan plan;
        for (int n : nodes)
        {
            plan.path.push_back(sc.node_waypoint(drone, n));
            plan.schedule.push_back(0);
            plan.waits.push_back(0.0);
        }
        return plan;
    }

    inline void insert_depot(MissionPlan &plan, std::size_t at, GridPoint depot)
    {
        plan.path.insert(plan.path.begin() + static_cast<std::ptrdiff_t>(at), Waypoint::depot(depot));
        plan.schedule.insert(plan.schedule.begin() + static_cast<std::ptrdiff_t>(at), 0);
        plan.waits.insert(plan.waits.begin() + static_cast<std::ptrdiff_t>(at), 0.0);
    }

    inline void erase_entry(MissionPlan &plan, std::size_t at)
    {
        plan.path.erase(plan.path.begin() + static_cast<std::ptrdiff_t>(at));
        plan.schedule.erase(plan.schedule.begin() + static_cast<std::ptrdiff_t>(at));
        plan.waits.erase(plan.waits.begin() + static_cast<std::ptrdiff_t>(at));
    }
}
