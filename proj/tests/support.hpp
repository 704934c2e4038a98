#pragma once

// Fixtures and independent reference computations shared by the test suites.

#include "droneoff/experiment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <random>
#include <tuple>

namespace testsupport
{
    using namespace droneoff;

    /// One drone, one POI `cells` grid cells east of the depot, optional idle
    /// server sitting on the depot.
    inline Scenario micro(bool with_server, int cells = 1)
    {
        Scenario sc;
        sc.name = "micro";
        sc.cols = 21;
        sc.rows = 21;
        sc.spacing = 20.0;
        sc.depot = {10, 10};
        DroneSpec d;
        d.id = 1;
        sc.drones.push_back(d);
        sc.missions.push_back({GridPoint{10 + cells, 10}});
        sc.mission_names.push_back("micro");
        if (with_server)
        {
            ServerSpec s;
            s.id = 1;
            s.location = {10, 10};
            sc.servers.push_back(s);
        }
        return sc;
    }

    /// Time to cover `meters` from rest to rest by stepping the kinematics at
    /// `dt`. Each step accelerates unless that would overshoot the braking
    /// envelope; the final stop is resolved inside its step.
    inline double integrate_hop(double meters, double vmax, double accel, double decel, double dt = 1e-3)
    {
        double x = 0.0, v = 0.0, t = 0.0;
        while (true)
        {
            // Largest end-of-step speed from which braking still stops at `meters`.
            const double room = meters - x - v * dt / 2.0;
            const double h = decel * dt / 2.0;
            const double brake_cap = room > 0.0 ? -h + std::sqrt(h * h + 2.0 * decel * room) : 0.0;
            double nv = std::min({vmax, v + accel * dt, brake_cap});
            if (nv <= 0.0 || nv <= v - decel * dt + 1e-12)
            {
                if (v / decel <= dt)
                    return t + v / decel;
                nv = v - decel * dt;
            }
            x += (v + nv) / 2.0 * dt;
            v = nv;
            t += dt;
        }
    }

    /// Scenario with one drone visiting the given cells and no servers.
    inline Scenario line_mission(const std::vector<GridPoint> &pois, double capacity = 1.0)
    {
        Scenario sc = micro(false);
        sc.missions[0] = pois;
        sc.drones[0].energy_capacity = capacity;
        return sc;
    }

    /// Walks a local-only node sequence (kDepotNode for the depot) under
    /// worst-case flights and applies the energy rule before every hop
    /// towards a POI. True when the rule never objects.
    inline bool safe_under_rule(const Scenario &sc, std::size_t drone, const std::vector<int> &nodes,
                                SafetyMode mode = SafetyMode::Conservative)
    {
        const DroneSpec &d = sc.drones[drone];
        const micros visit = to_micros(d.sense_time) + to_micros(d.local_proc_time);
        micros fly = 0, hover = 0;
        auto left = [&](micros f, micros h) {
            return d.energy_capacity - (d.beta * static_cast<double>(f) + d.gamma * static_cast<double>(h)) / 1e6;
        };
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        {
            const micros hop = max_hop_us(sc, drone, nodes[i], nodes[i + 1]);
            if (nodes[i + 1] != kDepotNode)
            {
                const micros ret = mode == SafetyMode::Conservative ? max_hop_us(sc, drone, nodes[i + 1], kDepotNode) : 0;
                if (left(fly + hop + ret, hover + visit) <= 0.0)
                    return false;
                fly += hop;
                hover += visit;
            }
            else
            {
                fly = 0;
                hover = 0;
            }
        }
        return true;
    }

    /// Fewest depot detours between consecutive POIs of `tour` that keep
    /// the rule satisfied, by exhaustive search. -1 when none works.
    inline int min_detours_brute_force(const Scenario &sc, std::size_t drone, const std::vector<int> &tour,
                                       SafetyMode mode = SafetyMode::Conservative)
    {
        const std::size_t gaps = tour.empty() ? 0 : tour.size() - 1;
        int best = -1;
        for (std::uint32_t mask = 0; mask < (1u << gaps); ++mask)
        {
            const int count = std::popcount(mask);
            if (best >= 0 && count >= best)
                continue;
            std::vector<int> nodes{kDepotNode};
            for (std::size_t j = 0; j < tour.size(); ++j)
            {
                nodes.push_back(tour[j]);
                if (j < gaps && (mask >> j & 1u))
                    nodes.push_back(kDepotNode);
            }
            nodes.push_back(kDepotNode);
            if (safe_under_rule(sc, drone, nodes, mode))
                best = count;
        }
        return best;
    }

    /// Random single-drone, server-free instance with 2..max_pois POIs near
    /// the depot and a battery small enough that detours are common.
    inline Scenario random_detour_instance(std::mt19937_64 &rng, int max_pois = 8)
    {
        std::uniform_int_distribution<int> count(2, max_pois), off(-4, 4);
        std::uniform_real_distribution<double> cap(0.09, 0.30);
        std::vector<GridPoint> pois;
        const int n = count(rng);
        while (static_cast<int>(pois.size()) < n)
        {
            const GridPoint p{10 + off(rng), 10 + off(rng)};
            if (p == GridPoint{10, 10} || std::find(pois.begin(), pois.end(), p) != pois.end())
                continue;
            pois.push_back(p);
        }
        return line_mission(pois, cap(rng));
    }

    /// Commitment audit over an event log: every ACK is honored, and every
    /// committed completion lands at or before its deadline.
    struct CommitmentAudit
    {
        std::size_t acks = 0;
        std::size_t committed_done = 0;
        std::size_t late = 0;
        std::size_t resp_max_mismatch = 0;

        bool ok() const { return late == 0 && resp_max_mismatch == 0 && acks == committed_done; }
    };

    inline CommitmentAudit audit_commitments(const EventLog &log)
    {
        CommitmentAudit a;
        std::map<std::tuple<int, int, std::int64_t>, std::int64_t> asked; // (drone, server, session) -> resp_max
        for (const auto &r : log.records())
        {
            switch (r.kind)
            {
            case LogKind::Reserve:
                asked[{r.from.id, r.to.id, r.index}] = r.v2;
                break;
            case LogKind::Ack:
            {
                ++a.acks;
                auto it = asked.find({r.to.id, r.from.id, r.index});
                if (it == asked.end() || r.v2 - r.v1 != it->second)
                    ++a.resp_max_mismatch;
                break;
            }
            case LogKind::ComputeDone:
                if (r.v2 >= 0)
                {
                    ++a.committed_done;
                    if (r.v1 > r.v2 || r.time > r.v2)
                        ++a.late;
                }
                break;
            default:
                break;
            }
        }
        return a;
    }

    /// Minimum energy observed right after every flight and visit.
    inline double min_logged_energy(const EventLog &log)
    {
        double lo = 1e300;
        for (const auto &r : log.records())
            if (r.kind == LogKind::Arrive || r.kind == LogKind::VisitDone)
                lo = std::min(lo, r.x);
        return lo;
    }

    /// Runs the server's work up to `now`: completes finished jobs and
    /// starts queued ones as soon as the server is free and their data is in.
    inline void advance(ServerQueueState &q, micros now, micros &free_at)
    {
        while (true)
        {
            if (q.running())
            {
                if (q.running()->finish > now)
                    return;
                free_at = q.complete().finish;
                continue;
            }
            if (q.queue().empty())
                return;
            const micros start = std::max(free_at, q.queue().front().ready_at);
            if (start > now || !q.dispatch(start))
                return;
        }
    }
}
