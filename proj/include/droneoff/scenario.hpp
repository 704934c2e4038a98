#pragma once

#include "model.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace droneoff
{
    /// Node identifier inside one drone's mission: a POI index, or kDepotNode.
    inline constexpr int kDepotNode = -1;

    /// Worst-case (or assumed) flight time of a hop between two mission nodes, in microseconds.
    using HopFn = std::function<micros(int from, int to)>;

    struct Scenario
    {
        std::string name = "custom";
        int cols = 21;
        int rows = 21;
        double spacing = 20.0;
        GridPoint depot{10, 10};
        std::vector<DroneSpec> drones;
        std::vector<std::vector<GridPoint>> missions; // one POI list per drone
        std::vector<std::string> mission_names;       // label per drone, informational
        std::vector<ServerSpec> servers;
        double uncertainty = 0.0;

        std::size_t drone_count() const noexcept { return drones.size(); }

        const ServerSpec &server(int id) const
        {
            for (const auto &s : servers)
                if (s.id == id)
                    return s;
            throw std::out_of_range("unknown server id " + std::to_string(id));
        }

        GridPoint node_location(std::size_t drone, int node) const
        {
            return node == kDepotNode ? depot : missions.at(drone).at(static_cast<std::size_t>(node));
        }

        Waypoint node_waypoint(std::size_t drone, int node) const
        {
            return node == kDepotNode ? Waypoint::depot(depot) : Waypoint::point(node_location(drone, node), node);
        }

        /// Server ids whose range covers the location, ascending.
        std::vector<int> servers_in_range(GridPoint p) const
        {
            std::vector<int> ids;
            for (const auto &s : servers)
                if (s.in_range(p, spacing))
                    ids.push_back(s.id);
            std::sort(ids.begin(), ids.end());
            return ids;
        }

        void validate() const
        {
            if (cols <= 0 || rows <= 0 || !(spacing > 0.0))
                throw std::invalid_argument("grid dimensions and spacing must be positive");
            if (!(uncertainty >= 0.0 && uncertainty < 1.0))
                throw std::invalid_argument("uncertainty must lie in [0, 1)");
            if (drones.empty())
                throw std::invalid_argument("scenario has no drones");
            if (missions.size() != drones.size())
                throw std::invalid_argument("one mission per drone required");
            auto in_grid = [&](GridPoint p) { return p.x >= 0 && p.x < cols && p.y >= 0 && p.y < rows; };
            if (!in_grid(depot))
                throw std::invalid_argument("depot outside grid");
            for (std::size_t m = 0; m < drones.size(); ++m)
            {
                drones[m].validate();
                if (drones[m].id != static_cast<int>(m) + 1)
                    throw std::invalid_argument("drone ids must be 1..M in order");
                std::set<std::pair<int, int>> seen;
                for (const auto &p : missions[m])
                {
                    if (!in_grid(p))
                        throw std::invalid_argument("drone " + std::to_string(m + 1) + ": point of interest outside grid");
                    if (p == depot)
                        throw std::invalid_argument("drone " + std::to_string(m + 1) + ": depot listed as point of interest");
                    if (!seen.insert({p.x, p.y}).second)
                        throw std::invalid_argument("drone " + std::to_string(m + 1) + ": duplicate point of interest");
                }
            }
            std::set<int> ids;
            for (const auto &s : servers)
            {
                if (s.id <= 0 || !ids.insert(s.id).second)
                    throw std::invalid_argument("server ids must be positive and unique");
                if (!(s.proc_time > 0.0 && s.bandwidth > 0.0 && s.comm_range > 0.0 && s.msg_latency >= 0.0))
                    throw std::invalid_argument("server " + std::to_string(s.id) + ": invalid parameters");
            }
        }
    };

    /// Worst-case flight time flyMaxT between two mission nodes of a drone.
    inline micros max_hop_us(const Scenario &sc, std::size_t drone, int from, int to)
    {
        if (from == kDepotNode && to == kDepotNode)
            throw MalformedPath("depot to depot hop");
        const DroneSpec &spec = sc.drones[drone];
        const double cruise = cruise_time(sc.node_location(drone, from), sc.node_location(drone, to), sc.spacing, spec);
        double extra = 0.0;
        if (from == kDepotNode)
            extra = spec.takeoff_time;
        else if (to == kDepotNode)
            extra = spec.land_time;
        return to_micros(cruise + extra);
    }

    inline HopFn worst_case_hops(const Scenario &sc, std::size_t drone)
    {
        return [&sc, drone](int from, int to) { return max_hop_us(sc, drone, from, to); };
    }

    inline std::vector<GridPoint> rectangle(int x0, int y0, int x1, int y1)
    {
        std::vector<GridPoint> pts;
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                pts.push_back({x, y});
        return pts;
    }

    namespace builtin
    {
        // Mission rectangles and server sites for the 21x21 grid. The reference
        // topology does not print coordinates; these keep the servers symmetric
        // about the depot with overlapping ranges near the center.
        inline std::vector<GridPoint> small_mission() { return rectangle(4, 13, 15, 19); } // 12 x 7
        inline std::vector<GridPoint> large_mission() { return rectangle(3, 1, 16, 9); }   // 14 x 9

        inline std::vector<ServerSpec> default_servers()
        {
            ServerSpec a;
            a.id = 1;
            a.location = {5, 10};
            ServerSpec b = a;
            b.id = 2;
            b.location = {15, 10};
            return {a, b};
        }

        inline Scenario make(std::string name, const std::vector<std::string> &fleet)
        {
            Scenario sc;
            sc.name = std::move(name);
            sc.servers = default_servers();
            sc.uncertainty = 0.3;
            for (std::size_t m = 0; m < fleet.size(); ++m)
            {
                DroneSpec d;
                d.id = static_cast<int>(m) + 1;
                sc.drones.push_back(d);
                sc.missions.push_back(fleet[m] == "small" ? small_mission() : large_mission());
                sc.mission_names.push_back(fleet[m]);
            }
            return sc;
        }

        inline Scenario small20() { return make("small20", std::vector<std::string>(20, "small")); }
        inline Scenario large20() { return make("large20", std::vector<std::string>(20, "large")); }

        inline Scenario mixed10_10()
        {
            std::vector<std::string> fleet(10, "small");
            fleet.resize(20, "large");
            return make("mixed10+10", fleet);
        }

        inline std::vector<std::string> names() { return {"small20", "large20", "mixed10+10"}; }

        /// Returns true and fills `out` when `name` is a built-in scenario.
        inline bool lookup(const std::string &name, Scenario &out)
        {
            if (name == "small20")
                out = small20();
            else if (name == "large20")
                out = large20();
            else if (name == "mixed10+10")
                out = mixed10_10();
            else
                return false;
            return true;
        }
    }
}
