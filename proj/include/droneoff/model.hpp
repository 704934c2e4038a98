#pragma once

// Domain types and the closed-form timing / energy model shared by the
// planner, the protocol endpoints and the simulation engine.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace droneoff
{
    /// Simulation time in integer microseconds. All engine clocks, logs and
    /// traces use this so that runs are bit-reproducible.
    using micros = std::int64_t;

    inline constexpr micros kNever = std::numeric_limits<micros>::max() / 4;

    inline micros to_micros(double seconds) { return static_cast<micros>(std::llround(seconds * 1e6)); }
    inline constexpr double to_seconds(micros us) { return static_cast<double>(us) / 1e6; }

    struct DegenerateHop : std::invalid_argument
    {
        using std::invalid_argument::invalid_argument;
    };

    struct MalformedPath : std::invalid_argument
    {
        using std::invalid_argument::invalid_argument;
    };

    /// Energy would reach zero or below in mid-air. A run that raises this is invalid.
    struct EnergyViolation : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    struct InfeasibleMission : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    struct TraceMismatch : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    struct GridPoint
    {
        int x = 0;
        int y = 0;

        friend bool operator==(const GridPoint &, const GridPoint &) = default;
    };

    /// Euclidean distance in meters for a grid with `spacing` meters per unit.
    inline double distance(GridPoint a, GridPoint b, double spacing)
    {
        const double dx = a.x - b.x;
        const double dy = a.y - b.y;
        return spacing * std::sqrt(dx * dx + dy * dy);
    }

    enum class WaypointKind : std::uint8_t
    {
        PointOfInterest,
        Depot,
    };

    struct Waypoint
    {
        GridPoint location;
        WaypointKind kind = WaypointKind::PointOfInterest;
        // Index into the owning drone's mission list; -1 for the depot.
        int poi = -1;

        bool is_depot() const noexcept { return kind == WaypointKind::Depot; }

        static Waypoint depot(GridPoint at) { return Waypoint{at, WaypointKind::Depot, -1}; }
        static Waypoint point(GridPoint at, int index) { return Waypoint{at, WaypointKind::PointOfInterest, index}; }

        friend bool operator==(const Waypoint &, const Waypoint &) = default;
    };

    struct DroneSpec
    {
        int id = 1;
        double cruise_speed = 4.0; // m/s
        double h_accel = 0.8;      // m/s^2
        double h_decel = 1.6;      // m/s^2
        double takeoff_time = 5.0;
        double land_time = 20.0;
        double sense_time = 1.0;
        double local_proc_time = 10.0;
        double data_in = 1e6;  // bytes
        double data_out = 1e3; // bytes
        double energy_capacity = 1.0;
        double beta = 1.0 / 900.0;  // energy per second flying
        double gamma = 1.0 / 900.0; // energy per second hovering
        double depot_service_time = 180.0;

        void validate() const
        {
            const double fields[] = {cruise_speed, h_accel, h_decel, takeoff_time, land_time, sense_time,
                                     local_proc_time, energy_capacity, beta, gamma, depot_service_time};
            for (double f : fields)
            {
                if (!(f > 0.0))
                    throw std::invalid_argument("drone " + std::to_string(id) + ": parameters must be strictly positive");
            }
            if (data_in < 0.0 || data_out < 0.0)
                throw std::invalid_argument("drone " + std::to_string(id) + ": data sizes must be non-negative");
        }
    };

    struct ServerSpec
    {
        int id = 1;
        GridPoint location;
        double proc_time = 1.8;   // s
        double bandwidth = 50e6;  // bits/s
        double comm_range = 200;  // m
        double msg_latency = 0.010;

        bool in_range(GridPoint p, double spacing) const { return distance(p, location, spacing) <= comm_range; }

        /// Time to ship `bytes` over this server's link.
        double transfer_time(double bytes) const { return bytes * 8.0 / bandwidth; }
    };

    struct MissionPlan
    {
        std::vector<Waypoint> path;
        std::vector<int> schedule;   // server id, 0 = local
        std::vector<double> waits;   // seconds

        std::size_t size() const noexcept { return path.size(); }

        /// Checks structural invariants. Range checks need the servers, see
        /// validate(plan, servers, spacing).
        void validate() const
        {
            if (path.size() < 3)
                throw MalformedPath("path must contain at least one point of interest");
            if (schedule.size() != path.size() || waits.size() != path.size())
                throw MalformedPath("path, schedule and waits must have equal length");
            if (!path.front().is_depot() || !path.back().is_depot())
                throw MalformedPath("path must start and end at the depot");
            for (std::size_t i = 0; i < path.size(); ++i)
            {
                if (i + 1 < path.size() && path[i].is_depot() && path[i + 1].is_depot())
                    throw MalformedPath("consecutive depot entries at index " + std::to_string(i));
                if (path[i].is_depot() && (schedule[i] != 0 || waits[i] != 0.0))
                    throw MalformedPath("depot entry with offload or wait at index " + std::to_string(i));
                if (waits[i] < 0.0 || schedule[i] < 0)
                    throw MalformedPath("negative wait or server id at index " + std::to_string(i));
            }
        }

        std::size_t detour_count() const
        {
            std::size_t n = 0;
            for (std::size_t i = 1; i + 1 < path.size(); ++i)
                n += path[i].is_depot() ? 1 : 0;
            return n;
        }

        friend bool operator==(const MissionPlan &, const MissionPlan &) = default;
    };

    inline void validate(const MissionPlan &plan, const std::vector<ServerSpec> &servers, double spacing)
    {
        plan.validate();
        for (std::size_t i = 0; i < plan.size(); ++i)
        {
            const int k = plan.schedule[i];
            if (k == 0)
                continue;
            bool ok = false;
            for (const auto &s : servers)
                ok = ok || (s.id == k && s.in_range(plan.path[i].location, spacing));
            if (!ok)
                throw MalformedPath("offload at index " + std::to_string(i) + " to server out of range or unknown");
        }
    }

    struct EnergyState
    {
        double remaining = 1.0;
    };

    /// Horizontal traversal time between two grid points: trapezoidal velocity
    /// profile, or triangular when the hop is too short to reach cruise speed.
    inline double cruise_time(double meters, const DroneSpec &spec)
    {
        if (!(meters > 0.0))
            throw DegenerateHop("zero-length hop");
        const double v = spec.cruise_speed;
        const double ramp = v * v / (2.0 * spec.h_accel) + v * v / (2.0 * spec.h_decel);
        if (meters >= ramp)
            return v / spec.h_accel + v / spec.h_decel + (meters - ramp) / v;
        // v*^2 (1/2a + 1/2d) = meters
        const double peak = std::sqrt(2.0 * spec.h_accel * spec.h_decel * meters / (spec.h_accel + spec.h_decel));
        return peak / spec.h_accel + peak / spec.h_decel;
    }

    inline double cruise_time(GridPoint a, GridPoint b, double spacing, const DroneSpec &spec)
    {
        if (a == b)
            throw DegenerateHop("zero-length hop");
        return cruise_time(distance(a, b, spacing), spec);
    }

    /// Total flight time of hop i -> i+1 (takeoff from / landing at the depot included).
    inline double fly_time(const std::vector<Waypoint> &path, std::size_t i, double cruise, const DroneSpec &spec)
    {
        if (i + 1 >= path.size())
            throw std::out_of_range("hop index past end of path");
        const bool from_depot = path[i].is_depot();
        const bool to_depot = path[i + 1].is_depot();
        if (from_depot && to_depot)
            throw MalformedPath("depot to depot hop");
        if (from_depot)
            return cruise + spec.takeoff_time;
        if (to_depot)
            return cruise + spec.land_time;
        return cruise;
    }

    /// End-to-end offloaded computation time for a given server response time.
    inline double offload_time(const DroneSpec &drone, const ServerSpec &server, double response_time)
    {
        if (response_time < server.proc_time)
            throw std::invalid_argument("response time below server processing time");
        return response_time + server.transfer_time(drone.data_in + drone.data_out);
    }

    enum class VisitSite : std::uint8_t
    {
        PointOfInterest,
        IntermediateDepot,
        TerminalDepot,
    };

    inline double visit_time(const DroneSpec &drone, VisitSite site, double wait, double comp_time)
    {
        if (wait < 0.0)
            throw std::invalid_argument("negative wait");
        switch (site)
        {
        case VisitSite::PointOfInterest:
            return drone.sense_time + wait + comp_time;
        case VisitSite::IntermediateDepot:
            return drone.depot_service_time;
        case VisitSite::TerminalDepot:
            return 0.0;
        }
        return 0.0;
    }

    inline VisitSite site_of(const std::vector<Waypoint> &path, std::size_t i)
    {
        if (!path[i].is_depot())
            return VisitSite::PointOfInterest;
        return (i == 0 || i + 1 == path.size()) ? VisitSite::TerminalDepot : VisitSite::IntermediateDepot;
    }

    /// visit[0] + sum over hops of (fly + visit at arrival).
    inline double mission_time(const MissionPlan &plan, const std::vector<double> &hop_times,
                               const std::vector<double> &visit_times)
    {
        if (hop_times.size() + 1 != plan.size() || visit_times.size() != plan.size())
            throw std::invalid_argument("hop/visit arrays inconsistent with plan");
        double t = visit_times[0];
        for (std::size_t i = 0; i + 1 < plan.size(); ++i)
            t += hop_times[i] + visit_times[i + 1];
        return t;
    }

    enum class EnergyUse : std::uint8_t
    {
        Fly,
        Hover,
    };

    inline EnergyState energy_debit(EnergyState state, EnergyUse kind, double duration, const DroneSpec &spec)
    {
        if (duration < 0.0)
            throw std::invalid_argument("negative duration");
        const double rate = kind == EnergyUse::Fly ? spec.beta : spec.gamma;
        state.remaining -= rate * duration;
        if (!(state.remaining > 0.0))
            throw EnergyViolation("drone " + std::to_string(spec.id) + " ran out of energy");
        return state;
    }

    inline EnergyState battery_switch(const DroneSpec &spec) { return EnergyState{spec.energy_capacity}; }

    inline double relative_reduction(double default_time, double actual_time)
    {
        if (!(default_time > 0.0))
            throw std::invalid_argument("default mission time must be positive");
        return (default_time - actual_time) / default_time;
    }

    /// Energy bookkeeping in integer microseconds of flight / hover since the
    /// last battery switch. remaining() is a pure function of the counters, so
    /// the planner and the engine evaluate identical expressions.
    class EnergyMeter
    {
    public:
        EnergyMeter() = default;
        explicit EnergyMeter(const DroneSpec &spec) : capacity_(spec.energy_capacity), beta_(spec.beta), gamma_(spec.gamma) {}

        double remaining() const { return remaining_after(0, 0); }

        double remaining_after(micros extra_fly, micros extra_hover) const
        {
            return capacity_ - (beta_ * static_cast<double>(flown_ + extra_fly) +
                                gamma_ * static_cast<double>(hovered_ + extra_hover)) / 1e6;
        }

        void fly(micros us) { flown_ += us; }
        void hover(micros us) { hovered_ += us; }
        void recharge() { flown_ = hovered_ = 0; }

        micros flown() const noexcept { return flown_; }
        micros hovered() const noexcept { return hovered_; }

    private:
        double capacity_ = 1.0;
        double beta_ = 1.0 / 900.0;
        double gamma_ = 1.0 / 900.0;
        micros flown_ = 0;
        micros hovered_ = 0;
    };
}
