#pragma once

// Pre-sampled actual flight times, shared by every policy in an experiment
// cell. Entries are keyed by (drone, from-node, to-node): the visiting order
// of points of interest never changes at runtime, so every hop a drone can
// fly is either a leg of its tour or a detour leg between a POI and the
// depot. Keying by geometry lets all policies (and the oracle planner) see
// the same time for the same physical hop.

#include "tour.hpp"

#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace droneoff
{
    struct TraceEntry
    {
        int drone = 0; // 1-based drone id
        int from = kDepotNode;
        int to = kDepotNode;
        micros max_us = 0;
        micros actual_us = 0;

        friend bool operator==(const TraceEntry &, const TraceEntry &) = default;
    };

    inline std::uint64_t fnv1a(std::string_view bytes)
    {
        std::uint64_t h = 14695981039346656037ull;
        for (unsigned char c : bytes)
        {
            h ^= c;
            h *= 1099511628211ull;
        }
        return h;
    }

    class FlightTimeTrace
    {
    public:
        double uncertainty = 0.0;
        std::uint64_t seed = 0;

        void add(const TraceEntry &e)
        {
            auto key = std::make_tuple(e.drone, e.from, e.to);
            if (index_.count(key))
                return;
            index_[key] = entries_.size();
            entries_.push_back(e);
        }

        const std::vector<TraceEntry> &entries() const noexcept { return entries_; }

        bool contains(std::size_t drone, int from, int to) const
        {
            return index_.count(std::make_tuple(static_cast<int>(drone) + 1, from, to)) != 0;
        }

        const TraceEntry &entry(std::size_t drone, int from, int to) const
        {
            auto it = index_.find(std::make_tuple(static_cast<int>(drone) + 1, from, to));
            if (it == index_.end())
                throw TraceMismatch("trace has no entry for drone " + std::to_string(drone + 1) + " hop " +
                                    std::to_string(from) + " -> " + std::to_string(to));
            return entries_[it->second];
        }

        micros actual(std::size_t drone, int from, int to) const { return entry(drone, from, to).actual_us; }

        HopFn actual_hops(std::size_t drone) const
        {
            return [this, drone](int from, int to) { return actual(drone, from, to); };
        }

        std::string serialize() const
        {
            std::ostringstream os;
            write(os);
            return os.str();
        }

        std::uint64_t checksum() const { return fnv1a(serialize()); }

        void write(std::ostream &os) const
        {
            char buf[160];
            os << "# droneoff flight-time trace v1\n";
            std::snprintf(buf, sizeof buf, "# uncertainty=%.17g seed=%llu\n", uncertainty,
                          static_cast<unsigned long long>(seed));
            os << buf << "drone,from,to,max_us,actual_us\n";
            for (const auto &e : entries_)
            {
                std::snprintf(buf, sizeof buf, "%d,%d,%d,%lld,%lld\n", e.drone, e.from, e.to,
                              static_cast<long long>(e.max_us), static_cast<long long>(e.actual_us));
                os << buf;
            }
        }

        static FlightTimeTrace read(std::istream &is)
        {
            FlightTimeTrace t;
            std::string line;
            int lineno = 0;
            bool header = false;
            while (std::getline(is, line))
            {
                ++lineno;
                if (line.empty())
                    continue;
                if (line[0] == '#')
                {
                    double u = 0;
                    unsigned long long s = 0;
                    if (std::sscanf(line.c_str(), "# uncertainty=%lf seed=%llu", &u, &s) == 2)
                    {
                        t.uncertainty = u;
                        t.seed = s;
                    }
                    continue;
                }
                if (!header)
                {
                    if (line != "drone,from,to,max_us,actual_us")
                        throw TraceMismatch("trace line " + std::to_string(lineno) + ": unexpected header");
                    header = true;
                    continue;
                }
                TraceEntry e;
                long long mx = 0, ac = 0;
                char tail = 0;
                if (std::sscanf(line.c_str(), "%d,%d,%d,%lld,%lld%c", &e.drone, &e.from, &e.to, &mx, &ac, &tail) != 5)
                    throw TraceMismatch("trace line " + std::to_string(lineno) + ": malformed record");
                e.max_us = mx;
                e.actual_us = ac;
                t.add(e);
            }
            if (!header)
                throw TraceMismatch("trace has no header");
            return t;
        }

    private:
        std::vector<TraceEntry> entries_;
        std::map<std::tuple<int, int, int>, std::size_t> index_;
    };

    /// Every hop a drone may fly for the given visiting order, in a fixed
    /// enumeration order: tour legs first, then per POI the detour legs.
    inline std::vector<std::pair<int, int>> trace_legs(const std::vector<int> &tour)
    {
        std::vector<std::pair<int, int>> legs;
        if (tour.empty())
            return legs;
        legs.emplace_back(kDepotNode, tour.front());
        for (std::size_t j = 0; j + 1 < tour.size(); ++j)
            legs.emplace_back(tour[j], tour[j + 1]);
        legs.emplace_back(tour.back(), kDepotNode);
        for (int p : tour)
        {
            legs.emplace_back(p, kDepotNode);
            legs.emplace_back(kDepotNode, p);
        }
        return legs;
    }

    /// Uniform factor in [1-u, 1] from the top 53 bits of a 64-bit Mersenne
    /// Twister draw; bit-identical on every conforming platform.
    inline double draw_factor(std::mt19937_64 &rng, double u)
    {
        const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return 1.0 - u * unit;
    }

    inline FlightTimeTrace sample_trace(const Scenario &sc, const std::vector<std::vector<int>> &tours,
                                        std::uint64_t seed)
    {
        if (!(sc.uncertainty >= 0.0 && sc.uncertainty < 1.0))
            throw std::invalid_argument("uncertainty must lie in [0, 1)");
        FlightTimeTrace trace;
        trace.uncertainty = sc.uncertainty;
        trace.seed = seed;
        std::mt19937_64 rng(seed);
        for (std::size_t m = 0; m < sc.drone_count(); ++m)
        {
            for (auto [from, to] : trace_legs(tours.at(m)))
            {
                if (trace.contains(m, from, to))
                    continue;
                const micros mx = max_hop_us(sc, m, from, to);
                const double f = draw_factor(rng, sc.uncertainty);
                const micros lo = static_cast<micros>(std::ceil((1.0 - sc.uncertainty) * static_cast<double>(mx)));
                const micros actual = std::clamp(static_cast<micros>(std::llround(f * static_cast<double>(mx))), lo, mx);
                trace.add(TraceEntry{static_cast<int>(m) + 1, from, to, mx, actual});
            }
        }
        return trace;
    }

    inline FlightTimeTrace sample_trace(const Scenario &sc, std::uint64_t seed)
    {
        std::vector<std::vector<int>> tours;
        for (std::size_t m = 0; m < sc.drone_count(); ++m)
            tours.push_back(build_tour(sc, m));
        return sample_trace(sc, tours, seed);
    }

    /// Trace whose actual times equal the worst case (u = 0).
    inline FlightTimeTrace worst_case_trace(const Scenario &sc, const std::vector<std::vector<int>> &tours)
    {
        Scenario copy = sc;
        copy.uncertainty = 0.0;
        return sample_trace(copy, tours, 0);
    }
}
