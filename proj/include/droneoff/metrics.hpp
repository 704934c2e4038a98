#pragma once

// Evaluation quantities derived from an event log alone.

#include "event_log.hpp"
#include "mission.hpp"
#include "policies.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace droneoff
{
    struct DroneMetrics
    {
        int drone = 0;
        double mission_time = 0.0;
        double default_time = 0.0;
        double reduction = 0.0;
        std::size_t detours = 0;
        double flight_seconds = 0.0;
        double poi_seconds = 0.0;
        double depot_seconds = 0.0;
        std::size_t local_computes = 0;
        std::size_t offloads = 0;
        double total_wait = 0.0;
    };

    struct ServerMetrics
    {
        int server = 0;
        double busy_seconds = 0.0;
        std::size_t requests_served = 0;
        std::size_t requests_declined = 0;
    };

    /// Quartile summary with Tukey hinges (the median is included in both
    /// halves when n is odd) and 1.5·IQR whiskers.
    struct BoxStats
    {
        double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
        double whisker_low = 0.0, whisker_high = 0.0;
        std::vector<double> outliers;
    };

    namespace detail
    {
        inline double median_of(const std::vector<double> &v, std::size_t lo, std::size_t hi)
        {
            const std::size_t n = hi - lo;
            const std::size_t mid = lo + n / 2;
            return n % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
        }
    }

    inline BoxStats box_stats(std::vector<double> v)
    {
        BoxStats b;
        if (v.empty())
            return b;
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        const std::size_t half = (n + 1) / 2;
        b.min = v.front();
        b.max = v.back();
        b.median = detail::median_of(v, 0, n);
        b.q1 = detail::median_of(v, 0, half);
        b.q3 = detail::median_of(v, n - half, n);
        const double iqr = b.q3 - b.q1;
        const double lo = b.q1 - 1.5 * iqr, hi = b.q3 + 1.5 * iqr;
        b.whisker_low = b.max;
        b.whisker_high = b.min;
        for (double x : v)
        {
            if (x < lo || x > hi)
                b.outliers.push_back(x);
            else
            {
                b.whisker_low = std::min(b.whisker_low, x);
                b.whisker_high = std::max(b.whisker_high, x);
            }
        }
        return b;
    }

    struct RunMetrics
    {
        std::vector<DroneMetrics> drones;
        std::vector<ServerMetrics> servers;
        double min_reduction = 0.0;
        double mean_reduction = 0.0;
        BoxStats reductions;

        std::size_t total_detours() const
        {
            std::size_t n = 0;
            for (const auto &d : drones)
                n += d.detours;
            return n;
        }

        double total_flight() const
        {
            double s = 0.0;
            for (const auto &d : drones)
                s += d.flight_seconds;
            return s;
        }
    };

    /// Derives every metric from the log. `default_times` holds each drone's
    /// analytic no-offloading mission time in microseconds.
    inline RunMetrics summarize(const EventLog &log, const Scenario &sc, const std::vector<micros> &default_times)
    {
        const std::size_t n = sc.drone_count();
        if (default_times.size() != n)
            throw std::invalid_argument("summarize: one default time per drone required");
        struct Acc
        {
            micros flight = 0, poi = 0, depot = 0, wait = 0, landed = -1;
            std::size_t detours = 0, local = 0, offloads = 0;
        };
        std::vector<Acc> acc(n);
        std::map<int, ServerMetrics> servers;
        std::map<int, micros> busy;
        for (const auto &s : sc.servers)
            servers[s.id].server = s.id;

        const std::vector<DroneTiming> timing = [&] {
            std::vector<DroneTiming> t;
            for (std::size_t m = 0; m < n; ++m)
                t.push_back(DroneTiming::of(sc, m));
            return t;
        }();

        for (const auto &r : log.records())
        {
            if (r.from.type == 'd')
            {
                const std::size_t m = static_cast<std::size_t>(r.from.id - 1);
                if (m >= n)
                    throw std::runtime_error("summarize: log names an unknown drone");
                Acc &a = acc[m];
                switch (r.kind)
                {
                case LogKind::Arrive:
                    a.flight += r.v1;
                    break;
                case LogKind::VisitDone:
                    a.poi += r.v1;
                    if (r.v2 == 0)
                        ++a.local;
                    else
                    {
                        ++a.offloads;
                        a.wait += r.v1 - timing[m].sense - planned_offload_us(sc, m, static_cast<int>(r.v2));
                    }
                    break;
                case LogKind::Battery:
                    a.depot += r.v1;
                    ++a.detours;
                    break;
                case LogKind::Landed:
                    a.landed = r.v1;
                    break;
                default:
                    break;
                }
            }
            else if (r.from.type == 's')
            {
                ServerMetrics &s = servers[r.from.id];
                s.server = r.from.id;
                switch (r.kind)
                {
                case LogKind::ComputeStart:
                    busy[r.from.id] += r.v1 - r.time;
                    break;
                case LogKind::ComputeDone:
                    ++s.requests_served;
                    break;
                case LogKind::ReOffer:
                case LogKind::Reject:
                    ++s.requests_declined;
                    break;
                default:
                    break;
                }
            }
        }

        RunMetrics out;
        std::vector<double> reds;
        for (std::size_t m = 0; m < n; ++m)
        {
            const Acc &a = acc[m];
            if (a.landed < 0)
                throw std::runtime_error("summarize: drone " + std::to_string(m + 1) + " never landed");
            DroneMetrics d;
            d.drone = static_cast<int>(m) + 1;
            d.mission_time = to_seconds(a.landed);
            d.default_time = to_seconds(default_times[m]);
            d.reduction = relative_reduction(d.default_time, d.mission_time);
            d.detours = a.detours;
            d.flight_seconds = to_seconds(a.flight);
            d.poi_seconds = to_seconds(a.poi);
            d.depot_seconds = to_seconds(a.depot);
            d.local_computes = a.local;
            d.offloads = a.offloads;
            d.total_wait = to_seconds(a.wait);
            reds.push_back(d.reduction);
            out.drones.push_back(d);
        }
        for (auto &[id, s] : servers)
        {
            s.busy_seconds = to_seconds(busy[id]);
            out.servers.push_back(s);
        }
        out.min_reduction = *std::min_element(reds.begin(), reds.end());
        double sum = 0.0;
        for (double r : reds)
            sum += r;
        out.mean_reduction = sum / static_cast<double>(reds.size());
        out.reductions = box_stats(reds);
        return out;
    }

    struct PolicyRow
    {
        PolicyKind policy = PolicyKind::Proposed;
        double min_reduction = 0.0;
        double mean_reduction = 0.0;
        double median_reduction = 0.0;
        std::size_t detours = 0;
        double flight_seconds = 0.0;
    };

    struct Delta
    {
        PolicyKind a = PolicyKind::Proposed;
        PolicyKind b = PolicyKind::Proposed;
        double min_reduction_pp = 0.0; // percentage points
        long long detours = 0;
        double flight_seconds = 0.0;
        double flight_percent = 0.0;   // relative to b
    };

    struct Comparison
    {
        std::vector<PolicyRow> rows;
        std::vector<Delta> deltas;

        const PolicyRow *row(PolicyKind p) const
        {
            for (const auto &r : rows)
                if (r.policy == p)
                    return &r;
            return nullptr;
        }

        const Delta *delta(PolicyKind a, PolicyKind b) const
        {
            for (const auto &d : deltas)
                if (d.a == a && d.b == b)
                    return &d;
            return nullptr;
        }
    };

    inline Comparison compare(const std::vector<std::pair<PolicyKind, RunMetrics>> &runs)
    {
        Comparison c;
        for (const auto &[p, m] : runs)
            c.rows.push_back(PolicyRow{p, m.min_reduction, m.mean_reduction, m.reductions.median, m.total_detours(),
                                       m.total_flight()});
        const std::pair<PolicyKind, PolicyKind> pairs[] = {
            {PolicyKind::Proposed, PolicyKind::FollowPlan},
            {PolicyKind::Oracle, PolicyKind::Proposed},
            {PolicyKind::Proposed, PolicyKind::Opportunistic},
        };
        for (auto [a, b] : pairs)
        {
            const PolicyRow *ra = c.row(a);
            const PolicyRow *rb = c.row(b);
            if (!ra || !rb)
                continue;
            Delta d{a, b};
            d.min_reduction_pp = (ra->min_reduction - rb->min_reduction) * 100.0;
            d.detours = static_cast<long long>(ra->detours) - static_cast<long long>(rb->detours);
            d.flight_seconds = ra->flight_seconds - rb->flight_seconds;
            d.flight_percent = rb->flight_seconds > 0 ? d.flight_seconds / rb->flight_seconds * 100.0 : 0.0;
            c.deltas.push_back(d);
        }
        return c;
    }

    inline constexpr std::string_view kDroneCsvHeader =
        "policy,drone,mission_time_s,default_time_s,reduction,detours,flight_s,poi_s,depot_s,local_computes,offloads,"
        "total_wait_s";
    inline constexpr std::string_view kServerCsvHeader = "policy,server,busy_s,requests_served,requests_declined";
    inline constexpr std::string_view kComparisonHeader =
        "seed,u,kind,policy,other,min_reduction,mean_reduction,median_reduction,detours,flight_s,delta_pp,"
        "delta_detours,delta_flight_s,delta_flight_pct";
    inline constexpr std::string_view kBoxplotHeader =
        "seed,u,policy,min,whisker_low,q1,median,q3,whisker_high,max,outliers";

    inline void write_drone_rows(std::ostream &os, PolicyKind p, const RunMetrics &m)
    {
        char buf[512];
        for (const auto &d : m.drones)
        {
            std::snprintf(buf, sizeof buf, "%s,%d,%.6f,%.6f,%.9f,%zu,%.6f,%.6f,%.6f,%zu,%zu,%.6f\n",
                          std::string(name(p)).c_str(), d.drone, d.mission_time, d.default_time, d.reduction,
                          d.detours, d.flight_seconds, d.poi_seconds, d.depot_seconds, d.local_computes, d.offloads,
                          d.total_wait);
            os << buf;
        }
    }

    inline void write_server_rows(std::ostream &os, PolicyKind p, const RunMetrics &m)
    {
        char buf[256];
        for (const auto &s : m.servers)
        {
            std::snprintf(buf, sizeof buf, "%s,%d,%.6f,%zu,%zu\n", std::string(name(p)).c_str(), s.server,
                          s.busy_seconds, s.requests_served, s.requests_declined);
            os << buf;
        }
    }

    inline void write_comparison_rows(std::ostream &os, std::uint64_t seed, double u, const Comparison &c)
    {
        char buf[512];
        for (const auto &r : c.rows)
        {
            std::snprintf(buf, sizeof buf, "%llu,%.4f,policy,%s,-,%.9f,%.9f,%.9f,%zu,%.6f,,,,\n",
                          static_cast<unsigned long long>(seed), u, std::string(name(r.policy)).c_str(),
                          r.min_reduction, r.mean_reduction, r.median_reduction, r.detours, r.flight_seconds);
            os << buf;
        }
        for (const auto &d : c.deltas)
        {
            std::snprintf(buf, sizeof buf, "%llu,%.4f,delta,%s,%s,,,,,,%.6f,%lld,%.6f,%.6f\n",
                          static_cast<unsigned long long>(seed), u, std::string(name(d.a)).c_str(),
                          std::string(name(d.b)).c_str(), d.min_reduction_pp, d.detours, d.flight_seconds,
                          d.flight_percent);
            os << buf;
        }
    }

    inline void write_boxplot_row(std::ostream &os, std::uint64_t seed, double u, PolicyKind p, const BoxStats &b)
    {
        char buf[512];
        std::snprintf(buf, sizeof buf, "%llu,%.4f,%s,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,",
                      static_cast<unsigned long long>(seed), u, std::string(name(p)).c_str(), b.min, b.whisker_low,
                      b.q1, b.median, b.q3, b.whisker_high, b.max);
        os << buf;
        for (std::size_t i = 0; i < b.outliers.size(); ++i)
        {
            std::snprintf(buf, sizeof buf, "%s%.9f", i ? ";" : "", b.outliers[i]);
            os << buf;
        }
        os << '\n';
    }
}
