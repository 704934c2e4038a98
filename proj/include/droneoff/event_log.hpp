#pragma once

// Line-oriented event log: one CSV record per simulation event.
//
//   time_us,kind,from,to,index,v1,v2,x
//
// from/to are "d<id>" (drone), "s<id>" (server) or "-". The meaning of
// index/v1/v2/x depends on kind:
//
//   depart        d -> -   path index left, actual flight us, assumed flight us, energy
//   arrive        d -> -   path index reached, actual flight us, 0, energy after flight
//   detour_insert d -> -   path index of the new depot entry
//   detour_move   d -> -   old depot index, new index (-1 removed)
//   inquiry       d -> s   session, 0, 0, reduction
//   offer         s -> d   session, resp us
//   reserve       d -> s   session, resp us, resp_max us
//   ack           s -> d   session, data-ready time, committed deadline
//   reoffer       s -> d   session, resp us
//   decide        d -> s|- path index, expected computation us, local computation us
//   upload        d -> s   path index, data-ready time at server
//   reject        s -> d   path index
//   compute_start s -> d   0, finish time, deadline (-1 when uncommitted)
//   compute_done  s -> d   0, finish time, deadline (-1 when uncommitted)
//   visit_done    d -> -   path index, visit us, server used (0 local), energy after visit
//   battery       d -> -   path index, service us, 0, energy after switch
//   landed        d -> -   path index, mission time us, 0, energy

#include "model.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace droneoff
{
    enum class LogKind : std::uint8_t
    {
        Depart,
        Arrive,
        DetourInsert,
        DetourMove,
        Inquiry,
        Offer,
        Reserve,
        Ack,
        ReOffer,
        Decide,
        Upload,
        Reject,
        ComputeStart,
        ComputeDone,
        VisitDone,
        Battery,
        Landed,
    };

    inline constexpr std::string_view kLogKindNames[] = {
        "depart", "arrive", "detour_insert", "detour_move", "inquiry", "offer", "reserve", "ack", "reoffer",
        "decide", "upload", "reject", "compute_start", "compute_done", "visit_done", "battery", "landed"};

    inline std::string_view name(LogKind k) { return kLogKindNames[static_cast<std::size_t>(k)]; }

    struct Party
    {
        char type = '-'; // 'd', 's' or '-'
        int id = 0;

        static Party drone(int id) { return {'d', id}; }
        static Party server(int id) { return {'s', id}; }
        static Party none() { return {}; }

        std::string str() const { return type == '-' ? "-" : type + std::to_string(id); }

        friend bool operator==(const Party &, const Party &) = default;
    };

    struct LogRecord
    {
        micros time = 0;
        LogKind kind = LogKind::Depart;
        Party from;
        Party to;
        std::int64_t index = 0;
        std::int64_t v1 = 0;
        std::int64_t v2 = 0;
        double x = 0.0;

        friend bool operator==(const LogRecord &, const LogRecord &) = default;
    };

    inline constexpr std::string_view kLogHeader = "time_us,kind,from,to,index,v1,v2,x";

    class EventLog
    {
    public:
        void add(const LogRecord &r) { records_.push_back(r); }
        const std::vector<LogRecord> &records() const noexcept { return records_; }
        std::size_t size() const noexcept { return records_.size(); }

        void write(std::ostream &os) const
        {
            os << kLogHeader << '\n';
            char buf[256];
            for (const auto &r : records_)
            {
                std::snprintf(buf, sizeof buf, "%lld,%s,%s,%s,%lld,%lld,%lld,%.9f\n", static_cast<long long>(r.time),
                              std::string(name(r.kind)).c_str(), r.from.str().c_str(), r.to.str().c_str(),
                              static_cast<long long>(r.index), static_cast<long long>(r.v1),
                              static_cast<long long>(r.v2), r.x);
                os << buf;
            }
        }

        std::string serialize() const
        {
            std::ostringstream os;
            write(os);
            return os.str();
        }

        static EventLog read(std::istream &is)
        {
            EventLog log;
            std::string line;
            if (!std::getline(is, line) || line != kLogHeader)
                throw std::runtime_error("event log: missing header");
            int lineno = 1;
            while (std::getline(is, line))
            {
                ++lineno;
                if (line.empty())
                    continue;
                LogRecord r;
                long long t = 0, idx = 0, v1 = 0, v2 = 0;
                char kind[32] = {}, from[16] = {}, to[16] = {};
                if (std::sscanf(line.c_str(), "%lld,%31[^,],%15[^,],%15[^,],%lld,%lld,%lld,%lf", &t, kind, from, to,
                                &idx, &v1, &v2, &r.x) != 8)
                    throw std::runtime_error("event log line " + std::to_string(lineno) + ": malformed");
                r.time = t;
                r.index = idx;
                r.v1 = v1;
                r.v2 = v2;
                r.kind = parse_kind(kind, lineno);
                r.from = parse_party(from);
                r.to = parse_party(to);
                log.add(r);
            }
            return log;
        }

    private:
        static LogKind parse_kind(std::string_view s, int lineno)
        {
            for (std::size_t i = 0; i < std::size(kLogKindNames); ++i)
                if (kLogKindNames[i] == s)
                    return static_cast<LogKind>(i);
            throw std::runtime_error("event log line " + std::to_string(lineno) + ": unknown kind");
        }

        static Party parse_party(std::string_view s)
        {
            if (s == "-")
                return Party::none();
            return Party{s[0], std::stoi(std::string(s.substr(1)))};
        }

        std::vector<LogRecord> records_;
    };
}
