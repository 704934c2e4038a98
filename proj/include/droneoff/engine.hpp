#pragma once

// Deterministic discrete-event simulation of a drone fleet executing mission
// plans against shared edge servers.

#include "event_log.hpp"
#include "mission.hpp"
#include "policies.hpp"
#include "protocol.hpp"
#include "trace.hpp"

#include <map>
#include <optional>
#include <queue>
#include <vector>

namespace droneoff
{
    struct EngineOptions
    {
        PolicyKind policy = PolicyKind::Proposed;
        SafetyMode safety = SafetyMode::Conservative;
        bool record_log = true;
        /// Use the trace's actual hop times as the drone's assumed (worst-case)
        /// times. Set for the oracle, whose plan was built from actual times.
        bool assume_actual_times = false;
    };

    struct DroneOutcome
    {
        MissionPlan realized;       // path as flown; schedule = server used; waits = measured
        micros mission_time = 0;
        micros flight_time = 0;
        std::size_t depot_visits = 0;
        std::size_t safety_detours = 0; // inserted by the runtime check
        std::size_t detours_moved = 0;
        std::size_t detours_removed = 0;
        std::size_t guard_fallbacks = 0; // offloads skipped or rejected for energy
        std::size_t max_reserve_attempts = 0;
    };

    struct RunResult
    {
        EventLog log;
        std::vector<DroneOutcome> drones;
        std::uint64_t trace_checksum = 0;
    };

    /// Dense per-drone table of assumed hop times.
    class HopTable
    {
    public:
        HopTable() = default;
        HopTable(std::size_t pois, HopFn fn) : n_(pois + 1), table_(n_ * n_, -1), fn_(std::move(fn)) {}

        micros operator()(int from, int to) const
        {
            micros &slot = table_[static_cast<std::size_t>(from + 1) * n_ + static_cast<std::size_t>(to + 1)];
            if (slot < 0)
                slot = fn_(from, to);
            return slot;
        }

    private:
        std::size_t n_ = 0;
        mutable std::vector<micros> table_;
        HopFn fn_;
    };

    class Simulation
    {
    public:
        Simulation(const Scenario &sc, const std::vector<MissionPlan> &plans, const std::vector<micros> &default_times,
                   const FlightTimeTrace &trace, EngineOptions opt)
            : sc_(sc), trace_(trace), opt_(opt)
        {
            if (plans.size() != sc.drone_count() || default_times.size() != sc.drone_count())
                throw std::invalid_argument("one plan and default time per drone required");
            for (const auto &s : sc.servers)
            {
                server_index_[s.id] = servers_.size();
                servers_.emplace_back(s, discipline(opt.policy));
            }
            for (std::size_t m = 0; m < sc.drone_count(); ++m)
            {
                validate(plans[m], sc.servers, sc.spacing);
                DroneState d;
                d.idx = m;
                d.spec = &sc.drones[m];
                d.plan = plans[m];
                d.realized = plans[m];
                d.meter = EnergyMeter(sc.drones[m]);
                d.timing = DroneTiming::of(sc, m);
                d.hops = opt.assume_actual_times ? HopTable(sc.missions[m].size(), trace.actual_hops(m))
                                                 : HopTable(sc.missions[m].size(), worst_case_hops(sc, m));
                d.default_us = default_times[m];
                drones_.push_back(std::move(d));
            }
            for (auto &d : drones_)
            {
                HopFn hop = [&d](int a, int b) { return d.hops(a, b); };
                d.red = reduction_of(d, plan_time_us(sc_, d.idx, d.plan, hop));
            }
        }

        RunResult run()
        {
            for (auto &d : drones_)
                depart_next(d);
            while (!events_.empty())
            {
                Event ev = events_.top();
                events_.pop();
                now_ = ev.time;
                dispatch(ev);
            }
            RunResult result;
            result.trace_checksum = trace_.checksum();
            for (auto &d : drones_)
            {
                if (!d.done)
                    throw std::logic_error("simulation ended before drone " + std::to_string(d.idx + 1) + " landed");
                d.out.realized = d.realized;
                d.out.realized.path = d.plan.path;
                result.drones.push_back(d.out);
            }
            result.log = std::move(log_);
            return result;
        }

    private:
        enum class Ev : std::uint8_t
        {
            Arrival,
            SenseDone,
            LocalDone,
            UploadStart,
            BatteryDone,
            InquiryAtServer,
            OfferAtDrone,
            ReserveAtServer,
            AckAtDrone,
            ReOfferAtDrone,
            DataAtServer,
            RejectAtDrone,
            ComputeDone,
            ResultAtDrone,
        };

        struct Event
        {
            micros time = 0;
            std::uint64_t seq = 0;
            Ev kind = Ev::Arrival;
            std::size_t drone = 0;
            int server = 0;
            int session = 0;
            micros a = 0;
            micros b = 0;
            micros c = 0;
            double x = 0.0;
            bool direct = false;
        };

        struct Later
        {
            bool operator()(const Event &l, const Event &r) const
            {
                return l.time != r.time ? l.time > r.time : l.seq > r.seq;
            }
        };

        enum class Decision : std::uint8_t
        {
            None,
            Pending,
            Local,
            Offload,
        };

        struct DroneState
        {
            std::size_t idx = 0;
            const DroneSpec *spec = nullptr;
            MissionPlan plan;
            MissionPlan realized;
            std::size_t i = 0;
            EnergyMeter meter;
            DroneTiming timing;
            HopTable hops;
            micros default_us = 0;
            double red = 0.0;

            micros visit_start = 0;
            micros sense_done_at = 0;
            micros hover_limit = kNever;
            bool sensed = false;
            Decision decision = Decision::None;
            int server = 0;
            micros ready_at = 0;
            int session = 0;
            std::optional<Negotiator> neg;
            std::vector<int> contacted;
            micros last_resp = 0;

            bool done = false;
            DroneOutcome out;
        };

        int id_of(const DroneState &d) const { return static_cast<int>(d.idx) + 1; }
        ServerEndpoint &server(int id) { return servers_[server_index_.at(id)]; }

        void push(Event ev)
        {
            ev.seq = seq_++;
            events_.push(ev);
        }

        void log(LogKind kind, Party from, Party to, std::int64_t index, std::int64_t v1 = 0, std::int64_t v2 = 0,
                 double x = 0.0)
        {
            if (opt_.record_log)
                log_.add(LogRecord{now_, kind, from, to, index, v1, v2, x});
        }

        double reduction_of(const DroneState &d, micros predicted) const
        {
            return relative_reduction(to_seconds(d.default_us), to_seconds(predicted));
        }

        void check_energy(const DroneState &d) const
        {
            if (!(d.meter.remaining() > 0.0))
                throw EnergyViolation("drone " + std::to_string(d.idx + 1) + " exhausted its battery at t=" +
                                      std::to_string(now_) + "us");
        }

        void insert_detour(DroneState &d, std::size_t at)
        {
            insert_depot(d.plan, at, sc_.depot);
            insert_depot(d.realized, at, sc_.depot);
        }

        void erase_detour(DroneState &d, std::size_t at)
        {
            erase_entry(d.plan, at);
            erase_entry(d.realized, at);
        }

        void dispatch(const Event &ev)
        {
            switch (ev.kind)
            {
            case Ev::Arrival:
                return on_arrival(drones_[ev.drone], ev.a);
            case Ev::SenseDone:
                return on_sense_done(drones_[ev.drone]);
            case Ev::LocalDone:
                return finish_visit(drones_[ev.drone], 0);
            case Ev::UploadStart:
                return start_direct_upload(drones_[ev.drone]);
            case Ev::BatteryDone:
                return on_battery_done(drones_[ev.drone]);
            case Ev::InquiryAtServer:
                return on_inquiry(ev);
            case Ev::OfferAtDrone:
                return on_offer(drones_[ev.drone], ev);
            case Ev::ReserveAtServer:
                return on_reserve(ev);
            case Ev::AckAtDrone:
                return on_ack(drones_[ev.drone], ev);
            case Ev::ReOfferAtDrone:
                return on_reoffer(drones_[ev.drone], ev);
            case Ev::DataAtServer:
                return on_data(ev);
            case Ev::RejectAtDrone:
                return on_reject(drones_[ev.drone]);
            case Ev::ComputeDone:
                return on_compute_done(ev);
            case Ev::ResultAtDrone:
                return finish_visit(drones_[ev.drone], ev.server);
            }
        }

        // ---- flight -------------------------------------------------------

        void depart_next(DroneState &d)
        {
            const std::size_t i = d.i;
            const int here = node_of(d.plan.path[i]);
            if (!d.plan.path[i + 1].is_depot())
            {
                const int next = node_of(d.plan.path[i + 1]);
                const micros hop = d.hops(here, next);
                const micros visit = worst_visit_us(sc_, d.idx, d.plan, i + 1, d.timing, opt_.safety);
                const micros ret = d.hops(next, kDepotNode);
                if (needs_detour(d.meter, hop, visit, ret, opt_.safety))
                {
                    if (here == kDepotNode)
                        throw InfeasibleMission("drone " + std::to_string(d.idx + 1) +
                                                ": point of interest unreachable on a full battery");
                    insert_detour(d, i + 1);
                    ++d.out.safety_detours;
                    log(LogKind::DetourInsert, Party::drone(id_of(d)), Party::none(), static_cast<std::int64_t>(i + 1));
                }
            }
            const int to = node_of(d.plan.path[i + 1]);
            const micros actual = trace_.actual(d.idx, here, to);
            log(LogKind::Depart, Party::drone(id_of(d)), Party::none(), static_cast<std::int64_t>(i), actual,
                d.hops(here, to), d.meter.remaining());
            Event ev;
            ev.time = now_ + actual;
            ev.kind = Ev::Arrival;
            ev.drone = d.idx;
            ev.a = actual;
            push(ev);
        }

        void on_arrival(DroneState &d, micros flight)
        {
            d.meter.fly(flight);
            d.out.flight_time += flight;
            ++d.i;
            check_energy(d);
            log(LogKind::Arrive, Party::drone(id_of(d)), Party::none(), static_cast<std::int64_t>(d.i), flight, 0,
                d.meter.remaining());
            const Waypoint &here = d.plan.path[d.i];
            if (here.is_depot())
            {
                if (d.i + 1 == d.plan.size())
                {
                    d.done = true;
                    d.out.mission_time = now_;
                    log(LogKind::Landed, Party::drone(id_of(d)), Party::none(), static_cast<std::int64_t>(d.i), now_, 0,
                        d.meter.remaining());
                    return;
                }
                ++d.out.depot_visits;
                Event ev;
                ev.time = now_ + d.timing.depot;
                ev.kind = Ev::BatteryDone;
                ev.drone = d.idx;
                push(ev);
                return;
            }
            begin_visit(d);
        }

        void on_battery_done(DroneState &d)
        {
            d.meter.recharge();
            log(LogKind::Battery, Party::drone(id_of(d)), Party::none(), static_cast<std::int64_t>(d.i), d.timing.depot,
                0, d.meter.remaining());
            after_visit(d);
        }

        // ---- visit at a point of interest ---------------------------------

        void begin_visit(DroneState &d)
        {
            d.visit_start = now_;
            d.sensed = false;
            d.decision = Decision::None;
            d.server = 0;
            d.neg.reset();
            d.contacted.clear();
            d.hover_limit = kNever;
            if (opt_.safety == SafetyMode::Conservative)
            {
                const micros ret = d.hops(node_of(d.plan.path[d.i]), kDepotNode);
                d.hover_limit = now_ + max_hover_us(d.meter, ret, d.spec->gamma);
            }
            Event ev;
            ev.time = now_ + d.timing.sense;
            ev.kind = Ev::SenseDone;
            ev.drone = d.idx;
            push(ev);

            const int planned = d.plan.schedule[d.i];
            const auto in_range = sc_.servers_in_range(d.plan.path[d.i].location);
            if (negotiates(opt_.policy, planned) && !in_range.empty())
                start_negotiation(d, in_range, planned);
        }

        void start_negotiation(DroneState &d, const std::vector<int> &in_range, int planned)
        {
            ++d.session;
            d.decision = Decision::Pending;
            d.contacted = in_range;
            std::vector<Negotiator::Candidate> cands;
            for (int k : in_range)
                cands.push_back({k, to_micros(sc_.server(k).transfer_time(d.spec->data_in + d.spec->data_out))});
            // Only the proposed policy lets the plan shape the negotiation.
            if (!follows_schedule(opt_.policy))
                planned = 0;
            const micros budget =
                planned != 0 ? to_micros(d.plan.waits[d.i]) + planned_offload_us(sc_, d.idx, planned) : 0;
            const micros sense_done = d.visit_start + d.timing.sense;
            DroneState *dp = &d;
            auto admissible = [this, dp, sense_done](int k, micros resp_max) {
                if (dp->hover_limit == kNever)
                    return true;
                const ServerSpec &s = sc_.server(k);
                const micros lat = to_micros(s.msg_latency);
                const micros worst = std::max(now_ + 2 * lat, sense_done) + upload_us(sc_, dp->idx, k) + resp_max +
                                     download_us(sc_, dp->idx, k);
                if (worst <= dp->hover_limit)
                    return true;
                ++dp->out.guard_fallbacks;
                return false;
            };
            d.neg.emplace(std::move(cands), d.timing.local, budget, planned, admissible);
            for (int k : in_range)
            {
                log(LogKind::Inquiry, Party::drone(id_of(d)), Party::server(k), d.session, 0, 0, d.red);
                Event ev;
                ev.time = now_ + to_micros(sc_.server(k).msg_latency);
                ev.kind = Ev::InquiryAtServer;
                ev.drone = d.idx;
                ev.server = k;
                ev.session = d.session;
                ev.a = sense_done;
                ev.b = upload_us(sc_, d.idx, k);
                ev.x = d.red;
                push(ev);
            }
        }

        void on_inquiry(const Event &ev)
        {
            ServerEndpoint &srv = server(ev.server);
            const int drone = static_cast<int>(ev.drone) + 1;
            const Offer offer = srv.on_inquiry(Inquiry{drone, ev.session, 0, ev.x, ev.a, ev.b}, now_);
            log(LogKind::Offer, Party::server(ev.server), Party::drone(drone), ev.session, offer.resp);
            Event reply = ev;
            reply.time = now_ + srv.latency();
            reply.kind = Ev::OfferAtDrone;
            reply.a = offer.resp;
            push(reply);
        }

        void on_offer(DroneState &d, const Event &ev)
        {
            d.neg->on_offer(Offer{ev.server, ev.session, ev.a});
            step_negotiation(d);
        }

        void on_reoffer(DroneState &d, const Event &ev)
        {
            d.neg->on_reoffer(Offer{ev.server, ev.session, ev.a});
            step_negotiation(d);
        }

        void step_negotiation(DroneState &d)
        {
            auto action = d.neg->next();
            d.out.max_reserve_attempts = std::max(d.out.max_reserve_attempts, d.neg->attempts());
            if (std::holds_alternative<Negotiator::WaitAction>(action))
                return;
            if (std::holds_alternative<Negotiator::LocalAction>(action))
            {
                for (int k : d.contacted)
                    server(k).forget(id_of(d), d.session);
                d.decision = Decision::Local;
                log(LogKind::Decide, Party::drone(id_of(d)), Party::none(), static_cast<std::int64_t>(d.i),
                    d.timing.local, d.timing.local);
                if (d.sensed)
                    start_local(d);
                return;
            }
            const auto res = std::get<Negotiator::ReserveAction>(action);
            d.last_resp = res.resp;
            log(LogKind::Reserve, Party::drone(id_of(d)), Party::server(res.server), d.session, res.resp, res.resp_max);
            Event ev;
            ev.time = now_ + to_micros(sc_.server(res.server).msg_latency);
            ev.kind = Ev::ReserveAtServer;
            ev.drone = d.idx;
            ev.server = res.server;
            ev.session = d.session;
            ev.a = res.resp;
            ev.b = res.resp_max;
            ev.c = d.visit_start + d.timing.sense;
            push(ev);
        }

        void on_reserve(const Event &ev)
        {
            ServerEndpoint &srv = server(ev.server);
            const int drone = static_cast<int>(ev.drone) + 1;
            const micros upload = upload_us(sc_, ev.drone, ev.server);
            const auto reply = srv.on_reserve(Reserve{drone, ev.session, ev.a, ev.b, ev.c, upload}, now_);
            Event out = ev;
            out.time = now_ + srv.latency();
            if (const auto *ack = std::get_if<Ack>(&reply))
            {
                log(LogKind::Ack, Party::server(ev.server), Party::drone(drone), ev.session, ack->ready_at,
                    ack->deadline);
                out.kind = Ev::AckAtDrone;
                out.a = ack->ready_at;
                out.b = ack->deadline;
            }
            else
            {
                const Offer &again = std::get<Offer>(reply);
                log(LogKind::ReOffer, Party::server(ev.server), Party::drone(drone), ev.session, again.resp);
                out.kind = Ev::ReOfferAtDrone;
                out.a = again.resp;
            }
            push(out);
        }

        void on_ack(DroneState &d, const Event &ev)
        {
            d.neg->on_ack(Ack{ev.server, ev.session, ev.a, ev.b});
            for (int k : d.contacted)
                if (k != ev.server)
                    server(k).forget(id_of(d), d.session);
            d.decision = Decision::Offload;
            d.server = ev.server;
            d.ready_at = ev.a;
            const micros transfer = to_micros(sc_.server(ev.server).transfer_time(d.spec->data_in + d.spec->data_out));
            log(LogKind::Decide, Party::drone(id_of(d)), Party::server(ev.server), static_cast<std::int64_t>(d.i),
                d.last_resp + transfer, d.timing.local);
            if (d.sensed)
                start_negotiated_upload(d);
        }

        void on_sense_done(DroneState &d)
        {
            d.sensed = true;
            d.sense_done_at = now_;
            switch (d.decision)
            {
            case Decision::Pending:
                return;
            case Decision::Local:
                return start_local(d);
            case Decision::Offload:
                return start_negotiated_upload(d);
            case Decision::None:
                break;
            }
            const int k = d.plan.schedule[d.i];
            if (offloads_directly(opt_.policy) && k != 0)
            {
                const ServerSpec &s = sc_.server(k);
                const micros wait = to_micros(d.plan.waits[d.i]);
                const micros reject_path = now_ + wait + upload_us(sc_, d.idx, k) + to_micros(s.msg_latency) + d.timing.local;
                if (d.hover_limit == kNever || reject_path <= d.hover_limit)
                {
                    d.decision = Decision::Offload;
                    d.server = k;
                    log(LogKind::Decide, Party::drone(id_of(d)), Party::server(k), static_cast<std::int64_t>(d.i),
                        wait + planned_offload_us(sc_, d.idx, k), d.timing.local);
                    Event ev;
                    ev.time = now_ + wait;
                    ev.kind = Ev::UploadStart;
                    ev.drone = d.idx;
                    ev.server = k;
                    push(ev);
                    return;
                }
                ++d.out.guard_fallbacks;
            }
            d.decision = Decision::Local;
            log(LogKind::Decide, Party::drone(id_of(d)), Party::none(), static_cast<std::int64_t>(d.i), d.timing.local,
                d.timing.local);
            start_local(d);
        }

        void start_local(DroneState &d)
        {
            Event ev;
            ev.time = now_ + d.timing.local;
            ev.kind = Ev::LocalDone;
            ev.drone = d.idx;
            push(ev);
        }

        void start_negotiated_upload(DroneState &d)
        {
            const micros ready = now_ + upload_us(sc_, d.idx, d.server);
            if (ready != d.ready_at)
                throw ProtocolError("upload timing diverged from the acknowledged reservation");
            log(LogKind::Upload, Party::drone(id_of(d)), Party::server(d.server), static_cast<std::int64_t>(d.i), ready);
            Event ev;
            ev.time = ready;
            ev.kind = Ev::DataAtServer;
            ev.drone = d.idx;
            ev.server = d.server;
            push(ev);
        }

        void start_direct_upload(DroneState &d)
        {
            const micros ready = now_ + upload_us(sc_, d.idx, d.server);
            log(LogKind::Upload, Party::drone(id_of(d)), Party::server(d.server), static_cast<std::int64_t>(d.i), ready);
            Event ev;
            ev.time = ready;
            ev.kind = Ev::DataAtServer;
            ev.drone = d.idx;
            ev.server = d.server;
            ev.direct = true;
            ev.c = d.hover_limit == kNever ? kNever : d.hover_limit - download_us(sc_, d.idx, d.server);
            push(ev);
        }

        void on_data(const Event &ev)
        {
            ServerEndpoint &srv = server(ev.server);
            const int drone = static_cast<int>(ev.drone) + 1;
            if (ev.direct && !srv.on_direct_request(drone, now_, ev.c))
            {
                log(LogKind::Reject, Party::server(ev.server), Party::drone(drone),
                    static_cast<std::int64_t>(drones_[ev.drone].i));
                Event out = ev;
                out.time = now_ + srv.latency();
                out.kind = Ev::RejectAtDrone;
                push(out);
            }
            try_dispatch(srv);
        }

        void on_reject(DroneState &d)
        {
            ++d.out.guard_fallbacks;
            d.decision = Decision::Local;
            d.server = 0;
            log(LogKind::Decide, Party::drone(id_of(d)), Party::none(), static_cast<std::int64_t>(d.i), d.timing.local,
                d.timing.local);
            start_local(d);
        }

        void try_dispatch(ServerEndpoint &srv)
        {
            if (auto r = srv.state().dispatch(now_))
            {
                log(LogKind::ComputeStart, Party::server(srv.id()), Party::drone(r->job.drone), 0, r->finish,
                    r->job.deadline == kNever ? -1 : r->job.deadline);
                Event ev;
                ev.time = r->finish;
                ev.kind = Ev::ComputeDone;
                ev.drone = static_cast<std::size_t>(r->job.drone - 1);
                ev.server = srv.id();
                push(ev);
            }
        }

        void on_compute_done(const Event &ev)
        {
            ServerEndpoint &srv = server(ev.server);
            const RunningJob r = srv.state().complete();
            const micros deadline = r.job.deadline == kNever ? -1 : r.job.deadline;
            log(LogKind::ComputeDone, Party::server(ev.server), Party::drone(r.job.drone), 0, now_, deadline);
            if (r.job.deadline != kNever && now_ > r.job.deadline)
                throw ProtocolError("server " + std::to_string(ev.server) + " missed a committed deadline");
            Event out = ev;
            out.time = now_ + download_us(sc_, ev.drone, ev.server);
            out.kind = Ev::ResultAtDrone;
            push(out);
            try_dispatch(srv);
        }

        void finish_visit(DroneState &d, int server_used)
        {
            const micros visit = now_ - d.visit_start;
            d.meter.hover(visit);
            check_energy(d);
            d.realized.schedule[d.i] = server_used;
            d.realized.waits[d.i] = 0.0;
            if (server_used != 0)
            {
                const micros wait = visit - d.timing.sense - planned_offload_us(sc_, d.idx, server_used);
                d.realized.waits[d.i] = to_seconds(std::max<micros>(0, wait));
            }
            log(LogKind::VisitDone, Party::drone(id_of(d)), Party::none(), static_cast<std::int64_t>(d.i), visit,
                server_used, d.meter.remaining());
            after_visit(d);
        }

        void after_visit(DroneState &d)
        {
            if (optimizes_path(opt_.policy))
                optimize_path(d);
            update_reduction(d);
            depart_next(d);
        }

        // ---- runtime plan adaptation ----------------------------------------

        void update_reduction(DroneState &d)
        {
            HopFn hop = [&d](int a, int b) { return d.hops(a, b); };
            d.red = reduction_of(d, now_ + remaining_time_us(sc_, d.idx, d.plan, d.i, hop, d.timing));
        }

        /// Walks `plan` from the drone's current index up to and including the
        /// arrival at `end`, under assumed flight times and planned visits.
        /// False when the safety rule would force a detour on the way.
        bool projected_safe(const DroneState &d, const MissionPlan &plan, std::size_t end) const
        {
            EnergyMeter meter = d.meter;
            for (std::size_t j = d.i; j < end; ++j)
            {
                const int a = node_of(plan.path[j]);
                const int b = node_of(plan.path[j + 1]);
                const micros hop = d.hops(a, b);
                if (b != kDepotNode)
                {
                    const micros visit = worst_visit_us(sc_, d.idx, plan, j + 1, d.timing, opt_.safety);
                    if (needs_detour(meter, hop, visit, d.hops(b, kDepotNode), opt_.safety))
                        return false;
                }
                meter.fly(hop);
                if (j + 1 == end)
                    break;
                if (b == kDepotNode)
                    meter.recharge();
                else
                    meter.hover(planned_visit_us(sc_, d.idx, plan, j + 1, d.timing));
            }
            return true;
        }

        /// Drops the next planned depot detour when the rest of its battery
        /// segment stays safe without it; otherwise moves it to the cheapest
        /// safe later gap between two points of interest.
        void optimize_path(DroneState &d)
        {
            const std::size_t n = d.plan.size();
            std::size_t detour = 0;
            for (std::size_t j = d.i + 1; j + 1 < n; ++j)
                if (d.plan.path[j].is_depot())
                {
                    detour = j;
                    break;
                }
            if (detour == 0)
                return;
            std::size_t next_depot = detour + 1;
            while (!d.plan.path[next_depot].is_depot())
                ++next_depot;

            MissionPlan without = d.plan;
            erase_entry(without, detour);
            const std::size_t end = next_depot - 1;
            if (projected_safe(d, without, end))
            {
                erase_detour(d, detour);
                ++d.out.detours_removed;
                log(LogKind::DetourMove, Party::drone(id_of(d)), Party::none(), static_cast<std::int64_t>(detour), -1);
                return;
            }

            const std::size_t original = detour - 1; // gap index in `without`
            std::size_t best = original;
            micros best_cost = 0;
            for (std::size_t g = original; g + 1 < end; ++g)
            {
                MissionPlan variant = without;
                insert_depot(variant, g + 1, sc_.depot);
                if (!projected_safe(d, variant, end + 1))
                    break;
                const int a = node_of(without.path[g]);
                const int b = node_of(without.path[g + 1]);
                const micros cost = d.hops(a, kDepotNode) + d.hops(kDepotNode, b) - d.hops(a, b);
                if (g == original || cost <= best_cost)
                {
                    best = g;
                    best_cost = cost;
                }
            }
            if (best == original)
                return;
            erase_detour(d, detour);
            insert_detour(d, best + 1);
            ++d.out.detours_moved;
            log(LogKind::DetourMove, Party::drone(id_of(d)), Party::none(), static_cast<std::int64_t>(detour),
                static_cast<std::int64_t>(best + 1));
        }

        const Scenario &sc_;
        const FlightTimeTrace &trace_;
        EngineOptions opt_;
        std::vector<ServerEndpoint> servers_;
        std::map<int, std::size_t> server_index_;
        std::vector<DroneState> drones_;
        std::priority_queue<Event, std::vector<Event>, Later> events_;
        std::uint64_t seq_ = 0;
        micros now_ = 0;
        EventLog log_;
    };

    inline RunResult run(const Scenario &sc, const std::vector<MissionPlan> &plans,
                         const std::vector<micros> &default_times, const FlightTimeTrace &trace, EngineOptions opt)
    {
        Simulation sim(sc, plans, default_times, trace, opt);
        return sim.run();
    }
}
