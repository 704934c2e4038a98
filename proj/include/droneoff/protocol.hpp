#pragma once

// Offloading negotiation: INQUIRY -> OFFER -> RESERVE -> ACK | re-OFFER.
//
// Response times (respT) are measured from the moment the input data has
// fully arrived at the server until processing completes; transfers are
// added by the drone via offload_time().

#include "model.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace droneoff
{
    struct ProtocolError : std::logic_error
    {
        using std::logic_error::logic_error;
    };

    enum class Discipline : std::uint8_t
    {
        PriorityByReduction,
        Fcfs,
    };

    struct Inquiry
    {
        int drone = 0;
        int session = 0;
        int comp_kind = 0;
        double reduction = 0.0;
        micros upload_not_before = 0; // drone cannot start uploading earlier (sensing)
        micros upload = 0;            // input transfer time on this server's link
    };

    struct Offer
    {
        int server = 0;
        int session = 0;
        micros resp = 0;
    };

    struct Reserve
    {
        int drone = 0;
        int session = 0;
        micros resp = 0;
        micros resp_max = 0;
        micros upload_not_before = 0;
        micros upload = 0;
    };

    struct Ack
    {
        int server = 0;
        int session = 0;
        micros ready_at = 0; // when the input data will have arrived
        micros deadline = 0; // hard completion bound, ready_at + resp_max
    };

    using ReserveReply = std::variant<Ack, Offer>;

    /// A queued (or running) computation. `deadline` is kNever for requests
    /// carrying no hard commitment.
    struct Job
    {
        int drone = 0;
        double reduction = 0.0;
        micros proc = 0;
        micros ready_at = 0;
        micros deadline = kNever;
        micros admitted_at = 0;

        friend bool operator==(const Job &, const Job &) = default;
    };

    struct RunningJob
    {
        Job job;
        micros started = 0;
        micros finish = 0;

        friend bool operator==(const RunningJob &, const RunningJob &) = default;
    };

    /// One sequential micro-service plus its ordered backlog.
    class ServerQueueState
    {
    public:
        ServerQueueState() = default;
        ServerQueueState(Discipline discipline, micros proc) : discipline_(discipline), proc_(proc) {}

        Discipline discipline() const noexcept { return discipline_; }
        micros proc() const noexcept { return proc_; }
        const std::optional<RunningJob> &running() const noexcept { return running_; }
        const std::vector<Job> &queue() const noexcept { return queue_; }
        bool idle() const noexcept { return !running_.has_value(); }

        /// Completion times of `jobs` served in order starting at `now`.
        std::vector<micros> project(const std::vector<Job> &jobs, micros now) const
        {
            std::vector<micros> finish;
            finish.reserve(jobs.size());
            micros t = running_ ? std::max(now, running_->finish) : now;
            for (const auto &j : jobs)
            {
                t = std::max(t, j.ready_at) + j.proc;
                finish.push_back(t);
            }
            return finish;
        }

        struct Placement
        {
            std::size_t position = 0;
            micros finish = 0;
        };

        /// Earliest queue position for `job` at or after its priority slot that
        /// keeps every existing commitment within its deadline.
        Placement place(const Job &job, micros now) const
        {
            for (std::size_t p = priority_slot(job); p <= queue_.size(); ++p)
            {
                std::vector<Job> trial = queue_;
                trial.insert(trial.begin() + static_cast<std::ptrdiff_t>(p), job);
                const auto finish = project(trial, now);
                bool ok = true;
                for (std::size_t q = 0; q < trial.size() && ok; ++q)
                    ok = q == p || finish[q] <= trial[q].deadline;
                if (ok)
                    return {p, finish[p]};
            }
            // Appending never delays existing entries, so the loop always returns.
            throw ProtocolError("no admissible queue position");
        }

        void insert(const Job &job, std::size_t position)
        {
            queue_.insert(queue_.begin() + static_cast<std::ptrdiff_t>(position), job);
        }

        /// Starts the queue head if the server is free and the head's data has arrived.
        std::optional<RunningJob> dispatch(micros now)
        {
            if (running_ || queue_.empty() || queue_.front().ready_at > now)
                return std::nullopt;
            RunningJob r{queue_.front(), now, now + queue_.front().proc};
            queue_.erase(queue_.begin());
            running_ = r;
            return r;
        }

        RunningJob complete()
        {
            if (!running_)
                throw ProtocolError("completion without a running job");
            RunningJob r = *running_;
            running_.reset();
            return r;
        }

        friend bool operator==(const ServerQueueState &, const ServerQueueState &) = default;

    private:
        std::size_t priority_slot(const Job &job) const
        {
            if (discipline_ == Discipline::Fcfs)
                return queue_.size();
            // Ascending reduction; equal reductions keep admission order.
            std::size_t p = 0;
            while (p < queue_.size() && queue_[p].reduction <= job.reduction)
                ++p;
            return p;
        }

        Discipline discipline_ = Discipline::PriorityByReduction;
        micros proc_ = 0;
        std::optional<RunningJob> running_;
        std::vector<Job> queue_;
    };

    /// Non-binding response time estimate; `ready_at` is the expected data arrival.
    inline Offer server_make_offer(const ServerQueueState &state, const Inquiry &inq, micros now, micros ready_at,
                                   int server_id)
    {
        Job probe{inq.drone, inq.reduction, state.proc(), ready_at, kNever, now};
        const auto placement = state.place(probe, now);
        return Offer{server_id, inq.session, placement.finish - ready_at};
    }

    /// Server endpoint: queue state plus per-session negotiation memory.
    class ServerEndpoint
    {
    public:
        ServerEndpoint() = default;
        ServerEndpoint(const ServerSpec &spec, Discipline discipline)
            : spec_(spec), state_(discipline, to_micros(spec.proc_time)), latency_(to_micros(spec.msg_latency))
        {
        }

        const ServerSpec &spec() const noexcept { return spec_; }
        int id() const noexcept { return spec_.id; }
        micros latency() const noexcept { return latency_; }
        ServerQueueState &state() noexcept { return state_; }
        const ServerQueueState &state() const noexcept { return state_; }

        Offer on_inquiry(const Inquiry &inq, micros now)
        {
            // OFFER, RESERVE and ACK each take one latency before uploading can start.
            const micros ready = std::max(now + 3 * latency_, inq.upload_not_before) + inq.upload;
            Offer offer = server_make_offer(state_, inq, now, ready, spec_.id);
            sessions_[{inq.drone, inq.session}] = Session{inq.reduction, offer.resp};
            return offer;
        }

        ReserveReply on_reserve(const Reserve &msg, micros now)
        {
            auto it = sessions_.find({msg.drone, msg.session});
            if (it == sessions_.end())
                throw ProtocolError("reserve for unknown session");
            Session &session = it->second;
            const micros ready = std::max(now + latency_, msg.upload_not_before) + msg.upload;
            Job job{msg.drone, session.reduction, state_.proc(), ready, ready + msg.resp_max, now};
            const auto placement = state_.place(job, now);
            const micros achievable = placement.finish - ready;
            if (achievable <= msg.resp_max)
            {
                state_.insert(job, placement.position);
                sessions_.erase(it);
                return Ack{spec_.id, msg.session, ready, job.deadline};
            }
            session.last_offer = std::max(session.last_offer, achievable);
            return Offer{spec_.id, msg.session, session.last_offer};
        }

        /// Uncommitted FCFS request whose data arrives now. Returns false (reject)
        /// when the result could not be delivered by `latest_finish`.
        bool on_direct_request(int drone, micros now, micros latest_finish)
        {
            Job job{drone, 0.0, state_.proc(), now, kNever, now};
            const auto placement = state_.place(job, now);
            if (placement.finish > latest_finish)
                return false;
            state_.insert(job, placement.position);
            return true;
        }

        /// Drops negotiation memory for a session the drone abandoned.
        void forget(int drone, int session) { sessions_.erase({drone, session}); }

    private:
        struct Session
        {
            double reduction = 0.0;
            micros last_offer = 0;
        };

        ServerSpec spec_;
        ServerQueueState state_;
        micros latency_ = 0;
        std::map<std::pair<int, int>, Session> sessions_;
    };

    /// Drone side of one negotiation at a point of interest.
    class Negotiator
    {
    public:
        struct Candidate
        {
            int server = 0;
            micros transfer = 0; // (data_in + data_out) / bw
        };

        struct ReserveAction
        {
            int server = 0;
            micros resp = 0;
            micros resp_max = 0;
        };
        struct LocalAction
        {
        };
        struct WaitAction
        {
        };
        using Action = std::variant<ReserveAction, LocalAction, WaitAction>;

        /// `admissible(server, resp_max)` lets the caller veto options it cannot
        /// afford (energy); it defaults to always true.
        Negotiator(std::vector<Candidate> candidates, micros local, micros budget, int preferred,
                   std::function<bool(int, micros)> admissible = {})
            : candidates_(std::move(candidates)), local_(local), budget_(budget), preferred_(preferred),
              admissible_(std::move(admissible)), max_attempts_(2 * candidates_.size())
        {
        }

        void on_offer(const Offer &offer)
        {
            auto [it, fresh] = offers_.insert_or_assign(offer.server, offer.resp);
            (void)it;
            if (fresh)
                ++received_;
        }

        void on_reoffer(const Offer &offer)
        {
            offers_[offer.server] = offer.resp;
            awaiting_ = false;
        }

        void on_ack(const Ack &ack)
        {
            chosen_ = ack.server;
            awaiting_ = false;
            done_ = true;
        }

        /// Next step once offers are in; WaitAction while replies are outstanding.
        Action next()
        {
            if (done_)
                return chosen_ ? Action{WaitAction{}} : Action{LocalAction{}};
            if (awaiting_ || received_ < candidates_.size())
                return WaitAction{};
            const Candidate *best = nullptr;
            micros best_resp = 0;
            for (const auto &c : candidates_)
            {
                const micros r = offers_.at(c.server);
                const bool better = !best || r < best_resp ||
                                    (r == best_resp && rank(c.server) < rank(best->server));
                if (better)
                {
                    best = &c;
                    best_resp = r;
                }
            }
            if (!best || best_resp + best->transfer >= local_ || attempts_ >= max_attempts_)
                return finish_local();
            const micros resp_max = std::max(best_resp, budget_);
            if (admissible_ && !admissible_(best->server, resp_max))
                return finish_local();
            ++attempts_;
            awaiting_ = true;
            return ReserveAction{best->server, best_resp, resp_max};
        }

        bool done() const noexcept { return done_; }
        std::optional<int> chosen() const noexcept { return chosen_; }
        std::size_t attempts() const noexcept { return attempts_; }
        std::size_t max_attempts() const noexcept { return max_attempts_; }

    private:
        // Planned server first on equal offers, then lower id.
        std::pair<int, int> rank(int server) const { return {server == preferred_ ? 0 : 1, server}; }

        Action finish_local()
        {
            done_ = true;
            return LocalAction{};
        }

        std::vector<Candidate> candidates_;
        micros local_ = 0;
        micros budget_ = 0;
        int preferred_ = 0;
        std::function<bool(int, micros)> admissible_;
        std::size_t max_attempts_ = 0;
        std::map<int, micros> offers_;
        std::size_t received_ = 0;
        std::size_t attempts_ = 0;
        bool awaiting_ = false;
        bool done_ = false;
        std::optional<int> chosen_;
    };

    struct NegotiationResult
    {
        int server = 0; // 0 = compute locally
        std::size_t reserve_attempts = 0;
        std::vector<Offer> offers_seen;
    };

    /// Synchronous negotiation with zero message latency. `between` (optional)
    /// runs after every offer round, letting callers model concurrent drones
    /// grabbing capacity before RESERVE arrives.
    inline NegotiationResult drone_negotiate(std::vector<ServerEndpoint *> servers, const DroneSpec &drone,
                                             double reduction, micros budget, micros now, int session = 1,
                                             int preferred = 0,
                                             const std::function<void(ServerEndpoint &, micros)> &between = {})
    {
        NegotiationResult result;
        if (servers.empty())
            return result;
        std::vector<Negotiator::Candidate> cands;
        for (auto *s : servers)
            cands.push_back({s->id(), to_micros(s->spec().transfer_time(drone.data_in + drone.data_out))});
        Negotiator neg(cands, to_micros(drone.local_proc_time), budget, preferred);
        auto find = [&](int id) -> ServerEndpoint & {
            for (auto *s : servers)
                if (s->id() == id)
                    return *s;
            throw ProtocolError("unknown server");
        };
        for (auto *s : servers)
        {
            const micros upload = to_micros(s->spec().transfer_time(drone.data_in));
            Offer o = s->on_inquiry(Inquiry{drone.id, session, 0, reduction, now, upload}, now);
            result.offers_seen.push_back(o);
            neg.on_offer(o);
        }
        for (;;)
        {
            auto action = neg.next();
            if (std::holds_alternative<Negotiator::LocalAction>(action))
                break;
            if (std::holds_alternative<Negotiator::WaitAction>(action))
                break;
            const auto res = std::get<Negotiator::ReserveAction>(action);
            ServerEndpoint &srv = find(res.server);
            if (between)
                between(srv, now);
            const micros upload = to_micros(srv.spec().transfer_time(drone.data_in));
            auto reply = srv.on_reserve(Reserve{drone.id, session, res.resp, res.resp_max, now, upload}, now);
            if (auto *ack = std::get_if<Ack>(&reply))
            {
                neg.on_ack(*ack);
                break;
            }
            const Offer &again = std::get<Offer>(reply);
            result.offers_seen.push_back(again);
            neg.on_reoffer(again);
        }
        result.server = neg.chosen().value_or(0);
        result.reserve_attempts = neg.attempts();
        if (result.server == 0)
            for (auto *s : servers)
                s->forget(drone.id, session);
        return result;
    }
}
