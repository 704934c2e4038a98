#include "support.hpp"

#include <gtest/gtest.h>

using namespace droneoff;
using testsupport::micro;

namespace
{
    struct Prepared
    {
        Scenario sc;
        PlanBundle plans;
        FlightTimeTrace trace;
    };

    Prepared prepare(Scenario sc, double u, std::uint64_t seed)
    {
        Prepared p;
        sc.uncertainty = u;
        p.sc = sc;
        p.plans.defaults = build_default_plans(p.sc);
        p.trace = sample_trace(p.sc, p.plans.tours(), seed);
        p.plans = build_plans(p.sc, &p.trace);
        return p;
    }

    RunResult run_policy(const Prepared &p, PolicyKind k, SafetyMode safety = SafetyMode::Conservative)
    {
        EngineOptions opt;
        opt.policy = k;
        opt.safety = safety;
        opt.assume_actual_times = k == PolicyKind::Oracle;
        return run(p.sc, k == PolicyKind::Oracle ? *p.plans.oracle : p.plans.optimized, p.plans.default_times(),
                   p.trace, opt);
    }
}

TEST(Engine, SinglePoiLocalMission)
{
    const Prepared p = prepare(micro(false), 0.0, 1);
    const auto r = run_policy(p, PolicyKind::Proposed);
    ASSERT_EQ(r.drones.size(), 1u);
    EXPECT_EQ(r.drones[0].mission_time, 53'500'000);
    EXPECT_EQ(r.drones[0].flight_time, 42'500'000);
    EXPECT_EQ(r.drones[0].depot_visits, 0u);
}

TEST(Engine, SinglePoiOffloadedMissionEveryPolicy)
{
    const Prepared p = prepare(micro(true), 0.0, 1);
    for (PolicyKind k : kAllPolicies)
    {
        const auto r = run_policy(p, k);
        EXPECT_EQ(r.drones[0].mission_time, 45'460'160) << name(k);
        EXPECT_EQ(r.drones[0].realized.schedule[1], 1) << name(k);
    }
}

TEST(Engine, ShorterFlightsShortenTheMission)
{
    const Prepared p = prepare(micro(true), 0.3, 17);
    const auto r = run_policy(p, PolicyKind::Proposed);
    const micros out = p.trace.actual(0, kDepotNode, 0);
    const micros back = p.trace.actual(0, 0, kDepotNode);
    EXPECT_LE(out, 13'750'000);
    EXPECT_EQ(r.drones[0].flight_time, out + back);
    EXPECT_EQ(r.drones[0].mission_time, out + back + 1'000'000 + 1'960'160);
}

TEST(Engine, ReplayIsBitIdentical)
{
    const Prepared p = prepare(builtin::mixed10_10(), 0.3, 4);
    for (PolicyKind k : kAllPolicies)
    {
        const auto a = run_policy(p, k);
        const auto b = run_policy(p, k);
        EXPECT_EQ(a.log.serialize(), b.log.serialize()) << name(k);
        EXPECT_EQ(a.trace_checksum, b.trace_checksum);
    }
}

TEST(Engine, LogIsChronological)
{
    const Prepared p = prepare(builtin::small20(), 0.2, 2);
    const auto r = run_policy(p, PolicyKind::Proposed);
    const auto &recs = r.log.records();
    ASSERT_FALSE(recs.empty());
    for (std::size_t i = 1; i < recs.size(); ++i)
        EXPECT_LE(recs[i - 1].time, recs[i].time);
}

TEST(Engine, EnergyStaysPositiveAndCommitmentsHold)
{
    for (const char *name : {"small20", "large20", "mixed10+10"})
    {
        Scenario sc;
        ASSERT_TRUE(builtin::lookup(name, sc));
        const Prepared p = prepare(sc, 0.3, 9);
        for (PolicyKind k : kAllPolicies)
        {
            const auto r = run_policy(p, k);
            EXPECT_GT(testsupport::min_logged_energy(r.log), 0.0) << name << ' ' << droneoff::name(k);
            const auto audit = testsupport::audit_commitments(r.log);
            EXPECT_TRUE(audit.ok()) << name << ' ' << droneoff::name(k) << " acks " << audit.acks << " done "
                                    << audit.committed_done << " late " << audit.late;
            for (const auto &d : r.drones)
                EXPECT_LE(d.max_reserve_attempts, 2 * sc.servers.size());
        }
    }
}

TEST(Engine, EveryPoiVisitedExactlyOnce)
{
    const Prepared p = prepare(builtin::large20(), 0.3, 5);
    for (PolicyKind k : kAllPolicies)
    {
        const auto r = run_policy(p, k);
        for (std::size_t m = 0; m < r.drones.size(); ++m)
        {
            std::vector<int> seen(p.sc.missions[m].size(), 0);
            for (const auto &w : r.drones[m].realized.path)
                if (!w.is_depot())
                    ++seen[static_cast<std::size_t>(w.poi)];
            for (int c : seen)
                EXPECT_EQ(c, 1);
            EXPECT_NO_THROW(r.drones[m].realized.validate());
        }
    }
}

TEST(Engine, WithoutServersEveryPolicyMatchesDefault)
{
    Scenario sc = builtin::small20();
    sc.servers.clear();
    const Prepared p = prepare(sc, 0.0, 1);
    for (PolicyKind k : kAllPolicies)
    {
        const auto r = run_policy(p, k);
        for (std::size_t m = 0; m < r.drones.size(); ++m)
            EXPECT_EQ(r.drones[m].mission_time, p.plans.defaults[m].time_us);
    }
}

TEST(Engine, RejectsInconsistentInputs)
{
    const Prepared p = prepare(micro(true), 0.0, 1);
    EngineOptions opt;
    EXPECT_THROW(run(p.sc, {}, p.plans.default_times(), p.trace, opt), std::invalid_argument);
    auto bad = p.plans.optimized;
    bad[0].schedule[0] = 1;
    EXPECT_THROW(run(p.sc, bad, p.plans.default_times(), p.trace, opt), MalformedPath);
    FlightTimeTrace empty;
    EXPECT_THROW(run(p.sc, p.plans.optimized, p.plans.default_times(), empty, opt), TraceMismatch);
}

TEST(Engine, UnreachablePoiAbortsAtTheDepot)
{
    Scenario sc = micro(false);
    const auto defaults = build_default_plans(sc);
    sc.drones[0].energy_capacity = 0.02;
    PlanBundle b;
    b.defaults = defaults;
    const auto trace = worst_case_trace(sc, b.tours());
    EXPECT_THROW(run(sc, {defaults[0].plan}, b.default_times(), trace, {}), InfeasibleMission);
}

TEST(Engine, LiteralRuleCanStrandADrone)
{
    // Ignoring the flight home lets a drone start a hop it cannot return from.
    const Prepared p = prepare(builtin::large20(), 0.3, 3);
    EXPECT_THROW(run_policy(p, PolicyKind::Opportunistic, SafetyMode::Literal), EnergyViolation);
    EXPECT_GT(testsupport::min_logged_energy(run_policy(p, PolicyKind::Opportunistic).log), 0.0);
}
