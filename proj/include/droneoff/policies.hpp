#pragma once

#include "protocol.hpp"

#include <array>
#include <string>
#include <string_view>

namespace droneoff
{
    enum class PolicyKind : std::uint8_t
    {
        Proposed,
        FollowPlan,
        Opportunistic,
        Oracle,
    };

    inline constexpr std::array<PolicyKind, 4> kAllPolicies{PolicyKind::Proposed, PolicyKind::FollowPlan,
                                                            PolicyKind::Opportunistic, PolicyKind::Oracle};

    inline std::string_view name(PolicyKind p)
    {
        switch (p)
        {
        case PolicyKind::Proposed:
            return "proposed";
        case PolicyKind::FollowPlan:
            return "follow_plan";
        case PolicyKind::Opportunistic:
            return "opportunistic";
        case PolicyKind::Oracle:
            return "oracle";
        }
        return "?";
    }

    inline PolicyKind parse_policy(std::string_view s)
    {
        for (PolicyKind p : kAllPolicies)
            if (name(p) == s)
                return p;
        throw std::invalid_argument("unknown policy '" + std::string(s) + "'");
    }

    /// Server queue discipline the policy runs against.
    inline Discipline discipline(PolicyKind p)
    {
        return p == PolicyKind::Proposed ? Discipline::PriorityByReduction : Discipline::Fcfs;
    }

    /// Whether the drone runs the INQUIRY/RESERVE protocol at this POI.
    inline bool negotiates(PolicyKind p, int planned_server)
    {
        switch (p)
        {
        case PolicyKind::Proposed:
            return planned_server != 0;
        case PolicyKind::Opportunistic:
            return true;
        default:
            return false;
        }
    }

    /// Plan-following policies offload directly to the planned server, no negotiation.
    inline bool offloads_directly(PolicyKind p) { return p == PolicyKind::FollowPlan || p == PolicyKind::Oracle; }

    /// Whether the planned server and waiting time inform the runtime decision.
    inline bool follows_schedule(PolicyKind p) { return p != PolicyKind::Opportunistic; }

    /// Whether savings are spent on postponing or dropping depot detours.
    inline bool optimizes_path(PolicyKind p) { return p == PolicyKind::Proposed || p == PolicyKind::Opportunistic; }
}
