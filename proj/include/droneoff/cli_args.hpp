#pragma once

// Parsing of the list-valued command line arguments.

#include "policies.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace droneoff::cli
{
    inline std::vector<std::string> split(const std::string &s, char sep)
    {
        std::vector<std::string> parts;
        std::string cur;
        for (char c : s)
        {
            if (c == sep)
            {
                parts.push_back(cur);
                cur.clear();
            }
            else
                cur += c;
        }
        parts.push_back(cur);
        return parts;
    }

    inline std::uint64_t parse_u64(const std::string &s)
    {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size() || s.empty() || s[0] == '-')
            throw std::invalid_argument("bad seed '" + s + "'");
        return v;
    }

    // "1..10", "3,5,8" or a mix such as "1..3,7".
    inline std::vector<std::uint64_t> parse_seeds(const std::string &spec)
    {
        std::vector<std::uint64_t> seeds;
        for (const auto &part : split(spec, ','))
        {
            const auto dots = part.find("..");
            if (dots == std::string::npos)
            {
                seeds.push_back(parse_u64(part));
                continue;
            }
            const std::uint64_t lo = parse_u64(part.substr(0, dots));
            const std::uint64_t hi = parse_u64(part.substr(dots + 2));
            if (hi < lo)
                throw std::invalid_argument("empty seed range '" + part + "'");
            for (std::uint64_t s = lo; s <= hi; ++s)
                seeds.push_back(s);
        }
        return seeds;
    }

    inline std::vector<double> parse_levels(const std::string &spec)
    {
        std::vector<double> levels;
        for (const auto &part : split(spec, ','))
        {
            std::size_t used = 0;
            const double u = std::stod(part, &used);
            if (used != part.size())
                throw std::invalid_argument("bad uncertainty '" + part + "'");
            levels.push_back(u);
        }
        return levels;
    }

    inline std::vector<PolicyKind> parse_policies(const std::string &spec)
    {
        if (spec == "all")
            return {kAllPolicies.begin(), kAllPolicies.end()};
        std::vector<PolicyKind> out;
        for (const auto &part : split(spec, ','))
            out.push_back(parse_policy(part));
        return out;
    }
}
