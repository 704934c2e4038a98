#pragma once

// Visiting order of a drone's points of interest: nearest neighbour from the
// depot, then 2-opt until no improving move remains.

#include "scenario.hpp"

#include <vector>

namespace droneoff
{
    /// Total hop time of depot -> order... -> depot.
    inline micros tour_length(const std::vector<int> &order, const HopFn &hop)
    {
        if (order.empty())
            return 0;
        micros total = hop(kDepotNode, order.front()) + hop(order.back(), kDepotNode);
        for (std::size_t i = 0; i + 1 < order.size(); ++i)
            total += hop(order[i], order[i + 1]);
        return total;
    }

    inline std::vector<int> nearest_neighbor_tour(const Scenario &sc, std::size_t drone)
    {
        const auto &pois = sc.missions.at(drone);
        std::vector<int> order;
        std::vector<bool> used(pois.size(), false);
        GridPoint here = sc.depot;
        for (std::size_t step = 0; step < pois.size(); ++step)
        {
            int best = -1;
            long best_d2 = 0;
            for (std::size_t j = 0; j < pois.size(); ++j)
            {
                if (used[j])
                    continue;
                const long dx = pois[j].x - here.x;
                const long dy = pois[j].y - here.y;
                const long d2 = dx * dx + dy * dy;
                if (best < 0 || d2 < best_d2)
                {
                    best = static_cast<int>(j);
                    best_d2 = d2;
                }
            }
            used[static_cast<std::size_t>(best)] = true;
            order.push_back(best);
            here = pois[static_cast<std::size_t>(best)];
        }
        return order;
    }

    /// Gain (positive = improvement) of reversing order[i..j] inclusive.
    inline micros two_opt_gain(const std::vector<int> &order, std::size_t i, std::size_t j, const HopFn &hop)
    {
        const int a = i == 0 ? kDepotNode : order[i - 1];
        const int b = order[i];
        const int c = order[j];
        const int d = j + 1 == order.size() ? kDepotNode : order[j + 1];
        // Depot legs carry takeoff/landing, which are independent of the POI
        // at the other end, so the comparison stays symmetric.
        return hop(a, b) + hop(c, d) - hop(a, c) - hop(b, d);
    }

    inline void two_opt(std::vector<int> &order, const HopFn &hop)
    {
        bool improved = true;
        while (improved)
        {
            improved = false;
            for (std::size_t i = 0; i + 1 < order.size(); ++i)
            {
                for (std::size_t j = i + 1; j < order.size(); ++j)
                {
                    if (two_opt_gain(order, i, j, hop) > 0)
                    {
                        std::reverse(order.begin() + static_cast<std::ptrdiff_t>(i),
                                     order.begin() + static_cast<std::ptrdiff_t>(j) + 1);
                        improved = true;
                    }
                }
            }
        }
    }

    inline std::vector<int> build_tour(const Scenario &sc, std::size_t drone)
    {
        auto order = nearest_neighbor_tour(sc, drone);
        two_opt(order, worst_case_hops(sc, drone));
        return order;
    }
}
