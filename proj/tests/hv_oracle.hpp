#pragma once

#include <algorithm>
#include <vector>

#include "tbpsa/hypervolume.hpp"

namespace oracle {

/// Dominated area by counting cells of the grid spanned by all distinct coordinates.
inline double grid_hypervolume(const tbpsa::bench::ParetoSet& set)
{
    std::vector<double> xs{set.reference[0]}, ys{set.reference[1]};
    for (const auto& p : set.points) {
        if (!(p[0] < set.reference[0] && p[1] < set.reference[1])) continue;
        xs.push_back(p[0]);
        ys.push_back(p[1]);
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    double area = 0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
            const double cx = 0.5 * (xs[i] + xs[i + 1]);
            const double cy = 0.5 * (ys[j] + ys[j + 1]);
            bool covered = false;
            for (const auto& p : set.points)
                if (p[0] < set.reference[0] && p[1] < set.reference[1] && p[0] <= cx && p[1] <= cy) {
                    covered = true;
                    break;
                }
            if (covered) area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
        }
    return area;
}

}  // namespace oracle
