#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "roughflow/core/rough_path.hpp"

namespace roughflow {

inline double solution_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw ConfigError("solution distance: states have different sizes");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Mollification study: solve the same problem driven by each lift in the
// ladder (coarsest first) and tabulate how the solutions settle down.  The
// solver maps a driver to a fixed-size state, e.g. a final grid function or
// stacked particle endpoints.
struct WongZakaiReport {
    std::vector<double> successive; // distance level j to level j+1
    std::vector<double> to_finest;  // distance level j to the last level
    bool monotone = false;          // successive distances strictly decrease
};

template <class Solve>
WongZakaiReport wong_zakai_report(const std::vector<GeometricRoughPath>& levels,
                                  Solve&& solve) {
    if (levels.size() < 3)
        throw ConfigError("mollification study: need at least three levels");
    std::vector<std::vector<double>> sols;
    sols.reserve(levels.size());
    for (const auto& p : levels) sols.push_back(solve(p));

    WongZakaiReport rep;
    for (std::size_t j = 0; j + 1 < sols.size(); ++j) {
        rep.successive.push_back(solution_distance(sols[j], sols[j + 1]));
        rep.to_finest.push_back(solution_distance(sols[j], sols.back()));
    }
    rep.monotone = true;
    for (std::size_t j = 0; j + 1 < rep.successive.size(); ++j)
        if (!(rep.successive[j + 1] < rep.successive[j])) rep.monotone = false;
    return rep;
}

} // namespace roughflow
