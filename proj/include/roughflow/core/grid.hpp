#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "roughflow/core/errors.hpp"

namespace roughflow {

// Strictly increasing partition t_0 < t_1 < ... < t_N of a time window.
struct TimeGrid {
    std::vector<double> t;

    TimeGrid() = default;

    explicit TimeGrid(std::vector<double> times) : t(std::move(times)) {
        if (t.size() < 2)
            throw ConfigError("time grid needs at least two points");
        for (std::size_t i = 0; i + 1 < t.size(); ++i)
            if (!(t[i] < t[i + 1]))
                throw ConfigError("time grid must be strictly increasing");
    }

    static TimeGrid uniform(double t0, double t1, std::size_t intervals) {
        if (intervals == 0 || !(t0 < t1))
            throw ConfigError("uniform grid needs t0 < t1 and at least one interval");
        std::vector<double> ts(intervals + 1);
        for (std::size_t i = 0; i <= intervals; ++i) {
            double w = static_cast<double>(i) / static_cast<double>(intervals);
            ts[i] = t0 + w * (t1 - t0);
        }
        ts[intervals] = t1; // pin the endpoint against round-off
        return TimeGrid(std::move(ts));
    }

    std::size_t points() const { return t.size(); }
    std::size_t intervals() const { return t.size() - 1; }
    double dt(std::size_t i) const { return t[i + 1] - t[i]; }
    double front() const { return t.front(); }
    double back() const { return t.back(); }
    double span() const { return t.back() - t.front(); }

    double mesh() const {
        double m = 0.0;
        for (std::size_t i = 0; i + 1 < t.size(); ++i) m = std::max(m, dt(i));
        return m;
    }

    // Every interval split into `factor` equal pieces; original nodes kept.
    TimeGrid refined(std::size_t factor) const {
        if (factor == 0) throw ConfigError("refinement factor must be positive");
        std::vector<double> ts;
        ts.reserve(intervals() * factor + 1);
        for (std::size_t i = 0; i < intervals(); ++i) {
            for (std::size_t s = 0; s < factor; ++s) {
                double w = static_cast<double>(s) / static_cast<double>(factor);
                ts.push_back(t[i] + w * dt(i));
            }
        }
        ts.push_back(t.back());
        return TimeGrid(std::move(ts));
    }
};

} // namespace roughflow
