#pragma once
// Brute-force references and signal generators shared by the feature tests
// and the acceptance runner.

#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "support.hpp"

namespace oracles {

/// Strict interior local maxima.
inline std::vector<std::size_t> local_maxima(std::span<const double> x) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < x.size(); ++i)
        if (x[i] > x[i - 1] && x[i] > x[i + 1]) out.push_back(i);
    return out;
}

inline std::vector<double> bumps(std::size_t n, std::span<const double> centres, double width) {
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (double c : centres) {
            const double d = (static_cast<double>(i) - c) / width;
            x[i] += std::exp(-0.5 * d * d);
        }
    return x;
}

/// Troughs at the given sample positions.
inline std::vector<double> trough_train(std::size_t n, std::span<const double> centres) {
    auto x = bumps(n, centres, 6.0);
    for (double& v : x) v = -v;
    return x;
}

/// Scalogram detection needs about half a period on both sides of a peak, so
/// cut x to keep its maxima at least 0.7 periods from either end.
inline std::vector<double> keep_peaks_inside(const std::vector<double>& x, double period) {
    const double margin = 0.7 * period;
    std::size_t first = 0, last = 0;
    bool found = false;
    for (std::size_t p : local_maxima(x)) {
        if (static_cast<double>(p) < margin || static_cast<double>(p) + margin >= static_cast<double>(x.size())) continue;
        if (!found) first = p;
        last = p;
        found = true;
    }
    if (!found) throw std::runtime_error("no interior peak to keep");
    const auto begin = static_cast<long>(static_cast<double>(first) - margin);
    const auto end = static_cast<long>(static_cast<double>(last) + margin);
    return {x.begin() + begin, x.begin() + end + 1};
}

struct AmpdCase {
    std::vector<double> x;
    std::string name;
};

/// 50 noiseless cases: 25 sines, 13 dicrotic pulses, 12 Gaussian bump trains.
inline std::vector<AmpdCase> ampd_cases(double fps = 90.0) {
    std::vector<AmpdCase> cases;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 25; ++i) {
        const double hz = 0.8 + 2.2 * u(rng);
        const auto n = static_cast<std::size_t>(400 + 600 * u(rng));
        const auto x = testsupport::sine(n, fps, hz, 1.0 + u(rng), 2.0 * std::numbers::pi * u(rng));
        cases.push_back({keep_peaks_inside(x, fps / hz), "sine " + std::to_string(hz) + " Hz"});
    }
    for (int i = 0; i < 13; ++i) {
        const double hz = 0.8 + 2.0 * u(rng), ratio = 0.1 + 0.3 * u(rng), phase = 2.0 * std::numbers::pi * u(rng);
        const auto n = static_cast<std::size_t>(500 + 500 * u(rng));
        std::vector<double> x(n);
        for (std::size_t t = 0; t < n; ++t) {
            const double ph = 2.0 * std::numbers::pi * hz * static_cast<double>(t) / fps + phase;
            x[t] = std::sin(ph) + ratio * std::sin(2.0 * ph);
        }
        cases.push_back({keep_peaks_inside(x, fps / hz), "dicrotic " + std::to_string(hz) + " Hz"});
    }
    for (int i = 0; i < 12; ++i) {
        const double period = 40.0 + 60.0 * u(rng);
        const auto n = static_cast<std::size_t>(600 + 400 * u(rng));
        std::vector<double> centres;
        for (double c = period * u(rng); c < static_cast<double>(n); c += period) centres.push_back(c);
        cases.push_back({keep_peaks_inside(bumps(n, centres, 4.0 + 4.0 * u(rng)), period),
                         "bump train period " + std::to_string(period)});
    }
    return cases;
}

/// Trough positions with intervals alternating p - d, p + d (samples).
inline std::vector<double> alternating_troughs(double first, double p, double d, double end) {
    std::vector<double> centres;
    double c = first;
    for (std::size_t i = 0; c < end; ++i) {
        centres.push_back(c);
        c += i % 2 ? p + d : p - d;
    }
    return centres;
}

}  // namespace oracles
