#pragma once
// Shared signal builders and a central-difference gradient checker.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace testsupport {

inline std::vector<double> sine(std::size_t n, double fps, double hz, double amp = 1.0, double phase = 0.0) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / fps + phase);
    return x;
}

inline std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sigma);
    std::vector<double> x(n);
    for (double& v : x) v = g(rng);
    return x;
}

inline void standardize(std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    s = std::sqrt(s / static_cast<double>(x.size()));
    for (double& v : x) v = (v - m) / s;
}

/// Max over coordinates of |analytic - numeric| / max(scale, |numeric|) where
/// scale is the largest |numeric| entry (so near-zero entries are judged
/// against the gradient's overall size).
inline double gradient_error(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                             std::span<const double> analytic, double h = 1e-4) {
    std::vector<double> numeric(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f(x);
        x[i] = keep - h;
        const double down = f(x);
        x[i] = keep;
        numeric[i] = (up - down) / (2.0 * h);
    }
    double scale = 0.0;
    for (double v : numeric) scale = std::max(scale, std::abs(v));
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / std::max(scale, 1e-300));
    return worst;
}

}  // namespace testsupport
