#pragma once
// Windowed pulse-rate estimation and rate error metrics.

#include <cstddef>
#include <optional>
#include <vector>

#include "pulsegate/signal.hpp"
#include "pulsegate/types.hpp"

namespace pulsegate::evalx {

/// 0.66 Hz .. 4 Hz, kept exactly as 39.6 .. 240 bpm.
inline constexpr dsp::Band kRateBand{39.6, 240.0};

struct RateOptions {
    double window_s = 10.0;
    std::size_t stride_frames = 1;
    std::size_t nfft = dsp::kDefaultNfft;
    dsp::Band band = kRateBand;
};

struct RateSeries {
    std::vector<double> times;              // window centres, seconds
    std::vector<std::optional<double>> bpm; // empty for degenerate windows
    double window_s = 10.0;
    dsp::Band band = kRateBand;

    std::size_t size() const { return times.size(); }
};

/// Spectral-peak rate per sliding window (windows fully inside the signal).
RateSeries pulse_rate(const Waveform& w, const RateOptions& opts = {});

struct ErrorReport {
    double me = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
    std::optional<double> pearson_r;  // empty when either side has zero variance
    std::size_t pairs = 0;
};

/// Pairs windows by index (time grids must match); missing values are skipped.
ErrorReport error_report(const RateSeries& pred, const RateSeries& truth);

}  // namespace pulsegate::evalx
