#pragma once
// AMPD peak detection and the eight per-window pulse features.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "pulsegate/signal.hpp"
#include "pulsegate/types.hpp"

namespace pulsegate::features {

/// Deterministic automatic multiscale-based peak detection. Returns strictly
/// increasing indices. Needs at least 8 samples.
std::vector<std::size_t> ampd_peaks(std::span<const double> x);
std::vector<std::size_t> ampd_peaks(const Waveform& w);

struct SnrOptions {
    std::size_t nfft = dsp::kDefaultNfft;
    dsp::Band band = dsp::kPulseBand;
    double fundamental_halfwidth_bpm = 6.0;
    double harmonic_halfwidth_bpm = 12.0;
    double floor_db = -60.0;  // degenerate spectra and all-noise windows
    double ceiling_db = 60.0; // windows without any noise power
};

/// Power near the spectral peak and its first harmonic over the remaining
/// in-band power, in dB, clamped to [floor_db, ceiling_db].
double snr_db(std::span<const double> x, double fps, const SnrOptions& opts = {});
double snr_db(const Waveform& w, const SnrOptions& opts = {});

struct PulseFeatureVector {
    static constexpr std::size_t kSize = 8;
    static constexpr std::array<std::string_view, kSize> kNames{
        "snr_db", "sigma", "env_mean", "ibi_mean", "ibi_std", "dibi_mean", "dibi_std", "rmssd"};

    double snr_db = 0.0;
    double sigma = 0.0;
    double envelope_mean = 0.0;
    double ibi_mean = 0.0;  // seconds
    double ibi_std = 0.0;
    double dibi_mean = 0.0;
    double dibi_std = 0.0;
    double rmssd = 0.0;

    std::array<double, kSize> values() const {
        return {snr_db, sigma, envelope_mean, ibi_mean, ibi_std, dibi_mean, dibi_std, rmssd};
    }
    static PulseFeatureVector from_values(std::span<const double> v);
};

struct WindowFeatures {
    double t_start = 0.0;  // seconds
    PulseFeatureVector features;
    bool degenerate_peaks = false;  // fewer than three troughs; peak features zeroed
};

struct FeatureOptions {
    double window_s = 10.0;
    double stride_s = 1.0;
    SnrOptions snr{};

    void validate() const;
};

/// Features of a single window (all samples of x).
WindowFeatures window_features(std::span<const double> x, double fps, const FeatureOptions& opts = {});

/// Sliding windows; count = floor((T/fps - window_s) / stride_s) + 1.
std::vector<WindowFeatures> extract_features(const Waveform& w, const FeatureOptions& opts = {});

/// Window length and stride in samples for a given frame rate.
std::size_t window_samples(double fps, const FeatureOptions& opts);
std::size_t stride_samples(double fps, const FeatureOptions& opts);

}  // namespace pulsegate::features
