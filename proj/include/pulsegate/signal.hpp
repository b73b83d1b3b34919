#pragma once
// Spectral analysis, envelope, resampling and normalisation primitives.

#include <cstddef>
#include <span>
#include <vector>

#include "pulsegate/types.hpp"

namespace pulsegate::dsp {

/// Frequency band in beats per minute, endpoints inclusive.
struct Band {
    double low_bpm;
    double high_bpm;
};

inline constexpr Band kPulseBand{40.0, 240.0};
inline constexpr std::size_t kDefaultNfft = 5400;

/// Whether spectral bins carry |X|^2 or |X|. Power is the default everywhere.
enum class SpectrumScale { Power, Magnitude };

struct BinRange {
    std::size_t first = 0;
    std::size_t last = 0;  // inclusive
    std::size_t count() const { return empty ? 0 : last - first + 1; }
    bool empty = true;
};

/// One-sided bins k whose centre k * fps * 60 / nfft lies inside the band.
BinRange band_bins(double fps, std::size_t nfft, Band band);

inline double bin_bpm(std::size_t k, double fps, std::size_t nfft) {
    return static_cast<double>(k) * fps * 60.0 / static_cast<double>(nfft);
}

/// Band-limited spectrum normalised to unit sum.
struct NormalizedPsd {
    std::vector<double> power;  // nfft/2 + 1 bins, exactly zero outside the band
    double bin_resolution = 0;  // bpm per bin
    Band band{};
    std::size_t nfft = 0;
    BinRange bins;
    bool degenerate = false;  // in-band energy was zero; power is all zeros

    std::span<const double> in_band() const {
        return std::span<const double>(power).subspan(bins.first, bins.count());
    }
    /// Index of the largest bin (first on ties).
    std::size_t argmax() const;
    double peak_bpm() const { return static_cast<double>(argmax()) * bin_resolution; }
};

/// One-sided periodogram of x zero-padded to nfft: |X_k|^2 with interior bins
/// doubled, so sum(result) / nfft == sum(x^2).
std::vector<double> power_spectrum(std::span<const double> x, std::size_t nfft);

NormalizedPsd psd_normalized(const Waveform& w, std::size_t nfft = kDefaultNfft, Band band = kPulseBand,
                             SpectrumScale scale = SpectrumScale::Power);
NormalizedPsd psd_normalized(std::span<const double> samples, double fps, std::size_t nfft = kDefaultNfft,
                             Band band = kPulseBand, SpectrumScale scale = SpectrumScale::Power);

/// |analytic signal| via the frequency-domain method.
Waveform hilbert_envelope(const Waveform& w);
std::vector<double> hilbert_envelope(std::span<const double> x);

/// Not-a-knot cubic spline onto a uniform grid at target_fps covering [0, (n-1)/fps].
Waveform resample_cubic(const Waveform& w, double target_fps);

struct Standardized {
    Waveform wave;
    bool degenerate = false;
};

/// Zero mean, unit population standard deviation. Constant input gives zeros.
Standardized standardize(const Waveform& w);
/// In-place variant for raw buffers; returns false for constant input.
bool standardize_in_place(std::span<double> x);

/// Per-frame mean over H x W for every channel.
Trace spatial_mean_trace(const VideoCube& video);

/// Hann taper with strictly positive end points: w[n] = 0.5 - 0.5 cos(2 pi (n + 1) / (len + 1)).
std::vector<double> hann_positive(std::size_t len);

/// Zero-phase brick-wall filter keeping only bins inside the band.
std::vector<double> bandpass(std::span<const double> x, double fps, Band band);

double mean(std::span<const double> x);
/// Population (ddof = 0) standard deviation.
double population_std(std::span<const double> x);
/// Pearson correlation; NaN when either side has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace pulsegate::dsp
