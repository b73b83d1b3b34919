#include "pulsegate/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pulsegate/error.hpp"
#include "pulsegate/kernels.hpp"

namespace pulsegate::features {

namespace {

std::vector<double> detrend(std::span<const double> x) {
    const std::size_t n = x.size();
    const double tm = 0.5 * static_cast<double>(n - 1);
    const double ym = dsp::mean(x);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = static_cast<double>(i) - tm;
        sxy += dt * (x[i] - ym);
        sxx += dt * dt;
    }
    const double slope = sxy / sxx;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - ym - slope * (static_cast<double>(i) - tm);
    return out;
}

// Row k of the scalogram is 0 at i when x_i exceeds both neighbours at distance k.
bool is_local_max(const std::vector<double>& x, std::size_t i, std::size_t k) {
    return i >= k && i + k < x.size() && x[i] > x[i - k] && x[i] > x[i + k];
}

}  // namespace

std::vector<std::size_t> ampd_peaks(std::span<const double> raw) {
    require(raw.size() >= 8, ErrorKind::InsufficientData, "AMPD needs at least 8 samples");
    for (double v : raw) require(std::isfinite(v), ErrorKind::InvalidInput, "non-finite sample");
    const auto x = detrend(raw);
    const std::size_t n = x.size();
    const std::size_t scales = (n + 1) / 2 - 1;  // ceil(n/2) - 1

    // gamma_k counts the ones in row k; lambda is the first minimiser.
    std::size_t lambda = 1;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t k = 1; k <= scales; ++k) {
        std::size_t zeros = 0;
        for (std::size_t i = k; i + k < n; ++i)
            if (x[i] > x[i - k] && x[i] > x[i + k]) ++zeros;
        const std::size_t gamma = n - zeros;
        if (gamma < best) {
            best = gamma;
            lambda = k;
        }
    }

    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < n; ++i) {
        bool all = true;
        for (std::size_t k = 1; k <= lambda && all; ++k) all = is_local_max(x, i, k);
        if (all) peaks.push_back(i);
    }
    return peaks;
}

std::vector<std::size_t> ampd_peaks(const Waveform& w) { return ampd_peaks(w.samples()); }

double snr_db(std::span<const double> x, double fps, const SnrOptions& opts) {
    const auto psd = dsp::psd_normalized(x, fps, opts.nfft, opts.band);
    if (psd.degenerate) return opts.floor_db;
    const double peak = psd.peak_bpm();
    double signal = 0.0, noise = 0.0;
    for (std::size_t k = psd.bins.first; k <= psd.bins.last; ++k) {
        const double bpm = dsp::bin_bpm(k, fps, opts.nfft);
        const bool near = std::abs(bpm - peak) <= opts.fundamental_halfwidth_bpm ||
                          std::abs(bpm - 2.0 * peak) <= opts.harmonic_halfwidth_bpm;
        (near ? signal : noise) += psd.power[k];
    }
    if (!(noise > 0.0)) return opts.ceiling_db;
    if (!(signal > 0.0)) return opts.floor_db;
    return std::clamp(10.0 * std::log10(signal / noise), opts.floor_db, opts.ceiling_db);
}

double snr_db(const Waveform& w, const SnrOptions& opts) { return snr_db(w.samples(), w.fps(), opts); }

PulseFeatureVector PulseFeatureVector::from_values(std::span<const double> v) {
    require(v.size() == kSize, ErrorKind::InvalidArgument, "feature vectors have exactly 8 entries");
    return PulseFeatureVector{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
}

void FeatureOptions::validate() const {
    require(window_s > 0.0 && stride_s > 0.0, ErrorKind::InvalidArgument, "window and stride must be positive");
}

std::size_t window_samples(double fps, const FeatureOptions& opts) {
    return static_cast<std::size_t>(std::llround(opts.window_s * fps));
}

std::size_t stride_samples(double fps, const FeatureOptions& opts) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opts.stride_s * fps)));
}

WindowFeatures window_features(std::span<const double> x, double fps, const FeatureOptions& opts) {
    WindowFeatures out;
    auto& f = out.features;
    f.snr_db = snr_db(x, fps, opts.snr);
    f.sigma = dsp::population_std(x);
    const auto env = dsp::hilbert_envelope(x);
    f.envelope_mean = dsp::mean(env);

    std::vector<double> negated(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) negated[i] = -x[i];
    const auto troughs = ampd_peaks(negated);
    if (troughs.size() < 3) {
        out.degenerate_peaks = true;
        return out;
    }
    std::vector<double> ibi(troughs.size() - 1);
    for (std::size_t i = 0; i + 1 < troughs.size(); ++i)
        ibi[i] = static_cast<double>(troughs[i + 1] - troughs[i]) / fps;
    std::vector<double> dibi(ibi.size() - 1);
    for (std::size_t i = 0; i + 1 < ibi.size(); ++i) dibi[i] = ibi[i + 1] - ibi[i];

    f.ibi_mean = dsp::mean(ibi);
    f.ibi_std = dsp::population_std(ibi);
    f.dibi_mean = dsp::mean(dibi);
    f.dibi_std = dibi.size() >= 2 ? dsp::population_std(dibi) : 0.0;
    f.rmssd = std::sqrt(kernels::sum_squares(dibi) / static_cast<double>(dibi.size()));
    return out;
}

std::vector<WindowFeatures> extract_features(const Waveform& w, const FeatureOptions& opts) {
    opts.validate();
    const std::size_t len = window_samples(w.fps(), opts);
    const std::size_t hop = stride_samples(w.fps(), opts);
    require(len >= 8, ErrorKind::InvalidArgument, "feature window shorter than 8 samples");
    require(w.size() >= len, ErrorKind::InsufficientData, "waveform shorter than one feature window");

    const std::size_t count = (w.size() - len) / hop + 1;
    std::vector<WindowFeatures> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t begin = i * hop;
        auto wf = window_features(w.samples().subspan(begin, len), w.fps(), opts);
        wf.t_start = static_cast<double>(begin) / w.fps();
        out.push_back(wf);
    }
    return out;
}

}  // namespace pulsegate::features
