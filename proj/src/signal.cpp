#include "pulsegate/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pulsegate/error.hpp"
#include "pulsegate/fft.hpp"
#include "pulsegate/kernels.hpp"

namespace pulsegate::dsp {

namespace {

// Relative floor under which a spectrum counts as having no in-band energy.
// Mean removal of a constant leaves roundoff of order 1e-16 per sample.
constexpr double kDegenerateFloor = 1e-20;

void require_finite(std::span<const double> x) {
    for (double v : x) require(std::isfinite(v), ErrorKind::InvalidInput, "non-finite sample");
}

}  // namespace

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return kernels::sum(x) / static_cast<double>(x.size());
}

double population_std(std::span<const double> x) {
    if (x.empty()) return 0.0;
    // exact zero for constants; the mean itself may carry rounding
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) return 0.0;
    const double m = mean(x);
    double acc = 0.0;
    for (double v : x) acc += (v - m) * (v - m);
    return std::sqrt(acc / static_cast<double>(x.size()));
}

double pearson(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), ErrorKind::InvalidArgument, "pearson operands differ in length");
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

BinRange band_bins(double fps, std::size_t nfft, Band band) {
    require(band.low_bpm < band.high_bpm, ErrorKind::InvalidArgument, "band low must be below high");
    BinRange r;
    const std::size_t half = nfft / 2;
    const double tol = 1e-9;
    for (std::size_t k = 0; k <= half; ++k) {
        const double f = bin_bpm(k, fps, nfft);
        if (f + tol >= band.low_bpm && f - tol <= band.high_bpm) {
            if (r.empty) {
                r.first = k;
                r.empty = false;
            }
            r.last = k;
        }
    }
    return r;
}

std::size_t NormalizedPsd::argmax() const {
    return static_cast<std::size_t>(std::max_element(power.begin(), power.end()) - power.begin());
}

std::vector<double> power_spectrum(std::span<const double> x, std::size_t nfft) {
    const auto spec = fft::rfft(x, nfft);
    std::vector<double> p(spec.size());
    kernels::power(spec, p);
    const std::size_t nyquist = (nfft % 2 == 0) ? nfft / 2 : spec.size();
    for (std::size_t k = 1; k < spec.size(); ++k)
        if (k != nyquist) p[k] *= 2.0;
    return p;
}

NormalizedPsd psd_normalized(const Waveform& w, std::size_t nfft, Band band, SpectrumScale scale) {
    return psd_normalized(w.samples(), w.fps(), nfft, band, scale);
}

NormalizedPsd psd_normalized(std::span<const double> samples, double fps, std::size_t nfft, Band band,
                             SpectrumScale scale) {
    require(nfft >= samples.size(), ErrorKind::InvalidArgument, "nfft shorter than the waveform");
    require(band.low_bpm < band.high_bpm, ErrorKind::InvalidArgument, "band low must be below high");
    require_finite(samples);

    const double m = mean(samples);
    std::vector<double> centered(samples.begin(), samples.end());
    for (double& v : centered) v -= m;

    NormalizedPsd out;
    out.nfft = nfft;
    out.band = band;
    out.bin_resolution = fps * 60.0 / static_cast<double>(nfft);
    out.bins = band_bins(fps, nfft, band);
    out.power = power_spectrum(centered, nfft);

    const double raw_energy = kernels::sum_squares(samples);
    double in_band = 0.0;
    for (std::size_t k = 0; k < out.power.size(); ++k) {
        const bool inside = !out.bins.empty && k >= out.bins.first && k <= out.bins.last;
        if (!inside) {
            out.power[k] = 0.0;
            continue;
        }
        in_band += out.power[k];
    }
    const double floor = kDegenerateFloor * static_cast<double>(nfft) * raw_energy;
    if (out.bins.empty || !(in_band > floor) || in_band <= 0.0) {
        std::fill(out.power.begin(), out.power.end(), 0.0);
        out.degenerate = true;
        return out;
    }
    if (scale == SpectrumScale::Magnitude) {
        in_band = 0.0;
        for (std::size_t k = out.bins.first; k <= out.bins.last; ++k) {
            out.power[k] = std::sqrt(out.power[k]);
            in_band += out.power[k];
        }
    }
    for (double& v : out.power) v /= in_band;
    return out;
}

std::vector<double> hilbert_envelope(std::span<const double> x) {
    require(x.size() >= 4, ErrorKind::InsufficientData, "hilbert envelope needs at least four samples");
    require_finite(x);
    const std::size_t n = x.size();
    const auto half = fft::rfft(x, n);
    std::vector<fft::Complex> analytic(n, fft::Complex{0.0, 0.0});
    analytic[0] = half[0];
    const std::size_t positive_end = (n % 2 == 0) ? n / 2 : (n + 1) / 2;
    for (std::size_t k = 1; k < positive_end; ++k) analytic[k] = 2.0 * half[k];
    if (n % 2 == 0) analytic[n / 2] = half[n / 2];
    const auto z = fft::dft(analytic, /*inverse=*/true);
    std::vector<double> env(n);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(z[i]) * scale;
    return env;
}

Waveform hilbert_envelope(const Waveform& w) { return Waveform(hilbert_envelope(w.samples()), w.fps()); }

Waveform resample_cubic(const Waveform& w, double target_fps) {
    require(std::isfinite(target_fps) && target_fps > 0.0, ErrorKind::InvalidArgument,
            "target fps must be positive");
    const std::size_t n = w.size();
    require(n >= 4, ErrorKind::InsufficientData, "cubic resampling needs at least four samples");
    if (target_fps == w.fps()) return w;

    const auto y = w.samples();
    const double h = 1.0 / w.fps();

    // Second derivatives M_i. Not-a-knot ends give M_0 = 2 M_1 - M_2 and
    // M_{n-1} = 2 M_{n-2} - M_{n-3}, which turns the first and last interior
    // rows into 6 M_1 = r_1 and 6 M_{n-2} = r_{n-2}.
    const std::size_t m = n - 2;
    std::vector<double> diag(m, 4.0), lower(m, 1.0), upper(m, 1.0), rhs(m);
    for (std::size_t i = 0; i < m; ++i) rhs[i] = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]) / (h * h);
    diag.front() = 6.0;
    upper.front() = 0.0;
    diag.back() = 6.0;
    lower.back() = 0.0;
    if (m == 1) diag[0] = 6.0;
    // Thomas algorithm.
    for (std::size_t i = 1; i < m; ++i) {
        const double f = lower[i] / diag[i - 1];
        diag[i] -= f * upper[i - 1];
        rhs[i] -= f * rhs[i - 1];
    }
    std::vector<double> second(n);
    second[m] = rhs[m - 1] / diag[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) second[i + 1] = (rhs[i] - upper[i] * second[i + 2]) / diag[i];
    second[0] = 2.0 * second[1] - second[2];
    second[n - 1] = 2.0 * second[n - 2] - second[n - 3];

    const double duration = static_cast<double>(n - 1) * h;
    const auto count = static_cast<std::size_t>(std::floor(duration * target_fps + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t j = 0; j < count; ++j) {
        const double t = static_cast<double>(j) / target_fps;
        auto i = static_cast<std::size_t>(std::floor(t / h));
        i = std::min(i, n - 2);
        const double a = (static_cast<double>(i + 1) * h) - t;  // distance to right knot
        const double b = t - static_cast<double>(i) * h;        // distance to left knot
        out[j] = second[i] * a * a * a / (6.0 * h) + second[i + 1] * b * b * b / (6.0 * h) +
                 (y[i] / h - second[i] * h / 6.0) * a + (y[i + 1] / h - second[i + 1] * h / 6.0) * b;
    }
    out.front() = y.front();
    if (std::abs(static_cast<double>(count - 1) / target_fps - duration) < 1e-9) out.back() = y.back();
    return Waveform(std::move(out), target_fps);
}

bool standardize_in_place(std::span<double> x) {
    const double m = mean(x);
    for (double& v : x) v -= m;
    const double sd = std::sqrt(kernels::sum_squares(x) / static_cast<double>(x.size()));
    double scale_ref = 0.0;
    for (double v : x) scale_ref = std::max(scale_ref, std::abs(v));
    if (!(sd > 0.0) || sd <= 1e-14 * (std::abs(m) + scale_ref)) {
        std::fill(x.begin(), x.end(), 0.0);
        return false;
    }
    for (double& v : x) v /= sd;
    return true;
}

Standardized standardize(const Waveform& w) {
    std::vector<double> x = w.values();
    const bool ok = standardize_in_place(x);
    return Standardized{Waveform(std::move(x), w.fps()), !ok};
}

std::vector<double> hann_positive(std::size_t len) {
    std::vector<double> w(len);
    const double denom = static_cast<double>(len + 1);
    for (std::size_t n = 0; n < len; ++n)
        w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n + 1) / denom);
    return w;
}

std::vector<double> bandpass(std::span<const double> x, double fps, Band band) {
    require(!x.empty(), ErrorKind::InvalidArgument, "bandpass of an empty signal");
    const std::size_t n = x.size();
    auto spec = fft::rfft(x, n);
    const auto keep = band_bins(fps, n, band);
    for (std::size_t k = 0; k < spec.size(); ++k)
        if (keep.empty || k < keep.first || k > keep.last) spec[k] = 0.0;
    auto out = fft::irfft_unnormalized(spec, n);
    for (double& v : out) v /= static_cast<double>(n);
    return out;
}

Trace spatial_mean_trace(const VideoCube& video) {
    const std::size_t t_count = video.frames();
    const std::size_t c_count = video.channels();
    const std::size_t pixels = video.height() * video.width();
    std::vector<double> out(t_count * c_count, 0.0);
    std::vector<double> acc(c_count);
    for (std::size_t t = 0; t < t_count; ++t) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const auto frame = video.frame(t);
        for (std::size_t p = 0; p < pixels; ++p)
            for (std::size_t c = 0; c < c_count; ++c) acc[c] += frame[p * c_count + c];
        for (std::size_t c = 0; c < c_count; ++c) out[c * t_count + t] = acc[c] / static_cast<double>(pixels);
    }
    return Trace(t_count, c_count, video.fps(), std::move(out));
}

}  // namespace pulsegate::dsp
