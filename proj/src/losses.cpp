#include "pulsegate/losses.hpp"

#include <algorithm>
#include <cmath>

#include "pulsegate/error.hpp"
#include "pulsegate/fft.hpp"
#include "pulsegate/kernels.hpp"

namespace pulsegate::losses {

namespace {

void require_finite(std::span<const double> x) {
    for (double v : x) require(std::isfinite(v), ErrorKind::InvalidInput, "non-finite prediction sample");
}

// Spectral losses share one pipeline: centre, transform, mask, normalise.
// `dl_df` receives F (in-band, normalised) and returns (value, dL/dF).
template <typename Objective>
LossValue spectral_loss(std::span<const double> pred, double fps, const SpectralOptions& opts,
                        Objective&& objective) {
    require(pred.size() >= 2, ErrorKind::InvalidArgument, "spectral loss needs at least two samples");
    require(opts.nfft >= pred.size(), ErrorKind::InvalidArgument, "nfft shorter than the prediction");
    require_finite(pred);

    const std::size_t n = pred.size();
    const double m = dsp::mean(pred);
    std::vector<double> centered(pred.begin(), pred.end());
    for (double& v : centered) v -= m;

    const auto bins = dsp::band_bins(fps, opts.nfft, opts.band);
    require(!bins.empty, ErrorKind::InvalidArgument, "band contains no spectral bins");
    const std::size_t nyquist = (opts.nfft % 2 == 0) ? opts.nfft / 2 : opts.nfft;
    require(bins.first > 0 && bins.last < nyquist, ErrorKind::InvalidArgument,
            "spectral loss band must exclude DC and Nyquist");

    const auto spec = fft::rfft(centered, opts.nfft);
    const std::size_t k_count = bins.count();
    std::vector<double> power(k_count), s(k_count);
    for (std::size_t i = 0; i < k_count; ++i) power[i] = 2.0 * std::norm(spec[bins.first + i]);
    const bool magnitude = opts.scale == dsp::SpectrumScale::Magnitude;
    double total = 0.0;
    for (std::size_t i = 0; i < k_count; ++i) {
        s[i] = magnitude ? std::sqrt(power[i]) : power[i];
        total += s[i];
    }
    const double raw_energy = kernels::sum_squares(pred);
    const double in_band_power = kernels::sum(power);
    if (!(in_band_power > 1e-20 * static_cast<double>(opts.nfft) * raw_energy) || !(total > 0.0))
        fail(ErrorKind::DegenerateInput, "prediction has no in-band spectral energy");

    std::vector<double> f(k_count);
    for (std::size_t i = 0; i < k_count; ++i) f[i] = s[i] / total;

    std::vector<double> dl_df(k_count);
    const double value = objective(std::span<const double>(f), std::span<double>(dl_df));

    // Through the normalisation F = S / sum(S).
    double proj = 0.0;
    for (std::size_t i = 0; i < k_count; ++i) proj += dl_df[i] * f[i];
    std::vector<fft::Complex> half(spec.size(), fft::Complex{});
    for (std::size_t i = 0; i < k_count; ++i) {
        double g = (dl_df[i] - proj) / total;
        if (magnitude) g = s[i] > 0.0 ? g / (2.0 * s[i]) : 0.0;
        // P_k = 2 |X_k|^2; the c2r transform doubles interior bins, which
        // supplies the factor 2 from d|X|^2/dx = 2 Re(conj(X) dX/dx).
        half[bins.first + i] = 2.0 * g * spec[bins.first + i];
    }
    auto full = fft::irfft_unnormalized(half, opts.nfft);
    LossValue out{value, std::vector<double>(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(n))};
    const double gm = dsp::mean(out.gradient);
    for (double& g : out.gradient) g -= gm;
    return out;
}

double entropy_objective(std::span<const double> f, std::span<double> grad) {
    const double log_k = std::log(static_cast<double>(f.size()));
    const double log_floor = std::log(kLogFloor);
    double h = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const bool above = f[i] > kLogFloor;
        const double lf = above ? std::log(f[i]) : log_floor;
        h -= f[i] * lf;
        if (!grad.empty()) grad[i] = (above ? lf + 1.0 : log_floor) / log_k;
    }
    return f.size() > 1 ? 1.0 - h / log_k : 0.0;
}

double flatness_objective(std::span<const double> f, std::span<double> grad) {
    const double k = static_cast<double>(f.size());
    double log_sum = 0.0, sum = 0.0;
    for (double v : f) {
        log_sum += std::log(std::max(v, kLogFloor));
        sum += v;
    }
    const double gm = std::exp(log_sum / k);
    const double am = sum / k;
    if (!grad.empty()) {
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double dgm = f[i] > kLogFloor ? gm / (k * f[i]) : 0.0;
            grad[i] = -(dgm * am - gm / k) / (am * am);
        }
    }
    return 1.0 - gm / am;
}

}  // namespace

const char* to_string(PositiveLoss l) {
    switch (l) {
        case PositiveLoss::NegPearson: return "neg_pearson";
        case PositiveLoss::Mse: return "mse";
    }
    return "?";
}

const char* to_string(NegativeLoss l) {
    switch (l) {
        case NegativeLoss::None: return "none";
        case NegativeLoss::Std: return "std";
        case NegativeLoss::SpectralEntropy: return "spectral_entropy";
        case NegativeLoss::SpectralFlatness: return "spectral_flatness";
        case NegativeLoss::MseFlatline: return "mse_flatline";
    }
    return "?";
}

PositiveLoss parse_positive_loss(const std::string& name) {
    if (name == "neg_pearson") return PositiveLoss::NegPearson;
    if (name == "mse") return PositiveLoss::Mse;
    fail(ErrorKind::Config, "unknown positive loss '" + name + "'");
}

NegativeLoss parse_negative_loss(const std::string& name) {
    if (name == "none") return NegativeLoss::None;
    if (name == "std") return NegativeLoss::Std;
    if (name == "spectral_entropy" || name == "entropy") return NegativeLoss::SpectralEntropy;
    if (name == "spectral_flatness" || name == "flatness") return NegativeLoss::SpectralFlatness;
    if (name == "mse_flatline") return NegativeLoss::MseFlatline;
    fail(ErrorKind::Config, "unknown negative loss '" + name + "'");
}

void LossSpec::validate(std::size_t clip_len, double fps) const {
    require(spectral.nfft >= clip_len, ErrorKind::Config, "loss nfft shorter than the clip length");
    require(spectral.band.low_bpm > 0.0 && spectral.band.low_bpm < spectral.band.high_bpm &&
                spectral.band.high_bpm < fps * 30.0,
            ErrorKind::Config, "loss band must lie inside (0, Nyquist)");
}

LossValue loss_neg_pearson(std::span<const double> pred, std::span<const double> target) {
    require(pred.size() == target.size(), ErrorKind::InvalidArgument, "pred and target lengths differ");
    require(pred.size() >= 2, ErrorKind::InvalidArgument, "correlation needs at least two samples");
    require_finite(pred);
    require_finite(target);
    const std::size_t n = pred.size();
    const double mp = dsp::mean(pred), mt = dsp::mean(target);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = pred[i] - mp;
        b[i] = target[i] - mt;
    }
    const double aa = kernels::sum_squares(a), bb = kernels::sum_squares(b);
    if (!(aa > 0.0) || !(bb > 0.0)) fail(ErrorKind::DegenerateCorrelation, "constant prediction or target");
    const double na = std::sqrt(aa), nb = std::sqrt(bb);
    const double r = kernels::dot(a, b) / (na * nb);
    LossValue out{1.0 - r, std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) out.gradient[i] = -(b[i] / (na * nb) - r * a[i] / aa);
    return out;
}

LossValue loss_neg_pearson(const Waveform& pred, const Waveform& target) {
    return loss_neg_pearson(pred.samples(), target.samples());
}

LossValue loss_mse(std::span<const double> pred, std::span<const double> target) {
    require(pred.size() == target.size(), ErrorKind::InvalidArgument, "pred and target lengths differ");
    require(!pred.empty(), ErrorKind::InvalidArgument, "empty prediction");
    const double n = static_cast<double>(pred.size());
    LossValue out{0.0, std::vector<double>(pred.size())};
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        out.value += d * d / n;
        out.gradient[i] = 2.0 * d / n;
    }
    return out;
}

LossValue loss_std(std::span<const double> pred) {
    require(pred.size() >= 2, ErrorKind::InvalidArgument, "std loss needs at least two samples");
    require_finite(pred);
    const double n = static_cast<double>(pred.size());
    const double m = dsp::mean(pred);
    const double sd = dsp::population_std(pred);
    LossValue out{sd, std::vector<double>(pred.size(), 0.0)};
    if (sd > 0.0)
        for (std::size_t i = 0; i < pred.size(); ++i) out.gradient[i] = (pred[i] - m) / (n * sd);
    return out;
}

LossValue loss_std(const Waveform& pred) { return loss_std(pred.samples()); }

LossValue loss_spectral_entropy(std::span<const double> pred, double fps, const SpectralOptions& opts) {
    return spectral_loss(pred, fps, opts, entropy_objective);
}

LossValue loss_spectral_entropy(const Waveform& pred, const SpectralOptions& opts) {
    return loss_spectral_entropy(pred.samples(), pred.fps(), opts);
}

LossValue loss_spectral_flatness(std::span<const double> pred, double fps, const SpectralOptions& opts) {
    return spectral_loss(pred, fps, opts, flatness_objective);
}

LossValue loss_spectral_flatness(const Waveform& pred, const SpectralOptions& opts) {
    return loss_spectral_flatness(pred.samples(), pred.fps(), opts);
}

LossValue loss_mse_flatline(std::span<const double> pred) {
    require(!pred.empty(), ErrorKind::InvalidArgument, "empty prediction");
    require_finite(pred);
    const double n = static_cast<double>(pred.size());
    LossValue out{kernels::sum_squares(pred) / n, std::vector<double>(pred.size())};
    for (std::size_t i = 0; i < pred.size(); ++i) out.gradient[i] = 2.0 * pred[i] / n;
    return out;
}

LossValue loss_mse_flatline(const Waveform& pred) { return loss_mse_flatline(pred.samples()); }

double entropy_loss_of(std::span<const double> in_band) {
    require(!in_band.empty(), ErrorKind::InvalidArgument, "empty distribution");
    return entropy_objective(in_band, {});
}

double flatness_loss_of(std::span<const double> in_band) {
    require(!in_band.empty(), ErrorKind::InvalidArgument, "empty distribution");
    return flatness_objective(in_band, {});
}

LossValue combined_loss(std::span<const double> pred, std::optional<std::span<const double>> target,
                        bool is_positive, double fps, const LossSpec& spec) {
    require(target.has_value() == is_positive, ErrorKind::InvalidArgument,
            "a target must be given exactly for positive samples");
    if (is_positive) {
        switch (spec.positive) {
            case PositiveLoss::NegPearson: return loss_neg_pearson(pred, *target);
            case PositiveLoss::Mse: return loss_mse(pred, *target);
        }
    }
    switch (spec.negative) {
        case NegativeLoss::None: return LossValue{0.0, std::vector<double>(pred.size(), 0.0)};
        case NegativeLoss::Std: return loss_std(pred);
        case NegativeLoss::SpectralEntropy: return loss_spectral_entropy(pred, fps, spec.spectral);
        case NegativeLoss::SpectralFlatness: return loss_spectral_flatness(pred, fps, spec.spectral);
        case NegativeLoss::MseFlatline: return loss_mse_flatline(pred);
    }
    fail(ErrorKind::InvalidArgument, "unknown loss");
}

}  // namespace pulsegate::losses
