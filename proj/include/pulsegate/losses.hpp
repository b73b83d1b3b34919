#pragma once
// Training objectives with analytic gradients w.r.t. the predicted waveform.
//
// Negative-sample losses are oriented so that minimisation drives the
// prediction towards a flat (white) in-band spectrum or a flat line.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pulsegate/signal.hpp"
#include "pulsegate/types.hpp"

namespace pulsegate::losses {

enum class PositiveLoss { NegPearson, Mse };
enum class NegativeLoss { None, Std, SpectralEntropy, SpectralFlatness, MseFlatline };

const char* to_string(PositiveLoss l);
const char* to_string(NegativeLoss l);
PositiveLoss parse_positive_loss(const std::string& name);
NegativeLoss parse_negative_loss(const std::string& name);

/// Floor applied inside log() by the entropy and flatness losses.
inline constexpr double kLogFloor = 1e-12;

struct SpectralOptions {
    std::size_t nfft = dsp::kDefaultNfft;
    dsp::Band band = dsp::kPulseBand;
    dsp::SpectrumScale scale = dsp::SpectrumScale::Power;
};

struct LossSpec {
    PositiveLoss positive = PositiveLoss::NegPearson;
    NegativeLoss negative = NegativeLoss::None;
    SpectralOptions spectral{};

    /// Checks nfft against the clip length and the band against Nyquist.
    void validate(std::size_t clip_len, double fps) const;
};

struct LossValue {
    double value = 0.0;
    std::vector<double> gradient;  // d value / d pred, same length as pred
};

/// 1 - r(pred, target). Throws degenerate-correlation for constant inputs.
LossValue loss_neg_pearson(std::span<const double> pred, std::span<const double> target);
LossValue loss_neg_pearson(const Waveform& pred, const Waveform& target);

/// mean((pred - target)^2)
LossValue loss_mse(std::span<const double> pred, std::span<const double> target);

/// Population standard deviation; zero gradient at an exact flatline.
LossValue loss_std(std::span<const double> pred);
LossValue loss_std(const Waveform& pred);

/// 1 - H(F) / log K over the K in-band bins of the normalised spectrum.
LossValue loss_spectral_entropy(std::span<const double> pred, double fps, const SpectralOptions& opts = {});
LossValue loss_spectral_entropy(const Waveform& pred, const SpectralOptions& opts = {});

/// 1 - GM(F) / AM(F) over the in-band bins.
LossValue loss_spectral_flatness(std::span<const double> pred, double fps, const SpectralOptions& opts = {});
LossValue loss_spectral_flatness(const Waveform& pred, const SpectralOptions& opts = {});

/// mean(pred^2): regression onto an all-zero target.
LossValue loss_mse_flatline(std::span<const double> pred);
LossValue loss_mse_flatline(const Waveform& pred);

/// Entropy / flatness loss of an in-band distribution given directly.
double entropy_loss_of(std::span<const double> in_band);
double flatness_loss_of(std::span<const double> in_band);

/// Positive samples (target present) use spec.positive, negatives use
/// spec.negative; NegativeLoss::None contributes zero.
LossValue combined_loss(std::span<const double> pred, std::optional<std::span<const double>> target,
                        bool is_positive, double fps, const LossSpec& spec);

}  // namespace pulsegate::losses
