#include "pulsegate/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "pulsegate/error.hpp"

namespace pulsegate::synth {

namespace {

constexpr std::uint64_t kStreamTexture = 1;
constexpr std::uint64_t kStreamPhase = 2;
constexpr std::uint64_t kStreamSensor = 3;
constexpr std::uint64_t kStreamFrame = 4;
constexpr std::uint64_t kStreamNoise = 5;
constexpr std::uint64_t kStreamShuffle = 6;

float to_unit(double eight_bit) { return static_cast<float>(std::clamp(eight_bit, 0.0, 255.0) / 255.0); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    // splitmix64 finaliser over the combined value
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void SceneConfig::validate() const {
    require(std::isfinite(fps) && fps > 0.0, ErrorKind::Config, "scene fps must be positive");
    require(std::isfinite(duration_s) && duration_s * fps >= 2.0, ErrorKind::Config,
            "scene must span at least two frames");
    require(height >= 1 && width >= 1, ErrorKind::Config, "scene frame must be at least 1x1");
    require(!hr_trajectory.empty(), ErrorKind::Config, "heart-rate trajectory is empty");
    for (std::size_t i = 0; i < hr_trajectory.size(); ++i) {
        const auto& k = hr_trajectory[i];
        require(k.bpm >= 40.0 && k.bpm <= 240.0, ErrorKind::Config, "heart-rate knot outside [40, 240] bpm");
        if (i > 0)
            require(k.t_s > hr_trajectory[i - 1].t_s, ErrorKind::Config, "heart-rate knots must be increasing in time");
    }
    require(pulse_amplitude >= 0.0, ErrorKind::Config, "pulse amplitude must be non-negative");
    require(dicrotic_ratio >= 0.0 && dicrotic_ratio <= 1.0, ErrorKind::Config, "dicrotic ratio must be in [0, 1]");
    require(sensor_noise_sigma >= 0.0, ErrorKind::Config, "sensor noise must be non-negative");
    for (double v : skin_rgb) require(v > 0.0 && v < 1.0, ErrorKind::Config, "skin colour must lie in (0, 1)");
}

std::size_t SceneConfig::frame_count() const {
    return static_cast<std::size_t>(std::llround(duration_s * fps));
}

double heart_rate_at(const SceneConfig& cfg, double t_s) {
    const auto& knots = cfg.hr_trajectory;
    if (t_s <= knots.front().t_s) return knots.front().bpm;
    if (t_s >= knots.back().t_s) return knots.back().bpm;
    const auto hi = std::upper_bound(knots.begin(), knots.end(), t_s,
                                     [](double t, const HrKnot& k) { return t < k.t_s; });
    const auto lo = hi - 1;
    const double u = (t_s - lo->t_s) / (hi->t_s - lo->t_s);
    return lo->bpm + u * (hi->bpm - lo->bpm);
}

PositiveSample generate_positive(const SceneConfig& cfg) {
    cfg.validate();
    const std::size_t frames = cfg.frame_count();
    const std::size_t h = cfg.height, w = cfg.width;
    constexpr double two_pi = 2.0 * std::numbers::pi;

    // Spatial texture: a few low-frequency cosines shared by all channels.
    std::mt19937_64 tex_rng(derive_seed(cfg.seed, kStreamTexture));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    struct Wave2d {
        double fx, fy, phase;
    };
    std::array<Wave2d, 3> waves{};
    for (auto& wv : waves) wv = {unit(tex_rng) * 2.0, unit(tex_rng) * 2.0, unit(tex_rng) * two_pi};
    std::vector<double> base(h * w * 3);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            double tex = 0.0;
            for (const auto& wv : waves)
                tex += std::cos(two_pi * (wv.fx * static_cast<double>(x) / static_cast<double>(w) +
                                          wv.fy * static_cast<double>(y) / static_cast<double>(h)) +
                                wv.phase);
            tex *= cfg.texture_amplitude / static_cast<double>(waves.size());
            for (std::size_t c = 0; c < 3; ++c) base[(y * w + x) * 3 + c] = cfg.skin_rgb[c] * (1.0 + tex);
        }

    // Pulse phase integrates the instantaneous rate (trapezoid rule).
    std::mt19937_64 phase_rng(derive_seed(cfg.seed, kStreamPhase));
    double phi = unit(phase_rng) * two_pi;
    std::vector<double> modulator(frames);
    double prev_rate = heart_rate_at(cfg, 0.0);
    for (std::size_t t = 0; t < frames; ++t) {
        const double now = static_cast<double>(t) / cfg.fps;
        const double rate = heart_rate_at(cfg, now);
        if (t > 0) phi += two_pi * 0.5 * (rate + prev_rate) / 60.0 / cfg.fps;
        prev_rate = rate;
        modulator[t] = cfg.pulse_amplitude * (std::sin(phi) + cfg.dicrotic_ratio * std::sin(2.0 * phi));
    }

    std::mt19937_64 noise_rng(derive_seed(cfg.seed, kStreamSensor));
    std::normal_distribution<double> noise(0.0, 1.0);
    const bool noisy = cfg.sensor_noise_sigma > 0.0;
    std::vector<float> data(frames * h * w * 3);
    for (std::size_t t = 0; t < frames; ++t) {
        std::array<double, 3> gain{};
        for (std::size_t c = 0; c < 3; ++c) gain[c] = 1.0 + cfg.pulse_signature[c] * modulator[t];
        float* out = data.data() + t * h * w * 3;
        for (std::size_t p = 0; p < h * w; ++p)
            for (std::size_t c = 0; c < 3; ++c) {
                double v = 255.0 * base[p * 3 + c] * gain[c];
                if (noisy) v += cfg.sensor_noise_sigma * noise(noise_rng);
                out[p * 3 + c] = to_unit(v);
            }
    }

    return PositiveSample{VideoCube(frames, h, w, 3, cfg.fps, std::move(data)), Waveform(std::move(modulator), cfg.fps)};
}

const char* to_string(NegativeKind kind) {
    switch (kind) {
        case NegativeKind::Normal: return "normal";
        case NegativeKind::Uniform: return "uniform";
        case NegativeKind::Shuffle: return "shuffle";
    }
    return "?";
}

NegativeKind parse_negative_kind(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "normal") return NegativeKind::Normal;
    if (lower == "uniform") return NegativeKind::Uniform;
    if (lower == "shuffle") return NegativeKind::Shuffle;
    fail(ErrorKind::Config, "unknown negative transform '" + name + "'");
}

void NegativeTransform::validate() const {
    require(normal_sigma > 0.0, ErrorKind::Config, "normal_sigma must be positive");
    require(uniform_low < uniform_high, ErrorKind::Config, "uniform bounds must satisfy low < high");
}

std::vector<std::size_t> shuffle_order(std::size_t frames, std::uint64_t seed) {
    std::vector<std::size_t> order(frames);
    for (std::size_t i = 0; i < frames; ++i) order[i] = i;
    std::mt19937_64 rng(derive_seed(seed, kStreamShuffle));
    // Fisher-Yates with an explicit draw so the order does not depend on std::shuffle.
    for (std::size_t i = frames; i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(order[i - 1], order[pick(rng)]);
    }
    return order;
}

std::size_t replicated_frame_index(std::size_t frames, std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, kStreamFrame));
    std::uniform_int_distribution<std::size_t> pick(0, frames - 1);
    return pick(rng);
}

VideoCube make_negative(const VideoCube& video, const NegativeTransform& transform) {
    transform.validate();
    const std::size_t frames = video.frames();
    const std::size_t fsize = video.frame_size();
    VideoCube out(frames, video.height(), video.width(), video.channels(), video.fps());

    if (transform.kind == NegativeKind::Shuffle) {
        const auto order = shuffle_order(frames, transform.seed);
        for (std::size_t t = 0; t < frames; ++t) {
            const auto src = video.frame(order[t]);
            std::copy(src.begin(), src.end(), out.mutable_frame(t).begin());
        }
        return out;
    }

    const auto base = video.frame(replicated_frame_index(frames, transform.seed));
    std::mt19937_64 rng(derive_seed(transform.seed, kStreamNoise));
    std::normal_distribution<double> gauss(0.0, transform.normal_sigma);
    std::uniform_real_distribution<double> flat(transform.uniform_low, transform.uniform_high);
    const bool normal = transform.kind == NegativeKind::Normal;
    for (std::size_t t = 0; t < frames; ++t) {
        auto dst = out.mutable_frame(t);
        for (std::size_t i = 0; i < fsize; ++i) {
            const double n = normal ? gauss(rng) : flat(rng);
            dst[i] = to_unit(255.0 * static_cast<double>(base[i]) + n);
        }
    }
    return out;
}

}  // namespace pulsegate::synth
