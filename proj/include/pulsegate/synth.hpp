#pragma once
// Synthetic pulsatile scenes and pulseless (negative) video transforms.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pulsegate/types.hpp"

namespace pulsegate::synth {

struct HrKnot {
    double t_s;
    double bpm;
};

/// Static skin patch whose colour is modulated by a pulse with a second
/// (dicrotic) harmonic. Intensities live in [0, 1]; noise magnitudes are in
/// 8-bit units (0..255).
struct SceneConfig {
    double duration_s = 10.0;
    double fps = 90.0;
    std::size_t height = 32;
    std::size_t width = 32;
    std::vector<HrKnot> hr_trajectory{{0.0, 75.0}};  // piecewise linear, held flat outside the knots
    double pulse_amplitude = 0.005;                    // relative modulation of the green channel
    double dicrotic_ratio = 0.3;
    double sensor_noise_sigma = 0.0;
    std::array<double, 3> skin_rgb{0.70, 0.50, 0.40};
    /// Relative pulse strength per channel (R, G, B); skin absorbs most in green.
    std::array<double, 3> pulse_signature{0.43, 1.0, 0.69};
    double texture_amplitude = 0.05;
    std::uint64_t seed = 0;

    void validate() const;
    std::size_t frame_count() const;
};

double heart_rate_at(const SceneConfig& cfg, double t_s);

struct PositiveSample {
    VideoCube video;
    Waveform truth;  // noiseless modulator, one value per frame
};

PositiveSample generate_positive(const SceneConfig& cfg);

enum class NegativeKind { Normal, Uniform, Shuffle };

const char* to_string(NegativeKind kind);
NegativeKind parse_negative_kind(const std::string& name);

struct NegativeTransform {
    NegativeKind kind = NegativeKind::Normal;
    double normal_sigma = 3.0;
    double uniform_low = -3.0;
    double uniform_high = 3.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// NORMAL / UNIFORM replicate one randomly chosen frame and add per-pixel,
/// per-frame noise; SHUFFLE permutes the frames.
VideoCube make_negative(const VideoCube& video, const NegativeTransform& transform);

/// The frame order SHUFFLE applies for a given length and seed.
std::vector<std::size_t> shuffle_order(std::size_t frames, std::uint64_t seed);

/// Index of the frame NORMAL / UNIFORM replicate for a given length and seed.
std::size_t replicated_frame_index(std::size_t frames, std::uint64_t seed);

/// Mixes a base seed with a stream id so independent draws never share a sequence.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace pulsegate::synth
