#pragma once
// Core value types shared by every module.

#include <cstddef>
#include <span>
#include <vector>

namespace pulsegate {

/// Uniformly sampled real-valued signal. fps > 0, at least two samples, all finite.
class Waveform {
public:
    Waveform(std::vector<double> samples, double fps);

    std::span<const double> samples() const { return samples_; }
    const std::vector<double>& values() const { return samples_; }
    double fps() const { return fps_; }
    std::size_t size() const { return samples_.size(); }
    double operator[](std::size_t i) const { return samples_[i]; }
    /// Seconds spanned by the samples, n / fps.
    double duration() const { return static_cast<double>(samples_.size()) / fps_; }

    bool operator==(const Waveform&) const = default;

private:
    std::vector<double> samples_;
    double fps_;
};

/// T x H x W x C intensity volume stored as float32 in THWC order.
/// Channel order is R,G,B when C = 3.
class VideoCube {
public:
    VideoCube(std::size_t frames, std::size_t height, std::size_t width, std::size_t channels, double fps,
              std::vector<float> data);
    /// Zero-filled cube of the given shape.
    VideoCube(std::size_t frames, std::size_t height, std::size_t width, std::size_t channels, double fps);

    std::size_t frames() const { return t_; }
    std::size_t height() const { return h_; }
    std::size_t width() const { return w_; }
    std::size_t channels() const { return c_; }
    double fps() const { return fps_; }
    std::size_t frame_size() const { return h_ * w_ * c_; }

    std::span<const float> data() const { return data_; }
    std::span<float> mutable_data() { return data_; }
    std::span<const float> frame(std::size_t t) const;
    std::span<float> mutable_frame(std::size_t t);

    float at(std::size_t t, std::size_t y, std::size_t x, std::size_t c) const {
        return data_[((t * h_ + y) * w_ + x) * c_ + c];
    }

    /// Frames [begin, begin + count) as a new cube.
    VideoCube slice(std::size_t begin, std::size_t count) const;

    /// Rejects non-finite values; construction alone does not scan the data.
    void validate_finite() const;

    bool operator==(const VideoCube&) const = default;

private:
    std::size_t t_, h_, w_, c_;
    double fps_;
    std::vector<float> data_;
};

/// Per-frame channel means, stored channel-major (all frames of channel 0 first).
class Trace {
public:
    Trace(std::size_t frames, std::size_t channels, double fps, std::vector<double> channel_major);

    std::size_t frames() const { return frames_; }
    std::size_t channels() const { return channels_; }
    double fps() const { return fps_; }
    std::span<const double> channel(std::size_t c) const {
        return std::span<const double>(data_).subspan(c * frames_, frames_);
    }
    double at(std::size_t t, std::size_t c) const { return data_[c * frames_ + t]; }
    std::span<const double> data() const { return data_; }

    /// Frames [begin, begin + count).
    Trace slice(std::size_t begin, std::size_t count) const;
    /// Frames reordered so that frame i of the result is frame order[i] of this trace.
    Trace permuted(std::span<const std::size_t> order) const;

    bool operator==(const Trace&) const = default;

private:
    std::size_t frames_, channels_;
    double fps_;
    std::vector<double> data_;
};

/// Spatial-mean RGB trace consumed by the colour baselines.
using RgbTrace = Trace;

}  // namespace pulsegate
