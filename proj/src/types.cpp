#include "pulsegate/types.hpp"

#include <cmath>

#include "pulsegate/error.hpp"

namespace pulsegate {

Waveform::Waveform(std::vector<double> samples, double fps) : samples_(std::move(samples)), fps_(fps) {
    require(std::isfinite(fps_) && fps_ > 0.0, ErrorKind::InvalidArgument, "waveform fps must be positive");
    require(samples_.size() >= 2, ErrorKind::InsufficientData, "waveform needs at least two samples");
    for (double v : samples_) require(std::isfinite(v), ErrorKind::InvalidInput, "waveform sample is not finite");
}

VideoCube::VideoCube(std::size_t frames, std::size_t height, std::size_t width, std::size_t channels, double fps,
                     std::vector<float> data)
    : t_(frames), h_(height), w_(width), c_(channels), fps_(fps), data_(std::move(data)) {
    require(t_ >= 2, ErrorKind::InsufficientData, "video cube needs at least two frames");
    require(h_ >= 1 && w_ >= 1, ErrorKind::InvalidArgument, "video cube frame must be at least 1x1");
    require(c_ == 1 || c_ == 3, ErrorKind::InvalidArgument, "video cube must have 1 or 3 channels");
    require(std::isfinite(fps_) && fps_ > 0.0, ErrorKind::InvalidArgument, "video cube fps must be positive");
    require(data_.size() == t_ * h_ * w_ * c_, ErrorKind::InvalidArgument, "video cube data size mismatch");
}

VideoCube::VideoCube(std::size_t frames, std::size_t height, std::size_t width, std::size_t channels, double fps)
    : VideoCube(frames, height, width, channels, fps, std::vector<float>(frames * height * width * channels, 0.0f)) {}

std::span<const float> VideoCube::frame(std::size_t t) const {
    return std::span<const float>(data_).subspan(t * frame_size(), frame_size());
}

std::span<float> VideoCube::mutable_frame(std::size_t t) {
    return std::span<float>(data_).subspan(t * frame_size(), frame_size());
}

VideoCube VideoCube::slice(std::size_t begin, std::size_t count) const {
    require(begin + count <= t_, ErrorKind::InvalidArgument, "video slice out of range");
    const auto first = data_.begin() + static_cast<std::ptrdiff_t>(begin * frame_size());
    std::vector<float> out(first, first + static_cast<std::ptrdiff_t>(count * frame_size()));
    return VideoCube(count, h_, w_, c_, fps_, std::move(out));
}

void VideoCube::validate_finite() const {
    for (float v : data_) require(std::isfinite(v), ErrorKind::InvalidInput, "video cube value is not finite");
}

Trace::Trace(std::size_t frames, std::size_t channels, double fps, std::vector<double> channel_major)
    : frames_(frames), channels_(channels), fps_(fps), data_(std::move(channel_major)) {
    require(frames_ >= 2, ErrorKind::InsufficientData, "trace needs at least two frames");
    require(channels_ >= 1, ErrorKind::InvalidArgument, "trace needs at least one channel");
    require(std::isfinite(fps_) && fps_ > 0.0, ErrorKind::InvalidArgument, "trace fps must be positive");
    require(data_.size() == frames_ * channels_, ErrorKind::InvalidArgument, "trace data size mismatch");
    for (double v : data_) require(std::isfinite(v), ErrorKind::InvalidInput, "trace value is not finite");
}

Trace Trace::slice(std::size_t begin, std::size_t count) const {
    require(begin + count <= frames_, ErrorKind::InvalidArgument, "trace slice out of range");
    std::vector<double> out;
    out.reserve(count * channels_);
    for (std::size_t c = 0; c < channels_; ++c) {
        const auto ch = channel(c);
        out.insert(out.end(), ch.begin() + static_cast<std::ptrdiff_t>(begin),
                   ch.begin() + static_cast<std::ptrdiff_t>(begin + count));
    }
    return Trace(count, channels_, fps_, std::move(out));
}

Trace Trace::permuted(std::span<const std::size_t> order) const {
    require(order.size() == frames_, ErrorKind::InvalidArgument, "permutation length mismatch");
    std::vector<double> out(data_.size());
    for (std::size_t c = 0; c < channels_; ++c)
        for (std::size_t i = 0; i < frames_; ++i) out[c * frames_ + i] = data_[c * frames_ + order[i]];
    return Trace(frames_, channels_, fps_, std::move(out));
}

}  // namespace pulsegate
