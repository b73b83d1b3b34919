#pragma once
// Two-layer temporal convolution pulse estimator with hand-written
// backpropagation, SGD training and overlap-add whole-video inference.

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "pulsegate/losses.hpp"
#include "pulsegate/types.hpp"

namespace pulsegate::estimator {

enum class Activation { Tanh, Identity };
enum class Padding { Edge, Zero };

struct Architecture {
    std::size_t in_channels = 3;
    std::size_t filters = 8;
    std::size_t kernel1 = 11;
    std::size_t kernel2 = 11;
    std::size_t dilation2 = 1;
    Activation activation = Activation::Tanh;
    Padding padding = Padding::Edge;
    /// Inputs become (x / mean(x) - 1) * input_gain per channel when enabled.
    bool normalize_input = true;
    double input_gain = 100.0;
    double fps = 90.0;
    double init_scale = 1.0;

    void validate() const;
    /// Frames a clip must span so every tap sees a distinct sample.
    std::size_t receptive_field() const;

    bool operator==(const Architecture&) const = default;
};

/// Flat parameter storage. w1 is [filter][channel][tap], w2 is [filter][tap].
struct Parameters {
    std::vector<double> w1, b1, w2, b2;

    std::size_t size() const { return w1.size() + b1.size() + w2.size() + b2.size(); }
    /// Visits every scalar in the fixed order w1, b1, w2, b2.
    template <typename F>
    void for_each(F&& f) {
        for (auto* v : {&w1, &b1, &w2, &b2})
            for (double& x : *v) f(x);
    }
    bool operator==(const Parameters&) const = default;
};

class ToyEstimator {
public:
    /// Gaussian init scaled by 1/sqrt(fan-in); biases start at zero.
    ToyEstimator(const Architecture& arch, std::uint64_t seed);
    ToyEstimator(const Architecture& arch, Parameters params);

    const Architecture& architecture() const { return arch_; }
    const Parameters& parameters() const { return params_; }
    Parameters& mutable_parameters() { return params_; }

    /// Network input for a trace, per channel (normalised when enabled).
    std::vector<std::vector<double>> prepare_input(const Trace& trace) const;

    /// Raw prediction, one value per frame.
    std::vector<double> forward(const Trace& trace) const;
    Waveform forward(const VideoCube& clip) const;

    /// Parameter gradients of <upstream, forward(trace)>.
    Parameters backward(const Trace& trace, std::span<const double> upstream) const;

    bool operator==(const ToyEstimator&) const = default;

private:
    struct Activations;
    Activations run(const Trace& trace) const;

    Architecture arch_;
    Parameters params_;
};

struct TrainConfig {
    std::size_t clip_len = 270;
    std::size_t batch_size = 16;
    std::size_t steps = 2000;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    losses::LossSpec loss{};
    double negative_mix = 0.5;
    std::size_t eval_every = 100;

    void validate() const;
};

struct LabelledVideo {
    Trace trace;
    Waveform truth;
};

/// Positive videos are sampled as random clips; negatives are pulseless
/// traces (clip-length or longer) sampled the same way.
struct TrainingSet {
    std::vector<LabelledVideo> positives;
    std::vector<Trace> negatives;
};

/// Fixed clips scored to pick the best snapshot.
struct ValidationSet {
    std::vector<LabelledVideo> positives;  // each exactly one clip long
    std::vector<Trace> negatives;
};

struct TrainResult {
    ToyEstimator model;
    std::vector<double> loss_history;      // mean batch loss per step
    std::vector<double> validation_scores; // one per evaluation
    std::size_t best_step = 0;             // 0 = the initial parameters
    double best_score = 0.0;
};

/// Validation score: mean positive loss plus mean negative loss (the latter
/// only when a negative loss is configured and negative_mix > 0).
double validation_score(const ToyEstimator& model, const ValidationSet& val, const TrainConfig& cfg);

TrainResult train(ToyEstimator init, const TrainingSet& data, const TrainConfig& cfg,
                  const ValidationSet* val = nullptr);

struct InferenceOptions {
    std::size_t clip_len = 270;
    double overlap = 0.5;
    bool standardize_clips = true;
};

using ClipPredictor = std::function<std::vector<double>(const Trace& clip)>;

/// Hann-weighted overlap-add of per-clip predictions, renormalised by the
/// accumulated weight.
Waveform stitch(const Trace& trace, const ClipPredictor& predict, const InferenceOptions& opts = {});

Waveform infer_video(const ToyEstimator& model, const Trace& trace, const InferenceOptions& opts = {});
Waveform infer_video(const ToyEstimator& model, const VideoCube& video, const InferenceOptions& opts = {});

std::string to_json(const ToyEstimator& model);
ToyEstimator from_json(const std::string& text);

const char* to_string(Activation a);
const char* to_string(Padding p);

}  // namespace pulsegate::estimator
