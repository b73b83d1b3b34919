#include "pulsegate/estimator.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

#include "pulsegate/error.hpp"
#include "pulsegate/kernels.hpp"
#include "pulsegate/signal.hpp"

namespace pulsegate::estimator {

namespace {

using Rows = std::vector<std::vector<double>>;

std::vector<double> pad(std::span<const double> x, std::size_t p, Padding mode) {
    std::vector<double> out(x.size() + 2 * p, 0.0);
    std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(p));
    if (mode == Padding::Edge) {
        std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(p), x.front());
        std::fill(out.end() - static_cast<std::ptrdiff_t>(p), out.end(), x.back());
    }
    return out;
}

// Adjoint of pad(): folds the padded gradient back onto the source samples.
void unpad_add(std::span<const double> padded, std::size_t p, Padding mode, std::span<double> out) {
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) out[i] += padded[p + i];
    if (mode == Padding::Edge) {
        for (std::size_t q = 0; q < p; ++q) {
            out[0] += padded[q];
            out[n - 1] += padded[p + n + q];
        }
    }
}

template <typename F>
void zip_params(Parameters& a, const Parameters& b, F&& f) {
    auto one = [&](std::vector<double>& x, const std::vector<double>& y) {
        for (std::size_t i = 0; i < x.size(); ++i) f(x[i], y[i]);
    };
    one(a.w1, b.w1);
    one(a.b1, b.b1);
    one(a.w2, b.w2);
    one(a.b2, b.b2);
}

Parameters zeros_like(const Architecture& a) {
    return Parameters{std::vector<double>(a.filters * a.in_channels * a.kernel1, 0.0),
                      std::vector<double>(a.filters, 0.0), std::vector<double>(a.filters * a.kernel2, 0.0),
                      std::vector<double>(1, 0.0)};
}

bool all_finite(const Parameters& p) {
    for (const auto* v : {&p.w1, &p.b1, &p.w2, &p.b2})
        for (double x : *v)
            if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

const char* to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "identity"; }
const char* to_string(Padding p) { return p == Padding::Edge ? "edge" : "zero"; }

void Architecture::validate() const {
    require(in_channels >= 1 && filters >= 1, ErrorKind::Config, "estimator needs channels and filters");
    require(kernel1 % 2 == 1 && kernel2 % 2 == 1, ErrorKind::Config, "kernel lengths must be odd");
    require(dilation2 >= 1, ErrorKind::Config, "dilation must be at least 1");
    require(fps > 0.0 && input_gain > 0.0 && init_scale >= 0.0, ErrorKind::Config,
            "fps and input gain must be positive");
}

std::size_t Architecture::receptive_field() const { return kernel1 + dilation2 * (kernel2 - 1); }

ToyEstimator::ToyEstimator(const Architecture& arch, std::uint64_t seed) : arch_(arch), params_(zeros_like(arch)) {
    arch_.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double s1 = arch_.init_scale / std::sqrt(static_cast<double>(arch_.in_channels * arch_.kernel1));
    const double s2 = arch_.init_scale / std::sqrt(static_cast<double>(arch_.filters * arch_.kernel2));
    for (double& w : params_.w1) w = s1 * normal(rng);
    for (double& w : params_.w2) w = s2 * normal(rng);
}

ToyEstimator::ToyEstimator(const Architecture& arch, Parameters params) : arch_(arch), params_(std::move(params)) {
    arch_.validate();
    const auto ref = zeros_like(arch_);
    require(params_.w1.size() == ref.w1.size() && params_.b1.size() == ref.b1.size() &&
                params_.w2.size() == ref.w2.size() && params_.b2.size() == ref.b2.size(),
            ErrorKind::InvalidArgument, "parameter shapes do not match the architecture");
    require(all_finite(params_), ErrorKind::InvalidArgument, "non-finite estimator parameter");
}

Rows ToyEstimator::prepare_input(const Trace& trace) const {
    require(trace.channels() == arch_.in_channels, ErrorKind::InvalidInput, "trace channel count mismatch");
    require(std::abs(trace.fps() - arch_.fps) <= 1e-9 * arch_.fps, ErrorKind::InvalidInput,
            "clip frame rate differs from the model frame rate");
    require(trace.frames() >= std::max(arch_.kernel1, arch_.kernel2), ErrorKind::InvalidInput,
            "clip shorter than a kernel");
    Rows x(arch_.in_channels);
    for (std::size_t c = 0; c < arch_.in_channels; ++c) {
        const auto ch = trace.channel(c);
        x[c].assign(ch.begin(), ch.end());
        if (!arch_.normalize_input) continue;
        const double m = dsp::mean(ch);
        require(m > 0.0, ErrorKind::InvalidInput, "input normalisation needs positive channel means");
        for (double& v : x[c]) v = (v / m - 1.0) * arch_.input_gain;
    }
    return x;
}

struct ToyEstimator::Activations {
    Rows xpad;   // [channel][T + 2 p1]
    Rows h1;     // [filter][T], post-activation
    Rows h1pad;  // [filter][T + 2 p2]
    std::vector<double> y;
};

ToyEstimator::Activations ToyEstimator::run(const Trace& trace) const {
    const auto x = prepare_input(trace);
    const std::size_t n = trace.frames();
    const std::size_t p1 = arch_.kernel1 / 2;
    const std::size_t d = arch_.dilation2;
    const std::size_t p2 = d * (arch_.kernel2 / 2);

    Activations a;
    a.xpad.reserve(x.size());
    for (const auto& ch : x) a.xpad.push_back(pad(ch, p1, arch_.padding));

    a.h1.assign(arch_.filters, std::vector<double>(n));
    a.h1pad.resize(arch_.filters);
    for (std::size_t f = 0; f < arch_.filters; ++f) {
        auto& z = a.h1[f];
        std::fill(z.begin(), z.end(), params_.b1[f]);
        for (std::size_t c = 0; c < arch_.in_channels; ++c) {
            const double* w = &params_.w1[(f * arch_.in_channels + c) * arch_.kernel1];
            for (std::size_t j = 0; j < arch_.kernel1; ++j)
                kernels::axpy(w[j], std::span<const double>(a.xpad[c]).subspan(j, n), z);
        }
        if (arch_.activation == Activation::Tanh)
            for (double& v : z) v = std::tanh(v);
        a.h1pad[f] = pad(z, p2, arch_.padding);
    }

    a.y.assign(n, params_.b2[0]);
    for (std::size_t f = 0; f < arch_.filters; ++f) {
        const double* w = &params_.w2[f * arch_.kernel2];
        for (std::size_t j = 0; j < arch_.kernel2; ++j)
            kernels::axpy(w[j], std::span<const double>(a.h1pad[f]).subspan(j * d, n), a.y);
    }
    return a;
}

std::vector<double> ToyEstimator::forward(const Trace& trace) const { return run(trace).y; }

Waveform ToyEstimator::forward(const VideoCube& clip) const {
    return Waveform(forward(dsp::spatial_mean_trace(clip)), clip.fps());
}

Parameters ToyEstimator::backward(const Trace& trace, std::span<const double> upstream) const {
    require(upstream.size() == trace.frames(), ErrorKind::InvalidArgument, "upstream gradient length mismatch");
    const auto a = run(trace);
    const std::size_t n = trace.frames();
    const std::size_t d = arch_.dilation2;
    const std::size_t p2 = d * (arch_.kernel2 / 2);

    Parameters g = zeros_like(arch_);
    g.b2[0] = kernels::sum(upstream);

    std::vector<double> dpad(n + 2 * p2), dz(n);
    for (std::size_t f = 0; f < arch_.filters; ++f) {
        std::fill(dpad.begin(), dpad.end(), 0.0);
        const double* w = &params_.w2[f * arch_.kernel2];
        for (std::size_t j = 0; j < arch_.kernel2; ++j) {
            const auto src = std::span<const double>(a.h1pad[f]).subspan(j * d, n);
            g.w2[f * arch_.kernel2 + j] = kernels::dot(upstream, src);
            kernels::axpy(w[j], upstream, std::span<double>(dpad).subspan(j * d, n));
        }
        std::fill(dz.begin(), dz.end(), 0.0);
        unpad_add(dpad, p2, arch_.padding, dz);
        if (arch_.activation == Activation::Tanh)
            for (std::size_t t = 0; t < n; ++t) dz[t] *= 1.0 - a.h1[f][t] * a.h1[f][t];
        g.b1[f] = kernels::sum(dz);
        for (std::size_t c = 0; c < arch_.in_channels; ++c)
            for (std::size_t j = 0; j < arch_.kernel1; ++j)
                g.w1[(f * arch_.in_channels + c) * arch_.kernel1 + j] =
                    kernels::dot(dz, std::span<const double>(a.xpad[c]).subspan(j, n));
    }
    return g;
}

void TrainConfig::validate() const {
    require(clip_len >= 2 && batch_size >= 1, ErrorKind::Config, "clip length and batch size must be positive");
    require(learning_rate > 0.0 && momentum >= 0.0 && momentum < 1.0, ErrorKind::Config,
            "learning rate must be positive and momentum in [0, 1)");
    require(negative_mix >= 0.0 && negative_mix <= 1.0, ErrorKind::Config, "negative_mix must lie in [0, 1]");
    require(eval_every >= 1, ErrorKind::Config, "eval_every must be positive");
}

namespace {

losses::LossValue sample_loss(const std::vector<double>& pred, const Waveform* truth, std::size_t begin,
                              double fps, const losses::LossSpec& spec) {
    if (truth != nullptr) {
        const auto target = truth->samples().subspan(begin, pred.size());
        return losses::combined_loss(pred, target, true, fps, spec);
    }
    try {
        return losses::combined_loss(pred, std::nullopt, false, fps, spec);
    } catch (const Error& e) {
        // A perfectly flat prediction has no spectrum to flatten; it is
        // already the desired pulseless output.
        if (e.kind() != ErrorKind::DegenerateInput) throw;
        return losses::LossValue{0.0, std::vector<double>(pred.size(), 0.0)};
    }
}

bool negatives_scored(const TrainConfig& cfg) {
    return cfg.negative_mix > 0.0 && cfg.loss.negative != losses::NegativeLoss::None;
}

}  // namespace

double validation_score(const ToyEstimator& model, const ValidationSet& val, const TrainConfig& cfg) {
    double score = 0.0;
    if (!val.positives.empty()) {
        double s = 0.0;
        for (const auto& v : val.positives) {
            const auto pred = model.forward(v.trace);
            try {
                s += sample_loss(pred, &v.truth, 0, v.trace.fps(), cfg.loss).value;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::DegenerateCorrelation) throw;
                s += 1.0;  // a flat prediction is uncorrelated
            }
        }
        score += s / static_cast<double>(val.positives.size());
    }
    if (negatives_scored(cfg) && !val.negatives.empty()) {
        double s = 0.0;
        for (const auto& t : val.negatives) s += sample_loss(model.forward(t), nullptr, 0, t.fps(), cfg.loss).value;
        score += s / static_cast<double>(val.negatives.size());
    }
    return score;
}

TrainResult train(ToyEstimator init, const TrainingSet& data, const TrainConfig& cfg, const ValidationSet* val) {
    cfg.validate();
    const auto& arch = init.architecture();
    cfg.loss.validate(cfg.clip_len, arch.fps);
    require(cfg.negative_mix >= 1.0 || !data.positives.empty(), ErrorKind::InvalidTrainingSet,
            "training needs positive videos");
    require(cfg.negative_mix <= 0.0 || !data.negatives.empty(), ErrorKind::InvalidTrainingSet,
            "negative_mix > 0 needs negative samples");
    for (const auto& v : data.positives) {
        require(v.trace.frames() >= cfg.clip_len && v.truth.size() == v.trace.frames(), ErrorKind::InvalidTrainingSet,
                "positive video shorter than a clip or truth length mismatch");
    }
    for (const auto& t : data.negatives)
        require(t.frames() >= cfg.clip_len, ErrorKind::InvalidTrainingSet, "negative sample shorter than a clip");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    TrainResult result{init, {}, {}, 0, std::numeric_limits<double>::infinity()};
    ToyEstimator model = std::move(init);
    Parameters velocity = zeros_like(arch);
    if (val != nullptr) {
        result.best_score = validation_score(model, *val, cfg);
        result.validation_scores.push_back(result.best_score);
    }
    result.loss_history.reserve(cfg.steps);

    const double inv_batch = 1.0 / static_cast<double>(cfg.batch_size);
    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        Parameters grad = zeros_like(arch);
        double loss_sum = 0.0;
        for (std::size_t b = 0; b < cfg.batch_size; ++b) {
            // Always draw, so that negative_mix = 0 consumes the same stream.
            const bool positive = !(unit(rng) < cfg.negative_mix);
            const Trace* source = nullptr;
            const Waveform* truth = nullptr;
            if (positive) {
                std::uniform_int_distribution<std::size_t> pick(0, data.positives.size() - 1);
                const auto& v = data.positives[pick(rng)];
                source = &v.trace;
                truth = &v.truth;
            } else {
                std::uniform_int_distribution<std::size_t> pick(0, data.negatives.size() - 1);
                source = &data.negatives[pick(rng)];
            }
            std::uniform_int_distribution<std::size_t> offset(0, source->frames() - cfg.clip_len);
            const std::size_t begin = offset(rng);
            const Trace clip = source->slice(begin, cfg.clip_len);

            const auto pred = model.forward(clip);
            auto lv = sample_loss(pred, truth, begin, arch.fps, cfg.loss);
            if (!std::isfinite(lv.value))
                fail(ErrorKind::NumericalFailure, "training diverged: non-finite loss at step " + std::to_string(step));
            loss_sum += lv.value;
            for (double& g : lv.gradient) g *= inv_batch;
            const auto pg = model.backward(clip, lv.gradient);
            zip_params(grad, pg, [](double& acc, double v) { acc += v; });
        }
        if (!all_finite(grad))
            fail(ErrorKind::NumericalFailure, "training diverged: non-finite gradient at step " + std::to_string(step));

        zip_params(velocity, grad, [&](double& v, double g) { v = cfg.momentum * v + g; });
        zip_params(model.mutable_parameters(), velocity, [&](double& p, double v) { p -= cfg.learning_rate * v; });
        if (!all_finite(model.parameters()))
            fail(ErrorKind::NumericalFailure, "training diverged: non-finite parameters at step " + std::to_string(step));
        result.loss_history.push_back(loss_sum * inv_batch);

        if (val != nullptr && (step % cfg.eval_every == 0 || step == cfg.steps)) {
            const double s = validation_score(model, *val, cfg);
            result.validation_scores.push_back(s);
            if (s < result.best_score) {
                result.best_score = s;
                result.best_step = step;
                result.model = model;
            }
        }
    }
    if (val == nullptr) {
        result.model = model;
        result.best_step = cfg.steps;
        result.best_score = result.loss_history.empty() ? 0.0 : result.loss_history.back();
    }
    return result;
}

Waveform stitch(const Trace& trace, const ClipPredictor& predict, const InferenceOptions& opts) {
    require(opts.clip_len >= 2, ErrorKind::InvalidArgument, "clip length must be at least two");
    require(opts.overlap >= 0.0 && opts.overlap < 1.0, ErrorKind::InvalidArgument, "overlap must lie in [0, 1)");
    const std::size_t n = trace.frames();
    require(n >= opts.clip_len, ErrorKind::InsufficientData, "video shorter than one clip");
    const std::size_t clip = opts.clip_len;
    const auto hop = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(static_cast<double>(clip) * (1.0 - opts.overlap))));

    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + clip <= n; s += hop) starts.push_back(s);
    if (starts.back() + clip < n) starts.push_back(n - clip);

    const auto taper = dsp::hann_positive(clip);
    std::vector<double> acc(n, 0.0), weight(n, 0.0);
    for (std::size_t s : starts) {
        auto p = predict(trace.slice(s, clip));
        require(p.size() == clip, ErrorKind::InvalidArgument, "clip predictor returned the wrong length");
        if (opts.standardize_clips) dsp::standardize_in_place(p);
        for (std::size_t i = 0; i < clip; ++i) {
            acc[s + i] += taper[i] * p[i];
            weight[s + i] += taper[i];
        }
    }
    for (std::size_t i = 0; i < n; ++i) acc[i] /= weight[i];
    return Waveform(std::move(acc), trace.fps());
}

Waveform infer_video(const ToyEstimator& model, const Trace& trace, const InferenceOptions& opts) {
    return stitch(trace, [&](const Trace& clip) { return model.forward(clip); }, opts);
}

Waveform infer_video(const ToyEstimator& model, const VideoCube& video, const InferenceOptions& opts) {
    return infer_video(model, dsp::spatial_mean_trace(video), opts);
}

std::string to_json(const ToyEstimator& model) {
    const auto& a = model.architecture();
    const auto& p = model.parameters();
    nlohmann::ordered_json j;
    j["format"] = "pulsegate-toy-estimator";
    j["version"] = 1;
    j["architecture"] = {{"in_channels", a.in_channels}, {"filters", a.filters},
                         {"kernel1", a.kernel1},         {"kernel2", a.kernel2},
                         {"dilation2", a.dilation2},     {"activation", to_string(a.activation)},
                         {"padding", to_string(a.padding)}, {"normalize_input", a.normalize_input},
                         {"input_gain", a.input_gain},   {"fps", a.fps},
                         {"init_scale", a.init_scale}};
    j["parameters"] = {{"w1", p.w1}, {"b1", p.b1}, {"w2", p.w2}, {"b2", p.b2}};
    return j.dump(1);
}

ToyEstimator from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        const auto& ja = j.at("architecture");
        Architecture a;
        a.in_channels = ja.at("in_channels").get<std::size_t>();
        a.filters = ja.at("filters").get<std::size_t>();
        a.kernel1 = ja.at("kernel1").get<std::size_t>();
        a.kernel2 = ja.at("kernel2").get<std::size_t>();
        a.dilation2 = ja.value("dilation2", std::size_t{1});
        const auto act = ja.value("activation", std::string("tanh"));
        require(act == "tanh" || act == "identity", ErrorKind::Config, "unknown activation");
        a.activation = act == "tanh" ? Activation::Tanh : Activation::Identity;
        const auto padding = ja.value("padding", std::string("edge"));
        require(padding == "edge" || padding == "zero", ErrorKind::Config, "unknown padding mode");
        a.padding = padding == "edge" ? Padding::Edge : Padding::Zero;
        a.normalize_input = ja.value("normalize_input", true);
        a.input_gain = ja.value("input_gain", 100.0);
        a.fps = ja.value("fps", 90.0);
        a.init_scale = ja.value("init_scale", 1.0);
        const auto& jp = j.at("parameters");
        Parameters p{jp.at("w1").get<std::vector<double>>(), jp.at("b1").get<std::vector<double>>(),
                     jp.at("w2").get<std::vector<double>>(), jp.at("b2").get<std::vector<double>>()};
        return ToyEstimator(a, std::move(p));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Config, std::string("malformed model JSON: ") + e.what());
    }
}

}  // namespace pulsegate::estimator
