#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pulsegate/error.hpp"
#include "pulsegate/estimator.hpp"
#include "pulsegate/signal.hpp"
#include "support.hpp"

using namespace pulsegate;
using namespace pulsegate::estimator;

namespace {

constexpr double kFps = 90.0;

Trace noisy_trace(std::size_t n, std::uint64_t seed, double level = 0.01) {
    std::vector<double> data(3 * n);
    const auto g = testsupport::gaussian(3 * n, seed, level);
    const double base[3] = {0.6, 0.5, 0.4};
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < n; ++i) data[c * n + i] = base[c] + g[c * n + i];
    return Trace(n, 3, kFps, std::move(data));
}

Trace pulse_trace(std::size_t n, double hz, std::uint64_t seed) {
    std::vector<double> data(3 * n);
    const auto g = testsupport::gaussian(3 * n, seed, 0.001);
    const double base[3] = {0.6, 0.5, 0.4}, sig[3] = {0.43, 1.0, 0.69};
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < n; ++i)
            data[c * n + i] = base[c] * (1.0 + 0.002 * sig[c] * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / kFps)) +
                              g[c * n + i];
    return Trace(n, 3, kFps, std::move(data));
}

Architecture small_arch() {
    Architecture a;
    a.filters = 4;
    a.kernel1 = 5;
    a.kernel2 = 7;
    a.dilation2 = 3;
    return a;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

TEST_CASE("zeroed second layer predicts zeros") {
    ToyEstimator m(Architecture{}, 3);
    auto& p = m.mutable_parameters();
    std::fill(p.w2.begin(), p.w2.end(), 0.0);
    std::fill(p.b2.begin(), p.b2.end(), 0.0);
    for (double v : m.forward(noisy_trace(270, 1))) CHECK(v == 0.0);
}

TEST_CASE("constant input predicts a constant") {
    ToyEstimator m(Architecture{}, 4);
    const Trace flat(300, 3, kFps, std::vector<double>(900, 0.5));
    const auto y = m.forward(flat);
    for (double v : y) CHECK(v == doctest::Approx(y[0]).epsilon(1e-12));
    auto raw = Architecture{};
    raw.normalize_input = false;
    const auto z = ToyEstimator(raw, 4).forward(flat);
    for (double v : z) CHECK(std::abs(v - z[0]) <= 1e-12);
}

TEST_CASE("output length equals input length") {
    ToyEstimator m(Architecture{}, 5);
    for (std::size_t n : {64UL, 270UL, 1000UL}) CHECK(m.forward(noisy_trace(n, n)).size() == n);
    auto a = Architecture{};
    a.kernel2 = 31;
    a.dilation2 = 9;
    CHECK(ToyEstimator(a, 5).forward(noisy_trace(64, 2)).size() == 64);
    CHECK(a.receptive_field() == 11 + 30 * 9);
}

TEST_CASE("backward matches central differences on 20 seeds") {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        CAPTURE(seed);
        auto arch = seed % 2 ? small_arch() : Architecture{};
        arch.padding = seed % 4 < 2 ? Padding::Edge : Padding::Zero;
        ToyEstimator m(arch, seed);
        auto& p = m.mutable_parameters();
        // non-zero biases so their gradients are exercised away from the init
        const auto jitter = testsupport::gaussian(p.b1.size() + 1, seed + 99, 0.1);
        for (std::size_t i = 0; i < p.b1.size(); ++i) p.b1[i] = jitter[i];
        p.b2[0] = jitter.back();

        const auto trace = noisy_trace(256, seed + 7);
        const auto up = testsupport::gaussian(256, seed + 31);
        const auto analytic = m.backward(trace, up);

        std::vector<double> flat_analytic;
        auto copy = analytic;
        copy.for_each([&](double& v) { flat_analytic.push_back(v); });
        std::vector<double> theta;
        p.for_each([&](double& v) { theta.push_back(v); });

        const auto objective = [&](const std::vector<double>& t) {
            ToyEstimator probe = m;
            std::size_t i = 0;
            probe.mutable_parameters().for_each([&](double& v) { v = t[i++]; });
            return dot(probe.forward(trace), up);
        };
        const double err = testsupport::gradient_error(objective, theta, flat_analytic);
        worst = std::max(worst, err);
        CHECK(err <= 1e-4);
    }
    MESSAGE("worst relative backward error: " << worst);
}

TEST_CASE("zero upstream gives zero gradients") {
    ToyEstimator m(Architecture{}, 6);
    auto g = m.backward(noisy_trace(128, 3), std::vector<double>(128, 0.0));
    g.for_each([](double& v) { CHECK(v == 0.0); });
}

TEST_CASE("preconditions") {
    ToyEstimator m(Architecture{}, 6);
    const Trace wrong_fps(64, 3, 30.0, std::vector<double>(192, 0.5));
    CHECK_THROWS_AS(m.forward(wrong_fps), Error);
    CHECK_THROWS_AS(m.forward(noisy_trace(8, 1)), Error);
    CHECK_THROWS_AS(m.backward(noisy_trace(64, 1), std::vector<double>(63, 0.0)), Error);
    auto a = Architecture{};
    a.kernel1 = 4;
    CHECK_THROWS_AS(a.validate(), Error);
}

namespace {

TrainingSet tiny_training_set() {
    TrainingSet set;
    for (std::uint64_t i = 0; i < 3; ++i) {
        const double hz = 1.0 + 0.25 * static_cast<double>(i);
        set.positives.push_back({pulse_trace(400, hz, i + 1), Waveform(testsupport::sine(400, kFps, hz), kFps)});
        set.negatives.push_back(noisy_trace(400, i + 11, 0.001));
    }
    return set;
}

TrainConfig tiny_config() {
    TrainConfig cfg;
    cfg.clip_len = 128;
    cfg.batch_size = 4;
    cfg.steps = 15;
    cfg.seed = 21;
    cfg.eval_every = 5;
    return cfg;
}

}  // namespace

TEST_CASE("training reduces the positive loss") {
    auto cfg = tiny_config();
    cfg.steps = 60;
    cfg.negative_mix = 0.0;
    const auto set = tiny_training_set();
    const auto r = train(ToyEstimator(small_arch(), 2), set, cfg);
    REQUIRE(r.loss_history.size() == 60);
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
        first += r.loss_history[i];
        last += r.loss_history[50 + i];
    }
    CHECK(last < first);
}

TEST_CASE("negative_mix 0 is bit-identical with and without negatives") {
    auto cfg = tiny_config();
    cfg.negative_mix = 0.0;
    cfg.loss.negative = losses::NegativeLoss::SpectralFlatness;
    auto with = tiny_training_set();
    auto without = with;
    without.negatives.clear();
    const auto a = train(ToyEstimator(small_arch(), 2), with, cfg);
    const auto b = train(ToyEstimator(small_arch(), 2), without, cfg);
    CHECK(a.model == b.model);
    CHECK(a.loss_history == b.loss_history);
}

TEST_CASE("training is deterministic and keeps the best validation snapshot") {
    auto cfg = tiny_config();
    cfg.loss.negative = losses::NegativeLoss::Std;
    const auto set = tiny_training_set();
    ValidationSet val;
    val.positives.push_back({set.positives[0].trace.slice(0, 128),
                             Waveform(std::vector<double>(set.positives[0].truth.values().begin(),
                                                          set.positives[0].truth.values().begin() + 128),
                                      kFps)});
    val.negatives.push_back(set.negatives[0].slice(0, 128));
    const auto a = train(ToyEstimator(small_arch(), 2), set, cfg, &val);
    const auto b = train(ToyEstimator(small_arch(), 2), set, cfg, &val);
    CHECK(a.model == b.model);
    CHECK(a.validation_scores.size() == 4);  // initial + steps 5, 10, 15
    const auto best = *std::min_element(a.validation_scores.begin(), a.validation_scores.end());
    CHECK(a.best_score == best);
    CHECK(validation_score(a.model, val, cfg) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("divergent learning rates are reported as numerical failures") {
    auto cfg = tiny_config();
    cfg.learning_rate = 1e30;
    cfg.negative_mix = 0.0;
    cfg.loss.positive = losses::PositiveLoss::Mse;
    try {
        train(ToyEstimator(small_arch(), 2), tiny_training_set(), cfg);
        FAIL("expected divergence");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NumericalFailure);
    }
}

TEST_CASE("model JSON round trip is exact") {
    ToyEstimator m(Architecture{}, 77);
    const auto back = from_json(to_json(m));
    CHECK(back == m);
    CHECK_THROWS_AS(from_json("{\"format\": 1}"), Error);
}

TEST_CASE("stitch: single clip, overlap and tone reconstruction") {
    const std::size_t n = 1000;
    // channel 0 carries the frame index so the predictor knows where each clip sits
    std::vector<double> data(3 * n, 1.0);
    for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<double>(i);
    const Trace trace(n, 3, kFps, data);
    const auto tone = testsupport::sine(n, kFps, 1.2);
    const ClipPredictor predict = [&](const Trace& clip) {
        std::vector<double> out(clip.frames());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = tone[static_cast<std::size_t>(clip.at(i, 0))];
        return out;
    };
    for (double overlap : {0.0, 0.5, 0.75}) {
        CAPTURE(overlap);
        InferenceOptions o;
        o.overlap = overlap;
        o.standardize_clips = false;
        const auto w = stitch(trace, predict, o);
        REQUIRE(w.size() == n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(w[i] - tone[i]) <= 1e-12);
    }
    InferenceOptions single;
    single.clip_len = n;
    const auto one = stitch(trace, predict, single);
    auto expect = Waveform(tone, kFps);
    const auto s = dsp::standardize(expect).wave;
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(one[i] - s[i]) <= 1e-12);
    InferenceOptions too_long;
    too_long.clip_len = n + 1;
    CHECK_THROWS_AS(stitch(trace, predict, too_long), Error);
}

TEST_CASE("edge padding keeps constant video free of in-band energy; zero padding does not") {
    auto edge = Architecture{};
    edge.kernel2 = 31;
    edge.dilation2 = 9;
    edge.normalize_input = false;
    auto zero = edge;
    zero.padding = Padding::Zero;
    const Trace flat(900, 3, kFps, std::vector<double>(2700, 0.5));
    const auto in_band_fraction = [](std::span<const double> y) {
        const auto p = dsp::power_spectrum(y, y.size());
        const auto bins = dsp::band_bins(kFps, y.size(), dsp::kPulseBand);
        double in = 0.0, total = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            total += p[k];
            if (k >= bins.first && k <= bins.last) in += p[k];
        }
        double energy = 0.0;
        for (double v : y) energy += v * v;
        return energy == 0.0 ? 0.0 : in / (static_cast<double>(y.size()) * energy);
    };
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ToyEstimator me(edge, seed), mz(zero, seed);
        me.mutable_parameters().b1[0] = 0.3;
        mz.mutable_parameters().b1[0] = 0.3;
        CHECK(in_band_fraction(me.forward(flat)) < 1e-6);
        CHECK(in_band_fraction(mz.forward(flat)) > 1e-6);
    }
}
