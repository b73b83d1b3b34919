#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "pulsegate/evaluation.hpp"
#include "pulsegate/signal.hpp"
#include "pulsegate/synth.hpp"

using namespace pulsegate;
using namespace pulsegate::synth;

namespace {

SceneConfig small_scene(double seconds, double bpm) {
    SceneConfig s;
    s.duration_s = seconds;
    s.height = 8;
    s.width = 8;
    s.hr_trajectory = {{0.0, bpm}};
    s.seed = 11;
    return s;
}

}  // namespace

TEST_CASE("constant rate scene: truth peaks at that rate") {
    const auto s = generate_positive(small_scene(10.0, 90.0));
    CHECK(s.video.frames() == 900);
    CHECK(s.truth.size() == 900);
    CHECK(dsp::psd_normalized(s.truth).peak_bpm() == 90.0);
}

TEST_CASE("zero amplitude: flat truth and static cube") {
    auto cfg = small_scene(3.0, 70.0);
    cfg.pulse_amplitude = 0.0;
    const auto s = generate_positive(cfg);
    CHECK(dsp::psd_normalized(s.truth).degenerate);
    for (std::size_t t = 1; t < s.video.frames(); ++t) CHECK(std::ranges::equal(s.video.frame(t), s.video.frame(0)));
}

TEST_CASE("rate ramp is tracked by windowed estimates") {
    auto cfg = small_scene(60.0, 60.0);
    cfg.height = cfg.width = 2;
    cfg.hr_trajectory = {{0.0, 60.0}, {60.0, 120.0}};
    const auto s = generate_positive(cfg);
    evalx::RateOptions opts;
    opts.stride_frames = 90;
    const auto rates = evalx::pulse_rate(s.truth, opts);
    for (std::size_t i = 0; i < rates.size(); ++i) {
        // The instantaneous rate at a window centre equals the window's mean rate for a linear ramp.
        const double expect = 60.0 + rates.times[i];
        CHECK(std::abs(*rates.bpm[i] - expect) <= 2.0);
    }
}

TEST_CASE("green channel follows the truth without sensor noise") {
    const auto s = generate_positive(small_scene(10.0, 72.0));
    const auto trace = dsp::spatial_mean_trace(s.video);
    CHECK(dsp::pearson(trace.channel(1), s.truth.samples()) > 0.95);
}

TEST_CASE("generation is deterministic") {
    auto cfg = small_scene(2.0, 80.0);
    cfg.sensor_noise_sigma = 5.0;
    CHECK(generate_positive(cfg).video == generate_positive(cfg).video);
    auto other = cfg;
    other.seed = 12;
    CHECK_FALSE(generate_positive(other).video == generate_positive(cfg).video);
}

TEST_CASE("SHUFFLE permutes frames exactly") {
    auto cfg = small_scene(2.0, 80.0);
    cfg.sensor_noise_sigma = 4.0;
    const auto v = generate_positive(cfg).video;
    NegativeTransform t;
    t.kind = NegativeKind::Shuffle;
    t.seed = 5;
    const auto n = make_negative(v, t);
    const auto order = shuffle_order(v.frames(), 5);
    std::map<std::vector<float>, int> before, after;
    for (std::size_t f = 0; f < v.frames(); ++f) {
        ++before[std::vector<float>(v.frame(f).begin(), v.frame(f).end())];
        ++after[std::vector<float>(n.frame(f).begin(), n.frame(f).end())];
        CHECK(std::ranges::equal(n.frame(f), v.frame(order[f])));
    }
    CHECK(before == after);

    const auto ta = dsp::spatial_mean_trace(v), tb = dsp::spatial_mean_trace(n);
    for (std::size_t c = 0; c < 3; ++c) {
        std::vector<double> a(ta.channel(c).begin(), ta.channel(c).end()), b(tb.channel(c).begin(), tb.channel(c).end());
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
    }
}

TEST_CASE("NORMAL residuals have standard deviation 3 in 8-bit units") {
    const auto v = generate_positive(small_scene(2.0, 80.0)).video;
    NegativeTransform t;
    t.kind = NegativeKind::Normal;
    t.seed = 9;
    const auto n = make_negative(v, t);
    const auto base = v.frame(replicated_frame_index(v.frames(), 9));
    double s = 0.0, s2 = 0.0;
    std::size_t count = 0;
    for (std::size_t f = 0; f < n.frames(); ++f) {
        const auto fr = n.frame(f);
        for (std::size_t i = 0; i < fr.size(); ++i) {
            const double r = 255.0 * (static_cast<double>(fr[i]) - static_cast<double>(base[i]));
            s += r;
            s2 += r * r;
            ++count;
        }
    }
    REQUIRE(count >= 10000);
    const double m = s / static_cast<double>(count);
    CHECK(std::sqrt(s2 / static_cast<double>(count) - m * m) == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("UNIFORM residuals stay inside [-3, 3] and centre on zero") {
    const auto v = generate_positive(small_scene(2.0, 80.0)).video;
    NegativeTransform t;
    t.kind = NegativeKind::Uniform;
    t.seed = 10;
    const auto n = make_negative(v, t);
    const auto base = v.frame(replicated_frame_index(v.frames(), 10));
    double s = 0.0;
    std::size_t count = 0;
    for (std::size_t f = 0; f < n.frames(); ++f) {
        const auto fr = n.frame(f);
        for (std::size_t i = 0; i < fr.size(); ++i) {
            const double r = 255.0 * (static_cast<double>(fr[i]) - static_cast<double>(base[i]));
            CHECK(r >= -3.0 - 1e-4);
            CHECK(r <= 3.0 + 1e-4);
            s += r;
            ++count;
        }
    }
    CHECK(std::abs(s / static_cast<double>(count)) <= 0.05);
}

TEST_CASE("negatives keep shape and fps; invalid transforms are rejected") {
    const auto v = generate_positive(small_scene(1.0, 80.0)).video;
    for (auto kind : {NegativeKind::Normal, NegativeKind::Uniform, NegativeKind::Shuffle}) {
        NegativeTransform t;
        t.kind = kind;
        const auto n = make_negative(v, t);
        CHECK(n.frames() == v.frames());
        CHECK(n.height() == v.height());
        CHECK(n.fps() == v.fps());
    }
    NegativeTransform bad;
    bad.normal_sigma = 0.0;
    CHECK_THROWS(make_negative(v, bad));
    bad = NegativeTransform{};
    bad.uniform_low = 3.0;
    CHECK_THROWS(make_negative(v, bad));
    CHECK(parse_negative_kind("SHUFFLE") == NegativeKind::Shuffle);
}

TEST_CASE("scene validation") {
    auto cfg = small_scene(1.0, 80.0);
    cfg.hr_trajectory = {{0.0, 250.0}};
    CHECK_THROWS(cfg.validate());
    cfg = small_scene(0.01, 80.0);
    CHECK_THROWS(cfg.validate());
}
