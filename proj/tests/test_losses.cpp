#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pulsegate/error.hpp"
#include "pulsegate/losses.hpp"
#include "support.hpp"

using namespace pulsegate;
using namespace pulsegate::losses;
using testsupport::gradient_error;

namespace {

constexpr double kFps = 90.0;
constexpr std::size_t kLen = 256;
constexpr double kGradTol = 1e-4;

std::vector<double> random_signal(std::uint64_t seed, std::size_t n = kLen) {
    auto x = testsupport::gaussian(n, seed);
    testsupport::standardize(x);
    return x;
}

// An impulse has a flat spectrum; with nfft = n every in-band bin is equal.
std::vector<double> impulse(std::size_t n) {
    std::vector<double> x(n, 0.0);
    x[n / 3] = 1.0;
    return x;
}

}  // namespace

TEST_CASE("neg-Pearson values") {
    const auto t = random_signal(1);
    auto neg = t;
    for (double& v : neg) v = -v;
    CHECK(loss_neg_pearson(t, t).value == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(loss_neg_pearson(neg, t).value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(loss_neg_pearson(std::vector<double>(8, 1.0), random_signal(2, 8)), Error);
    try {
        loss_neg_pearson(random_signal(2, 8), std::vector<double>(8, 1.0));
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateCorrelation);
    }
}

TEST_CASE("STD and MSE-flatline values") {
    CHECK(loss_std(std::vector<double>(5, 2.0)).value == 0.0);
    const auto z = loss_std(std::vector<double>(5, 2.0));
    for (double g : z.gradient) CHECK(g == 0.0);
    CHECK(loss_std(std::vector<double>{-1.0, 1.0}).value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(loss_mse_flatline(std::vector<double>(7, 0.0)).value == 0.0);
    const auto m = loss_mse_flatline(std::vector<double>{3.0});
    CHECK(m.value == 9.0);
    CHECK(m.gradient[0] == 6.0);
}

TEST_CASE("entropy and flatness of given distributions") {
    std::vector<double> flat(200, 1.0 / 200.0);
    CHECK(std::abs(entropy_loss_of(flat)) <= 1e-12);
    CHECK(std::abs(flatness_loss_of(flat)) <= 1e-12);
    std::vector<double> one(200, 0.0);
    one[17] = 1.0;
    CHECK(entropy_loss_of(one) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(flatness_loss_of(one) >= 1.0 - 1e-6);
    std::vector<double> two(200, 0.0);
    two[3] = two[150] = 0.5;
    CHECK(entropy_loss_of(two) == doctest::Approx(1.0 - std::log(2.0) / std::log(200.0)).epsilon(1e-12));
    CHECK(entropy_loss_of(two) == doctest::Approx(0.8692).epsilon(1e-4));
}

TEST_CASE("spectral losses on signals with known spectra") {
    SpectralOptions o;
    o.nfft = 900;
    const auto imp = impulse(900);
    CHECK(std::abs(loss_spectral_entropy(imp, kFps, o).value) <= 1e-9);
    CHECK(std::abs(loss_spectral_flatness(imp, kFps, o).value) <= 1e-9);

    // 1.5 Hz over 10 s is exactly bin 15 of a 900-point transform.
    const auto tone = testsupport::sine(900, kFps, 1.5);
    CHECK(loss_spectral_entropy(tone, kFps, o).value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(loss_spectral_flatness(tone, kFps, o).value >= 1.0 - 1e-6);

    CHECK_THROWS_AS(loss_spectral_entropy(std::vector<double>(900, 4.0), kFps, o), Error);
    try {
        loss_spectral_flatness(std::vector<double>(900, 4.0), kFps, o);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateInput);
    }
}

TEST_CASE("every loss gradient matches central differences on 20 seeds") {
    SpectralOptions o;  // nfft 5400, band 40..240
    SpectralOptions mag;
    mag.scale = dsp::SpectrumScale::Magnitude;
    mag.nfft = 512;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        CAPTURE(seed);
        const auto x = random_signal(seed);
        const auto t = random_signal(seed + 1000);
        const auto check = [&](const char* name, const LossValue& lv, const std::function<double(const std::vector<double>&)>& f) {
            CAPTURE(name);
            const double err = gradient_error(f, x, lv.gradient);
            worst = std::max(worst, err);
            CHECK(err <= kGradTol);
        };
        check("neg_pearson", loss_neg_pearson(x, t), [&](const auto& v) { return loss_neg_pearson(v, t).value; });
        check("mse", loss_mse(x, t), [&](const auto& v) { return loss_mse(v, t).value; });
        check("std", loss_std(x), [](const auto& v) { return loss_std(v).value; });
        check("entropy", loss_spectral_entropy(x, kFps, o),
              [&](const auto& v) { return loss_spectral_entropy(v, kFps, o).value; });
        check("flatness", loss_spectral_flatness(x, kFps, o),
              [&](const auto& v) { return loss_spectral_flatness(v, kFps, o).value; });
        check("entropy_magnitude", loss_spectral_entropy(x, kFps, mag),
              [&](const auto& v) { return loss_spectral_entropy(v, kFps, mag).value; });
        check("flatness_magnitude", loss_spectral_flatness(x, kFps, mag),
              [&](const auto& v) { return loss_spectral_flatness(v, kFps, mag).value; });
        check("mse_flatline", loss_mse_flatline(x), [](const auto& v) { return loss_mse_flatline(v).value; });
    }
    MESSAGE("worst relative gradient error: " << worst);
}

TEST_CASE("tighter gradient bounds on the closed-form losses") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto x = random_signal(seed), t = random_signal(seed + 50);
        CHECK(gradient_error([&](const auto& v) { return loss_neg_pearson(v, t).value; }, x,
                             loss_neg_pearson(x, t).gradient) <= 1e-6);
        CHECK(gradient_error([](const auto& v) { return loss_std(v).value; }, x, loss_std(x).gradient) <= 1e-6);
        CHECK(gradient_error([](const auto& v) { return loss_mse_flatline(v).value; }, x,
                             loss_mse_flatline(x).gradient) <= 1e-8);
    }
}

TEST_CASE("neg-Pearson gradient has zero mean") {
    const auto x = random_signal(3), t = random_signal(4);
    double s = 0.0;
    for (double g : loss_neg_pearson(x, t).gradient) s += g;
    CHECK(std::abs(s) <= 1e-12);
}

TEST_CASE("spectral losses are bounded and scale invariant") {
    SpectralOptions o;
    o.nfft = 1024;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto x = random_signal(seed);
        auto y = x;
        for (double& v : y) v *= 123.4;
        const double e = loss_spectral_entropy(x, kFps, o).value, f = loss_spectral_flatness(x, kFps, o).value;
        CHECK(e >= 0.0);
        CHECK(e <= 1.0);
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        CHECK(std::abs(loss_spectral_entropy(y, kFps, o).value - e) <= 1e-9);
        CHECK(std::abs(loss_spectral_flatness(y, kFps, o).value - f) <= 1e-9);
    }
}

TEST_CASE("one small step from a pure tone lowers every negative loss") {
    auto tone = testsupport::sine(kLen, kFps, 1.3);
    for (std::size_t i = 0; i < tone.size(); ++i) tone[i] += 0.01 * std::sin(0.37 * static_cast<double>(i * i));
    SpectralOptions o;
    const std::vector<std::function<LossValue(std::span<const double>)>> losses{
        [](auto v) { return loss_std(v); },
        [&](auto v) { return loss_spectral_entropy(v, kFps, o); },
        [&](auto v) { return loss_spectral_flatness(v, kFps, o); },
        [](auto v) { return loss_mse_flatline(v); },
    };
    for (const auto& L : losses) {
        const auto lv = L(tone);
        double gnorm = 0.0;
        for (double g : lv.gradient) gnorm += g * g;
        const double step = 1e-3 / std::sqrt(gnorm);
        auto moved = tone;
        for (std::size_t i = 0; i < moved.size(); ++i) moved[i] -= step * lv.gradient[i];
        CHECK(L(moved).value < lv.value);
    }
}

TEST_CASE("combined loss dispatch") {
    LossSpec spec;
    const auto t = random_signal(5);
    CHECK(std::abs(combined_loss(t, std::span<const double>(t), true, kFps, spec).value) <= 1e-12);
    spec.negative = NegativeLoss::Std;
    CHECK(combined_loss(std::vector<double>(kLen, 0.3), std::nullopt, false, kFps, spec).value == 0.0);
    spec.negative = NegativeLoss::None;
    const auto none = combined_loss(t, std::nullopt, false, kFps, spec);
    CHECK(none.value == 0.0);
    CHECK(none.gradient.size() == t.size());
    CHECK_THROWS_AS(combined_loss(t, std::nullopt, true, kFps, spec), Error);
    CHECK_THROWS_AS(combined_loss(t, std::span<const double>(t), false, kFps, spec), Error);
}

TEST_CASE("flatness loss of white noise matches the periodogram expectation") {
    // Unpadded periodogram bins of white noise are i.i.d. exponential, so
    // GM/AM -> exp(-euler_gamma) and the loss -> 1 - exp(-gamma) ~= 0.439.
    LossSpec spec;
    spec.negative = NegativeLoss::SpectralFlatness;
    spec.spectral.nfft = 5400;
    std::vector<double> vals;
    for (std::uint64_t seed = 1; seed <= 100; ++seed)
        vals.push_back(combined_loss(testsupport::gaussian(5400, seed), std::nullopt, false, kFps, spec).value);
    std::nth_element(vals.begin(), vals.begin() + 50, vals.end());
    const double expect = 1.0 - std::exp(-std::numbers::egamma);
    CHECK(vals[50] == doctest::Approx(expect).epsilon(0.1));
    // far below the tonal end of the range
    CHECK(vals[50] < 0.6);
}

TEST_CASE("loss spec validation and names") {
    LossSpec spec;
    CHECK_NOTHROW(spec.validate(270, kFps));
    spec.spectral.nfft = 128;
    CHECK_THROWS_AS(spec.validate(270, kFps), Error);
    spec.spectral.nfft = 5400;
    spec.spectral.band = {40.0, 3000.0};
    CHECK_THROWS_AS(spec.validate(270, kFps), Error);
    CHECK(parse_negative_loss("flatness") == NegativeLoss::SpectralFlatness);
    CHECK(parse_negative_loss("spectral_entropy") == NegativeLoss::SpectralEntropy);
    CHECK(parse_positive_loss("neg_pearson") == PositiveLoss::NegPearson);
}
