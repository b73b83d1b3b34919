#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "pulsegate/error.hpp"
#include "pulsegate/signal.hpp"
#include "support.hpp"

using namespace pulsegate;
using namespace pulsegate::dsp;
using testsupport::sine;

namespace {

double sum(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Io;
}

}  // namespace

TEST_CASE("90 bpm sine at 90 fps peaks at 90 bpm with 1 bpm bins") {
    const Waveform w(sine(900, 90.0, 1.5), 90.0);
    const auto psd = psd_normalized(w, 5400, kPulseBand);
    CHECK(psd.bin_resolution == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(psd.peak_bpm() == 90.0);
    CHECK_FALSE(psd.degenerate);
}

TEST_CASE("constant signal gives the degenerate all-zero distribution") {
    const Waveform w(std::vector<double>(900, 3.25), 90.0);
    const auto psd = psd_normalized(w);
    CHECK(psd.degenerate);
    for (double v : psd.power) CHECK(v == 0.0);
}

TEST_CASE("two equal tones split the mass evenly") {
    // 60 s at 90 fps with nfft = N puts both tones exactly on bins.
    auto a = sine(5400, 90.0, 1.0), b = sine(5400, 90.0, 2.0, 1.0, 0.3);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    const auto psd = psd_normalized(Waveform(a, 90.0), 5400);
    CHECK(psd.power[60] == doctest::Approx(0.5).epsilon(0.02));
    CHECK(psd.power[120] == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("normalised spectrum sums to one with nothing outside the band") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto x = testsupport::gaussian(900, seed);
        const auto psd = psd_normalized(Waveform(x, 90.0), 5400, kPulseBand);
        CHECK(sum(psd.power) == doctest::Approx(1.0).epsilon(1e-9));
        for (std::size_t k = 0; k < psd.power.size(); ++k) {
            const double bpm = bin_bpm(k, 90.0, 5400);
            if (bpm < 40.0 || bpm > 240.0) CHECK(psd.power[k] == 0.0);
        }
    }
}

TEST_CASE("band edges are inclusive") {
    const auto bins = band_bins(90.0, 5400, Band{40.0, 240.0});
    CHECK(bins.first == 40);
    CHECK(bins.last == 240);
    const auto narrow = band_bins(90.0, 5400, Band{39.6, 240.0});
    CHECK(narrow.first == 40);
}

TEST_CASE("Parseval: unmasked bins over nfft equal the centred energy") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto x = testsupport::gaussian(777, seed);
        double m = 0.0;
        for (double v : x) m += v / static_cast<double>(x.size());
        double energy = 0.0;
        for (double& v : x) {
            v -= m;
            energy += v * v;
        }
        for (std::size_t nfft : {777UL, 1000UL, 5400UL}) {
            const auto p = power_spectrum(x, nfft);
            CHECK(sum(p) / static_cast<double>(nfft) == doctest::Approx(energy).epsilon(1e-9));
        }
    }
}

TEST_CASE("power spectrum agrees with a direct DFT") {
    const auto x = testsupport::gaussian(50, 9);
    const std::size_t nfft = 64;
    const auto p = power_spectrum(x, nfft);
    for (std::size_t k = 0; k <= nfft / 2; ++k) {
        std::complex<double> acc{};
        for (std::size_t n = 0; n < x.size(); ++n)
            acc += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * n) / nfft);
        const double expect = std::norm(acc) * ((k == 0 || k == nfft / 2) ? 1.0 : 2.0);
        CHECK(p[k] == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("psd is invariant under positive scaling") {
    const auto x = testsupport::gaussian(900, 4);
    auto y = x;
    for (double& v : y) v *= 37.5;
    const auto a = psd_normalized(Waveform(x, 90.0)), b = psd_normalized(Waveform(y, 90.0));
    CHECK(a.argmax() == b.argmax());
    for (std::size_t k = 0; k < a.power.size(); ++k) CHECK(std::abs(a.power[k] - b.power[k]) <= 1e-12);
}

TEST_CASE("magnitude scale is available and normalised") {
    const auto x = testsupport::gaussian(900, 5);
    const auto psd = psd_normalized(Waveform(x, 90.0), 5400, kPulseBand, SpectrumScale::Magnitude);
    CHECK(sum(psd.power) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("psd errors") {
    const Waveform w(sine(900, 90.0, 1.5), 90.0);
    CHECK(kind_of([&] { psd_normalized(w, 512); }) == ErrorKind::InvalidArgument);
    std::vector<double> bad(100, 0.0);
    bad[3] = std::nan("");
    CHECK(kind_of([&] { psd_normalized(bad, 90.0, 5400); }) == ErrorKind::InvalidInput);
    CHECK(kind_of([&] { Waveform(bad, 90.0); }) == ErrorKind::InvalidInput);
}

TEST_CASE("Hilbert envelope of a sine is its amplitude") {
    const auto x = sine(1800, 90.0, 1.3, 2.0);
    const auto env = hilbert_envelope(Waveform(x, 90.0));
    const std::size_t edge = x.size() / 20;
    for (std::size_t i = edge; i + edge < x.size(); ++i) CHECK(env[i] == doctest::Approx(2.0).epsilon(0.02));
    for (std::size_t i = edge; i + edge < x.size(); ++i) CHECK(env[i] >= std::abs(x[i]) - 1e-9);
}

TEST_CASE("Hilbert envelope of zero is zero") {
    const auto env = hilbert_envelope(Waveform(std::vector<double>(64, 0.0), 90.0));
    for (std::size_t i = 0; i < env.size(); ++i) CHECK(env[i] == 0.0);
}

TEST_CASE("Hilbert envelope recovers an amplitude modulator") {
    const double fps = 90.0, fc = 2.0, fm = 0.1;
    const std::size_t n = 1800;
    std::vector<double> x(n), mod(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fps;
        mod[i] = 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * fm * t);
        x[i] = mod[i] * std::sin(2.0 * std::numbers::pi * fc * t);
    }
    const auto env = hilbert_envelope(x);
    for (std::size_t i = n / 20; i + n / 20 < n; ++i) CHECK(env[i] == doctest::Approx(mod[i]).epsilon(0.03));
}

TEST_CASE("cubic resampling of sines from 30 to 90 fps") {
    const double fps = 30.0;
    const std::size_t n = 300;
    for (double hz : {0.5, 1.0, 2.0, 3.0, 4.0}) {
        CAPTURE(hz);
        const auto w = resample_cubic(Waveform(sine(n, fps, hz), fps), 90.0);
        // Bound widened at 4 Hz: 7.5 samples per cycle leave ~1.2e-3 of spline error.
        const double tol = hz <= 3.0 ? 1e-3 : 1.5e-3;
        double worst = 0.0;
        // interior: skip one input second at each end
        for (std::size_t i = 90; i + 90 < w.size(); ++i) {
            const double t = static_cast<double>(i) / 90.0;
            worst = std::max(worst, std::abs(w[i] - std::sin(2.0 * std::numbers::pi * hz * t)));
        }
        CHECK(worst < tol);
    }
}

TEST_CASE("cubic resampling keeps endpoints, reproduces ramps, and is identity at equal fps") {
    std::vector<double> ramp(40);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.25 * static_cast<double>(i) - 3.0;
    const auto up = resample_cubic(Waveform(ramp, 30.0), 90.0);
    CHECK(up.size() == 118);
    for (std::size_t i = 0; i < up.size(); ++i)
        CHECK(std::abs(up[i] - (0.25 * static_cast<double>(i) / 3.0 - 3.0)) <= 1e-9);
    CHECK(up[0] == ramp.front());
    CHECK(up[up.size() - 1] == doctest::Approx(ramp.back()).epsilon(1e-12));

    const Waveform w(testsupport::gaussian(50, 2), 30.0);
    CHECK(resample_cubic(w, 30.0) == w);
    CHECK_THROWS_AS(resample_cubic(Waveform({1.0, 2.0, 3.0}, 30.0), 90.0), Error);
}

TEST_CASE("resample up then back down reproduces band-limited input") {
    const double fps = 30.0;
    auto x = sine(300, fps, 2.0);
    const auto y = sine(300, fps, 5.5, 0.3, 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
    const auto up = resample_cubic(Waveform(x, fps), 90.0);
    const auto down = resample_cubic(up, fps);
    REQUIRE(down.size() == x.size());
    for (std::size_t i = 30; i + 30 < x.size(); ++i) CHECK(std::abs(down[i] - x[i]) <= 1e-3);
}

TEST_CASE("standardize") {
    const auto s = standardize(Waveform({1.0, 2.0, 3.0}, 1.0));
    CHECK_FALSE(s.degenerate);
    CHECK(std::abs(mean(s.wave.samples())) <= 1e-12);
    CHECK(population_std(s.wave.samples()) == doctest::Approx(1.0).epsilon(1e-12));

    const auto c = standardize(Waveform({5.0, 5.0, 5.0}, 1.0));
    CHECK(c.degenerate);
    for (double v : c.wave.samples()) CHECK(v == 0.0);

    const auto x = testsupport::gaussian(100, 3);
    auto y = x;
    for (double& v : y) v = 4.2 * v - 17.0;
    const auto a = standardize(Waveform(x, 1.0)), b = standardize(Waveform(y, 1.0));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(a.wave[i] == doctest::Approx(b.wave[i]).epsilon(1e-10));
}

TEST_CASE("spatial mean trace") {
    VideoCube uniform(4, 3, 5, 3, 30.0, std::vector<float>(4 * 3 * 5 * 3, 0.5f));
    const auto t = spatial_mean_trace(uniform);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t f = 0; f < 4; ++f) CHECK(t.at(f, c) == doctest::Approx(0.5).epsilon(1e-12));

    VideoCube half(2, 2, 2, 1, 30.0, {0.f, 0.f, 1.f, 1.f, 0.f, 0.f, 1.f, 1.f});
    CHECK(spatial_mean_trace(half).at(0, 0) == 0.5);

    VideoCube g(5, 2, 3, 1, 30.0);
    const float vals[] = {0.1f, 0.7f, 0.3f, 0.9f, 0.2f};
    for (std::size_t f = 0; f < 5; ++f)
        for (float& v : g.mutable_frame(f)) v = vals[f];
    const auto gt = spatial_mean_trace(g);
    for (std::size_t f = 0; f < 5; ++f) CHECK(gt.at(f, 0) == static_cast<double>(vals[f]));
}

TEST_CASE("bandpass keeps in-band tones and removes the rest") {
    auto x = sine(900, 90.0, 1.5);
    const auto hi = sine(900, 90.0, 10.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += hi[i];
    const auto y = bandpass(x, 90.0, kPulseBand);
    const auto ref = sine(900, 90.0, 1.5);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-9).scale(1.0));
}
