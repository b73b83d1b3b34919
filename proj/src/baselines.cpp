#include "pulsegate/baselines.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <vector>

#include "pulsegate/error.hpp"

namespace pulsegate::baselines {

namespace {

void require_rgb(const RgbTrace& trace) {
    require(trace.channels() == 3, ErrorKind::InvalidInput, "colour baselines need an RGB trace");
}

std::size_t window_frames(const RgbTrace& trace, const Options& opts) {
    require(opts.window_s > 0.0, ErrorKind::InvalidArgument, "baseline window must be positive");
    const auto len = static_cast<std::size_t>(std::llround(opts.window_s * trace.fps()));
    require(len >= 2, ErrorKind::InvalidArgument, "baseline window shorter than two frames");
    require(trace.frames() >= len, ErrorKind::InsufficientData, "trace shorter than one baseline window");
    return len;
}

// Channel values over [begin, begin + len) divided by their window mean.
std::array<std::vector<double>, 3> normalized_window(const RgbTrace& trace, std::size_t begin, std::size_t len) {
    std::array<std::vector<double>, 3> out;
    for (std::size_t c = 0; c < 3; ++c) {
        const auto ch = trace.channel(c).subspan(begin, len);
        const double m = dsp::mean(ch);
        require(m > 0.0, ErrorKind::InvalidInput, "colour baselines need strictly positive channel means");
        out[c].resize(len);
        for (std::size_t i = 0; i < len; ++i) out[c][i] = ch[i] / m;
    }
    return out;
}

Estimate finish(std::vector<double> raw, const RgbTrace& trace, const Options& opts, std::size_t flagged) {
    if (opts.bandpass) raw = dsp::bandpass(raw, trace.fps(), opts.band);
    const bool ok = dsp::standardize_in_place(raw);
    return Estimate{Waveform(std::move(raw), trace.fps()), !ok, flagged};
}

}  // namespace

Method parse_method(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "green") return Method::Green;
    if (lower == "chrom") return Method::Chrom;
    if (lower == "pos") return Method::Pos;
    fail(ErrorKind::Config, "unknown baseline method '" + name + "'");
}

const char* to_string(Method m) {
    switch (m) {
        case Method::Green: return "green";
        case Method::Chrom: return "chrom";
        case Method::Pos: return "pos";
    }
    return "?";
}

Estimate estimate_green(const RgbTrace& trace, const Options& opts) {
    require_rgb(trace);
    const auto g = trace.channel(1);
    std::vector<double> raw(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) raw[i] = -g[i];
    return finish(std::move(raw), trace, opts, 0);
}

Estimate estimate_chrom(const RgbTrace& trace, const Options& opts) {
    require_rgb(trace);
    std::size_t len = window_frames(trace, opts);
    if (len % 2 == 1 && len < trace.frames()) ++len;
    const std::size_t frames = trace.frames();
    const std::size_t hop = std::max<std::size_t>(1, len / 2);

    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + len <= frames; s += hop) starts.push_back(s);
    if (starts.back() + len < frames) starts.push_back(frames - len);

    const auto taper = dsp::hann_positive(len);
    std::vector<double> acc(frames, 0.0), weight(frames, 0.0);
    std::size_t flagged = 0;
    std::vector<double> xs(len), ys(len), s(len);
    for (std::size_t start : starts) {
        const auto n = normalized_window(trace, start, len);
        for (std::size_t i = 0; i < len; ++i) {
            xs[i] = 3.0 * n[0][i] - 2.0 * n[1][i];
            ys[i] = 1.5 * n[0][i] + n[1][i] - 1.5 * n[2][i];
        }
        const double sy = dsp::population_std(ys);
        const double sx = dsp::population_std(xs);
        const bool usable = sy > 1e-14 * (1.0 + std::abs(dsp::mean(ys)));
        if (!usable) ++flagged;
        const double alpha = usable ? sx / sy : 0.0;
        for (std::size_t i = 0; i < len; ++i) s[i] = usable ? xs[i] - alpha * ys[i] : 0.0;
        const double m = dsp::mean(s);
        for (std::size_t i = 0; i < len; ++i) {
            acc[start + i] += taper[i] * (s[i] - m);
            weight[start + i] += taper[i];
        }
    }
    for (std::size_t i = 0; i < frames; ++i) acc[i] /= weight[i];
    return finish(std::move(acc), trace, opts, flagged);
}

Estimate estimate_pos(const RgbTrace& trace, const Options& opts) {
    require_rgb(trace);
    const std::size_t len = window_frames(trace, opts);
    const std::size_t frames = trace.frames();
    std::vector<double> out(frames, 0.0);
    std::vector<double> s1(len), s2(len), h(len);
    std::size_t flagged = 0;
    for (std::size_t end = len; end <= frames; ++end) {
        const std::size_t start = end - len;
        const auto n = normalized_window(trace, start, len);
        for (std::size_t i = 0; i < len; ++i) {
            s1[i] = n[1][i] - n[2][i];
            s2[i] = n[1][i] + n[2][i] - 2.0 * n[0][i];
        }
        const double sd2 = dsp::population_std(s2);
        const double sd1 = dsp::population_std(s1);
        const bool usable = sd2 > 1e-14 * (1.0 + std::abs(dsp::mean(s2)));
        if (!usable) {
            ++flagged;
            continue;
        }
        const double alpha = sd1 / sd2;
        for (std::size_t i = 0; i < len; ++i) h[i] = s1[i] + alpha * s2[i];
        const double m = dsp::mean(h);
        for (std::size_t i = 0; i < len; ++i) out[start + i] += h[i] - m;
    }
    return finish(std::move(out), trace, opts, flagged);
}

Estimate estimate(Method method, const RgbTrace& trace, const Options& opts) {
    switch (method) {
        case Method::Green: return estimate_green(trace, opts);
        case Method::Chrom: return estimate_chrom(trace, opts);
        case Method::Pos: return estimate_pos(trace, opts);
    }
    fail(ErrorKind::InvalidArgument, "unknown baseline method");
}

}  // namespace pulsegate::baselines
