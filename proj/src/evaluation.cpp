#include "pulsegate/evaluation.hpp"

#include <cmath>

#include "pulsegate/error.hpp"

namespace pulsegate::evalx {

RateSeries pulse_rate(const Waveform& w, const RateOptions& opts) {
    require(opts.window_s > 0.0 && opts.stride_frames >= 1, ErrorKind::InvalidArgument,
            "window and stride must be positive");
    const auto len = static_cast<std::size_t>(std::llround(opts.window_s * w.fps()));
    require(len >= 2, ErrorKind::InvalidArgument, "rate window shorter than two samples");
    require(w.size() >= len, ErrorKind::InsufficientData, "waveform shorter than one rate window");
    require(opts.nfft >= len, ErrorKind::InvalidArgument, "nfft shorter than the rate window");

    RateSeries out;
    out.window_s = opts.window_s;
    out.band = opts.band;
    const double half = 0.5 * static_cast<double>(len) / w.fps();
    for (std::size_t begin = 0; begin + len <= w.size(); begin += opts.stride_frames) {
        const auto psd = dsp::psd_normalized(w.samples().subspan(begin, len), w.fps(), opts.nfft, opts.band);
        out.times.push_back(static_cast<double>(begin) / w.fps() + half);
        out.bpm.push_back(psd.degenerate ? std::nullopt : std::optional<double>(psd.peak_bpm()));
    }
    return out;
}

ErrorReport error_report(const RateSeries& pred, const RateSeries& truth) {
    require(pred.size() == truth.size(), ErrorKind::InvalidArgument, "rate series have different lengths");
    for (std::size_t i = 0; i < pred.size(); ++i)
        require(std::abs(pred.times[i] - truth.times[i]) <= 1e-9, ErrorKind::InvalidArgument,
                "rate series are not aligned");

    std::vector<double> p, t;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!pred.bpm[i] || !truth.bpm[i]) continue;
        p.push_back(*pred.bpm[i]);
        t.push_back(*truth.bpm[i]);
    }
    require(!p.empty(), ErrorKind::EmptyComparison, "no window has a valid rate on both sides");

    ErrorReport r;
    r.pairs = p.size();
    const double n = static_cast<double>(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double e = p[i] - t[i];
        r.me += e / n;
        r.mae += std::abs(e) / n;
        r.rmse += e * e / n;
    }
    r.rmse = std::sqrt(r.rmse);
    if (p.size() >= 2) {
        const double c = dsp::pearson(p, t);
        if (std::isfinite(c)) r.pearson_r = c;
    }
    return r;
}

}  // namespace pulsegate::evalx
