#pragma once
// Colour-transformation pulse estimators over spatial-mean RGB traces.

#include <cstddef>
#include <string>

#include "pulsegate/signal.hpp"
#include "pulsegate/types.hpp"

namespace pulsegate::baselines {

enum class Method { Green, Chrom, Pos };

Method parse_method(const std::string& name);
const char* to_string(Method m);

struct Options {
    double window_s = 1.6;  // CHROM / POS window
    bool bandpass = false;  // brick-wall filter to `band` before standardising
    dsp::Band band = dsp::kPulseBand;
};

struct Estimate {
    Waveform wave;                   // standardised, same length and fps as the trace
    bool degenerate = false;         // output carries no signal
    std::size_t flagged_windows = 0; // windows skipped because a projection had zero variance
};

/// Negated green channel: more absorption gives a larger pulse value.
Estimate estimate_green(const RgbTrace& trace, const Options& opts = {});

/// Chrominance projection per 50%-overlapping window, Hann overlap-add.
Estimate estimate_chrom(const RgbTrace& trace, const Options& opts = {});

/// Plane-orthogonal-to-skin projection with a sliding window (stride one frame).
Estimate estimate_pos(const RgbTrace& trace, const Options& opts = {});

Estimate estimate(Method method, const RgbTrace& trace, const Options& opts = {});

}  // namespace pulsegate::baselines
