#pragma once
// RBF-kernel support vector machines (two-class C-SVC and one-class nu-SVM)
// solved by sequential minimal optimisation, plus frame-level accuracy.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pulsegate::classify {

enum class SvmKind { TwoClass, OneClass };
enum class Label { Live, Anomalous };

const char* to_string(SvmKind k);
const char* to_string(Label l);

using Rows = std::vector<std::vector<double>>;

/// Per-dimension z-score; zero-variance dimensions keep scale 1.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> scale;

    static Scaler fit(const Rows& x);
    static Scaler identity(std::size_t dims);
    std::vector<double> transform(std::span<const double> x) const;
    bool operator==(const Scaler&) const = default;
};

struct SvmParams {
    double c = 1.0;
    double nu = 0.5;
    std::optional<double> gamma;  // default: 1 / (d * var(X)) on the scaled data
    double tolerance = 1e-3;
    bool standardize = true;
    std::size_t max_iterations = 10'000'000;
};

struct FitDiagnostics {
    std::vector<double> objective;  // dual objective (maximisation form) after each iteration
    std::size_t iterations = 0;
    double kkt_gap = 0.0;           // max violating pair gap at termination
    std::vector<double> alpha;      // final duals, one per training row
};

struct Prediction {
    Label label;
    double decision;
};

struct SvmModel {
    SvmKind kind = SvmKind::TwoClass;
    double gamma = 1.0;
    double c = 1.0;
    double nu = 0.5;
    Scaler scaler;
    Rows support_vectors;           // scaled rows
    std::vector<double> dual_coef;  // y_i alpha_i (two-class) or alpha_i (one-class)
    double rho = 0.0;

    /// sum_i coef_i K(sv_i, x) - rho on the scaled input.
    double decision(std::span<const double> x) const;
    /// Positive decision is live; zero and below are anomalous.
    Prediction predict(std::span<const double> x) const;
    std::vector<Prediction> predict(const Rows& x) const;
    /// Lipschitz constant of decision() w.r.t. the scaled input.
    double lipschitz_bound() const;

    std::size_t dims() const { return scaler.mean.size(); }
};

SvmModel fit_two_class(const Rows& x, std::span<const Label> y, const SvmParams& params = {},
                       FitDiagnostics* diag = nullptr);
SvmModel fit_one_class(const Rows& x, const SvmParams& params = {}, FitDiagnostics* diag = nullptr);

std::string to_json(const SvmModel& model);
SvmModel from_json(const std::string& text);

struct AccuracyTally {
    std::size_t correct = 0;
    std::size_t frames = 0;
    double accuracy() const { return frames == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(frames); }
};

/// Each frame i (time i / fps) takes the prediction of the window whose centre
/// is nearest (earliest on ties). Frames farther than half a window from every
/// centre raise a coverage error.
AccuracyTally frame_tally(std::span<const Label> window_predictions, std::span<const double> window_centers_s,
                          std::span<const Label> frame_labels, double fps, double window_s);

double frame_accuracy(std::span<const Label> window_predictions, std::span<const double> window_centers_s,
                      std::span<const Label> frame_labels, double fps, double window_s);

/// Pools tallies: total correct frames over total frames.
AccuracyTally combine(std::span<const AccuracyTally> parts);

}  // namespace pulsegate::classify
