#include "pulsegate/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include <json.hpp>

#include "pulsegate/error.hpp"
#include "pulsegate/kernels.hpp"

namespace pulsegate::classify {

namespace {

constexpr double kTau = 1e-12;

void check_rows(const Rows& x) {
    require(!x.empty(), ErrorKind::InvalidTrainingSet, "no training rows");
    const std::size_t d = x.front().size();
    require(d >= 1, ErrorKind::InvalidTrainingSet, "training rows have no features");
    for (const auto& r : x) {
        require(r.size() == d, ErrorKind::InvalidTrainingSet, "ragged training rows");
        for (double v : r) require(std::isfinite(v), ErrorKind::InvalidInput, "non-finite feature");
    }
}

double rbf(double gamma, std::span<const double> a, std::span<const double> b) {
    return std::exp(-gamma * kernels::squared_distance(a, b));
}

double default_gamma(const Rows& z) {
    double s = 0.0, s2 = 0.0;
    std::size_t n = 0;
    for (const auto& r : z)
        for (double v : r) {
            s += v;
            s2 += v * v;
            ++n;
        }
    const double m = s / static_cast<double>(n);
    const double var = std::max(0.0, s2 / static_cast<double>(n) - m * m);
    const double d = static_cast<double>(z.front().size());
    return var > 0.0 ? 1.0 / (d * var) : 1.0;
}

// Generic SMO for  min 0.5 a'Qa + p'a  s.t.  y'a = const, 0 <= a_i <= C_i,
// with Q_ij = y_i y_j K_ij; maximal-violating-pair working-set selection.
struct Solver {
    const std::vector<double>& k;  // dense kernel matrix, row-major
    std::size_t n;
    std::vector<double> y, p, cap, alpha, grad;

    double q(std::size_t i, std::size_t j) const { return y[i] * y[j] * k[i * n + j]; }
    bool up(std::size_t t) const { return (y[t] > 0 && alpha[t] < cap[t]) || (y[t] < 0 && alpha[t] > 0); }
    bool low(std::size_t t) const { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < cap[t]); }

    double objective() const {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) f += alpha[i] * (grad[i] + p[i]);
        return -0.5 * f;  // maximisation form of the dual
    }

    // Returns (i, j, gap); i = npos when nothing is selectable.
    std::tuple<std::size_t, std::size_t, double> select() const {
        double gmax = -std::numeric_limits<double>::infinity(), gmin = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (up(t) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (low(t) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        if (i == n || j == n) return {n, n, 0.0};
        return {i, j, gmax - gmin};
    }

    void init_gradient() {
        grad.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) grad[i] = p[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (alpha[j] == 0.0) continue;
            for (std::size_t i = 0; i < n; ++i) grad[i] += q(i, j) * alpha[j];
        }
    }

    // Two-variable update following the standard analytic solution with clipping.
    void update(std::size_t i, std::size_t j) {
        const double ci = cap[i], cj = cap[j];
        const double old_ai = alpha[i], old_aj = alpha[j];
        double quad = k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j];
        if (quad <= 0.0) quad = kTau;
        if (y[i] != y[j]) {
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0 && alpha[j] < 0) {
                alpha[j] = 0;
                alpha[i] = diff;
            } else if (diff <= 0 && alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = -diff;
            }
            if (diff > ci - cj && alpha[i] > ci) {
                alpha[i] = ci;
                alpha[j] = ci - diff;
            } else if (diff <= ci - cj && alpha[j] > cj) {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > ci && alpha[i] > ci) {
                alpha[i] = ci;
                alpha[j] = sum - ci;
            } else if (sum <= ci && alpha[j] < 0) {
                alpha[j] = 0;
                alpha[i] = sum;
            }
            if (sum > cj && alpha[j] > cj) {
                alpha[j] = cj;
                alpha[i] = sum - cj;
            } else if (sum <= cj && alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = sum;
            }
        }
        const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * dai + q(t, j) * daj;
    }

    double rho() const {
        double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum = 0.0;
        std::size_t free = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const double yg = y[t] * grad[t];
            if (alpha[t] >= cap[t]) {
                if (y[t] < 0) ub = std::min(ub, yg);
                else lb = std::max(lb, yg);
            } else if (alpha[t] <= 0) {
                if (y[t] > 0) ub = std::min(ub, yg);
                else lb = std::max(lb, yg);
            } else {
                ++free;
                sum += yg;
            }
        }
        return free > 0 ? sum / static_cast<double>(free) : 0.5 * (ub + lb);
    }

    void solve(double eps, std::size_t max_iter, FitDiagnostics* diag) {
        init_gradient();
        std::size_t iter = 0;
        double gap = 0.0;
        if (diag != nullptr) diag->objective.push_back(objective());
        for (;;) {
            const auto [i, j, g] = select();
            gap = g;
            if (i == n || g < eps) break;
            if (iter >= max_iter) fail(ErrorKind::NumericalFailure, "SMO did not converge within the iteration cap");
            update(i, j);
            ++iter;
            if (diag != nullptr) diag->objective.push_back(objective());
        }
        if (diag != nullptr) {
            diag->iterations = iter;
            diag->kkt_gap = gap;
            diag->alpha = alpha;
        }
    }
};

std::vector<double> gram(const Rows& z, double gamma) {
    const std::size_t n = z.size();
    std::vector<double> k(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        k[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) k[i * n + j] = k[j * n + i] = rbf(gamma, z[i], z[j]);
    }
    return k;
}

Rows scale_rows(const Scaler& s, const Rows& x) {
    Rows out;
    out.reserve(x.size());
    for (const auto& r : x) out.push_back(s.transform(r));
    return out;
}

SvmModel assemble(SvmKind kind, const SvmParams& params, Scaler scaler, double gamma, const Rows& z,
                  const Solver& s) {
    SvmModel m;
    m.kind = kind;
    m.gamma = gamma;
    m.c = params.c;
    m.nu = params.nu;
    m.scaler = std::move(scaler);
    m.rho = s.rho();
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (s.alpha[i] <= 0.0) continue;
        m.support_vectors.push_back(z[i]);
        m.dual_coef.push_back(s.y[i] * s.alpha[i]);
    }
    return m;
}

}  // namespace

const char* to_string(SvmKind k) { return k == SvmKind::TwoClass ? "two" : "one"; }
const char* to_string(Label l) { return l == Label::Live ? "live" : "anomalous"; }

Scaler Scaler::fit(const Rows& x) {
    check_rows(x);
    const std::size_t d = x.front().size();
    Scaler s{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
    const double n = static_cast<double>(x.size());
    for (const auto& r : x)
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j] / n;
    for (std::size_t j = 0; j < d; ++j) {
        double v = 0.0;
        for (const auto& r : x) v += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
        const double sd = std::sqrt(v / n);
        s.scale[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

Scaler Scaler::identity(std::size_t dims) {
    return Scaler{std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0)};
}

std::vector<double> Scaler::transform(std::span<const double> x) const {
    require(x.size() == mean.size(), ErrorKind::InvalidInput, "feature dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        require(std::isfinite(x[j]), ErrorKind::InvalidInput, "non-finite feature");
        out[j] = (x[j] - mean[j]) / scale[j];
    }
    return out;
}

double SvmModel::decision(std::span<const double> x) const {
    const auto z = scaler.transform(x);
    double f = 0.0;
    for (std::size_t i = 0; i < support_vectors.size(); ++i) f += dual_coef[i] * rbf(gamma, support_vectors[i], z);
    return f - rho;
}

Prediction SvmModel::predict(std::span<const double> x) const {
    const double f = decision(x);
    return Prediction{f > 0.0 ? Label::Live : Label::Anomalous, f};
}

std::vector<Prediction> SvmModel::predict(const Rows& x) const {
    std::vector<Prediction> out;
    out.reserve(x.size());
    for (const auto& r : x) out.push_back(predict(r));
    return out;
}

double SvmModel::lipschitz_bound() const {
    // |d/dz exp(-g |z - s|^2)| <= sqrt(2 g / e).
    double s = 0.0;
    for (double c : dual_coef) s += std::abs(c);
    return s * std::sqrt(2.0 * gamma / std::exp(1.0));
}

SvmModel fit_two_class(const Rows& x, std::span<const Label> y, const SvmParams& params, FitDiagnostics* diag) {
    check_rows(x);
    require(y.size() == x.size(), ErrorKind::InvalidTrainingSet, "label count differs from row count");
    require(params.c > 0.0, ErrorKind::InvalidArgument, "C must be positive");
    const bool has_live = std::find(y.begin(), y.end(), Label::Live) != y.end();
    const bool has_anom = std::find(y.begin(), y.end(), Label::Anomalous) != y.end();
    require(has_live && has_anom, ErrorKind::InvalidTrainingSet, "two-class training needs both classes");

    Scaler scaler = params.standardize ? Scaler::fit(x) : Scaler::identity(x.front().size());
    const Rows z = scale_rows(scaler, x);
    const double gamma = params.gamma.value_or(default_gamma(z));
    require(gamma > 0.0, ErrorKind::InvalidArgument, "gamma must be positive");
    const auto k = gram(z, gamma);
    const std::size_t n = z.size();

    Solver s{k, n, std::vector<double>(n), std::vector<double>(n, -1.0), std::vector<double>(n, params.c),
             std::vector<double>(n, 0.0), {}};
    for (std::size_t i = 0; i < n; ++i) s.y[i] = y[i] == Label::Live ? 1.0 : -1.0;
    s.solve(params.tolerance, params.max_iterations, diag);
    return assemble(SvmKind::TwoClass, params, std::move(scaler), gamma, z, s);
}

SvmModel fit_one_class(const Rows& x, const SvmParams& params, FitDiagnostics* diag) {
    check_rows(x);
    require(params.nu > 0.0 && params.nu <= 1.0, ErrorKind::InvalidArgument, "nu must lie in (0, 1]");
    require(static_cast<double>(x.size()) >= 2.0 / params.nu, ErrorKind::InvalidTrainingSet,
            "one-class training needs at least 2/nu rows");

    Scaler scaler = params.standardize ? Scaler::fit(x) : Scaler::identity(x.front().size());
    const Rows z = scale_rows(scaler, x);
    const double gamma = params.gamma.value_or(default_gamma(z));
    require(gamma > 0.0, ErrorKind::InvalidArgument, "gamma must be positive");
    const auto k = gram(z, gamma);
    const std::size_t n = z.size();

    Solver s{k, n, std::vector<double>(n, 1.0), std::vector<double>(n, 0.0), std::vector<double>(n, 1.0),
             std::vector<double>(n, 0.0), {}};
    // Feasible start: sum(alpha) = nu * n with the first floor(nu n) at the bound.
    const double total = params.nu * static_cast<double>(n);
    const auto full = static_cast<std::size_t>(total);
    for (std::size_t i = 0; i < full && i < n; ++i) s.alpha[i] = 1.0;
    if (full < n) s.alpha[full] = total - static_cast<double>(full);
    s.solve(params.tolerance, params.max_iterations, diag);
    return assemble(SvmKind::OneClass, params, std::move(scaler), gamma, z, s);
}

std::string to_json(const SvmModel& m) {
    nlohmann::ordered_json j;
    j["format"] = "pulsegate-svm";
    j["version"] = 1;
    j["kind"] = to_string(m.kind);
    j["gamma"] = m.gamma;
    j["C"] = m.c;
    j["nu"] = m.nu;
    j["scaler"] = {{"mean", m.scaler.mean}, {"scale", m.scaler.scale}};
    j["support_vectors"] = m.support_vectors;
    j["dual_coef"] = m.dual_coef;
    j["rho"] = m.rho;
    return j.dump(1);
}

SvmModel from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        SvmModel m;
        const auto kind = j.at("kind").get<std::string>();
        require(kind == "one" || kind == "two", ErrorKind::Config, "unknown SVM kind");
        m.kind = kind == "two" ? SvmKind::TwoClass : SvmKind::OneClass;
        m.gamma = j.at("gamma").get<double>();
        m.c = j.value("C", 1.0);
        m.nu = j.value("nu", 0.5);
        m.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
        m.scaler.scale = j.at("scaler").at("scale").get<std::vector<double>>();
        m.support_vectors = j.at("support_vectors").get<Rows>();
        m.dual_coef = j.at("dual_coef").get<std::vector<double>>();
        m.rho = j.at("rho").get<double>();
        require(m.scaler.mean.size() == m.scaler.scale.size(), ErrorKind::Config, "scaler size mismatch");
        require(m.support_vectors.size() == m.dual_coef.size(), ErrorKind::Config, "support vector count mismatch");
        for (const auto& sv : m.support_vectors)
            require(sv.size() == m.scaler.mean.size(), ErrorKind::Config, "support vector dimension mismatch");
        return m;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Config, std::string("malformed SVM JSON: ") + e.what());
    }
}

AccuracyTally frame_tally(std::span<const Label> window_predictions, std::span<const double> window_centers_s,
                          std::span<const Label> frame_labels, double fps, double window_s) {
    require(window_predictions.size() == window_centers_s.size(), ErrorKind::InvalidArgument,
            "one centre per window prediction required");
    require(!window_centers_s.empty(), ErrorKind::Coverage, "no windows to cover the frames");
    require(fps > 0.0 && window_s > 0.0, ErrorKind::InvalidArgument, "fps and window must be positive");
    for (std::size_t i = 1; i < window_centers_s.size(); ++i)
        require(window_centers_s[i] > window_centers_s[i - 1], ErrorKind::InvalidArgument,
                "window centres must increase");

    AccuracyTally tally;
    const double half = 0.5 * window_s + 1e-9;
    std::size_t w = 0;
    for (std::size_t i = 0; i < frame_labels.size(); ++i) {
        const double t = static_cast<double>(i) / fps;
        // Centres increase, so the nearest one only moves forward.
        while (w + 1 < window_centers_s.size() &&
               std::abs(window_centers_s[w + 1] - t) < std::abs(window_centers_s[w] - t))
            ++w;
        if (std::abs(window_centers_s[w] - t) > half)
            fail(ErrorKind::Coverage, "frame " + std::to_string(i) + " lies outside every window");
        ++tally.frames;
        if (window_predictions[w] == frame_labels[i]) ++tally.correct;
    }
    return tally;
}

double frame_accuracy(std::span<const Label> window_predictions, std::span<const double> window_centers_s,
                      std::span<const Label> frame_labels, double fps, double window_s) {
    return frame_tally(window_predictions, window_centers_s, frame_labels, fps, window_s).accuracy();
}

AccuracyTally combine(std::span<const AccuracyTally> parts) {
    AccuracyTally out;
    for (const auto& p : parts) {
        out.correct += p.correct;
        out.frames += p.frames;
    }
    return out;
}

}  // namespace pulsegate::classify
