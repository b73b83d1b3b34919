// pulsegate command-line front end.
//
// Exit codes: 0 success, 1 input/IO failure, 2 configuration or usage error,
// 3 numerical failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <json.hpp>

#include "pulsegate/baselines.hpp"
#include "pulsegate/classify.hpp"
#include "pulsegate/config.hpp"
#include "pulsegate/error.hpp"
#include "pulsegate/estimator.hpp"
#include "pulsegate/evaluation.hpp"
#include "pulsegate/experiment.hpp"
#include "pulsegate/features.hpp"
#include "pulsegate/io.hpp"
#include "pulsegate/signal.hpp"
#include "pulsegate/synth.hpp"

namespace fs = std::filesystem;
using namespace pulsegate;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::InvalidArgument: return kExitConfig;
        case ErrorKind::NumericalFailure:
        case ErrorKind::DegenerateInput:
        case ErrorKind::DegenerateCorrelation: return kExitNumerical;
        default: return kExitFailure;
    }
}

/// PULSEGATE_SEED, when set, replaces whatever seed the config carries.
std::optional<std::uint64_t> seed_override() {
    const char* env = std::getenv("PULSEGATE_SEED");
    if (env == nullptr || *env == '\0') return std::nullopt;
    const std::string s(env);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &used, 10);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.front() == '-') fail(ErrorKind::Config, "PULSEGATE_SEED must be a non-negative integer");
    return v;
}

struct SynthArgs {
    std::string config, out, negative, truth;
    std::uint64_t negative_seed = 0;
};

int run_synth(const SynthArgs& a) {
    auto scene = config::parse_scene(io::read_text(a.config));
    if (auto s = seed_override()) scene.seed = *s;
    auto sample = synth::generate_positive(scene);
    if (!a.negative.empty()) {
        synth::NegativeTransform t;
        t.kind = synth::parse_negative_kind(a.negative);
        t.seed = synth::derive_seed(scene.seed, a.negative_seed);
        io::write_cube(a.out, synth::make_negative(sample.video, t));
    } else {
        io::write_cube(a.out, sample.video);
        fs::path truth = a.truth.empty() ? fs::path(a.out).replace_extension(".truth.csv") : fs::path(a.truth);
        io::write_waveform(truth, sample.truth);
    }
    return 0;
}

struct EstimateArgs {
    std::string method, in, out, model;
    bool bandpass = false;
    std::size_t clip_len = 270;
    double overlap = 0.5;
    bool raw_clips = false;
};

int run_estimate(const EstimateArgs& a) {
    const auto cube = io::read_cube(a.in);
    const auto trace = dsp::spatial_mean_trace(cube);
    if (a.method == "model") {
        if (a.model.empty()) fail(ErrorKind::Config, "--method model requires --model");
        const auto model = estimator::from_json(io::read_text(a.model));
        estimator::InferenceOptions opts{a.clip_len, a.overlap, !a.raw_clips};
        io::write_waveform(a.out, estimator::infer_video(model, trace, opts));
        return 0;
    }
    baselines::Options opts;
    opts.bandpass = a.bandpass;
    const auto est = baselines::estimate(baselines::parse_method(a.method), trace, opts);
    if (est.flagged_windows > 0)
        std::cerr << "note: " << est.flagged_windows << " window(s) had a zero-variance projection\n";
    if (est.degenerate) std::cerr << "note: output is degenerate (flat)\n";
    io::write_waveform(a.out, est.wave);
    return 0;
}

struct TrainArgs {
    std::string config, corpus, out, history;
};

int run_train(const TrainArgs& a) {
    auto tf = config::parse_train(io::read_text(a.config));
    if (auto s = seed_override()) {
        tf.training.seed = *s;
        tf.init_seed = *s;
    }
    std::vector<fs::path> cubes;
    for (const auto& entry : fs::directory_iterator(a.corpus))
        if (entry.is_regular_file() && entry.path().extension() == ".bin") cubes.push_back(entry.path());
    std::sort(cubes.begin(), cubes.end());
    if (cubes.empty()) fail(ErrorKind::Config, "corpus directory contains no .bin cubes");

    std::vector<estimator::LabelledVideo> positives;
    std::vector<Trace> supplied_negatives;
    std::vector<fs::path> positive_paths;
    for (const auto& p : cubes) {
        fs::path truth = p;
        truth.replace_extension(".truth.csv");
        const auto trace = dsp::spatial_mean_trace(io::read_cube(p));
        if (fs::exists(truth)) {
            positives.push_back({trace, io::read_waveform(truth)});
            positive_paths.push_back(p);
        } else {
            supplied_negatives.push_back(trace);
        }
    }

    const std::size_t held = std::min(tf.validation_videos, positives.size() > 0 ? positives.size() - 1 : 0);
    estimator::TrainingSet set;
    estimator::ValidationSet val;
    const std::size_t clip = tf.training.clip_len;
    std::mt19937_64 rng(synth::derive_seed(tf.training.seed, 1));
    std::size_t made = 0;
    for (std::size_t i = 0; i < positives.size(); ++i) {
        const bool hold_out = i + held >= positives.size();
        if (hold_out) {
            val.positives.push_back({positives[i].trace.slice(0, clip),
                                     Waveform(std::vector<double>(positives[i].truth.values().begin(),
                                                                  positives[i].truth.values().begin() +
                                                                      static_cast<std::ptrdiff_t>(clip)),
                                              positives[i].truth.fps())});
        } else {
            set.positives.push_back(positives[i]);
        }
        // Pulseless clips generated from this video's frames.
        if (tf.training.negative_mix <= 0.0) continue;
        const auto cube = io::read_cube(positive_paths[i]);
        require(cube.frames() >= clip, ErrorKind::InvalidTrainingSet, "corpus video shorter than a clip");
        std::uniform_int_distribution<std::size_t> start(0, cube.frames() - clip);
        for (std::size_t j = 0; j < tf.negatives_per_video; ++j, ++made) {
            synth::NegativeTransform t = tf.negative_template;
            t.kind = tf.negative_kinds[made % tf.negative_kinds.size()];
            t.seed = synth::derive_seed(tf.training.seed, 1000 + made);
            auto neg = dsp::spatial_mean_trace(synth::make_negative(cube.slice(start(rng), clip), t));
            (hold_out ? val.negatives : set.negatives).push_back(std::move(neg));
        }
    }
    for (auto& t : supplied_negatives) set.negatives.push_back(std::move(t));

    const estimator::ToyEstimator init(tf.architecture, tf.init_seed);
    const auto result = estimator::train(init, set, tf.training, held > 0 ? &val : nullptr);
    io::write_text(a.out, estimator::to_json(result.model) + "\n");
    if (!a.history.empty()) {
        std::string csv = "step,loss\n";
        for (std::size_t i = 0; i < result.loss_history.size(); ++i)
            csv += std::to_string(i + 1) + "," + io::format_double(result.loss_history[i]) + "\n";
        io::write_text(a.history, csv);
    }
    std::cerr << "trained " << result.loss_history.size() << " steps; best step " << result.best_step << "\n";
    return 0;
}

struct FeaturesArgs {
    std::string in, out, label;
    double window_s = 10.0, stride_s = 1.0;
};

int run_features(const FeaturesArgs& a) {
    const auto w = io::read_waveform(a.in);
    features::FeatureOptions opts;
    opts.window_s = a.window_s;
    opts.stride_s = a.stride_s;
    std::optional<classify::Label> label;
    if (a.label == "live") label = classify::Label::Live;
    else if (a.label == "anomalous") label = classify::Label::Anomalous;
    else if (!a.label.empty()) fail(ErrorKind::Config, "--label must be live or anomalous");
    std::vector<io::FeatureRow> rows;
    for (const auto& wf : features::extract_features(w, opts)) rows.push_back({wf.t_start, wf.features, label});
    io::write_text(a.out, io::features_csv(rows));
    return 0;
}

struct FitArgs {
    std::string in, kind = "two", out;
    double c = 1.0, nu = 0.5;
    std::optional<double> gamma;
    bool no_standardize = false;
};

int run_classify_fit(const FitArgs& a) {
    const auto rows = io::parse_features_csv(io::read_text(a.in));
    classify::SvmParams p;
    p.c = a.c;
    p.nu = a.nu;
    p.gamma = a.gamma;
    p.standardize = !a.no_standardize;
    classify::Rows x;
    std::vector<classify::Label> y;
    for (const auto& r : rows) {
        const auto v = r.features.values();
        if (a.kind == "one" && r.label && *r.label != classify::Label::Live) continue;
        x.emplace_back(v.begin(), v.end());
        if (a.kind == "two") {
            if (!r.label) fail(ErrorKind::InvalidTrainingSet, "two-class fitting needs a label column");
            y.push_back(*r.label);
        }
    }
    classify::SvmModel m;
    if (a.kind == "two") m = classify::fit_two_class(x, y, p);
    else if (a.kind == "one") m = classify::fit_one_class(x, p);
    else fail(ErrorKind::Config, "--kind must be one or two");
    io::write_text(a.out, classify::to_json(m) + "\n");
    return 0;
}

struct PredictArgs {
    std::string model, in, out;
};

int run_classify_predict(const PredictArgs& a) {
    const auto m = classify::from_json(io::read_text(a.model));
    const auto rows = io::parse_features_csv(io::read_text(a.in));
    std::vector<io::PredictionRow> out;
    std::size_t correct = 0, labelled = 0;
    for (const auto& r : rows) {
        const auto v = r.features.values();
        const auto p = m.predict(std::span<const double>(v));
        out.push_back({r.t_start, p});
        if (r.label) {
            ++labelled;
            correct += p.label == *r.label;
        }
    }
    io::write_text(a.out, io::predictions_csv(out));
    if (labelled > 0)
        std::cerr << "window accuracy " << static_cast<double>(correct) / static_cast<double>(labelled) << " over "
                  << labelled << " labelled windows\n";
    return 0;
}

struct RateArgs {
    std::string in, truth, report;
    std::size_t stride = 1;
};

int run_pulse_rate(const RateArgs& a) {
    evalx::RateOptions opts;
    opts.stride_frames = a.stride;
    const auto pred = evalx::pulse_rate(io::read_waveform(a.in), opts);
    nlohmann::ordered_json j;
    auto series = [](const evalx::RateSeries& s) {
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < s.size(); ++i)
            out.push_back({{"t", s.times[i]}, {"bpm", s.bpm[i] ? nlohmann::ordered_json(*s.bpm[i]) : nullptr}});
        return out;
    };
    j["window_s"] = pred.window_s;
    j["band_bpm"] = {pred.band.low_bpm, pred.band.high_bpm};
    if (!a.truth.empty()) {
        const auto truth = evalx::pulse_rate(io::read_waveform(a.truth), opts);
        const auto r = evalx::error_report(pred, truth);
        j["error"] = {{"me", r.me}, {"mae", r.mae}, {"rmse", r.rmse}, {"pairs", r.pairs}};
        j["error"]["pearson_r"] = r.pearson_r ? nlohmann::ordered_json(*r.pearson_r) : nullptr;
        j["truth"] = series(truth);
        std::cout << "ME " << r.me << "  MAE " << r.mae << "  RMSE " << r.rmse << "\n";
    }
    j["prediction"] = series(pred);
    if (!a.report.empty()) io::write_text(a.report, j.dump(1) + "\n");
    return 0;
}

struct ExperimentArgs {
    std::string config, out;
    bool dry_run = false;
};

int run_experiment(const ExperimentArgs& a) {
    auto cfg = config::parse_experiment(io::read_text(a.config));
    if (auto s = seed_override()) cfg.seed = *s;
    if (!a.out.empty()) cfg.output_dir = a.out;
    experiment::RunOptions opts;
    opts.dry_run = a.dry_run;
    opts.log = [](const std::string& line) { std::cerr << "[experiment] " << line << "\n"; };
    const auto report = experiment::run_experiment(cfg, opts);
    if (!a.dry_run) std::cout << report.text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pulsegate: anomaly-aware remote pulse estimation"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic pulsatile cube (optionally pulseless)");
    synth_cmd->add_option("--config", synth_args.config, "scene JSON")->required();
    synth_cmd->add_option("--out", synth_args.out, "output cube (.bin, sidecar written alongside)")->required();
    synth_cmd->add_option("--negative", synth_args.negative, "normal|uniform|shuffle");
    synth_cmd->add_option("--negative-seed", synth_args.negative_seed, "stream for the negative transform");
    synth_cmd->add_option("--truth", synth_args.truth, "ground-truth CSV (default <out>.truth.csv)");

    EstimateArgs est_args;
    auto* est_cmd = app.add_subcommand("estimate", "Estimate a pulse waveform from a cube");
    est_cmd->add_option("--method", est_args.method, "green|chrom|pos|model")->required();
    est_cmd->add_option("--in", est_args.in, "input cube (.bin)")->required();
    est_cmd->add_option("--out", est_args.out, "output waveform (.csv or .json)")->required();
    est_cmd->add_option("--model", est_args.model, "model JSON for --method model");
    est_cmd->add_flag("--bandpass", est_args.bandpass, "band-limit colour baselines to 40-240 bpm");
    est_cmd->add_option("--clip-len", est_args.clip_len, "model clip length in frames");
    est_cmd->add_option("--overlap", est_args.overlap, "clip overlap fraction");
    est_cmd->add_flag("--raw-clips", est_args.raw_clips, "stitch clip predictions without standardising");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train the toy estimator on a cube corpus");
    train_cmd->add_option("--config", train_args.config, "training JSON")->required();
    train_cmd->add_option("--corpus", train_args.corpus, "directory of .bin cubes (+ .truth.csv for positives)")->required();
    train_cmd->add_option("--out", train_args.out, "output model JSON")->required();
    train_cmd->add_option("--history", train_args.history, "per-step loss CSV");

    FeaturesArgs feat_args;
    auto* feat_cmd = app.add_subcommand("features", "Extract the 8 pulse features per window");
    feat_cmd->add_option("--in", feat_args.in, "waveform (.csv or .json)")->required();
    feat_cmd->add_option("--out", feat_args.out, "feature CSV")->required();
    feat_cmd->add_option("--label", feat_args.label, "attach a label column: live|anomalous");
    feat_cmd->add_option("--window-s", feat_args.window_s, "window length in seconds");
    feat_cmd->add_option("--stride-s", feat_args.stride_s, "window stride in seconds");

    auto* cls_cmd = app.add_subcommand("classify", "Fit or apply liveness SVMs");
    cls_cmd->require_subcommand(1);
    FitArgs fit_args;
    double gamma = 0.0;
    auto* fit_cmd = cls_cmd->add_subcommand("fit", "Fit a one- or two-class RBF SVM");
    fit_cmd->add_option("--in", fit_args.in, "feature CSV")->required();
    fit_cmd->add_option("--kind", fit_args.kind, "one|two")->check(CLI::IsMember({"one", "two"}));
    fit_cmd->add_option("--out", fit_args.out, "output model JSON")->required();
    fit_cmd->add_option("--C", fit_args.c, "two-class penalty");
    fit_cmd->add_option("--nu", fit_args.nu, "one-class nu");
    auto* gamma_opt = fit_cmd->add_option("--gamma", gamma, "RBF width (default 1/(d var X))");
    fit_cmd->add_flag("--no-standardize", fit_args.no_standardize, "skip the internal z-score");
    PredictArgs pred_args;
    auto* pred_cmd = cls_cmd->add_subcommand("predict", "Apply a fitted SVM");
    pred_cmd->add_option("--model", pred_args.model, "model JSON")->required();
    pred_cmd->add_option("--in", pred_args.in, "feature CSV")->required();
    pred_cmd->add_option("--out", pred_args.out, "prediction CSV")->required();

    RateArgs rate_args;
    auto* rate_cmd = app.add_subcommand("pulse-rate", "Windowed pulse rate and error metrics");
    rate_cmd->add_option("--in", rate_args.in, "predicted waveform")->required();
    rate_cmd->add_option("--truth", rate_args.truth, "ground-truth waveform");
    rate_cmd->add_option("--report", rate_args.report, "report JSON");
    rate_cmd->add_option("--stride", rate_args.stride, "window stride in frames");

    ExperimentArgs exp_args;
    auto* exp_cmd = app.add_subcommand("experiment", "Run the synthetic end-to-end experiment");
    exp_cmd->add_option("--config", exp_args.config, "experiment JSON")->required();
    exp_cmd->add_option("--out", exp_args.out, "output directory (overrides the config)");
    exp_cmd->add_flag("--dry-run", exp_args.dry_run, "validate the config and stop");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (gamma_opt->count() > 0) fit_args.gamma = gamma;
        if (*synth_cmd) return run_synth(synth_args);
        if (*est_cmd) return run_estimate(est_args);
        if (*train_cmd) return run_train(train_args);
        if (*feat_cmd) return run_features(feat_args);
        if (*fit_cmd) return run_classify_fit(fit_args);
        if (*pred_cmd) return run_classify_predict(pred_args);
        if (*rate_cmd) return run_pulse_rate(rate_args);
        if (*exp_cmd) return run_experiment(exp_args);
    } catch (const Error& e) {
        std::cerr << "pulsegate: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "pulsegate: io: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "pulsegate: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
