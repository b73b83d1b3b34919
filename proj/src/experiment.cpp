#include "pulsegate/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "pulsegate/baselines.hpp"
#include "pulsegate/error.hpp"
#include "pulsegate/io.hpp"
#include "pulsegate/signal.hpp"

namespace pulsegate::experiment {

namespace {

// Seed streams; every random draw in the pipeline hangs off one of these.
enum Stream : std::uint64_t {
    kTrainVideos = 101,
    kValidationVideos = 102,
    kTestVideos = 103,
    kPool = 104,
    kNegatives = 105,
    kTraining = 106,
    kInit = 107,
};

using Json = nlohmann::ordered_json;

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Waveform slice(const Waveform& w, std::size_t begin, std::size_t count) {
    const auto s = w.samples().subspan(begin, count);
    return Waveform(std::vector<double>(s.begin(), s.end()), w.fps());
}

std::string strip_kind(const Error& e) {
    const std::string what = e.what();
    const auto kind = std::string(to_string(e.kind())) + ": ";
    return what.rfind(kind, 0) == 0 ? what.substr(kind.size()) : what;
}

template <typename F>
auto stage(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        fail(e.kind(), "stage " + name + ": " + strip_kind(e));
    }
}

struct Video {
    Trace trace;
    Waveform truth;
    std::vector<Trace> negatives;  // one per configured kind
    std::size_t dataset_negative;  // index into negatives used for the labelled dataset
};

struct TrainCorpus {
    estimator::TrainingSet set;
};

synth::NegativeTransform transform_for(const ExperimentConfig& cfg, synth::NegativeKind kind, std::uint64_t seed) {
    synth::NegativeTransform t = cfg.negative_template;
    t.kind = kind;
    t.seed = seed;
    return t;
}

std::vector<Video> make_eval_corpus(const ExperimentConfig& cfg, Stream stream, const CorpusSpec& spec) {
    std::vector<Video> out;
    for (std::size_t i = 0; i < spec.videos; ++i) {
        const auto scene = draw_scene(cfg, stream, i, spec.duration_s);
        auto sample = synth::generate_positive(scene);
        Video v{dsp::spatial_mean_trace(sample.video), std::move(sample.truth), {}, i % cfg.negative_kinds.size()};
        for (std::size_t k = 0; k < cfg.negative_kinds.size(); ++k) {
            const auto seed = synth::derive_seed(synth::derive_seed(cfg.seed, kNegatives),
                                                 (stream << 32) ^ (i << 8) ^ k);
            const auto neg = synth::make_negative(sample.video, transform_for(cfg, cfg.negative_kinds[k], seed));
            v.negatives.push_back(dsp::spatial_mean_trace(neg));
        }
        out.push_back(std::move(v));
    }
    return out;
}

estimator::TrainingSet make_train_corpus(const ExperimentConfig& cfg) {
    estimator::TrainingSet set;
    const std::size_t clip = cfg.training.clip_len;
    const std::size_t per_video = (cfg.negative_pool + cfg.train.videos - 1) / cfg.train.videos;
    std::mt19937_64 pick(synth::derive_seed(cfg.seed, kPool));
    std::size_t made = 0;
    for (std::size_t i = 0; i < cfg.train.videos; ++i) {
        const auto scene = draw_scene(cfg, kTrainVideos, i, cfg.train.duration_s);
        auto sample = synth::generate_positive(scene);
        set.positives.push_back({dsp::spatial_mean_trace(sample.video), std::move(sample.truth)});
        std::uniform_int_distribution<std::size_t> start(0, sample.video.frames() - clip);
        for (std::size_t j = 0; j < per_video && made < cfg.negative_pool; ++j, ++made) {
            const auto kind = cfg.negative_kinds[made % cfg.negative_kinds.size()];
            const auto seed = synth::derive_seed(synth::derive_seed(cfg.seed, kPool), made);
            const auto piece = sample.video.slice(start(pick), clip);
            set.negatives.push_back(dsp::spatial_mean_trace(synth::make_negative(piece, transform_for(cfg, kind, seed))));
        }
    }
    return set;
}

estimator::ValidationSet make_validation_set(const ExperimentConfig& cfg, const std::vector<Video>& videos) {
    estimator::ValidationSet val;
    const std::size_t clip = cfg.training.clip_len;
    for (const auto& v : videos) {
        const std::size_t n = v.trace.frames();
        for (std::size_t begin : {std::size_t{0}, (n - clip) / 2}) {
            val.positives.push_back({v.trace.slice(begin, clip), slice(v.truth, begin, clip)});
            val.negatives.push_back(v.negatives[v.dataset_negative].slice(begin, clip));
        }
    }
    return val;
}

// Waveform predictor: (trace, standardise clips?) -> prediction.
using Method = std::function<Waveform(const Trace&, bool)>;

struct LabelledRows {
    classify::Rows x;
    std::vector<classify::Label> y;
};

struct VideoFeatures {
    std::vector<features::WindowFeatures> windows;
    classify::Label label;
    std::size_t frames;
};

classify::AccuracyTally tally(const classify::SvmModel& m, const VideoFeatures& vf, const ExperimentConfig& cfg,
                              double fps) {
    std::vector<classify::Label> preds;
    std::vector<double> centres;
    for (const auto& w : vf.windows) {
        const auto v = w.features.values();
        preds.push_back(m.predict(std::span<const double>(v)).label);
        centres.push_back(w.t_start + 0.5 * cfg.features.window_s);
    }
    const std::vector<classify::Label> frames(vf.frames, vf.label);
    return classify::frame_tally(preds, centres, frames, fps, cfg.features.window_s);
}

struct MethodOutcome {
    MethodReport report;
    classify::SvmModel two, one;
    Waveform sample_pos, sample_neg;
    std::vector<VideoFeatures> test_features;
};

MethodOutcome evaluate_method(const ExperimentConfig& cfg, const std::string& name, const Method& method,
                              bool standardize, const std::vector<Video>& val, const std::vector<Video>& test,
                              bool estimator_diagnostics) {
    MethodOutcome out{MethodReport{}, {}, {}, Waveform({0.0, 0.0}, 1.0), Waveform({0.0, 0.0}, 1.0), {}};
    out.report.name = name;
    const double fps = cfg.world.scene.fps;

    auto feats = [&](const Waveform& w) { return features::extract_features(w, cfg.features); };

    LabelledRows train_two, train_one;
    for (const auto& v : val) {
        for (const auto& [trace, label] : {std::pair{&v.trace, classify::Label::Live},
                                           std::pair{&v.negatives[v.dataset_negative], classify::Label::Anomalous}}) {
            for (const auto& w : feats(method(*trace, standardize))) {
                const auto vals = w.features.values();
                train_two.x.emplace_back(vals.begin(), vals.end());
                train_two.y.push_back(label);
                if (label == classify::Label::Live) train_one.x.emplace_back(vals.begin(), vals.end());
            }
        }
    }

    std::vector<double> snr_pos, snr_neg, std_pos, std_neg;
    std::map<std::string, std::vector<double>> snr_kind;
    evalx::RateSeries pred_rates, truth_rates;
    for (std::size_t vi = 0; vi < test.size(); ++vi) {
        const auto& v = test[vi];
        const auto pos = method(v.trace, standardize);
        const auto pos_feats = feats(pos);
        for (const auto& w : pos_feats) snr_pos.push_back(w.features.snr_db);
        out.test_features.push_back({pos_feats, classify::Label::Live, v.trace.frames()});

        const auto pr = evalx::pulse_rate(pos, cfg.rate);
        const auto tr = evalx::pulse_rate(v.truth, cfg.rate);
        pred_rates.times.insert(pred_rates.times.end(), pr.times.begin(), pr.times.end());
        pred_rates.bpm.insert(pred_rates.bpm.end(), pr.bpm.begin(), pr.bpm.end());
        truth_rates.times.insert(truth_rates.times.end(), tr.times.begin(), tr.times.end());
        truth_rates.bpm.insert(truth_rates.bpm.end(), tr.bpm.begin(), tr.bpm.end());

        if (estimator_diagnostics) std_pos.push_back(dsp::population_std(method(v.trace, false).samples()));
        for (std::size_t k = 0; k < v.negatives.size(); ++k) {
            const auto neg = method(v.negatives[k], standardize);
            const auto neg_feats = k == v.dataset_negative || estimator_diagnostics
                                       ? feats(neg)
                                       : std::vector<features::WindowFeatures>{};
            const std::string kind = synth::to_string(cfg.negative_kinds[k]);
            for (const auto& w : neg_feats) {
                snr_neg.push_back(w.features.snr_db);
                snr_kind[kind].push_back(w.features.snr_db);
            }
            if (k == v.dataset_negative) {
                out.test_features.push_back({neg_feats, classify::Label::Anomalous, v.negatives[k].frames()});
                if (vi == 0) out.sample_neg = neg;
            }
            if (estimator_diagnostics) std_neg.push_back(dsp::population_std(method(v.negatives[k], false).samples()));
        }
        if (vi == 0) out.sample_pos = pos;
    }

    out.two = classify::fit_two_class(train_two.x, train_two.y, cfg.svm);
    out.one = classify::fit_one_class(train_one.x, cfg.svm);
    std::vector<classify::AccuracyTally> t2, t1;
    for (const auto& vf : out.test_features) {
        t2.push_back(tally(out.two, vf, cfg, fps));
        t1.push_back(tally(out.one, vf, cfg, fps));
    }

    auto& r = out.report;
    r.snr.positive_median = median(snr_pos);
    r.snr.negative_median = median(snr_neg);
    for (const auto& [kind, values] : snr_kind) r.snr.per_kind[kind] = median(values);
    r.positive_std_median = median(std_pos);
    r.negative_std_median = median(std_neg);
    r.accuracy_two_class = classify::combine(t2).accuracy();
    r.accuracy_one_class = classify::combine(t1).accuracy();
    r.rate = evalx::error_report(pred_rates, truth_rates);
    return out;
}

Json method_json(const MethodReport& m) {
    Json j;
    j["name"] = m.name;
    j["trained"] = m.trained;
    if (m.trained) {
        j["best_step"] = m.best_step;
        j["final_loss"] = m.final_loss;
        j["positive_std_median"] = m.positive_std_median;
        j["negative_std_median"] = m.negative_std_median;
    }
    j["snr_db"] = {{"positive_median", m.snr.positive_median}, {"negative_median", m.snr.negative_median}};
    for (const auto& [kind, v] : m.snr.per_kind) j["snr_db"]["negative_" + kind] = v;
    j["accuracy"] = {{"two_class", m.accuracy_two_class}, {"one_class", m.accuracy_one_class}};
    j["pulse_rate"] = {{"me", m.rate.me}, {"mae", m.rate.mae}, {"rmse", m.rate.rmse}, {"pairs", m.rate.pairs}};
    j["pulse_rate"]["pearson_r"] = m.rate.pearson_r ? Json(*m.rate.pearson_r) : Json(nullptr);
    return j;
}

std::string fixed(double v, int digits) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(digits);
    ss << v;
    return ss.str();
}

std::string text_report(const ExperimentConfig& cfg, const std::vector<MethodReport>& methods) {
    std::ostringstream s;
    s << "pulsegate synthetic experiment (seed " << cfg.seed << ")\n";
    s << "All numbers come from synthetic scenes; they illustrate qualitative behaviour only\n";
    s << "and are not comparable to results on recorded video datasets.\n\n";
    s << "Liveness detection (frame accuracy on held-out synthetic videos)\n";
    s << "method              two-class  one-class  SNR+ dB  SNR- dB\n";
    for (const auto& m : methods) {
        std::string name = m.name;
        name.resize(18, ' ');
        s << name << "  " << fixed(100.0 * m.accuracy_two_class, 2) << "%    " << fixed(100.0 * m.accuracy_one_class, 2)
          << "%    " << fixed(m.snr.positive_median, 2) << "    " << fixed(m.snr.negative_median, 2) << "\n";
    }
    s << "\nPulse rate on held-out positives (bpm)\n";
    s << "method              ME       MAE      RMSE     r\n";
    for (const auto& m : methods) {
        std::string name = m.name;
        name.resize(18, ' ');
        s << name << "  " << fixed(m.rate.me, 3) << "   " << fixed(m.rate.mae, 3) << "   " << fixed(m.rate.rmse, 3)
          << "   " << (m.rate.pearson_r ? fixed(*m.rate.pearson_r, 3) : std::string("n/a")) << "\n";
    }
    bool any_std = false;
    for (const auto& m : methods) any_std = any_std || m.trained;
    if (any_std) {
        s << "\nRaw prediction amplitude (median std, unstandardised)\n";
        s << "method              positives    negatives    ratio\n";
        for (const auto& m : methods) {
            if (!m.trained) continue;
            std::string name = m.name;
            name.resize(18, ' ');
            const double ratio = m.positive_std_median > 0.0 ? m.negative_std_median / m.positive_std_median : 0.0;
            s << name << "  " << fixed(m.positive_std_median, 5) << "      " << fixed(m.negative_std_median, 5)
              << "      " << fixed(ratio, 3) << "\n";
        }
    }
    return s.str();
}

std::string columns_csv(const std::vector<std::string>& names, const std::vector<std::vector<double>>& cols) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + names[i];
    out += '\n';
    std::size_t rows = 0;
    for (const auto& c : cols) rows = std::max(rows, c.size());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) out += ',';
            if (r < cols[i].size()) out += io::format_double(cols[i][r]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
    world.scene.pulse_amplitude = 0.001;
    architecture.kernel2 = 31;
    architecture.dilation2 = 9;
    variants = {
        {"positives-only", losses::NegativeLoss::None, 0.0, true},
        {"std", losses::NegativeLoss::Std, 0.5, false},
        {"entropy", losses::NegativeLoss::SpectralEntropy, 0.5, true},
        {"flatness", losses::NegativeLoss::SpectralFlatness, 0.5, true},
    };
}

void ExperimentConfig::validate() const {
    require(train.videos >= 1 && validation.videos >= 1 && test.videos >= 1, ErrorKind::Config,
            "every corpus needs at least one video");
    require(world.hr_low_bpm >= 40.0 && world.hr_high_bpm <= 240.0 && world.hr_low_bpm <= world.hr_high_bpm,
            ErrorKind::Config, "heart-rate range must lie inside [40, 240] bpm");
    require(world.hr_knot_spacing_s > 0.0 && world.hr_jitter_bpm >= 0.0, ErrorKind::Config,
            "knot spacing must be positive and jitter non-negative");
    require(world.noise_low >= 0.0 && world.noise_low <= world.noise_high, ErrorKind::Config,
            "noise range must be ordered and non-negative");
    require(!negative_kinds.empty(), ErrorKind::Config, "at least one negative kind is required");
    require(negative_pool >= 1, ErrorKind::Config, "negative pool must not be empty");
    require(!variants.empty(), ErrorKind::Config, "at least one estimator variant is required");
    for (std::size_t i = 0; i < variants.size(); ++i) {
        require(!variants[i].name.empty(), ErrorKind::Config, "variant names must not be empty");
        for (std::size_t j = 0; j < i; ++j)
            require(variants[i].name != variants[j].name, ErrorKind::Config, "variant names must be unique");
        require(variants[i].negative_mix >= 0.0 && variants[i].negative_mix <= 1.0, ErrorKind::Config,
                "variant negative_mix must lie in [0, 1]");
    }
    negative_template.validate();
    architecture.validate();
    training.validate();
    require(std::abs(architecture.fps - world.scene.fps) <= 1e-9, ErrorKind::Config,
            "architecture fps must equal the scene fps");
    training.loss.validate(training.clip_len, world.scene.fps);
    features.validate();

    auto probe = world.scene;
    probe.hr_trajectory = {{0.0, world.hr_low_bpm}};
    probe.duration_s = std::min({train.duration_s, validation.duration_s, test.duration_s});
    probe.validate();
    const auto frames = probe.frame_count();
    require(frames >= training.clip_len && frames >= inference.clip_len, ErrorKind::Config,
            "videos must be at least one clip long");
    require(frames >= features::window_samples(probe.fps, features), ErrorKind::Config,
            "videos must be at least one feature window long");
    require(static_cast<double>(frames) >= rate.window_s * probe.fps, ErrorKind::Config,
            "videos must be at least one rate window long");
}

const MethodReport& ExperimentReport::method(const std::string& name) const {
    for (const auto& m : methods)
        if (m.name == name) return m;
    fail(ErrorKind::InvalidArgument, "no method named '" + name + "' in the report");
}

synth::SceneConfig draw_scene(const ExperimentConfig& cfg, std::uint64_t stream, std::size_t index,
                              double duration_s) {
    std::mt19937_64 rng(synth::derive_seed(synth::derive_seed(cfg.seed, stream), index));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 1.0);
    auto scene = cfg.world.scene;
    scene.duration_s = duration_s;
    const double centre = cfg.world.hr_low_bpm + unit(rng) * (cfg.world.hr_high_bpm - cfg.world.hr_low_bpm);
    const auto knots = static_cast<std::size_t>(std::floor(duration_s / cfg.world.hr_knot_spacing_s)) + 2;
    scene.hr_trajectory.clear();
    for (std::size_t k = 0; k < knots; ++k) {
        const double bpm = std::clamp(centre + cfg.world.hr_jitter_bpm * jitter(rng), 40.0, 240.0);
        scene.hr_trajectory.push_back({static_cast<double>(k) * cfg.world.hr_knot_spacing_s, bpm});
    }
    scene.sensor_noise_sigma = cfg.world.noise_low + unit(rng) * (cfg.world.noise_high - cfg.world.noise_low);
    scene.seed = rng();
    return scene;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
    auto log = [&](const std::string& line) {
        if (opts.log) opts.log(line);
    };
    stage("config", [&] {
        cfg.validate();
        return 0;
    });
    if (opts.dry_run) {
        log("config ok: " + std::to_string(cfg.variants.size()) + " estimator variants, " +
            std::to_string(cfg.train.videos) + "/" + std::to_string(cfg.validation.videos) + "/" +
            std::to_string(cfg.test.videos) + " train/validation/test videos");
        return ExperimentReport{};
    }

    log("generating corpora");
    const auto train_set = stage("corpus/train", [&] { return make_train_corpus(cfg); });
    const auto val = stage("corpus/validation", [&] { return make_eval_corpus(cfg, kValidationVideos, cfg.validation); });
    const auto test = stage("corpus/test", [&] { return make_eval_corpus(cfg, kTestVideos, cfg.test); });
    const auto val_clips = make_validation_set(cfg, val);

    const estimator::ToyEstimator init(cfg.architecture, synth::derive_seed(cfg.seed, kInit));
    std::vector<MethodOutcome> outcomes;
    std::vector<std::pair<std::string, std::vector<double>>> histories;
    std::map<std::string, std::string> files;  // name -> contents

    for (const auto& variant : cfg.variants) {
        auto tc = cfg.training;
        tc.seed = synth::derive_seed(cfg.seed, kTraining);
        tc.loss.negative = variant.negative;
        tc.negative_mix = variant.negative == losses::NegativeLoss::None ? 0.0 : variant.negative_mix;
        log("training " + variant.name);
        const auto trained = stage("train/" + variant.name, [&] { return estimator::train(init, train_set, tc, &val_clips); });
        const auto& model = trained.model;
        log("evaluating " + variant.name);
        Method method = [&](const Trace& t, bool standardize) {
            auto inf = cfg.inference;
            inf.standardize_clips = standardize;
            return estimator::infer_video(model, t, inf);
        };
        auto outcome = stage("evaluate/" + variant.name, [&] {
            return evaluate_method(cfg, variant.name, method, variant.standardize_clips, val, test, true);
        });
        outcome.report.trained = true;
        outcome.report.best_step = trained.best_step;
        outcome.report.final_loss = trained.loss_history.empty() ? 0.0 : trained.loss_history.back();
        files["model_" + variant.name + ".json"] = estimator::to_json(model) + "\n";
        histories.emplace_back(variant.name, trained.loss_history);
        outcomes.push_back(std::move(outcome));
    }

    if (cfg.baselines) {
        for (auto m : {baselines::Method::Green, baselines::Method::Chrom, baselines::Method::Pos}) {
            const std::string name = baselines::to_string(m);
            log("evaluating baseline " + name);
            Method method = [m](const Trace& t, bool) { return baselines::estimate(m, t).wave; };
            outcomes.push_back(stage("evaluate/" + name, [&] {
                return evaluate_method(cfg, name, method, true, val, test, false);
            }));
        }
    }

    ExperimentReport report;
    for (const auto& o : outcomes) {
        report.methods.push_back(o.report);
        files["svm_" + o.report.name + "_two.json"] = classify::to_json(o.two) + "\n";
        files["svm_" + o.report.name + "_one.json"] = classify::to_json(o.one) + "\n";
        std::vector<io::FeatureRow> rows;
        for (const auto& vf : o.test_features)
            for (const auto& w : vf.windows) rows.push_back({w.t_start, w.features, vf.label});
        files["features_" + o.report.name + ".csv"] = io::features_csv(rows);
    }

    {
        std::vector<std::string> names{"step"};
        std::vector<std::vector<double>> cols(1);
        for (const auto& [name, h] : histories) {
            names.push_back(name);
            cols.push_back(h);
            if (cols[0].size() < h.size())
                for (std::size_t i = cols[0].size(); i < h.size(); ++i) cols[0].push_back(static_cast<double>(i + 1));
        }
        files["loss_history.csv"] = columns_csv(names, cols);
    }
    {
        // First test video: up to 20 s of every method's stitched output.
        const auto& v = test.front();
        const double fps = v.truth.fps();
        const std::size_t n = std::min<std::size_t>(v.truth.size(), static_cast<std::size_t>(std::llround(20.0 * fps)));
        std::vector<std::string> names{"t", "truth"};
        std::vector<std::vector<double>> cols(2);
        for (std::size_t i = 0; i < n; ++i) {
            cols[0].push_back(static_cast<double>(i) / fps);
            cols[1].push_back(v.truth[i]);
        }
        std::vector<std::string> pnames{"bpm"};
        std::vector<std::vector<double>> pcols(1);
        const auto win = features::window_samples(fps, cfg.features);
        const auto bins = dsp::band_bins(fps, cfg.features.snr.nfft, cfg.features.snr.band);
        for (std::size_t k = bins.first; k <= bins.last; ++k) pcols[0].push_back(dsp::bin_bpm(k, fps, cfg.features.snr.nfft));
        for (const auto& o : outcomes) {
            for (const auto& [suffix, w] : {std::pair{"_pos", &o.sample_pos}, std::pair{"_neg", &o.sample_neg}}) {
                names.push_back(o.report.name + suffix);
                cols.emplace_back(w->values().begin(), w->values().begin() + static_cast<std::ptrdiff_t>(n));
                const auto psd = dsp::psd_normalized(w->samples().subspan(0, win), fps, cfg.features.snr.nfft,
                                                     cfg.features.snr.band);
                pnames.push_back(o.report.name + suffix);
                const auto in_band = psd.degenerate ? std::vector<double>(bins.count(), 0.0)
                                                    : std::vector<double>(psd.in_band().begin(), psd.in_band().end());
                pcols.push_back(in_band);
            }
        }
        files["waveforms.csv"] = columns_csv(names, cols);
        files["periodograms.csv"] = columns_csv(pnames, pcols);
    }

    report.text = text_report(cfg, report.methods);
    files["report.txt"] = report.text;
    for (const auto& [name, contents] : files) report.manifest[name] = io::sha256_hex(contents);

    Json j;
    j["format"] = "pulsegate-experiment-report";
    j["version"] = 1;
    j["seed"] = cfg.seed;
    j["note"] = "synthetic desk-scale data; qualitative reproduction only";
    j["corpora"] = {{"train", {{"videos", cfg.train.videos}, {"duration_s", cfg.train.duration_s}}},
                    {"validation", {{"videos", cfg.validation.videos}, {"duration_s", cfg.validation.duration_s}}},
                    {"test", {{"videos", cfg.test.videos}, {"duration_s", cfg.test.duration_s}}}};
    j["methods"] = Json::array();
    for (const auto& m : report.methods) j["methods"].push_back(method_json(m));
    j["manifest"] = report.manifest;
    report.json = j.dump(2) + "\n";

    if (opts.write_files) {
        stage("write", [&] {
            for (const auto& [name, contents] : files) io::write_text(cfg.output_dir / name, contents);
            io::write_text(cfg.output_dir / "report.json", report.json);
            return 0;
        });
        log("wrote " + std::to_string(files.size() + 1) + " files to " + cfg.output_dir.string());
    }
    return report;
}

}  // namespace pulsegate::experiment
