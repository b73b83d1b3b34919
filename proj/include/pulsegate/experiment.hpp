#pragma once
// End-to-end synthetic reproduction: corpora -> estimator variants ->
// inference -> features -> SVMs -> accuracy / pulse-rate reports.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pulsegate/classify.hpp"
#include "pulsegate/estimator.hpp"
#include "pulsegate/evaluation.hpp"
#include "pulsegate/features.hpp"
#include "pulsegate/losses.hpp"
#include "pulsegate/synth.hpp"

namespace pulsegate::experiment {

/// How per-video scenes are drawn around the scene template.
struct WorldConfig {
    synth::SceneConfig scene;  // fps, size, amplitude, colours; trajectory and seed are drawn
    double hr_low_bpm = 60.0;  // per-video centre rate ~ U[low, high]
    double hr_high_bpm = 90.0;
    double hr_knot_spacing_s = 2.0;
    double hr_jitter_bpm = 5.0;  // knot = centre + N(0, jitter), clipped to [40, 240]
    double noise_low = 8.0;      // per-video sensor noise ~ U[low, high] (8-bit units)
    double noise_high = 24.0;
};

struct CorpusSpec {
    std::size_t videos = 0;
    double duration_s = 0.0;
};

struct VariantSpec {
    std::string name;
    losses::NegativeLoss negative = losses::NegativeLoss::None;
    double negative_mix = 0.5;  // forced to 0 when negative == None
    /// Standardise clip predictions before stitching. The STD variant is
    /// judged on raw amplitude, so it stitches unstandardised clips.
    bool standardize_clips = true;
};

struct ExperimentConfig {
    std::uint64_t seed = 7;
    WorldConfig world;
    CorpusSpec train{16, 60.0};
    CorpusSpec validation{9, 40.0};
    CorpusSpec test{9, 40.0};
    std::vector<synth::NegativeKind> negative_kinds{synth::NegativeKind::Normal, synth::NegativeKind::Uniform,
                                                    synth::NegativeKind::Shuffle};
    synth::NegativeTransform negative_template;  // sigma / bounds; kind and seed are set per sample
    std::size_t negative_pool = 384;
    estimator::Architecture architecture;
    estimator::TrainConfig training;  // negative loss / mix come from each variant
    std::vector<VariantSpec> variants;
    estimator::InferenceOptions inference;
    features::FeatureOptions features;
    classify::SvmParams svm;
    evalx::RateOptions rate;
    bool baselines = true;
    std::filesystem::path output_dir = "experiment-out";

    ExperimentConfig();
    void validate() const;
};

struct SnrSummary {
    double positive_median = 0.0;
    double negative_median = 0.0;  // pooled over all negative kinds
    std::map<std::string, double> per_kind;
};

struct MethodReport {
    std::string name;
    bool trained = false;
    // estimator-only diagnostics
    std::size_t best_step = 0;
    double final_loss = 0.0;
    SnrSummary snr;
    double positive_std_median = 0.0;  // raw (unstandardised) prediction std
    double negative_std_median = 0.0;
    // shared by all methods
    double accuracy_two_class = 0.0;
    double accuracy_one_class = 0.0;
    evalx::ErrorReport rate;
};

struct ExperimentReport {
    std::vector<MethodReport> methods;  // variants first, then baselines
    std::string json;                   // report.json contents
    std::string text;                   // report.txt contents
    std::map<std::string, std::string> manifest;  // file name -> sha256

    const MethodReport& method(const std::string& name) const;
};

struct RunOptions {
    bool dry_run = false;
    bool write_files = true;
    std::function<void(const std::string&)> log;  // progress lines; may be empty
};

/// Runs every stage; failures are rethrown with the stage name prefixed.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Draws the scene for video `index` of a corpus identified by `stream`.
synth::SceneConfig draw_scene(const ExperimentConfig& cfg, std::uint64_t stream, std::size_t index,
                              double duration_s);

}  // namespace pulsegate::experiment
