#pragma once
// JSON configuration files. Unknown keys are rejected so typos surface as
// config errors rather than silently falling back to defaults.

#include <string_view>

#include "pulsegate/estimator.hpp"
#include "pulsegate/experiment.hpp"
#include "pulsegate/synth.hpp"

namespace pulsegate::config {

synth::SceneConfig parse_scene(std::string_view json);

struct TrainFile {
    estimator::Architecture architecture;
    estimator::TrainConfig training;
    std::uint64_t init_seed = 0;
    synth::NegativeTransform negative_template;
    std::vector<synth::NegativeKind> negative_kinds{synth::NegativeKind::Normal, synth::NegativeKind::Uniform,
                                                    synth::NegativeKind::Shuffle};
    std::size_t negatives_per_video = 24;
    std::size_t validation_videos = 0;  // trailing corpus videos held out for snapshot selection
};
TrainFile parse_train(std::string_view json);

experiment::ExperimentConfig parse_experiment(std::string_view json);

}  // namespace pulsegate::config
