#pragma once
// File formats: waveforms (CSV / JSON), raw video cubes with a JSON sidecar,
// feature and prediction tables, and content hashing.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pulsegate/classify.hpp"
#include "pulsegate/features.hpp"
#include "pulsegate/types.hpp"

namespace pulsegate::io {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path);
/// Writes through a temporary file and renames it into place.
void write_text(const fs::path& path, std::string_view text);

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// `.json` files use {"fps", "samples"}; anything else is CSV `t,value`.
Waveform read_waveform(const fs::path& path);
void write_waveform(const fs::path& path, const Waveform& w);
std::string waveform_csv(const Waveform& w);
std::string waveform_json(const Waveform& w);
Waveform parse_waveform_csv(std::string_view text);
Waveform parse_waveform_json(std::string_view text);

/// Sidecar of `cube.bin` is `cube.json`.
fs::path cube_sidecar(const fs::path& bin);
void write_cube(const fs::path& bin, const VideoCube& cube);
VideoCube read_cube(const fs::path& bin);

struct FeatureRow {
    double t_start = 0.0;
    features::PulseFeatureVector features;
    std::optional<classify::Label> label;
};

std::string features_csv(std::span<const FeatureRow> rows);
std::vector<FeatureRow> parse_features_csv(std::string_view text);

struct PredictionRow {
    double t_start = 0.0;
    classify::Prediction prediction;
};
std::string predictions_csv(std::span<const PredictionRow> rows);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const fs::path& path);

}  // namespace pulsegate::io
