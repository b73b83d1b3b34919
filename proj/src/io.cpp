#include "pulsegate/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pulsegate/error.hpp"

namespace pulsegate::io {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t begin = 0;
    for (;;) {
        const auto pos = s.find(sep, begin);
        out.push_back(s.substr(begin, pos == std::string_view::npos ? std::string_view::npos : pos - begin));
        if (pos == std::string_view::npos) break;
        begin = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> lines(std::string_view text) {
    std::vector<std::string_view> out;
    for (auto l : split(text, '\n')) {
        l = trim(l);
        if (!l.empty()) out.push_back(l);
    }
    return out;
}

double parse_number(std::string_view s) {
    s = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail(ErrorKind::InvalidInput, "not a number: '" + std::string(s) + "'");
    return v;
}

}  // namespace

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) fail(ErrorKind::Io, "short write to " + path.string());
    }
    fs::rename(tmp, path);
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) fail(ErrorKind::InvalidArgument, "cannot format number");
    return std::string(buf, ptr);
}

std::string waveform_csv(const Waveform& w) {
    std::string out = "t,value\n";
    for (std::size_t i = 0; i < w.size(); ++i) {
        out += format_double(static_cast<double>(i) / w.fps());
        out += ',';
        out += format_double(w[i]);
        out += '\n';
    }
    return out;
}

std::string waveform_json(const Waveform& w) {
    nlohmann::ordered_json j;
    j["fps"] = w.fps();
    j["samples"] = w.values();
    return j.dump() + "\n";
}

Waveform parse_waveform_csv(std::string_view text) {
    const auto ls = lines(text);
    require(!ls.empty(), ErrorKind::InvalidInput, "empty waveform CSV");
    const auto header = split(ls.front(), ',');
    require(header.size() == 2 && trim(header[0]) == "t" && trim(header[1]) == "value", ErrorKind::InvalidInput,
            "waveform CSV header must be 't,value'");
    std::vector<double> t, v;
    for (std::size_t i = 1; i < ls.size(); ++i) {
        const auto cells = split(ls[i], ',');
        require(cells.size() == 2, ErrorKind::InvalidInput, "waveform CSV rows need two columns");
        t.push_back(parse_number(cells[0]));
        v.push_back(parse_number(cells[1]));
    }
    require(t.size() >= 2, ErrorKind::InvalidInput, "waveform needs at least two samples");
    const double span = t.back() - t.front();
    require(span > 0.0, ErrorKind::InvalidInput, "waveform times must increase");
    const double dt = span / static_cast<double>(t.size() - 1);
    for (std::size_t i = 0; i < t.size(); ++i)
        require(std::abs(t[i] - t.front() - dt * static_cast<double>(i)) <= 1e-6 * dt + 1e-9, ErrorKind::InvalidInput,
                "waveform samples are not uniformly spaced");
    // Times are printed from i / fps, so snap the recovered rate to micro-Hz.
    const double fps = static_cast<double>(t.size() - 1) / span;
    return Waveform(std::move(v), std::round(fps * 1e6) / 1e6);
}

Waveform parse_waveform_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        return Waveform(j.at("samples").get<std::vector<double>>(), j.at("fps").get<double>());
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidInput, std::string("malformed waveform JSON: ") + e.what());
    }
}

Waveform read_waveform(const fs::path& path) {
    const auto text = read_text(path);
    try {
        return path.extension() == ".json" ? parse_waveform_json(text) : parse_waveform_csv(text);
    } catch (const Error& e) {
        fail(e.kind(), path.string() + ": " + e.what());
    }
}

void write_waveform(const fs::path& path, const Waveform& w) {
    write_text(path, path.extension() == ".json" ? waveform_json(w) : waveform_csv(w));
}

fs::path cube_sidecar(const fs::path& bin) {
    fs::path side = bin;
    side.replace_extension(".json");
    require(side != bin, ErrorKind::InvalidArgument, "cube data file must not itself end in .json");
    return side;
}

void write_cube(const fs::path& bin, const VideoCube& cube) {
    static_assert(sizeof(float) == 4);
    const auto data = cube.data();
    write_text(bin, std::string_view(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(float)));
    nlohmann::ordered_json j;
    j["t"] = cube.frames();
    j["h"] = cube.height();
    j["w"] = cube.width();
    j["c"] = cube.channels();
    j["fps"] = cube.fps();
    j["dtype"] = "f32";
    j["order"] = "THWC";
    write_text(cube_sidecar(bin), j.dump(1) + "\n");
}

VideoCube read_cube(const fs::path& bin) {
    std::size_t t = 0, h = 0, w = 0, c = 0;
    double fps = 0.0;
    try {
        const auto j = nlohmann::json::parse(read_text(cube_sidecar(bin)));
        require(j.value("dtype", std::string("f32")) == "f32", ErrorKind::InvalidInput, "cube dtype must be f32");
        require(j.value("order", std::string("THWC")) == "THWC", ErrorKind::InvalidInput, "cube order must be THWC");
        t = j.at("t").get<std::size_t>();
        h = j.at("h").get<std::size_t>();
        w = j.at("w").get<std::size_t>();
        c = j.at("c").get<std::size_t>();
        fps = j.at("fps").get<double>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidInput, std::string("malformed cube sidecar: ") + e.what());
    }
    const auto raw = read_text(bin);
    const std::size_t count = t * h * w * c;
    require(raw.size() == count * sizeof(float), ErrorKind::InvalidInput, "cube size disagrees with its sidecar");
    std::vector<float> data(count);
    std::memcpy(data.data(), raw.data(), raw.size());
    VideoCube cube(t, h, w, c, fps, std::move(data));
    cube.validate_finite();
    return cube;
}

std::string features_csv(std::span<const FeatureRow> rows) {
    const bool labelled = !rows.empty() && rows.front().label.has_value();
    std::string out = "t_start";
    for (auto name : features::PulseFeatureVector::kNames) {
        out += ',';
        out += name;
    }
    out += labelled ? ",label\n" : "\n";
    for (const auto& r : rows) {
        require(r.label.has_value() == labelled, ErrorKind::InvalidArgument, "rows must all or none carry labels");
        out += format_double(r.t_start);
        for (double v : r.features.values()) {
            out += ',';
            out += format_double(v);
        }
        if (labelled) {
            out += ',';
            out += classify::to_string(*r.label);
        }
        out += '\n';
    }
    return out;
}

std::vector<FeatureRow> parse_features_csv(std::string_view text) {
    const auto ls = lines(text);
    require(!ls.empty(), ErrorKind::InvalidInput, "empty feature CSV");
    const auto header = split(ls.front(), ',');
    const std::size_t base = 1 + features::PulseFeatureVector::kSize;
    require(header.size() == base || header.size() == base + 1, ErrorKind::InvalidInput,
            "feature CSV needs t_start, 8 features and an optional label");
    require(trim(header[0]) == "t_start", ErrorKind::InvalidInput, "feature CSV must start with t_start");
    for (std::size_t i = 0; i < features::PulseFeatureVector::kSize; ++i)
        require(trim(header[i + 1]) == features::PulseFeatureVector::kNames[i], ErrorKind::InvalidInput,
                "unexpected feature column");
    const bool labelled = header.size() == base + 1;
    std::vector<FeatureRow> out;
    for (std::size_t li = 1; li < ls.size(); ++li) {
        const auto cells = split(ls[li], ',');
        require(cells.size() == header.size(), ErrorKind::InvalidInput, "feature CSV row has the wrong width");
        FeatureRow r;
        r.t_start = parse_number(cells[0]);
        std::vector<double> v;
        for (std::size_t i = 0; i < features::PulseFeatureVector::kSize; ++i) v.push_back(parse_number(cells[i + 1]));
        r.features = features::PulseFeatureVector::from_values(v);
        if (labelled) {
            const auto l = trim(cells.back());
            if (l == "live" || l == "1") r.label = classify::Label::Live;
            else if (l == "anomalous" || l == "0") r.label = classify::Label::Anomalous;
            else fail(ErrorKind::InvalidInput, "unknown label '" + std::string(l) + "'");
        }
        out.push_back(r);
    }
    return out;
}

std::string predictions_csv(std::span<const PredictionRow> rows) {
    std::string out = "t_start,label,decision\n";
    for (const auto& r : rows) {
        out += format_double(r.t_start);
        out += ',';
        out += classify::to_string(r.prediction.label);
        out += ',';
        out += format_double(r.prediction.decision);
        out += '\n';
    }
    return out;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        fail(ErrorKind::NumericalFailure, "SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

}  // namespace pulsegate::io
