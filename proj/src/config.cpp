#include "pulsegate/config.hpp"

#include <set>
#include <string>

#include <json.hpp>

#include "pulsegate/error.hpp"

namespace pulsegate::config {

namespace {

using Json = nlohmann::json;

// Object view that remembers which keys were read; leftovers are an error.
class Obj {
public:
    Obj(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) fail(ErrorKind::Config, where_ + " must be a JSON object");
    }
    ~Obj() = default;

    bool has(const std::string& key) const { return j_.contains(key); }

    template <typename T>
    void get(const std::string& key, T& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            fail(ErrorKind::Config, where_ + "." + key + " has the wrong type");
        }
    }

    const Json* child(const std::string& key) {
        if (!j_.contains(key)) return nullptr;
        seen_.insert(key);
        return &j_.at(key);
    }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) fail(ErrorKind::Config, "unknown key " + where_ + "." + key);
    }

private:
    const Json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

Json parse(std::string_view text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Config, std::string("malformed JSON: ") + e.what());
    }
}

dsp::Band band_of(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        fail(ErrorKind::Config, where + " must be [low_bpm, high_bpm]");
    return dsp::Band{j[0].get<double>(), j[1].get<double>()};
}

void read_scene(const Json& j, synth::SceneConfig& s, const std::string& where) {
    Obj o(j, where);
    o.get("duration_s", s.duration_s);
    o.get("fps", s.fps);
    o.get("height", s.height);
    o.get("width", s.width);
    o.get("pulse_amplitude", s.pulse_amplitude);
    o.get("dicrotic_ratio", s.dicrotic_ratio);
    o.get("sensor_noise_sigma", s.sensor_noise_sigma);
    o.get("skin_rgb", s.skin_rgb);
    o.get("pulse_signature", s.pulse_signature);
    o.get("texture_amplitude", s.texture_amplitude);
    o.get("seed", s.seed);
    if (const Json* hr = o.child("hr_trajectory")) {
        if (!hr->is_array()) fail(ErrorKind::Config, where + ".hr_trajectory must be an array of [t_s, bpm]");
        s.hr_trajectory.clear();
        for (const auto& k : *hr) {
            if (!k.is_array() || k.size() != 2) fail(ErrorKind::Config, where + ".hr_trajectory entries are [t_s, bpm]");
            s.hr_trajectory.push_back({k[0].get<double>(), k[1].get<double>()});
        }
    }
    if (const Json* bpm = o.child("hr_bpm")) s.hr_trajectory = {{0.0, bpm->get<double>()}};
    o.finish();
}

void read_architecture(const Json& j, estimator::Architecture& a) {
    Obj o(j, "architecture");
    o.get("in_channels", a.in_channels);
    o.get("filters", a.filters);
    o.get("kernel1", a.kernel1);
    o.get("kernel2", a.kernel2);
    o.get("dilation2", a.dilation2);
    std::string act = estimator::to_string(a.activation), padding = estimator::to_string(a.padding);
    o.get("activation", act);
    o.get("padding", padding);
    if (act != "tanh" && act != "identity") fail(ErrorKind::Config, "architecture.activation must be tanh or identity");
    if (padding != "edge" && padding != "zero") fail(ErrorKind::Config, "architecture.padding must be edge or zero");
    a.activation = act == "tanh" ? estimator::Activation::Tanh : estimator::Activation::Identity;
    a.padding = padding == "edge" ? estimator::Padding::Edge : estimator::Padding::Zero;
    o.get("normalize_input", a.normalize_input);
    o.get("input_gain", a.input_gain);
    o.get("fps", a.fps);
    o.get("init_scale", a.init_scale);
    o.finish();
}

void read_loss(const Json& j, losses::LossSpec& l) {
    Obj o(j, "training.loss");
    std::string pos = losses::to_string(l.positive), neg = losses::to_string(l.negative);
    o.get("positive", pos);
    o.get("negative", neg);
    l.positive = losses::parse_positive_loss(pos);
    l.negative = losses::parse_negative_loss(neg);
    o.get("nfft", l.spectral.nfft);
    if (const Json* b = o.child("band_bpm")) l.spectral.band = band_of(*b, "training.loss.band_bpm");
    std::string scale = l.spectral.scale == dsp::SpectrumScale::Power ? "power" : "magnitude";
    o.get("scale", scale);
    if (scale != "power" && scale != "magnitude") fail(ErrorKind::Config, "training.loss.scale must be power or magnitude");
    l.spectral.scale = scale == "power" ? dsp::SpectrumScale::Power : dsp::SpectrumScale::Magnitude;
    o.finish();
}

void read_training(const Json& j, estimator::TrainConfig& t) {
    Obj o(j, "training");
    o.get("clip_len", t.clip_len);
    o.get("batch_size", t.batch_size);
    o.get("steps", t.steps);
    o.get("learning_rate", t.learning_rate);
    o.get("momentum", t.momentum);
    o.get("seed", t.seed);
    o.get("negative_mix", t.negative_mix);
    o.get("eval_every", t.eval_every);
    if (const Json* l = o.child("loss")) read_loss(*l, t.loss);
    o.finish();
}

void read_negatives(const Json& j, synth::NegativeTransform& tmpl, std::vector<synth::NegativeKind>& kinds,
                    std::size_t* pool, std::size_t* per_video) {
    Obj o(j, "negatives");
    if (const Json* k = o.child("kinds")) {
        kinds.clear();
        for (const auto& name : *k) kinds.push_back(synth::parse_negative_kind(name.get<std::string>()));
        if (kinds.empty()) fail(ErrorKind::Config, "negatives.kinds must not be empty");
    }
    o.get("normal_sigma", tmpl.normal_sigma);
    o.get("uniform_low", tmpl.uniform_low);
    o.get("uniform_high", tmpl.uniform_high);
    if (pool) o.get("pool", *pool);
    if (per_video) o.get("per_video", *per_video);
    o.finish();
    tmpl.validate();
}

void read_svm(const Json& j, classify::SvmParams& s) {
    Obj o(j, "svm");
    o.get("C", s.c);
    o.get("nu", s.nu);
    if (const Json* g = o.child("gamma")) {
        if (g->is_string() && g->get<std::string>() == "scale") s.gamma.reset();
        else if (g->is_number()) s.gamma = g->get<double>();
        else fail(ErrorKind::Config, "svm.gamma must be a number or \"scale\"");
    }
    o.get("tolerance", s.tolerance);
    o.get("standardize", s.standardize);
    o.finish();
}

void read_features(const Json& j, features::FeatureOptions& f) {
    Obj o(j, "features");
    o.get("window_s", f.window_s);
    o.get("stride_s", f.stride_s);
    if (const Json* s = o.child("snr")) {
        Obj so(*s, "features.snr");
        so.get("nfft", f.snr.nfft);
        if (const Json* b = so.child("band_bpm")) f.snr.band = band_of(*b, "features.snr.band_bpm");
        so.get("fundamental_halfwidth_bpm", f.snr.fundamental_halfwidth_bpm);
        so.get("harmonic_halfwidth_bpm", f.snr.harmonic_halfwidth_bpm);
        so.get("floor_db", f.snr.floor_db);
        so.get("ceiling_db", f.snr.ceiling_db);
        so.finish();
    }
    o.finish();
}

}  // namespace

synth::SceneConfig parse_scene(std::string_view json) {
    synth::SceneConfig s;
    read_scene(parse(json), s, "scene");
    s.validate();
    return s;
}

TrainFile parse_train(std::string_view json) {
    const Json j = parse(json);
    TrainFile t;
    Obj o(j, "train");
    if (const Json* a = o.child("architecture")) read_architecture(*a, t.architecture);
    if (const Json* tr = o.child("training")) read_training(*tr, t.training);
    if (const Json* n = o.child("negatives"))
        read_negatives(*n, t.negative_template, t.negative_kinds, nullptr, &t.negatives_per_video);
    o.get("init_seed", t.init_seed);
    o.get("validation_videos", t.validation_videos);
    o.finish();
    t.architecture.validate();
    t.training.validate();
    return t;
}

experiment::ExperimentConfig parse_experiment(std::string_view json) {
    const Json j = parse(json);
    experiment::ExperimentConfig c;
    Obj o(j, "experiment");
    o.get("seed", c.seed);
    if (const Json* w = o.child("world")) {
        Obj wo(*w, "world");
        if (const Json* s = wo.child("scene")) read_scene(*s, c.world.scene, "world.scene");
        wo.get("hr_low_bpm", c.world.hr_low_bpm);
        wo.get("hr_high_bpm", c.world.hr_high_bpm);
        wo.get("hr_knot_spacing_s", c.world.hr_knot_spacing_s);
        wo.get("hr_jitter_bpm", c.world.hr_jitter_bpm);
        wo.get("noise_low", c.world.noise_low);
        wo.get("noise_high", c.world.noise_high);
        wo.finish();
    }
    if (const Json* cs = o.child("corpora")) {
        Obj co(*cs, "corpora");
        for (auto [name, spec] : {std::pair{"train", &c.train}, {"validation", &c.validation}, {"test", &c.test}}) {
            if (const Json* x = co.child(name)) {
                Obj xo(*x, std::string("corpora.") + name);
                xo.get("videos", spec->videos);
                xo.get("duration_s", spec->duration_s);
                xo.finish();
            }
        }
        co.finish();
    }
    if (const Json* n = o.child("negatives"))
        read_negatives(*n, c.negative_template, c.negative_kinds, &c.negative_pool, nullptr);
    if (const Json* a = o.child("architecture")) read_architecture(*a, c.architecture);
    if (const Json* t = o.child("training")) read_training(*t, c.training);
    if (const Json* vs = o.child("variants")) {
        if (!vs->is_array()) fail(ErrorKind::Config, "variants must be an array");
        c.variants.clear();
        for (const auto& v : *vs) {
            Obj vo(v, "variants[]");
            experiment::VariantSpec spec;
            vo.get("name", spec.name);
            std::string neg = losses::to_string(spec.negative);
            vo.get("negative_loss", neg);
            spec.negative = losses::parse_negative_loss(neg);
            vo.get("negative_mix", spec.negative_mix);
            vo.get("standardize_clips", spec.standardize_clips);
            vo.finish();
            c.variants.push_back(spec);
        }
    }
    if (const Json* i = o.child("inference")) {
        Obj io(*i, "inference");
        io.get("clip_len", c.inference.clip_len);
        io.get("overlap", c.inference.overlap);
        io.finish();
    }
    if (const Json* f = o.child("features")) read_features(*f, c.features);
    if (const Json* s = o.child("svm")) read_svm(*s, c.svm);
    if (const Json* r = o.child("rate")) {
        Obj ro(*r, "rate");
        ro.get("window_s", c.rate.window_s);
        ro.get("stride_frames", c.rate.stride_frames);
        ro.get("nfft", c.rate.nfft);
        if (const Json* b = ro.child("band_bpm")) c.rate.band = band_of(*b, "rate.band_bpm");
        ro.finish();
    }
    o.get("baselines", c.baselines);
    std::string out = c.output_dir.string();
    o.get("output_dir", out);
    c.output_dir = out;
    o.finish();
    c.validate();
    return c;
}

}  // namespace pulsegate::config
