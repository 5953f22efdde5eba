#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hcad/clip/sampler.hpp"
#include "hcad/core/binary_io.hpp"
#include "hcad/core/error.hpp"
#include "hcad/core/manifest.hpp"
#include "hcad/core/text.hpp"
#include "hcad/model/params.hpp"
#include "hcad/suppress/suppressor.hpp"
#include "hcad/tracking/byte_tracker.hpp"
#include "hcad/train/trainer.hpp"

namespace hcad::pipeline {

namespace fs = std::filesystem;

/// Everything the stages read. Relative paths resolve against the working directory.
struct PipelineConfig {
    fs::path manifest = "manifest.csv";
    fs::path detections_root = "detections";
    fs::path output_root = "hcad_out";
    std::optional<fs::path> cache_root;  // default <output_root>/features
    std::vector<std::string> classes = ClassSet::defaults().labels();
    std::uint64_t seed = 1;
    int jobs = 1;

    tracking::AssociationParams association;
    suppress::SuppressionParams suppression;
    clip::SamplerParams sampler = clip::SamplerParams::square299();

    std::string adapter = "mock";
    int feature_dim = 2048;
    std::uint64_t adapter_seed = 20240917;

    double test_fraction = 0.15;
    double validation_fraction = 0.15;
    bool stratify = true;

    std::string preset = "bilstm";
    std::map<std::string, double> model_overrides;  // units1, units2, dense_units, dropout_*, l2_lambda
    train::TrainConfig train;
    int trials = 3;

    std::optional<fs::path> eval_checkpoint;
    std::optional<fs::path> eval_test_manifest;
    std::optional<fs::path> eval_out;

    fs::path cache_dir() const { return cache_root ? *cache_root : output_root / "features"; }
    fs::path tracks_dir() const { return output_root / "tracks"; }
    fs::path suppressed_dir() const { return output_root / "suppressed"; }
    fs::path clips_dir() const { return output_root / "clips"; }
    fs::path splits_dir() const { return output_root / "splits"; }
    fs::path model_dir() const { return output_root / "model"; }
    fs::path trials_dir() const { return output_root / "trials"; }
    fs::path stages_dir() const { return output_root / "stages"; }
    fs::path report_dir() const { return output_root / "report"; }
    fs::path eval_dir() const { return eval_out ? *eval_out : output_root / "eval"; }
    fs::path checkpoint_path() const { return eval_checkpoint ? *eval_checkpoint : model_dir() / "best.seqc"; }
    fs::path test_manifest_path() const {
        return eval_test_manifest ? *eval_test_manifest : splits_dir() / "test.csv";
    }

    ClassSet class_set() const { return ClassSet(classes); }

    model::ModelConfig model_config(int input_dim, int num_classes) const {
        model::ModelConfig c;
        if (preset == "bilstm") {
            c = model::ModelConfig::bilstm(input_dim, num_classes);
        } else if (preset == "unidirectional") {
            c = model::ModelConfig::unidirectional_base(input_dim, num_classes);
        } else {
            throw Error(ErrorKind::Config, "unknown model preset: " + preset + " (expected bilstm or unidirectional)");
        }
        for (const auto& [k, v] : model_overrides) {
            if (k == "units1") c.units1 = static_cast<int>(v);
            else if (k == "units2") c.units2 = static_cast<int>(v);
            else if (k == "dense_units") c.dense_units = static_cast<int>(v);
            else if (k == "dropout_seq") c.dropout_seq = v;
            else if (k == "dropout_ctx") c.dropout_ctx = v;
            else if (k == "lstm_input_dropout") c.lstm_input_dropout = v;
            else if (k == "recurrent_dropout") c.recurrent_dropout = v;
            else if (k == "l2_lambda") c.l2_lambda = v;
        }
        c.validate();
        return c;
    }

    void validate() const {
        class_set();
        if (jobs < 1) throw Error(ErrorKind::Config, "jobs must be >= 1");
        association.validate();
        suppression.validate();
        sampler.validate();
        if (feature_dim < 1) throw Error(ErrorKind::Config, "extract.dim must be >= 1");
        if (!(test_fraction > 0 && test_fraction < 1) || !(validation_fraction > 0 && validation_fraction < 1)) {
            throw Error(ErrorKind::Config, "split fractions must lie in (0,1)");
        }
        if (trials < 1) throw Error(ErrorKind::Config, "trials.count must be >= 1");
        model_config(feature_dim, static_cast<int>(classes.size()));
        auto t = train;
        t.model = model_config(feature_dim, static_cast<int>(classes.size()));
        t.validate();
    }
};

namespace detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw Error(ErrorKind::Config, key + ": expected a boolean, got '" + v + "'");
}

inline std::string bool_text(bool b) { return b ? "true" : "false"; }

struct KeySpec {
    std::string name;
    std::function<void(PipelineConfig&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

inline double num(const std::string& v, const std::string& key) {
    try {
        return text::parse_double(v, key);
    } catch (const Error& e) {
        throw Error(ErrorKind::Config, e.what());
    }
}

inline long long integer(const std::string& v, const std::string& key) {
    try {
        return text::parse_int(v, key);
    } catch (const Error& e) {
        throw Error(ErrorKind::Config, e.what());
    }
}

inline std::uint64_t seed_value(const std::string& v, const std::string& key) {
    const auto n = integer(v, key);
    if (n < 0) throw Error(ErrorKind::Config, key + ": seeds must be non-negative");
    return static_cast<std::uint64_t>(n);
}

#define HCAD_DOUBLE_KEY(name, field) \
    KeySpec{name, [](PipelineConfig& c, const std::string& v) { c.field = num(v, name); }, \
            [](const PipelineConfig& c) { return text::exact(c.field); }}
#define HCAD_INT_KEY(name, field) \
    KeySpec{name, [](PipelineConfig& c, const std::string& v) { c.field = static_cast<int>(integer(v, name)); }, \
            [](const PipelineConfig& c) { return std::to_string(c.field); }}
#define HCAD_BOOL_KEY(name, field) \
    KeySpec{name, [](PipelineConfig& c, const std::string& v) { c.field = parse_bool(v, name); }, \
            [](const PipelineConfig& c) { return bool_text(c.field); }}
#define HCAD_PATH_KEY(name, field) \
    KeySpec{name, [](PipelineConfig& c, const std::string& v) { c.field = fs::path(v); }, \
            [](const PipelineConfig& c) { return c.field.generic_string(); }}
#define HCAD_OPT_PATH_KEY(name, field)                                                        \
    KeySpec{name,                                                                             \
            [](PipelineConfig& c, const std::string& v) {                                     \
                if (v.empty()) c.field.reset();                                               \
                else c.field = fs::path(v);                                                   \
            },                                                                                \
            [](const PipelineConfig& c) { return c.field ? c.field->generic_string() : std::string(); }}
#define HCAD_MODEL_KEY(key)                                                                        \
    KeySpec{"model." key,                                                                          \
            [](PipelineConfig& c, const std::string& v) {                                          \
                if (v.empty()) c.model_overrides.erase(key);                                       \
                else c.model_overrides[key] = num(v, "model." key);                                \
            },                                                                                     \
            [](const PipelineConfig& c) {                                                          \
                auto it = c.model_overrides.find(key);                                             \
                return it == c.model_overrides.end() ? std::string() : text::exact(it->second);    \
            }}

inline const std::vector<KeySpec>& key_specs() {
    static const std::vector<KeySpec> specs = {
        HCAD_PATH_KEY("manifest", manifest),
        HCAD_PATH_KEY("detections_root", detections_root),
        HCAD_PATH_KEY("output_root", output_root),
        HCAD_OPT_PATH_KEY("cache_root", cache_root),
        KeySpec{"classes",
                [](PipelineConfig& c, const std::string& v) {
                    c.classes.clear();
                    for (const auto& f : text::split(v, ',')) c.classes.push_back(text::trim(f));
                    ClassSet check(c.classes);
                },
                [](const PipelineConfig& c) {
                    std::string s;
                    for (const auto& l : c.classes) s += (s.empty() ? "" : ",") + l;
                    return s;
                }},
        KeySpec{"seed", [](PipelineConfig& c, const std::string& v) { c.seed = seed_value(v, "seed"); },
                [](const PipelineConfig& c) { return std::to_string(c.seed); }},
        HCAD_INT_KEY("jobs", jobs),
        HCAD_DOUBLE_KEY("track.high_threshold", association.high_conf_threshold),
        HCAD_DOUBLE_KEY("track.low_threshold", association.low_conf_threshold),
        HCAD_DOUBLE_KEY("track.iou_stage1", association.iou_match_threshold_stage1),
        HCAD_DOUBLE_KEY("track.iou_stage2", association.iou_match_threshold_stage2),
        HCAD_INT_KEY("track.max_coast", association.max_coast_frames),
        HCAD_INT_KEY("track.min_hits", association.min_hits_to_confirm),
        HCAD_INT_KEY("suppress.margin", suppression.margin),
        HCAD_INT_KEY("suppress.kernel_size", suppression.kernel_size),
        HCAD_DOUBLE_KEY("suppress.sigma", suppression.sigma),
        HCAD_INT_KEY("sample.clip_length", sampler.clip_length),
        HCAD_INT_KEY("sample.height", sampler.target_height),
        HCAD_INT_KEY("sample.width", sampler.target_width),
        KeySpec{"sample.preprocess",
                [](PipelineConfig& c, const std::string& v) {
                    c.sampler.preprocess =
                        parse_bool(v, "sample.preprocess") ? clip::Preprocess::BackboneScaling : clip::Preprocess::None;
                },
                [](const PipelineConfig& c) {
                    return bool_text(c.sampler.preprocess == clip::Preprocess::BackboneScaling);
                }},
        KeySpec{"extract.adapter", [](PipelineConfig& c, const std::string& v) { c.adapter = v; },
                [](const PipelineConfig& c) { return c.adapter; }},
        HCAD_INT_KEY("extract.dim", feature_dim),
        KeySpec{"extract.seed",
                [](PipelineConfig& c, const std::string& v) { c.adapter_seed = seed_value(v, "extract.seed"); },
                [](const PipelineConfig& c) { return std::to_string(c.adapter_seed); }},
        HCAD_DOUBLE_KEY("split.test_fraction", test_fraction),
        HCAD_DOUBLE_KEY("split.validation_fraction", validation_fraction),
        HCAD_BOOL_KEY("split.stratify", stratify),
        KeySpec{"model.preset", [](PipelineConfig& c, const std::string& v) { c.preset = v; },
                [](const PipelineConfig& c) { return c.preset; }},
        HCAD_MODEL_KEY("units1"),
        HCAD_MODEL_KEY("units2"),
        HCAD_MODEL_KEY("dense_units"),
        HCAD_MODEL_KEY("dropout_seq"),
        HCAD_MODEL_KEY("dropout_ctx"),
        HCAD_MODEL_KEY("lstm_input_dropout"),
        HCAD_MODEL_KEY("recurrent_dropout"),
        HCAD_MODEL_KEY("l2_lambda"),
        HCAD_DOUBLE_KEY("train.learning_rate", train.learning_rate),
        HCAD_INT_KEY("train.batch_size", train.batch_size),
        HCAD_INT_KEY("train.max_epochs", train.max_epochs),
        HCAD_INT_KEY("train.early_stop_patience", train.callbacks.early_stop_patience),
        HCAD_DOUBLE_KEY("train.lr_reduce_factor", train.callbacks.lr_reduce_factor),
        HCAD_INT_KEY("train.lr_reduce_patience", train.callbacks.lr_reduce_patience),
        HCAD_BOOL_KEY("train.balance", train.balance),
        KeySpec{"train.cap_normal",
                [](PipelineConfig& c, const std::string& v) {
                    const auto n = integer(v, "train.cap_normal");
                    if (n < 0) throw Error(ErrorKind::Config, "train.cap_normal must be >= 0 (0 = automatic)");
                    if (n == 0) c.train.cap_normal.reset();
                    else c.train.cap_normal = static_cast<std::size_t>(n);
                },
                [](const PipelineConfig& c) { return std::to_string(c.train.cap_normal.value_or(0)); }},
        HCAD_INT_KEY("trials.count", trials),
        HCAD_OPT_PATH_KEY("evaluate.checkpoint", eval_checkpoint),
        HCAD_OPT_PATH_KEY("evaluate.test_manifest", eval_test_manifest),
        HCAD_OPT_PATH_KEY("evaluate.out", eval_out),
    };
    return specs;
}

#undef HCAD_DOUBLE_KEY
#undef HCAD_INT_KEY
#undef HCAD_BOOL_KEY
#undef HCAD_PATH_KEY
#undef HCAD_OPT_PATH_KEY
#undef HCAD_MODEL_KEY

}  // namespace detail

inline std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& k : detail::key_specs()) out.push_back(k.name);
    return out;
}

inline void set_config_value(PipelineConfig& c, const std::string& key, const std::string& value) {
    for (const auto& k : detail::key_specs()) {
        if (k.name == key) {
            k.set(c, value);
            return;
        }
    }
    throw Error(ErrorKind::Config, "unknown config key: " + key);
}

inline std::string get_config_value(const PipelineConfig& c, const std::string& key) {
    for (const auto& k : detail::key_specs()) {
        if (k.name == key) return k.get(c);
    }
    throw Error(ErrorKind::Config, "unknown config key: " + key);
}

/// Every key with its current value, in declaration order.
inline std::vector<std::pair<std::string, std::string>> config_items(const PipelineConfig& c) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : detail::key_specs()) out.emplace_back(k.name, k.get(c));
    return out;
}

/// `key = value` lines; blank lines and `#` comments are ignored.
inline void apply_config_text(PipelineConfig& c, const std::string& text, const std::string& ctx = "config") {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = text::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::Config, ctx + ":" + std::to_string(lineno) + ": expected key = value");
        }
        set_config_value(c, text::trim(line.substr(0, eq)), text::trim(line.substr(eq + 1)));
    }
}

inline void apply_config_file(PipelineConfig& c, const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorKind::Config, "config file not found: " + path.string());
    apply_config_text(c, io::read_file(path), path.string());
}

/// HCAD_ + key upper-cased with '.' replaced by '_', e.g. HCAD_TRAIN_MAX_EPOCHS.
inline std::string env_name(const std::string& key) {
    std::string out = "HCAD_";
    for (char ch : key) out += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return out;
}

/// Applies overrides from `lookup` (defaults to the process environment).
inline void apply_env_overrides(PipelineConfig& c,
                                const std::function<std::optional<std::string>(const std::string&)>& lookup = {}) {
    for (const auto& k : detail::key_specs()) {
        const auto name = env_name(k.name);
        std::optional<std::string> v;
        if (lookup) {
            v = lookup(name);
        } else if (const char* e = std::getenv(name.c_str())) {
            v = e;
        }
        if (v) k.set(c, *v);
    }
}

inline std::string serialize_config(const PipelineConfig& c) {
    std::string out;
    for (const auto& [k, v] : config_items(c)) out += k + " = " + v + "\n";
    return out;
}

}  // namespace hcad::pipeline
