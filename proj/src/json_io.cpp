#include "datefield/json_io.hpp"

#include <fstream>

#include <json.hpp>

#include "atomic_write.hpp"
#include "datefield/errors.hpp"

namespace datefield {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json parse_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open: " + path.string());
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

void dump_file(const ordered_json& j, const std::filesystem::path& path) {
    write_file_atomic(path, j.dump(2) + "\n");
}

ordered_json bbox_to_json(const BBox& b) {
    return ordered_json{{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max},
                        {"y_max", b.y_max}};
}

BBox bbox_from_json(const ordered_json& j) {
    BBox b{j.at("x_min").get<int>(), j.at("y_min").get<int>(), j.at("x_max").get<int>(),
           j.at("y_max").get<int>()};
    if (b.x_min > b.x_max || b.y_min > b.y_max)
        throw FormatError("invalid bbox: min exceeds max");
    return b;
}

ordered_json features_to_json(const NumericFeatures& f) {
    ordered_json j;
    for (std::size_t k = 0; k < 6; ++k)
        j["f" + std::to_string(k + 1)] = f.f[k];
    return j;
}

NumericFeatures features_from_json(const ordered_json& j) {
    NumericFeatures f;
    for (std::size_t k = 0; k < 6; ++k)
        f.f[k] = j.at("f" + std::to_string(k + 1)).get<double>();
    return f;
}

IntRange range_from_json(const ordered_json& j) {
    if (!j.is_array() || j.size() != 2)
        throw FormatError("range must be a [lo, hi] pair");
    return IntRange{j[0].get<int>(), j[1].get<int>()};
}

ordered_json range_to_json(const IntRange& r) { return ordered_json::array({r.lo, r.hi}); }

template <typename T>
void maybe(const ordered_json& j, const char* key, T& out) {
    if (j.contains(key))
        out = j.at(key).get<T>();
}

DateClass date_class_or_throw(const std::string& s) {
    const std::optional<DateClass> c = date_class_from_string(s);
    if (!c)
        throw FormatError("unknown date class: " + s);
    return *c;
}

} // namespace

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    const ordered_json j = parse_file(path);
    PipelineConfig cfg;
    try {
        if (j.contains("features")) {
            const ordered_json& f = j.at("features");
            for (std::size_t k = 0; k < 6; ++k) {
                const std::string key = "f" + std::to_string(k + 1);
                if (!f.contains(key))
                    continue;
                const ordered_json& iv = f.at(key);
                if (!iv.is_array() || iv.size() != 2)
                    throw FormatError("feature interval must be [lo, hi]");
                cfg.detector.ranges.intervals[k] =
                    FeatureInterval{iv[0].get<double>(), iv[1].get<double>()};
                if (cfg.detector.ranges.intervals[k].lo > cfg.detector.ranges.intervals[k].hi)
                    throw FormatError("feature interval lo exceeds hi: " + key);
            }
        }
        maybe(j, "spacing_multiplier", cfg.detector.spacing_multiplier);
        if (cfg.detector.spacing_multiplier <= 0)
            throw FormatError("spacing_multiplier must be positive");
        if (j.contains("layout")) {
            const ordered_json& l = j.at("layout");
            maybe(l, "min_gap", cfg.layout.min_gap);
            maybe(l, "min_ink", cfg.layout.min_ink);
            maybe(l, "noise_min_pixels", cfg.layout.noise_min_pixels);
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad config " + path.string() + ": " + e.what());
    }
    return cfg;
}

void save_pipeline_config(const PipelineConfig& cfg, const std::filesystem::path& path) {
    ordered_json features;
    for (std::size_t k = 0; k < 6; ++k)
        features["f" + std::to_string(k + 1)] = ordered_json::array(
            {cfg.detector.ranges.intervals[k].lo, cfg.detector.ranges.intervals[k].hi});
    ordered_json j{{"features", features},
                   {"spacing_multiplier", cfg.detector.spacing_multiplier},
                   {"layout",
                    {{"min_gap", cfg.layout.min_gap},
                     {"min_ink", cfg.layout.min_ink},
                     {"noise_min_pixels", cfg.layout.noise_min_pixels}}}};
    dump_file(j, path);
}

void save_detections(const std::vector<Detection>& detections,
                     const std::filesystem::path& path) {
    ordered_json arr = ordered_json::array();
    for (const Detection& d : detections) {
        ordered_json boxes = ordered_json::array();
        for (const BBox& b : d.component_boxes)
            boxes.push_back(bbox_to_json(b));
        arr.push_back(ordered_json{{"line_index", d.line_index},
                                   {"class", to_string(d.cls)},
                                   {"region", bbox_to_json(d.region)},
                                   {"features", features_to_json(d.features)},
                                   {"component_boxes", boxes}});
    }
    dump_file(arr, path);
}

std::vector<Detection> load_detections(const std::filesystem::path& path) {
    const ordered_json j = parse_file(path);
    if (!j.is_array())
        throw FormatError("detections file must be a JSON array: " + path.string());
    std::vector<Detection> out;
    try {
        for (const ordered_json& item : j) {
            Detection d;
            d.line_index = item.at("line_index").get<int>();
            d.cls = date_class_or_throw(item.at("class").get<std::string>());
            d.region = bbox_from_json(item.at("region"));
            if (item.contains("features"))
                d.features = features_from_json(item.at("features"));
            if (item.contains("component_boxes"))
                for (const ordered_json& b : item.at("component_boxes"))
                    d.component_boxes.push_back(bbox_from_json(b));
            out.push_back(std::move(d));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad detections " + path.string() + ": " + e.what());
    }
    return out;
}

void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
    ordered_json dates = ordered_json::array();
    for (const TruthDate& d : truth.dates) {
        ordered_json boxes = ordered_json::array();
        for (const BBox& b : d.component_boxes)
            boxes.push_back(bbox_to_json(b));
        dates.push_back(ordered_json{{"line_index", d.line_index},
                                     {"class", to_string(d.cls)},
                                     {"region", bbox_to_json(d.region)},
                                     {"component_boxes", boxes},
                                     {"expected_miss", d.expected_miss}});
    }
    ordered_json distractors = ordered_json::array();
    for (const TruthDistractor& d : truth.distractors)
        distractors.push_back(ordered_json{{"region", bbox_to_json(d.region)},
                                           {"kind", to_string(d.kind)},
                                           {"expected_false_accept", d.expected_false_accept}});
    ordered_json j{{"page", {{"width", truth.page_width}, {"height", truth.page_height}}},
                   {"dates", dates},
                   {"distractors", distractors}};
    dump_file(j, path);
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
    const ordered_json j = parse_file(path);
    GroundTruth truth;
    try {
        truth.page_width = j.at("page").at("width").get<int>();
        truth.page_height = j.at("page").at("height").get<int>();
        for (const ordered_json& item : j.at("dates")) {
            TruthDate d;
            d.line_index = item.at("line_index").get<int>();
            d.cls = date_class_or_throw(item.at("class").get<std::string>());
            d.region = bbox_from_json(item.at("region"));
            for (const ordered_json& b : item.at("component_boxes"))
                d.component_boxes.push_back(bbox_from_json(b));
            d.expected_miss = item.value("expected_miss", false);
            truth.dates.push_back(std::move(d));
        }
        for (const ordered_json& item : j.at("distractors")) {
            TruthDistractor d;
            d.region = bbox_from_json(item.at("region"));
            const std::optional<DistractorKind> kind =
                distractor_kind_from_string(item.at("kind").get<std::string>());
            if (!kind)
                throw FormatError("unknown distractor kind");
            d.kind = *kind;
            d.expected_false_accept = item.value("expected_false_accept", false);
            truth.distractors.push_back(std::move(d));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad ground truth " + path.string() + ": " + e.what());
    }
    return truth;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
    const ordered_json j = parse_file(path);
    SynthSpec s;
    try {
        maybe(j, "seed", s.seed);
        if (j.contains("page")) {
            maybe(j.at("page"), "width", s.page_width);
            maybe(j.at("page"), "height", s.page_height);
        }
        maybe(j, "lines", s.lines);
        maybe(j, "dates_per_page", s.dates_per_page);
        if (j.contains("class_mix")) {
            const ordered_json& m = j.at("class_mix");
            maybe(m, "slash", s.class_mix.slash);
            maybe(m, "dash", s.class_mix.dash);
            maybe(m, "dot", s.class_mix.dot);
        }
        if (j.contains("digit_geometry")) {
            const ordered_json& g = j.at("digit_geometry");
            if (g.contains("height")) s.digit_height = range_from_json(g.at("height"));
            if (g.contains("width")) s.digit_width = range_from_json(g.at("width"));
            maybe(g, "baseline_jitter", s.baseline_jitter);
        }
        if (j.contains("separator_geometry")) {
            const ordered_json& g = j.at("separator_geometry");
            maybe(g, "slash_height_factor", s.slash_height_factor);
            if (g.contains("slash_width")) s.slash_width = range_from_json(g.at("slash_width"));
            if (g.contains("dash_width")) s.dash_width = range_from_json(g.at("dash_width"));
            if (g.contains("dash_height")) s.dash_height = range_from_json(g.at("dash_height"));
            if (g.contains("dot_size")) s.dot_size = range_from_json(g.at("dot_size"));
        }
        if (j.contains("intra_gap")) s.intra_gap = range_from_json(j.at("intra_gap"));
        maybe(j, "distractor_density", s.distractor_density);
        if (j.contains("stressors")) {
            const ordered_json& st = j.at("stressors");
            maybe(st, "double_digits", s.stressors.double_digits);
            maybe(st, "date_like_text", s.stressors.date_like_text);
            maybe(st, "specks", s.stressors.specks);
        }
        maybe(j, "double_digits_per_page", s.double_digits_per_page);
        maybe(j, "date_like_per_page", s.date_like_per_page);
        maybe(j, "date_like_accept_fraction", s.date_like_accept_fraction);
        maybe(j, "specks_per_page", s.specks_per_page);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad synth spec " + path.string() + ": " + e.what());
    }
    return s;
}

void save_synth_spec(const SynthSpec& s, const std::filesystem::path& path) {
    ordered_json j{
        {"seed", s.seed},
        {"page", {{"width", s.page_width}, {"height", s.page_height}}},
        {"lines", s.lines},
        {"dates_per_page", s.dates_per_page},
        {"class_mix",
         {{"slash", s.class_mix.slash}, {"dash", s.class_mix.dash}, {"dot", s.class_mix.dot}}},
        {"digit_geometry",
         {{"height", range_to_json(s.digit_height)},
          {"width", range_to_json(s.digit_width)},
          {"baseline_jitter", s.baseline_jitter}}},
        {"separator_geometry",
         {{"slash_height_factor", s.slash_height_factor},
          {"slash_width", range_to_json(s.slash_width)},
          {"dash_width", range_to_json(s.dash_width)},
          {"dash_height", range_to_json(s.dash_height)},
          {"dot_size", range_to_json(s.dot_size)}}},
        {"intra_gap", range_to_json(s.intra_gap)},
        {"distractor_density", s.distractor_density},
        {"stressors",
         {{"double_digits", s.stressors.double_digits},
          {"date_like_text", s.stressors.date_like_text},
          {"specks", s.stressors.specks}}},
        {"double_digits_per_page", s.double_digits_per_page},
        {"date_like_per_page", s.date_like_per_page},
        {"date_like_accept_fraction", s.date_like_accept_fraction},
        {"specks_per_page", s.specks_per_page}};
    dump_file(j, path);
}

namespace {

std::vector<SeparatorSample> samples_from_json(const ordered_json& arr, const std::string& where) {
    if (!arr.is_array())
        throw FormatError("samples must be a JSON array: " + where);
    std::vector<SeparatorSample> out;
    for (const ordered_json& item : arr) {
        SeparatorSample s;
        s.w_cc3 = item.at("w3").get<int>();
        s.w_cc6 = item.at("w6").get<int>();
        const std::optional<SeparatorLabel> label =
            separator_label_from_string(item.at("label").get<std::string>());
        if (!label)
            throw FormatError("unknown separator label in " + where);
        s.label = *label;
        out.push_back(s);
    }
    return out;
}

ordered_json samples_to_json(const std::vector<SeparatorSample>& samples) {
    ordered_json arr = ordered_json::array();
    for (const SeparatorSample& s : samples)
        arr.push_back(
            ordered_json{{"w3", s.w_cc3}, {"w6", s.w_cc6}, {"label", to_string(s.label)}});
    return arr;
}

} // namespace

void save_knn_samples(const std::vector<SeparatorSample>& samples,
                      const std::filesystem::path& path) {
    dump_file(samples_to_json(samples), path);
}

std::vector<SeparatorSample> load_knn_samples(const std::filesystem::path& path) {
    try {
        return samples_from_json(parse_file(path), path.string());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad samples " + path.string() + ": " + e.what());
    }
}

void save_knn_model(const KnnModel& model, const std::filesystem::path& path) {
    dump_file(ordered_json{{"k", model.k}, {"samples", samples_to_json(model.samples)}}, path);
}

KnnModel load_knn_model(const std::filesystem::path& path) {
    const ordered_json j = parse_file(path);
    try {
        if (j.is_array())
            return train_knn(samples_from_json(j, path.string()), 3);
        return train_knn(samples_from_json(j.at("samples"), path.string()),
                         j.value("k", 3));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad model " + path.string() + ": " + e.what());
    }
}

void save_report(const EvalReport& r, const std::filesystem::path& path) {
    ordered_json j{{"documents", r.documents},
                   {"true_dates", r.true_dates},
                   {"detections", r.detections},
                   {"matches", r.matches},
                   {"class_correct_matches", r.class_correct_matches},
                   {"false_accepts", r.false_accepts},
                   {"false_rejects", r.false_rejects},
                   {"expected_miss_total", r.expected_miss_total},
                   {"expected_miss_detected", r.expected_miss_detected},
                   {"false_accepts_on_expected", r.false_accepts_on_expected},
                   {"far_pct", r.far_pct()},
                   {"frr_pct", r.frr_pct()},
                   {"efficiency_pct", r.efficiency_pct()}};
    dump_file(j, path);
}

EvalReport load_report(const std::filesystem::path& path) {
    const ordered_json j = parse_file(path);
    EvalReport r;
    try {
        r.documents = j.at("documents").get<int>();
        r.true_dates = j.at("true_dates").get<int>();
        r.detections = j.at("detections").get<int>();
        r.matches = j.at("matches").get<int>();
        r.class_correct_matches = j.at("class_correct_matches").get<int>();
        r.false_accepts = j.at("false_accepts").get<int>();
        r.false_rejects = j.at("false_rejects").get<int>();
        r.expected_miss_total = j.value("expected_miss_total", 0);
        r.expected_miss_detected = j.value("expected_miss_detected", 0);
        r.false_accepts_on_expected = j.value("false_accepts_on_expected", 0);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad report " + path.string() + ": " + e.what());
    }
    return r;
}

} // namespace datefield
