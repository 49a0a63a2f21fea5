#include "datefield/detector.hpp"

#include <algorithm>

#include "datefield/errors.hpp"

namespace datefield {

std::string to_string(LayoutClass c) {
    switch (c) {
        case LayoutClass::Slash: return "Slash";
        case LayoutClass::DashOrDot: return "DashOrDot";
        case LayoutClass::NonDate: return "NonDate";
    }
    return "NonDate";
}

std::string to_string(DateClass c) {
    switch (c) {
        case DateClass::Slash: return "Slash";
        case DateClass::Dash: return "Dash";
        case DateClass::Dot: return "Dot";
        case DateClass::Unrefined: return "Unrefined";
    }
    return "Unrefined";
}

std::optional<DateClass> date_class_from_string(const std::string& s) {
    if (s == "Slash") return DateClass::Slash;
    if (s == "Dash") return DateClass::Dash;
    if (s == "Dot") return DateClass::Dot;
    if (s == "Unrefined") return DateClass::Unrefined;
    return std::nullopt;
}

EcccWindow make_eccc_window(std::span<const ConnComp, 8> comps) {
    EcccWindow w;
    for (std::size_t i = 0; i < 8; ++i) {
        if (i > 0 && comps[i].bbox.x_min <= comps[i - 1].bbox.x_min)
            throw ValidationError("make_eccc_window: x_min must be strictly increasing");
        w.comps[i] = comps[i];
    }
    w.w_max = 0;
    for (const ConnComp& c : w.comps)
        w.w_max = std::max(w.w_max, c.width());
    for (std::size_t i = 0; i < 7; ++i)
        w.gaps[i] = std::max(0, w.comps[i + 1].bbox.x_min - w.comps[i].bbox.x_max - 1);
    return w;
}

NumericRangeConfig NumericRangeConfig::defaults() {
    NumericRangeConfig cfg;
    const FeatureInterval height{0.5, 2.0};
    const FeatureInterval center{0.9, 1.1};
    cfg.intervals = {height, center, height, center, height, center};
    return cfg;
}

bool NumericRangeConfig::contains(const NumericFeatures& f) const {
    for (std::size_t k = 0; k < 6; ++k)
        if (!intervals[k].contains(f.f[k]))
            return false;
    return true;
}

Detection to_detection(const DateCandidate& cand) {
    Detection d;
    d.line_index = cand.line_index;
    d.cls = cand.final_class;
    d.region = cand.region;
    d.features = cand.features;
    d.component_boxes.reserve(8);
    for (const ConnComp& c : cand.window.comps)
        d.component_boxes.push_back(c.bbox);
    return d;
}

std::vector<EcccWindow> form_windows(const TextLine& line) {
    std::vector<EcccWindow> windows;
    const std::vector<ConnComp>& comps = line.components;
    if (comps.size() < 8)
        return windows;
    for (std::size_t s = 0; s + 8 <= comps.size(); ++s) {
        bool ordered = true;
        for (std::size_t i = s + 1; i < s + 8; ++i) {
            if (comps[i].bbox.x_min <= comps[i - 1].bbox.x_min) {
                ordered = false;
                break;
            }
        }
        if (ordered)
            windows.push_back(make_eccc_window(std::span<const ConnComp, 8>(&comps[s], 8)));
    }
    return windows;
}

bool check_spacing(const EcccWindow& w, double multiplier) {
    const double limit = multiplier * w.w_max;
    for (int gap : w.gaps)
        if (double(gap) > limit)
            return false;
    return true;
}

std::optional<NumericFeatures> numeric_features(const EcccWindow& w) {
    // Digit pairs flanking the separators at positions 3 and 6 (1-based).
    static constexpr int pairs[3][2] = {{0, 1}, {3, 4}, {6, 7}};
    NumericFeatures f;
    for (int p = 0; p < 3; ++p) {
        const ConnComp& den = w.comps[pairs[p][0]];
        const ConnComp& num = w.comps[pairs[p][1]];
        if (den.centroid_y() == 0.0)
            return std::nullopt;
        f.f[std::size_t(2 * p)] = double(num.height()) / double(den.height());
        f.f[std::size_t(2 * p + 1)] = num.centroid_y() / den.centroid_y();
    }
    return f;
}

NumericCheck verify_numeric(const EcccWindow& w, const NumericRangeConfig& cfg) {
    NumericCheck check;
    check.features = numeric_features(w);
    check.pass = check.features && cfg.contains(*check.features);
    return check;
}

namespace {

// y-extent of `inner` lies within y-extent of `outer` (the four paper
// inequalities per pair collapse to this given y_min <= y_max).
bool nested_within(const ConnComp& inner, const ConnComp& outer) {
    return outer.bbox.y_min <= inner.bbox.y_min && inner.bbox.y_max <= outer.bbox.y_max;
}

} // namespace

LayoutClass classify_separator_layout(const EcccWindow& w) {
    const ConnComp& c2 = w.comps[1];
    const ConnComp& c3 = w.comps[2];
    const ConnComp& c4 = w.comps[3];
    const ConnComp& c5 = w.comps[4];
    const ConnComp& c6 = w.comps[5];
    const ConnComp& c7 = w.comps[6];

    const bool dash_or_dot = nested_within(c3, c2) && nested_within(c3, c4) &&
                             nested_within(c6, c5) && nested_within(c6, c7);
    if (dash_or_dot)
        return LayoutClass::DashOrDot;

    const bool slash = nested_within(c2, c3) && nested_within(c4, c3) &&
                       nested_within(c5, c6) && nested_within(c7, c6);
    if (slash)
        return LayoutClass::Slash;

    return LayoutClass::NonDate;
}

BBox register_date(const EcccWindow& w) {
    BBox region = w.comps[0].bbox;
    for (std::size_t i = 1; i < 8; ++i)
        region = bbox_union(region, w.comps[i].bbox);
    return region;
}

namespace {

struct AcceptedWindow {
    std::size_t start;
    DateCandidate candidate;
};

std::vector<AcceptedWindow> accepted_windows(const TextLine& line, const DetectorConfig& cfg,
                                             int line_index) {
    std::vector<AcceptedWindow> accepted;
    const std::vector<ConnComp>& comps = line.components;
    if (comps.size() < 8)
        return accepted;

    for (std::size_t s = 0; s + 8 <= comps.size(); ++s) {
        bool ordered = true;
        for (std::size_t i = s + 1; i < s + 8; ++i) {
            if (comps[i].bbox.x_min <= comps[i - 1].bbox.x_min) {
                ordered = false;
                break;
            }
        }
        if (!ordered)
            continue;

        const EcccWindow w = make_eccc_window(std::span<const ConnComp, 8>(&comps[s], 8));
        if (!check_spacing(w, cfg.spacing_multiplier))
            continue;
        const NumericCheck numeric = verify_numeric(w, cfg.ranges);
        if (!numeric.pass)
            continue;
        const LayoutClass layout = classify_separator_layout(w);
        if (layout == LayoutClass::NonDate)
            continue;

        DateCandidate cand;
        cand.line_index = line_index;
        cand.window = w;
        cand.layout_class = layout;
        cand.final_class = layout == LayoutClass::Slash ? DateClass::Slash : DateClass::Unrefined;
        cand.region = register_date(w);
        cand.features = *numeric.features;
        accepted.push_back(AcceptedWindow{s, std::move(cand)});
    }
    return accepted;
}

} // namespace

std::vector<DateCandidate> scan_line_all(const TextLine& line, const DetectorConfig& cfg,
                                         int line_index) {
    std::vector<DateCandidate> out;
    for (AcceptedWindow& a : accepted_windows(line, cfg, line_index))
        out.push_back(std::move(a.candidate));
    return out;
}

std::vector<DateCandidate> scan_line(const TextLine& line, const DetectorConfig& cfg,
                                     int line_index) {
    std::vector<DateCandidate> out;
    // One date must yield one candidate: accepted windows sharing components
    // with an earlier accepted window are suppressed.
    std::ptrdiff_t last_kept = -8;
    for (AcceptedWindow& a : accepted_windows(line, cfg, line_index)) {
        if (std::ptrdiff_t(a.start) - last_kept <= 7)
            continue;
        last_kept = std::ptrdiff_t(a.start);
        out.push_back(std::move(a.candidate));
    }
    return out;
}

std::vector<DateCandidate> scan_document(const BinaryImage& img, const DetectorConfig& cfg,
                                         const LayoutParams& layout) {
    const std::vector<TextLine> lines = extract_lines(img, layout);
    std::vector<DateCandidate> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::vector<DateCandidate> found = scan_line(lines[i], cfg, int(i));
        std::move(found.begin(), found.end(), std::back_inserter(out));
    }
    return out;
}

BinaryImage date_only_mask(const BinaryImage& img, std::span<const DateCandidate> candidates) {
    BinaryImage out;
    out.width = img.width;
    out.height = img.height;
    out.bits.assign(img.bits.size(), 0);
    for (const DateCandidate& cand : candidates) {
        const BBox& r = cand.region;
        const int x0 = std::max(0, r.x_min);
        const int x1 = std::min(img.width - 1, r.x_max);
        const int y0 = std::max(0, r.y_min);
        const int y1 = std::min(img.height - 1, r.y_max);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                if (img.at(x, y))
                    out.at(x, y) = 1;
    }
    return out;
}

GrayImage draw_candidates(const BinaryImage& img, std::span<const DateCandidate> candidates) {
    GrayImage out = to_gray(img);
    constexpr std::uint8_t box = 128;
    for (const DateCandidate& cand : candidates) {
        const BBox& r = cand.region;
        const int x0 = std::max(0, r.x_min);
        const int x1 = std::min(img.width - 1, r.x_max);
        const int y0 = std::max(0, r.y_min);
        const int y1 = std::min(img.height - 1, r.y_max);
        for (int x = x0; x <= x1; ++x) {
            out.at(x, y0) = box;
            out.at(x, y1) = box;
        }
        for (int y = y0; y <= y1; ++y) {
            out.at(x0, y) = box;
            out.at(x1, y) = box;
        }
    }
    return out;
}

} // namespace datefield
