#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "datefield/layout.hpp"

namespace datefield {

// Outcome of the separator-layout inequality systems.
enum class LayoutClass { Slash, DashOrDot, NonDate };

// Final candidate label. DashOrDot candidates stay Unrefined until the KNN
// stage splits them into Dash or Dot; Slash is never refined.
enum class DateClass { Slash, Dash, Dot, Unrefined };

std::string to_string(LayoutClass c);
std::string to_string(DateClass c);
std::optional<DateClass> date_class_from_string(const std::string& s);

// Eight consecutive connected components of one text line, ordered by x_min.
// gaps[i] is the horizontal whitespace between comps[i] and comps[i+1]:
// max(0, x_min(next) - x_max(prev) - 1).
struct EcccWindow {
    std::array<ConnComp, 8> comps;
    int w_max = 0;
    std::array<int, 7> gaps{};
};

// Builds a window from 8 components; throws ValidationError unless x_min is
// strictly increasing across them.
EcccWindow make_eccc_window(std::span<const ConnComp, 8> comps);

// The six regularity ratios of the digit pairs at window positions (1,2),
// (4,5) and (7,8): f1=H2/H1, f2=Y2/Y1, f3=H5/H4, f4=Y5/Y4, f5=H8/H7, f6=Y8/Y7
// where H is bbox height and Y is the bbox vertical center.
struct NumericFeatures {
    std::array<double, 6> f{};
};

struct FeatureInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return lo <= v && v <= hi; }
};

// Closed acceptance intervals for f1..f6. The published algorithm learned
// these from a private corpus; the defaults accept identity ratios with
// generous height slack and tight vertical-alignment slack, and `calibrate`
// re-derives them from a labeled corpus.
struct NumericRangeConfig {
    std::array<FeatureInterval, 6> intervals;

    static NumericRangeConfig defaults();
    bool contains(const NumericFeatures& f) const;
};

struct DetectorConfig {
    NumericRangeConfig ranges = NumericRangeConfig::defaults();
    double spacing_multiplier = 1.5;
};

// A registered detection on one text line.
struct DateCandidate {
    int line_index = 0;
    EcccWindow window;
    LayoutClass layout_class = LayoutClass::NonDate;
    DateClass final_class = DateClass::Unrefined;
    BBox region;
    NumericFeatures features;
};

// Serializable detection record (the JSON wire form of a DateCandidate).
struct Detection {
    int line_index = 0;
    DateClass cls = DateClass::Unrefined;
    BBox region;
    NumericFeatures features;
    std::vector<BBox> component_boxes;
};

Detection to_detection(const DateCandidate& cand);

// Every run of 8 consecutive components whose x_min values strictly increase
// pairwise, sliding by one. Lines with fewer than 8 components yield nothing.
std::vector<EcccWindow> form_windows(const TextLine& line);

// True iff no gap exceeds multiplier * w_max (boundary value accepted).
bool check_spacing(const EcccWindow& w, double multiplier = 1.5);

// The six ratios, or nullopt when a denominator centroid sits on row 0.
std::optional<NumericFeatures> numeric_features(const EcccWindow& w);

struct NumericCheck {
    bool pass = false;
    std::optional<NumericFeatures> features;
};

// Computes the ratios and tests them against the configured intervals.
// A window whose denominators are degenerate fails rather than dividing by zero.
NumericCheck verify_numeric(const EcccWindow& w, const NumericRangeConfig& cfg);

// Applies the two 8-inequality systems over the bbox y-extents of positions
// 2,3,4 and 5,6,7. Slash: digits vertically nested inside the separators.
// DashOrDot: separators nested inside the neighboring digits. Windows where
// both systems hold (all extents identical) classify DashOrDot.
LayoutClass classify_separator_layout(const EcccWindow& w);

// Union bounding box over all 8 components.
BBox register_date(const EcccWindow& w);

// All windows of the line that pass spacing, numeric verification and a
// non-NonDate layout class, in window-start order, before deduplication.
std::vector<DateCandidate> scan_line_all(const TextLine& line, const DetectorConfig& cfg,
                                         int line_index = 0);

// scan_line_all plus overlap deduplication: the earliest accepted window wins
// and suppresses accepted windows starting within 7 components of it.
std::vector<DateCandidate> scan_line(const TextLine& line, const DetectorConfig& cfg,
                                     int line_index = 0);

// Segments the page and concatenates scan_line over all lines, top to bottom.
std::vector<DateCandidate> scan_document(const BinaryImage& img, const DetectorConfig& cfg,
                                         const LayoutParams& layout);

// Copy of the page with only ink pixels inside candidate regions retained.
BinaryImage date_only_mask(const BinaryImage& img, std::span<const DateCandidate> candidates);

// Page rendered ink-on-white with candidate regions outlined in gray.
GrayImage draw_candidates(const BinaryImage& img, std::span<const DateCandidate> candidates);

} // namespace datefield
