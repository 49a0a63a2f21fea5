#pragma once

#include <span>
#include <string>
#include <vector>

#include "datefield/detector.hpp"
#include "datefield/knn.hpp"
#include "datefield/synth.hpp"

namespace datefield {

// Aggregated scoring counters. FAR = false accepts / detections, FRR = false
// rejects / true dates, Efficiency = class-correct matches / true dates
// (each 0 when its denominator is 0).
struct EvalReport {
    int documents = 0;
    int true_dates = 0;
    int detections = 0;
    int matches = 0;
    int class_correct_matches = 0;
    int false_accepts = 0;
    int false_rejects = 0;

    // Side counters, outside the match identities.
    int expected_miss_total = 0;
    int expected_miss_detected = 0;
    int false_accepts_on_expected = 0; // false accepts overlapping an
                                       // expected_false_accept region

    double far_pct() const;
    double frr_pct() const;
    double efficiency_pct() const;
};

struct MatchOptions {
    double iou_min = 0.5;
    bool include_expected_miss = false; // score expected_miss truths as dates
};

// Intersection-over-union of inclusive pixel rectangles.
double bbox_iou(const BBox& a, const BBox& b);

// Greedy one-to-one matching by descending IoU (ties: lower truth index,
// then lower detection index). A detection matches a truth date iff their
// regions reach iou_min and their line indices agree. Unmatched detections
// are false accepts; unmatched truths are false rejects. expected_miss
// truths are excluded from scoring unless include_expected_miss is set, and
// are tallied separately when a detection covers them.
EvalReport match_detections(std::span<const Detection> detections, const GroundTruth& truth,
                            const MatchOptions& opts);

EvalReport combine(EvalReport a, const EvalReport& b);

// Fixed-width table in the shape of the published results tables, with the
// reference row from the original experiment for context.
std::string format_report_table(const EvalReport& report, bool with_reference_row = true);

struct LabeledWindow {
    EcccWindow window;
    bool is_date = false;
};

// Per-feature [q, 1-q] quantile envelope (linear interpolation) over the
// positive windows, widened multiplicatively by `margin` on the high side
// and 1/margin on the low side. Requires at least one positive window with
// computable features.
NumericRangeConfig calibrate_ranges(std::span<const LabeledWindow> windows, double quantile = 0.01,
                                    double margin = 1.05);

// One (W_cc3, W_cc6, label) sample per Dash/Dot truth date. Skips
// expected_miss entries; any other date without exactly 8 component boxes
// raises ValidationError.
std::vector<SeparatorSample> extract_knn_samples(std::span<const TruthDate> dates);

} // namespace datefield
