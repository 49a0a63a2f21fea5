#include "datefield/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "datefield/errors.hpp"

namespace datefield {

double EvalReport::far_pct() const {
    return detections == 0 ? 0.0 : 100.0 * false_accepts / detections;
}

double EvalReport::frr_pct() const {
    return true_dates == 0 ? 0.0 : 100.0 * false_rejects / true_dates;
}

double EvalReport::efficiency_pct() const {
    return true_dates == 0 ? 0.0 : 100.0 * class_correct_matches / true_dates;
}

double bbox_iou(const BBox& a, const BBox& b) {
    const int ix0 = std::max(a.x_min, b.x_min);
    const int iy0 = std::max(a.y_min, b.y_min);
    const int ix1 = std::min(a.x_max, b.x_max);
    const int iy1 = std::min(a.y_max, b.y_max);
    if (ix1 < ix0 || iy1 < iy0)
        return 0.0;
    const double inter = double(ix1 - ix0 + 1) * double(iy1 - iy0 + 1);
    const double area_a = double(a.width()) * double(a.height());
    const double area_b = double(b.width()) * double(b.height());
    return inter / (area_a + area_b - inter);
}

EvalReport match_detections(std::span<const Detection> detections, const GroundTruth& truth,
                            const MatchOptions& opts) {
    if (opts.iou_min <= 0.0 || opts.iou_min > 1.0)
        throw ValidationError("match_detections: iou_min must be in (0,1]");

    EvalReport r;
    r.documents = 1;
    r.detections = int(detections.size());

    std::vector<std::size_t> scored_truths; // indices into truth.dates
    for (std::size_t t = 0; t < truth.dates.size(); ++t) {
        if (truth.dates[t].expected_miss) {
            ++r.expected_miss_total;
            if (!opts.include_expected_miss)
                continue;
        }
        scored_truths.push_back(t);
    }
    r.true_dates = int(scored_truths.size());

    struct Pair {
        double iou;
        std::size_t truth_rank; // position in scored_truths
        std::size_t det;
    };
    std::vector<Pair> pairs;
    for (std::size_t ti = 0; ti < scored_truths.size(); ++ti) {
        const TruthDate& td = truth.dates[scored_truths[ti]];
        for (std::size_t d = 0; d < detections.size(); ++d) {
            if (detections[d].line_index != td.line_index)
                continue;
            const double iou = bbox_iou(detections[d].region, td.region);
            if (iou >= opts.iou_min)
                pairs.push_back(Pair{iou, ti, d});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.iou != b.iou)
            return a.iou > b.iou;
        if (a.truth_rank != b.truth_rank)
            return a.truth_rank < b.truth_rank;
        return a.det < b.det;
    });

    std::vector<bool> truth_used(scored_truths.size(), false);
    std::vector<bool> det_used(detections.size(), false);
    for (const Pair& p : pairs) {
        if (truth_used[p.truth_rank] || det_used[p.det])
            continue;
        truth_used[p.truth_rank] = true;
        det_used[p.det] = true;
        ++r.matches;
        if (detections[p.det].cls == truth.dates[scored_truths[p.truth_rank]].cls)
            ++r.class_correct_matches;
    }
    for (std::size_t ti = 0; ti < scored_truths.size(); ++ti)
        if (!truth_used[ti])
            ++r.false_rejects;

    for (std::size_t d = 0; d < detections.size(); ++d) {
        if (det_used[d])
            continue;
        ++r.false_accepts;
        for (const TruthDistractor& dist : truth.distractors) {
            if (dist.expected_false_accept &&
                bbox_iou(detections[d].region, dist.region) >= opts.iou_min) {
                ++r.false_accepts_on_expected;
                break;
            }
        }
    }

    // Known-failure dates detected anyway are worth tallying even when not scored.
    if (!opts.include_expected_miss) {
        for (const TruthDate& td : truth.dates) {
            if (!td.expected_miss)
                continue;
            for (const Detection& det : detections) {
                if (det.line_index == td.line_index &&
                    bbox_iou(det.region, td.region) >= opts.iou_min) {
                    ++r.expected_miss_detected;
                    break;
                }
            }
        }
    }
    return r;
}

EvalReport combine(EvalReport a, const EvalReport& b) {
    a.documents += b.documents;
    a.true_dates += b.true_dates;
    a.detections += b.detections;
    a.matches += b.matches;
    a.class_correct_matches += b.class_correct_matches;
    a.false_accepts += b.false_accepts;
    a.false_rejects += b.false_rejects;
    a.expected_miss_total += b.expected_miss_total;
    a.expected_miss_detected += b.expected_miss_detected;
    a.false_accepts_on_expected += b.false_accepts_on_expected;
    return a;
}

std::string format_report_table(const EvalReport& report, bool with_reference_row) {
    std::ostringstream out;
    char buf[128];
    out << "No. of Documents    FAR (%)    FRR (%)    Efficiency (%)\n";
    std::snprintf(buf, sizeof buf, "%-19d %-10.2f %-10.2f %-14.2f\n", report.documents,
                  report.far_pct(), report.frr_pct(), report.efficiency_pct());
    out << buf;
    if (with_reference_row) {
        out << "--- reference: published results on the original handwritten corpus ---\n";
        out << "187                 9.09       3.20       87.71\n";
    }
    return out.str();
}

namespace {

// Linear-interpolation quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * double(sorted.size() - 1);
    const std::size_t lo = std::size_t(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - double(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

} // namespace

NumericRangeConfig calibrate_ranges(std::span<const LabeledWindow> windows, double quantile,
                                    double margin) {
    if (quantile < 0.0 || quantile >= 0.5)
        throw ValidationError("calibrate_ranges: quantile must be in [0, 0.5)");
    if (margin < 1.0)
        throw ValidationError("calibrate_ranges: margin must be >= 1");

    std::array<std::vector<double>, 6> values;
    for (const LabeledWindow& lw : windows) {
        if (!lw.is_date)
            continue;
        const std::optional<NumericFeatures> f = numeric_features(lw.window);
        if (!f)
            continue;
        for (std::size_t k = 0; k < 6; ++k)
            values[k].push_back(f->f[k]);
    }
    if (values[0].empty())
        throw ValidationError("calibrate_ranges: no positive windows with computable features");

    NumericRangeConfig cfg;
    for (std::size_t k = 0; k < 6; ++k) {
        std::sort(values[k].begin(), values[k].end());
        const double lo = quantile_sorted(values[k], quantile);
        const double hi = quantile_sorted(values[k], 1.0 - quantile);
        cfg.intervals[k] = FeatureInterval{lo / margin, hi * margin};
    }
    return cfg;
}

std::vector<SeparatorSample> extract_knn_samples(std::span<const TruthDate> dates) {
    std::vector<SeparatorSample> samples;
    for (const TruthDate& d : dates) {
        if (d.expected_miss)
            continue;
        if (d.cls != DateClass::Dash && d.cls != DateClass::Dot)
            continue;
        if (d.component_boxes.size() != 8)
            throw ValidationError("extract_knn_samples: date needs exactly 8 component boxes");
        samples.push_back(SeparatorSample{
            d.component_boxes[2].width(), d.component_boxes[5].width(),
            d.cls == DateClass::Dash ? SeparatorLabel::Dash : SeparatorLabel::Dot});
    }
    return samples;
}

} // namespace datefield
