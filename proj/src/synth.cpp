#include "datefield/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "datefield/errors.hpp"

namespace datefield {

std::string to_string(DistractorKind kind) {
    switch (kind) {
        case DistractorKind::Word: return "Word";
        case DistractorKind::DateLikeReject: return "DateLikeReject";
        case DistractorKind::DateLikeAccept: return "DateLikeAccept";
        case DistractorKind::Speck: return "Speck";
    }
    return "Word";
}

std::optional<DistractorKind> distractor_kind_from_string(const std::string& s) {
    if (s == "Word") return DistractorKind::Word;
    if (s == "DateLikeReject") return DistractorKind::DateLikeReject;
    if (s == "DateLikeAccept") return DistractorKind::DateLikeAccept;
    if (s == "Speck") return DistractorKind::Speck;
    return std::nullopt;
}

namespace {

// mt19937_64 output is standardized; the mappings below keep page bytes
// identical across platforms (std::uniform_int_distribution is not portable).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    int pick(int lo, int hi) { // inclusive
        return lo + int(gen_() % std::uint64_t(hi - lo + 1));
    }
    int pick(const IntRange& r) { return pick(r.lo, r.hi); }
    double real01() { return double(gen_() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return real01() < p; }

private:
    std::mt19937_64 gen_;
};

enum class ItemKind { Word, Date, DoubleDigitDate, DateLikeReject, DateLikeAccept };

struct PendingItem {
    ItemKind kind = ItemKind::Word;
    DateClass cls = DateClass::Slash;
};

// Component boxes relative to (x = 0, baseline y = 0).
struct BuiltItem {
    std::vector<BBox> boxes;
    int width() const {
        int w = 0;
        for (const BBox& b : boxes)
            w = std::max(w, b.x_max + 1);
        return w;
    }
};

BBox offset_box(const BBox& b, int dx, int dy) {
    return BBox{b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy};
}

BBox union_of(const std::vector<BBox>& boxes) {
    BBox u = boxes.front();
    for (const BBox& b : boxes)
        u = bbox_union(u, b);
    return u;
}

struct LineGeometry {
    int baseline = 0;
    std::vector<BBox> placed_boxes; // absolute, for band/speck bookkeeping
    std::vector<std::pair<int, int>> item_spans; // absolute x ranges of items
    bool has_ink = false;
};

// Digit relative to baseline 0: box bottom sits at the jittered baseline.
BBox make_digit(Rng& rng, const SynthSpec& s, int x) {
    const int h = rng.pick(s.digit_height);
    const int w = rng.pick(s.digit_width);
    const int dy = rng.pick(-s.baseline_jitter, s.baseline_jitter);
    return BBox{x, dy - h + 1, x + w - 1, dy};
}

// A DD?MM?YY skeleton: digits at positions 0,1,3,4,6,7 and separators at 2,5.
// When straddle is set the separators extend above both neighbors and end
// inside them, so neither inequality system can hold.
std::vector<BBox> build_date_boxes(Rng& rng, const SynthSpec& s, DateClass cls, bool straddle) {
    std::vector<BBox> digits(8); // separator slots stay empty for now
    int cursor = 0;
    std::vector<int> sep_x(8, 0);
    std::vector<int> sep_w(8, 0);
    for (int pos = 0; pos < 8; ++pos) {
        const bool is_sep = pos == 2 || pos == 5;
        if (is_sep) {
            int w = 0;
            if (straddle || cls == DateClass::Dash)
                w = rng.pick(s.dash_width);
            else if (cls == DateClass::Slash)
                w = rng.pick(s.slash_width);
            else
                w = rng.pick(s.dot_size);
            sep_x[std::size_t(pos)] = cursor;
            sep_w[std::size_t(pos)] = w;
            cursor += w;
        } else {
            digits[std::size_t(pos)] = make_digit(rng, s, cursor);
            cursor = digits[std::size_t(pos)].x_max + 1;
        }
        if (pos < 7)
            cursor += rng.pick(s.intra_gap);
    }

    std::vector<BBox> boxes = digits;
    for (int pos : {2, 5}) {
        const BBox& left = digits[std::size_t(pos - 1)];
        const BBox& right = digits[std::size_t(pos + 1)];
        const int x0 = sep_x[std::size_t(pos)];
        const int x1 = x0 + sep_w[std::size_t(pos)] - 1;

        BBox sep{x0, 0, x1, 0};
        if (straddle) {
            const int top = std::min(left.y_min, right.y_min);
            sep.y_min = top - rng.pick(4, 8);
            sep.y_max = top + rng.pick(2, 6);
        } else if (cls == DateClass::Slash) {
            // Digits nested inside the separator, at least one row of slack
            // each side so the dash/dot system cannot hold simultaneously.
            const int top = std::min(left.y_min, right.y_min);
            const int bottom = std::max(left.y_max, right.y_max);
            const int union_h = bottom - top + 1;
            const int target = std::max(union_h + 2, int(std::lround(s.slash_height_factor * union_h)));
            const int extra = target - union_h;
            const int pad_top = (extra + 1) / 2;
            sep.y_min = top - pad_top;
            sep.y_max = bottom + (extra - pad_top);
        } else {
            // Separator nested inside both neighbors.
            const int top = std::max(left.y_min, right.y_min);
            const int bottom = std::min(left.y_max, right.y_max);
            const int inner_h = bottom - top + 1;
            int h = cls == DateClass::Dash ? rng.pick(s.dash_height) : (x1 - x0 + 1);
            h = std::clamp(h, 1, std::max(1, inner_h - 2));
            int y0;
            if (cls == DateClass::Dash) {
                // around mid-height
                const int slack = inner_h - h;
                y0 = top + slack / 2 + rng.pick(-1, 1);
            } else {
                // dots sit near the baseline
                y0 = bottom - 1 - h + 1 - rng.pick(0, 2);
            }
            const int y_lo = top + 1;
            const int y_hi = bottom - h;
            y0 = y_hi < y_lo ? top : std::clamp(y0, y_lo, y_hi);
            sep.y_min = y0;
            sep.y_max = y0 + h - 1;
        }
        boxes[std::size_t(pos)] = sep;
    }
    return boxes;
}

BuiltItem build_item(Rng& rng, const SynthSpec& s, const PendingItem& item) {
    BuiltItem built;
    switch (item.kind) {
        case ItemKind::Word: {
            const int n = rng.pick(3, 7);
            const IntRange word_height{std::max(6, s.digit_height.lo - 12), s.digit_height.hi + 8};
            int cursor = 0;
            for (int i = 0; i < n; ++i) {
                const int h = rng.pick(word_height);
                const int w = rng.pick(s.digit_width);
                const int dy = rng.pick(-s.baseline_jitter, s.baseline_jitter);
                built.boxes.push_back(BBox{cursor, dy - h + 1, cursor + w - 1, dy});
                cursor += w + rng.pick(s.intra_gap);
            }
            break;
        }
        case ItemKind::Date:
        case ItemKind::DateLikeAccept:
            built.boxes = build_date_boxes(rng, s, item.cls, false);
            break;
        case ItemKind::DateLikeReject:
            built.boxes = build_date_boxes(rng, s, item.cls, true);
            break;
        case ItemKind::DoubleDigitDate: {
            built.boxes = build_date_boxes(rng, s, item.cls, false);
            built.boxes[0] = bbox_union(built.boxes[0], built.boxes[1]);
            built.boxes.erase(built.boxes.begin() + 1);
            break;
        }
    }
    return built;
}

EcccWindow window_from_boxes(const std::vector<BBox>& boxes) {
    std::array<ConnComp, 8> comps;
    for (std::size_t i = 0; i < 8; ++i) {
        comps[i].id = int(i);
        comps[i].bbox = boxes[i];
        comps[i].pixel_count = boxes[i].width() * boxes[i].height();
    }
    return make_eccc_window(std::span<const ConnComp, 8>(comps.data(), 8));
}

// Constructive detectability: the planted geometry must pass (or, for
// rejects, fail) the actual stage predicates.
bool item_geometry_ok(const std::vector<BBox>& abs_boxes, const PendingItem& item) {
    if (item.kind == ItemKind::Word)
        return true;
    if (item.kind == ItemKind::DoubleDigitDate)
        return abs_boxes.size() == 7;

    const EcccWindow w = window_from_boxes(abs_boxes);
    if (!check_spacing(w, 1.5))
        return false;
    if (!verify_numeric(w, NumericRangeConfig::defaults()).pass)
        return false;
    const LayoutClass lc = classify_separator_layout(w);
    if (item.kind == ItemKind::DateLikeReject)
        return lc == LayoutClass::NonDate;
    return item.cls == DateClass::Slash ? lc == LayoutClass::Slash : lc == LayoutClass::DashOrDot;
}

void render_box(BinaryImage& img, const BBox& b) {
    if (b.x_min < 0 || b.y_min < 0 || b.x_max >= img.width || b.y_max >= img.height)
        throw ValidationError("synth: component outside page bounds");
    for (int y = b.y_min; y <= b.y_max; ++y)
        for (int x = b.x_min; x <= b.x_max; ++x)
            img.at(x, y) = 1;
}

DateClass sample_class(Rng& rng, const ClassMix& mix) {
    const double r = rng.real01();
    if (r < mix.slash)
        return DateClass::Slash;
    if (r < mix.slash + mix.dash)
        return DateClass::Dash;
    return DateClass::Dot;
}

void validate_spec(const SynthSpec& s) {
    auto bad_range = [](const IntRange& r) { return r.lo < 1 || r.hi < r.lo; };
    if (s.page_width <= 0 || s.page_height <= 0)
        throw ValidationError("synth: page dimensions must be positive");
    if (s.lines < 1)
        throw ValidationError("synth: need at least one line");
    if (s.dates_per_page < 0 || s.double_digits_per_page < 0 || s.date_like_per_page < 0 ||
        s.specks_per_page < 0)
        throw ValidationError("synth: counts must be non-negative");
    if (bad_range(s.digit_height) || bad_range(s.digit_width) || bad_range(s.slash_width) ||
        bad_range(s.dash_width) || bad_range(s.dash_height) || bad_range(s.dot_size) ||
        bad_range(s.intra_gap))
        throw ValidationError("synth: geometry ranges must be non-empty and positive");
    if (s.baseline_jitter < 0)
        throw ValidationError("synth: baseline_jitter must be >= 0");
    if (s.slash_height_factor <= 1.0)
        throw ValidationError("synth: slash_height_factor must be > 1");
    const double mix_sum = s.class_mix.slash + s.class_mix.dash + s.class_mix.dot;
    if (s.class_mix.slash < 0 || s.class_mix.dash < 0 || s.class_mix.dot < 0 ||
        std::abs(mix_sum - 1.0) > 1e-9)
        throw ValidationError("synth: class_mix proportions must be non-negative and sum to 1");
    if (s.date_like_accept_fraction < 0 || s.date_like_accept_fraction > 1)
        throw ValidationError("synth: date_like_accept_fraction must be in [0,1]");
    if (s.distractor_density < 0)
        throw ValidationError("synth: distractor_density must be >= 0");
}

} // namespace

std::pair<BinaryImage, GroundTruth> generate_page(const SynthSpec& spec, int page_index) {
    validate_spec(spec);
    Rng rng(spec.seed + std::uint64_t(page_index));

    // Worst-case component height bounds the vertical pitch.
    const int digit_union_max = spec.digit_height.hi + 2 * spec.baseline_jitter;
    const int slash_max =
        std::max(digit_union_max + 2, int(std::lround(spec.slash_height_factor * digit_union_max)));
    const int word_max = spec.digit_height.hi + 8 + 2 * spec.baseline_jitter;
    const int max_comp_h = std::max(slash_max, word_max);

    // First baseline high enough that centroid-y ratios of jittered digit
    // pairs stay inside the default [0.9, 1.1] interval.
    const int first_baseline = std::max(130, max_comp_h + 10);
    const int pitch = max_comp_h + 2 * spec.baseline_jitter + 30;
    const int last_baseline = first_baseline + (spec.lines - 1) * pitch;
    if (last_baseline + spec.baseline_jitter + 1 >= spec.page_height)
        throw ValidationError("synth: lines do not fit the page height");

    // Inter-item gaps exceed 1.5x any possible component width, so no window
    // spanning two items can ever satisfy the spacing rule.
    int max_comp_w = std::max({spec.digit_width.hi, spec.slash_width.hi, spec.dash_width.hi,
                               spec.dot_size.hi});
    if (spec.stressors.double_digits)
        max_comp_w = std::max(max_comp_w, 2 * spec.digit_width.hi + spec.intra_gap.hi);
    const int item_gap_min = int(std::ceil(1.5 * max_comp_w)) + 1;
    const int margin_x = 30;

    // Queue items per line.
    std::vector<std::vector<PendingItem>> queues(std::size_t(spec.lines));
    for (auto& q : queues) {
        int n_words = 0;
        if (spec.distractor_density > 0) {
            const int base = int(spec.distractor_density);
            n_words = rng.pick(std::max(0, base - 1), base + 1);
        }
        for (int i = 0; i < n_words; ++i)
            q.push_back(PendingItem{ItemKind::Word, DateClass::Slash});
    }
    auto assign = [&](ItemKind kind, DateClass cls) {
        auto& q = queues[std::size_t(rng.pick(0, spec.lines - 1))];
        const std::size_t at = q.empty() ? 0 : std::size_t(rng.pick(0, int(q.size())));
        q.insert(q.begin() + std::ptrdiff_t(at), PendingItem{kind, cls});
    };
    for (int i = 0; i < spec.dates_per_page; ++i)
        assign(ItemKind::Date, sample_class(rng, spec.class_mix));
    if (spec.stressors.double_digits)
        for (int i = 0; i < spec.double_digits_per_page; ++i)
            assign(ItemKind::DoubleDigitDate, sample_class(rng, spec.class_mix));
    if (spec.stressors.date_like_text)
        for (int i = 0; i < spec.date_like_per_page; ++i) {
            const ItemKind kind = rng.chance(spec.date_like_accept_fraction)
                                      ? ItemKind::DateLikeAccept
                                      : ItemKind::DateLikeReject;
            assign(kind, sample_class(rng, spec.class_mix));
        }

    BinaryImage image = make_binary(spec.page_width, spec.page_height);
    GroundTruth truth;
    truth.page_width = spec.page_width;
    truth.page_height = spec.page_height;

    struct PlacedTruth {
        int planted_line = 0;
        bool is_date = false;
        TruthDate date;
        TruthDistractor distractor;
    };
    std::vector<PlacedTruth> placed;
    std::vector<LineGeometry> lines(std::size_t(spec.lines));

    std::vector<PendingItem> carry;
    for (int li = 0; li < spec.lines; ++li) {
        LineGeometry& line = lines[std::size_t(li)];
        line.baseline = first_baseline + li * pitch;

        std::vector<PendingItem> items = std::move(carry);
        carry.clear();
        for (const PendingItem& it : queues[std::size_t(li)])
            items.push_back(it);

        int cursor = margin_x + rng.pick(0, 20);
        for (const PendingItem& item : items) {
            bool placed_ok = false;
            for (int attempt = 0; attempt < 50 && !placed_ok; ++attempt) {
                BuiltItem built = build_item(rng, spec, item);
                if (cursor + built.width() > spec.page_width - margin_x)
                    break; // no room on this line, retries cannot help

                std::vector<BBox> abs_boxes;
                abs_boxes.reserve(built.boxes.size());
                for (const BBox& b : built.boxes)
                    abs_boxes.push_back(offset_box(b, cursor, line.baseline));
                if (!item_geometry_ok(abs_boxes, item))
                    continue;

                const BBox region = union_of(abs_boxes);
                PlacedTruth pt;
                pt.planted_line = li;
                switch (item.kind) {
                    case ItemKind::Date:
                    case ItemKind::DoubleDigitDate:
                        pt.is_date = true;
                        pt.date = TruthDate{li, item.cls, region, abs_boxes,
                                            item.kind == ItemKind::DoubleDigitDate};
                        break;
                    case ItemKind::Word:
                        pt.is_date = false;
                        pt.distractor = TruthDistractor{region, DistractorKind::Word, false};
                        break;
                    case ItemKind::DateLikeReject:
                        pt.is_date = false;
                        pt.distractor =
                            TruthDistractor{region, DistractorKind::DateLikeReject, false};
                        break;
                    case ItemKind::DateLikeAccept:
                        pt.is_date = false;
                        pt.distractor =
                            TruthDistractor{region, DistractorKind::DateLikeAccept, true};
                        break;
                }
                placed.push_back(std::move(pt));

                for (const BBox& b : abs_boxes) {
                    render_box(image, b);
                    line.placed_boxes.push_back(b);
                }
                line.item_spans.emplace_back(region.x_min, region.x_max);
                line.has_ink = true;
                cursor = region.x_max + 1 + item_gap_min + rng.pick(0, 20);
                placed_ok = true;
            }
            if (!placed_ok) {
                if (item.kind == ItemKind::Word)
                    continue; // filler, drop it
                carry.push_back(item); // dates must land somewhere
            }
        }
    }
    if (!carry.empty())
        throw ValidationError("synth: planted dates do not fit the page");

    // Salt specks go into inter-item gaps of inked lines, below the noise
    // threshold and clear of any ink so 8-connectivity cannot bridge them.
    if (spec.stressors.specks) {
        std::vector<int> inked;
        for (int li = 0; li < spec.lines; ++li)
            if (lines[std::size_t(li)].has_ink)
                inked.push_back(li);
        std::vector<BBox> placed_specks;
        for (int i = 0; i < spec.specks_per_page && !inked.empty(); ++i) {
            const LineGeometry& line =
                lines[std::size_t(inked[std::size_t(rng.pick(0, int(inked.size()) - 1))])];
            BBox band = union_of(line.placed_boxes);

            std::vector<std::pair<int, int>> gaps;
            gaps.emplace_back(margin_x / 2, line.item_spans.front().first - 3);
            for (std::size_t j = 0; j + 1 < line.item_spans.size(); ++j)
                gaps.emplace_back(line.item_spans[j].second + 3,
                                  line.item_spans[j + 1].first - 3);
            const auto& g = gaps[std::size_t(rng.pick(0, int(gaps.size()) - 1))];
            if (g.second - g.first < 8)
                continue;

            static constexpr int shapes[5][2] = {{1, 1}, {1, 2}, {2, 1}, {1, 3}, {3, 1}};
            const auto& sh = shapes[rng.pick(0, 4)];
            const int x0 = rng.pick(g.first, g.second - sh[0]);
            const int y0 = rng.pick(band.y_min, band.y_max - sh[1] + 1);
            const BBox speck{x0, y0, x0 + sh[0] - 1, y0 + sh[1] - 1};

            // Two adjacent specks would merge into a component above the
            // noise threshold; keep them 2 pixels apart.
            const BBox halo{speck.x_min - 2, speck.y_min - 2, speck.x_max + 2, speck.y_max + 2};
            bool clear = true;
            for (const BBox& other : placed_specks)
                if (halo.x_min <= other.x_max && other.x_min <= halo.x_max &&
                    halo.y_min <= other.y_max && other.y_min <= halo.y_max) {
                    clear = false;
                    break;
                }
            if (!clear)
                continue;

            placed_specks.push_back(speck);
            render_box(image, speck);
            truth.distractors.push_back(TruthDistractor{speck, DistractorKind::Speck, false});
        }
    }

    // Detector line indices count segmented bands; empty planted lines leave
    // no band, so truth indices rank only the inked lines.
    std::vector<int> rank(std::size_t(spec.lines), -1);
    int next = 0;
    for (int li = 0; li < spec.lines; ++li)
        if (lines[std::size_t(li)].has_ink)
            rank[std::size_t(li)] = next++;
    for (PlacedTruth& pt : placed) {
        const int line_index = rank[std::size_t(pt.planted_line)];
        if (pt.is_date) {
            pt.date.line_index = line_index;
            truth.dates.push_back(std::move(pt.date));
        } else {
            truth.distractors.push_back(std::move(pt.distractor));
        }
    }
    return {std::move(image), std::move(truth)};
}

} // namespace datefield
