#include <doctest.h>

#include <set>

#include "datefield/errors.hpp"
#include "datefield/knn.hpp"
#include "datefield/synth.hpp"
#include "test_support.hpp"

using namespace datefield;

namespace {

SynthSpec clean_spec(std::uint64_t seed) {
    SynthSpec spec;
    spec.seed = seed;
    return spec;
}

bool same_truth(const GroundTruth& a, const GroundTruth& b) {
    if (a.dates.size() != b.dates.size() || a.distractors.size() != b.distractors.size())
        return false;
    for (std::size_t i = 0; i < a.dates.size(); ++i) {
        const TruthDate& x = a.dates[i];
        const TruthDate& y = b.dates[i];
        if (x.line_index != y.line_index || x.cls != y.cls || !(x.region == y.region) ||
            x.expected_miss != y.expected_miss || x.component_boxes != y.component_boxes)
            return false;
    }
    for (std::size_t i = 0; i < a.distractors.size(); ++i)
        if (!(a.distractors[i].region == b.distractors[i].region) ||
            a.distractors[i].kind != b.distractors[i].kind ||
            a.distractors[i].expected_false_accept != b.distractors[i].expected_false_accept)
            return false;
    return true;
}

// Detected region set must equal the truth region set, classes included
// (Slash detections resolve; DashOrDot stays Unrefined without a model).
void check_exact_detection(const BinaryImage& page, const GroundTruth& truth) {
    const std::vector<DateCandidate> found =
        scan_document(page, DetectorConfig{}, LayoutParams{});
    std::vector<const TruthDate*> expected;
    for (const TruthDate& d : truth.dates)
        if (!d.expected_miss)
            expected.push_back(&d);
    REQUIRE(found.size() == expected.size());
    for (std::size_t i = 0; i < found.size(); ++i) {
        CHECK(found[i].line_index == expected[i]->line_index);
        CHECK(found[i].region == expected[i]->region);
        if (expected[i]->cls == DateClass::Slash)
            CHECK(found[i].final_class == DateClass::Slash);
        else
            CHECK(found[i].final_class == DateClass::Unrefined);
    }
}

} // namespace

TEST_CASE("generation is deterministic per (spec, page_index)") {
    const SynthSpec spec = clean_spec(42);
    auto [img1, truth1] = generate_page(spec, 0);
    auto [img2, truth2] = generate_page(spec, 0);
    CHECK(img1.bits == img2.bits);
    CHECK(same_truth(truth1, truth2));

    auto [img3, truth3] = generate_page(spec, 1);
    CHECK(img1.bits != img3.bits); // seed splitting separates pages
}

TEST_CASE("a single slash date is detected exactly") {
    SynthSpec spec = clean_spec(42);
    spec.dates_per_page = 1;
    spec.class_mix = ClassMix{1.0, 0.0, 0.0};
    spec.distractor_density = 0.0;
    auto [img, truth] = generate_page(spec);
    REQUIRE(truth.dates.size() == 1);
    CHECK(truth.dates[0].cls == DateClass::Slash);
    REQUIRE(truth.dates[0].component_boxes.size() == 8);
    // region equals the union of the component boxes
    BBox u = truth.dates[0].component_boxes[0];
    for (const BBox& b : truth.dates[0].component_boxes)
        u = bbox_union(u, b);
    CHECK(truth.dates[0].region == u);
    check_exact_detection(img, truth);
}

TEST_CASE("zero dates on a distractor-free page yields zero candidates") {
    SynthSpec spec = clean_spec(9);
    spec.dates_per_page = 0;
    spec.distractor_density = 0.0;
    auto [img, truth] = generate_page(spec);
    CHECK(truth.dates.empty());
    CHECK(scan_document(img, DetectorConfig{}, LayoutParams{}).empty());
}

TEST_CASE("clean pages detect exactly the planted dates across seeds") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 57ull, 1234ull}) {
        const SynthSpec spec = clean_spec(seed);
        auto [img, truth] = generate_page(spec);
        CHECK(truth.dates.size() == 2);
        check_exact_detection(img, truth);
    }
}

TEST_CASE("all three classes appear and are detected as planted") {
    SynthSpec spec = clean_spec(77);
    spec.dates_per_page = 6;
    std::set<DateClass> seen;
    for (int page = 0; page < 5; ++page) {
        auto [img, truth] = generate_page(spec, page);
        for (const TruthDate& d : truth.dates)
            seen.insert(d.cls);
        check_exact_detection(img, truth);
    }
    CHECK(seen.count(DateClass::Slash) == 1);
    CHECK(seen.count(DateClass::Dash) == 1);
    CHECK(seen.count(DateClass::Dot) == 1);
}

TEST_CASE("double-digit stressor dates merge to 7 components and are missed") {
    SynthSpec spec = clean_spec(404);
    spec.dates_per_page = 1;
    spec.stressors.double_digits = true;
    spec.double_digits_per_page = 2;
    int stressed = 0;
    for (int page = 0; page < 4; ++page) {
        auto [img, truth] = generate_page(spec, page);
        const std::vector<DateCandidate> found =
            scan_document(img, DetectorConfig{}, LayoutParams{});
        for (const TruthDate& d : truth.dates) {
            if (!d.expected_miss)
                continue;
            ++stressed;
            CHECK(d.component_boxes.size() == 7);
            for (const DateCandidate& cand : found) {
                const bool covers = cand.line_index == d.line_index &&
                                    dtest::iou_by_pixels(cand.region, d.region) >= 0.5;
                CHECK_FALSE(covers);
            }
        }
        check_exact_detection(img, truth); // clean dates still found
    }
    CHECK(stressed == 8);
}

TEST_CASE("date-like stressors split into rejected and accepted variants") {
    SynthSpec spec = clean_spec(505);
    spec.dates_per_page = 1;
    spec.stressors.date_like_text = true;
    spec.date_like_per_page = 2;

    SUBCASE("accept fraction 0 never adds detections") {
        spec.date_like_accept_fraction = 0.0;
        for (int page = 0; page < 4; ++page) {
            auto [img, truth] = generate_page(spec, page);
            bool any_reject = false;
            for (const TruthDistractor& d : truth.distractors)
                if (d.kind == DistractorKind::DateLikeReject) {
                    any_reject = true;
                    CHECK_FALSE(d.expected_false_accept);
                }
            CHECK(any_reject);
            check_exact_detection(img, truth);
        }
    }

    SUBCASE("accept fraction 1 adds exactly the expected false accepts") {
        spec.date_like_accept_fraction = 1.0;
        auto [img, truth] = generate_page(spec, 0);
        std::vector<const TruthDistractor*> accepts;
        for (const TruthDistractor& d : truth.distractors)
            if (d.kind == DistractorKind::DateLikeAccept) {
                CHECK(d.expected_false_accept);
                accepts.push_back(&d);
            }
        REQUIRE(accepts.size() == 2);

        const std::vector<DateCandidate> found =
            scan_document(img, DetectorConfig{}, LayoutParams{});
        CHECK(found.size() == truth.dates.size() + accepts.size());
        for (const TruthDistractor* d : accepts) {
            bool hit = false;
            for (const DateCandidate& cand : found)
                hit |= cand.region == d->region;
            CHECK(hit);
        }
    }
}

TEST_CASE("specks stay below the noise threshold and do not disturb detection") {
    SynthSpec spec = clean_spec(606);
    spec.stressors.specks = true;
    spec.specks_per_page = 20;
    auto [img, truth] = generate_page(spec);

    int speck_count = 0;
    for (const TruthDistractor& d : truth.distractors)
        if (d.kind == DistractorKind::Speck) {
            ++speck_count;
            CHECK(d.region.width() * d.region.height() < LayoutParams{}.noise_min_pixels);
        }
    CHECK(speck_count > 0);
    check_exact_detection(img, truth);

    // specks never merge with anything: every labeled component is either a
    // planted box or a planted speck, verbatim
    std::set<std::tuple<int, int, int, int>> planted;
    for (const TruthDate& d : truth.dates)
        for (const BBox& b : d.component_boxes)
            planted.insert({b.x_min, b.y_min, b.x_max, b.y_max});
    for (const TruthDistractor& d : truth.distractors)
        if (d.kind == DistractorKind::Speck)
            planted.insert({d.region.x_min, d.region.y_min, d.region.x_max, d.region.y_max});
    int matched = 0;
    for (const ConnComp& c : label_components(img)) {
        const auto key = std::tuple(c.bbox.x_min, c.bbox.y_min, c.bbox.x_max, c.bbox.y_max);
        matched += planted.count(key) ? 1 : 0;
    }
    CHECK(matched == int(planted.size()));
}

TEST_CASE("impossible geometry raises validation errors") {
    SynthSpec tiny = clean_spec(1);
    tiny.page_height = 200; // 8 lines cannot fit
    CHECK_THROWS_AS(generate_page(tiny), ValidationError);

    SynthSpec bad_mix = clean_spec(1);
    bad_mix.class_mix = ClassMix{0.5, 0.5, 0.5};
    CHECK_THROWS_AS(generate_page(bad_mix), ValidationError);

    SynthSpec bad_range = clean_spec(1);
    bad_range.digit_height = IntRange{30, 20};
    CHECK_THROWS_AS(generate_page(bad_range), ValidationError);

    SynthSpec bad_factor = clean_spec(1);
    bad_factor.slash_height_factor = 0.9;
    CHECK_THROWS_AS(generate_page(bad_factor), ValidationError);

    SynthSpec narrow = clean_spec(1);
    narrow.page_width = 120; // a date cannot fit between the margins
    narrow.lines = 1;
    narrow.page_height = 400;
    narrow.dates_per_page = 1;
    narrow.distractor_density = 0.0;
    CHECK_THROWS_AS(generate_page(narrow), ValidationError);
}

TEST_CASE("planted separator widths drive dash/dot separation") {
    SynthSpec spec = clean_spec(808);
    spec.dates_per_page = 4;
    spec.class_mix = ClassMix{0.0, 0.5, 0.5};
    int dash_min = 1 << 30, dot_max = 0;
    for (int page = 0; page < 10; ++page) {
        auto [img, truth] = generate_page(spec, page);
        for (const TruthDate& d : truth.dates) {
            const int w3 = d.component_boxes[2].width();
            const int w6 = d.component_boxes[5].width();
            if (d.cls == DateClass::Dash) {
                dash_min = std::min({dash_min, w3, w6});
            } else if (d.cls == DateClass::Dot) {
                dot_max = std::max({dot_max, w3, w6});
            }
        }
    }
    CHECK(dash_min > dot_max); // linearly separable by construction
}
