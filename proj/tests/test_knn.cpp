#include <doctest.h>

#include <random>

#include "datefield/errors.hpp"
#include "datefield/knn.hpp"
#include "test_support.hpp"

using namespace datefield;

namespace {

const std::vector<SeparatorSample> kHandModel = {
    {30, 30, SeparatorLabel::Dash}, {29, 31, SeparatorLabel::Dash},
    {3, 3, SeparatorLabel::Dot},    {4, 4, SeparatorLabel::Dot},
    {28, 30, SeparatorLabel::Dash},
};

// Separable corpus: dash widths well above dot widths.
std::vector<SeparatorSample> separable_corpus(std::mt19937& rng, int per_class) {
    auto ri = [&](int lo, int hi) { return lo + int(rng() % std::uint32_t(hi - lo + 1)); };
    std::vector<SeparatorSample> samples;
    for (int i = 0; i < per_class; ++i)
        samples.push_back({ri(10, 18), ri(10, 18), SeparatorLabel::Dash});
    for (int i = 0; i < per_class; ++i)
        samples.push_back({ri(2, 3), ri(2, 3), SeparatorLabel::Dot});
    return samples;
}

int leave_one_out_correct(const std::vector<SeparatorSample>& samples, int k) {
    int correct = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::vector<SeparatorSample> rest;
        rest.reserve(samples.size() - 1);
        for (std::size_t j = 0; j < samples.size(); ++j)
            if (j != i)
                rest.push_back(samples[j]);
        const KnnModel model = train_knn(rest, k);
        if (knn_classify(model, samples[i].w_cc3, samples[i].w_cc6) == samples[i].label)
            ++correct;
    }
    return correct;
}

} // namespace

TEST_CASE("train_knn validates its inputs") {
    CHECK(train_knn(kHandModel, 3).samples.size() == 5);
    CHECK_THROWS_AS(train_knn({kHandModel[0], kHandModel[2]}, 3), ValidationError); // k > n
    CHECK_THROWS_AS(train_knn(kHandModel, 4), ValidationError);                     // even k
    CHECK_THROWS_AS(train_knn(kHandModel, 0), ValidationError);
    CHECK_THROWS_AS(
        train_knn({{5, 5, SeparatorLabel::Dash}, {6, 6, SeparatorLabel::Dash},
                   {7, 7, SeparatorLabel::Dash}},
                  3),
        ValidationError); // single class
    CHECK_THROWS_AS(train_knn({{0, 5, SeparatorLabel::Dash}, {6, 6, SeparatorLabel::Dot},
                               {7, 7, SeparatorLabel::Dash}},
                              3),
                    ValidationError); // width < 1
}

TEST_CASE("knn_classify matches hand-computed neighborhoods") {
    const KnnModel model = train_knn(kHandModel, 3);
    // (30,29): nearest three are the dashes at distance^2 1, 5, 5
    CHECK(knn_classify(model, 30, 29) == SeparatorLabel::Dash);
    // (3,4): nearest are (3,3) and (4,4) at distance^2 1, then a far dash
    CHECK(knn_classify(model, 3, 4) == SeparatorLabel::Dot);
    // query equal to a training point with a unanimous neighborhood
    CHECK(knn_classify(model, 3, 3) == SeparatorLabel::Dot);
}

TEST_CASE("distance ties prefer the lower sample index") {
    const std::vector<SeparatorSample> samples = {
        {5, 5, SeparatorLabel::Dash}, {7, 5, SeparatorLabel::Dot}, {100, 100, SeparatorLabel::Dot}};
    const KnnModel model = train_knn(samples, 1);
    // (6,5) is at distance 1 from both labeled points; index 0 wins
    CHECK(knn_classify(model, 6, 5) == SeparatorLabel::Dash);
    CHECK(knn_classify(model, 8, 5) == SeparatorLabel::Dot);
}

TEST_CASE("classify is deterministic across repeated calls") {
    std::mt19937 rng(211);
    const std::vector<SeparatorSample> corpus = separable_corpus(rng, 123);
    const KnnModel model = train_knn(corpus, 3);
    for (int q = 0; q < 200; ++q) {
        const int w3 = 1 + int(rng() % 25);
        const int w6 = 1 + int(rng() % 25);
        const SeparatorLabel first = knn_classify(model, w3, w6);
        for (int rep = 0; rep < 3; ++rep)
            CHECK(knn_classify(model, w3, w6) == first);
    }
}

TEST_CASE("uniform scaling preserves neighbor order and labels") {
    std::mt19937 rng(223);
    const std::vector<SeparatorSample> corpus = separable_corpus(rng, 40);
    const KnnModel model = train_knn(corpus, 3);

    std::vector<SeparatorSample> scaled = corpus;
    for (SeparatorSample& s : scaled) {
        s.w_cc3 *= 3;
        s.w_cc6 *= 3;
    }
    const KnnModel model3 = train_knn(scaled, 3);
    for (int q = 0; q < 100; ++q) {
        const int w3 = 1 + int(rng() % 30);
        const int w6 = 1 + int(rng() % 30);
        CHECK(knn_classify(model, w3, w6) == knn_classify(model3, 3 * w3, 3 * w6));
    }
}

TEST_CASE("leave-one-out is perfect on a separable corpus") {
    std::mt19937 rng(227);
    const std::vector<SeparatorSample> corpus = separable_corpus(rng, 123); // 246 samples
    CHECK(leave_one_out_correct(corpus, 3) == int(corpus.size()));
}

TEST_CASE("knn_refine splits DashOrDot candidates and rejects Slash") {
    std::mt19937 rng(229);
    const KnnModel model = train_knn(separable_corpus(rng, 40), 3);

    DateCandidate cand;
    cand.window = dtest::window_from_boxes({BBox{0, 20, 11, 49}, BBox{18, 20, 29, 49},
                                            BBox{36, 32, 49, 35}, BBox{56, 20, 67, 49},
                                            BBox{74, 20, 85, 49}, BBox{92, 33, 105, 36},
                                            BBox{112, 20, 123, 49}, BBox{130, 20, 141, 49}});
    cand.layout_class = LayoutClass::DashOrDot;
    cand.final_class = DateClass::Unrefined;
    cand.region = register_date(cand.window);

    const DateCandidate wide = knn_refine(model, cand);
    CHECK(wide.final_class == DateClass::Dash); // separators 14 px wide

    // shrink the separators to dot size
    std::vector<BBox> small = {BBox{0, 20, 11, 49},   BBox{18, 20, 29, 49},
                               BBox{36, 32, 38, 34},  BBox{56, 20, 67, 49},
                               BBox{74, 20, 85, 49},  BBox{92, 33, 94, 35},
                               BBox{112, 20, 123, 49}, BBox{130, 20, 141, 49}};
    DateCandidate dotc = cand;
    dotc.window = dtest::window_from_boxes(small);
    CHECK(knn_refine(model, dotc).final_class == DateClass::Dot);

    DateCandidate slash = cand;
    slash.layout_class = LayoutClass::Slash;
    slash.final_class = DateClass::Slash;
    CHECK_THROWS_AS(knn_refine(model, slash), ValidationError);
}
