#include "datefield/knn.hpp"

#include <algorithm>
#include <cstdint>

#include "datefield/errors.hpp"

namespace datefield {

std::string to_string(SeparatorLabel label) {
    return label == SeparatorLabel::Dash ? "Dash" : "Dot";
}

std::optional<SeparatorLabel> separator_label_from_string(const std::string& s) {
    if (s == "Dash") return SeparatorLabel::Dash;
    if (s == "Dot") return SeparatorLabel::Dot;
    return std::nullopt;
}

KnnModel train_knn(std::vector<SeparatorSample> samples, int k) {
    if (k < 1 || k % 2 == 0)
        throw ValidationError("train_knn: k must be odd and >= 1");
    if (int(samples.size()) < k)
        throw ValidationError("train_knn: need at least k samples");
    bool has_dash = false, has_dot = false;
    for (const SeparatorSample& s : samples) {
        if (s.w_cc3 < 1 || s.w_cc6 < 1)
            throw ValidationError("train_knn: widths must be >= 1");
        (s.label == SeparatorLabel::Dash ? has_dash : has_dot) = true;
    }
    if (!has_dash || !has_dot)
        throw ValidationError("train_knn: both labels must be present");
    return KnnModel{std::move(samples), k};
}

SeparatorLabel knn_classify(const KnnModel& model, int w_cc3, int w_cc6) {
    // Integer squared distances keep neighbor ordering exact.
    struct Neighbor {
        std::int64_t dist2;
        std::size_t index;
    };
    std::vector<Neighbor> neighbors;
    neighbors.reserve(model.samples.size());
    for (std::size_t i = 0; i < model.samples.size(); ++i) {
        const std::int64_t dx = model.samples[i].w_cc3 - w_cc3;
        const std::int64_t dy = model.samples[i].w_cc6 - w_cc6;
        neighbors.push_back(Neighbor{dx * dx + dy * dy, i});
    }
    const std::size_t k = std::size_t(model.k);
    std::partial_sort(neighbors.begin(), neighbors.begin() + std::ptrdiff_t(k), neighbors.end(),
                      [](const Neighbor& a, const Neighbor& b) {
                          if (a.dist2 != b.dist2)
                              return a.dist2 < b.dist2;
                          return a.index < b.index;
                      });
    int dash_votes = 0;
    for (std::size_t i = 0; i < k; ++i)
        if (model.samples[neighbors[i].index].label == SeparatorLabel::Dash)
            ++dash_votes;
    return 2 * dash_votes > model.k ? SeparatorLabel::Dash : SeparatorLabel::Dot;
}

DateCandidate knn_refine(const KnnModel& model, DateCandidate cand) {
    if (cand.layout_class != LayoutClass::DashOrDot)
        throw ValidationError("knn_refine: candidate is not DashOrDot");
    const SeparatorLabel label =
        knn_classify(model, cand.window.comps[2].width(), cand.window.comps[5].width());
    cand.final_class = label == SeparatorLabel::Dash ? DateClass::Dash : DateClass::Dot;
    return cand;
}

} // namespace datefield
