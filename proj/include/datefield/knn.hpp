#pragma once

#include <optional>
#include <string>
#include <vector>

#include "datefield/detector.hpp"

namespace datefield {

enum class SeparatorLabel { Dash, Dot };

std::string to_string(SeparatorLabel label);
std::optional<SeparatorLabel> separator_label_from_string(const std::string& s);

// One labeled training point: widths of the 3rd and 6th window components.
struct SeparatorSample {
    int w_cc3 = 0;
    int w_cc6 = 0;
    SeparatorLabel label = SeparatorLabel::Dash;
};

// Lazy learner: stores the samples verbatim. k is odd so two-class votes
// cannot tie.
struct KnnModel {
    std::vector<SeparatorSample> samples;
    int k = 3;
};

// Validates (k odd, k <= sample count, both labels present, widths >= 1) and
// stores the samples.
KnnModel train_knn(std::vector<SeparatorSample> samples, int k = 3);

// Majority label among the k nearest samples by Euclidean distance in
// (w_cc3, w_cc6) space; distance ties prefer the smaller sample index.
SeparatorLabel knn_classify(const KnnModel& model, int w_cc3, int w_cc6);

// Sets final_class from the widths of the candidate's 3rd and 6th components.
// Only DashOrDot candidates may be refined.
DateCandidate knn_refine(const KnnModel& model, DateCandidate cand);

} // namespace datefield
