#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "datefield/detector.hpp"

namespace datefield {

// Inclusive integer range.
struct IntRange {
    int lo = 0;
    int hi = 0;
};

struct ClassMix {
    double slash = 1.0 / 3;
    double dash = 1.0 / 3;
    double dot = 1.0 / 3;
};

struct Stressors {
    bool double_digits = false;  // digits 1-2 merge into one component
    bool date_like_text = false; // 8-component non-date sequences
    bool specks = false;         // sub-noise-threshold salt dots
};

// Deterministic page recipe. Components are rendered as filled rectangles;
// the detector consumes only bounding-rectangle geometry, so glyph realism
// adds nothing testable.
struct SynthSpec {
    std::uint64_t seed = 1;
    int page_width = 1200;
    int page_height = 900;
    int lines = 8;
    int dates_per_page = 2;
    ClassMix class_mix;

    IntRange digit_height{24, 36};
    IntRange digit_width{14, 24};
    int baseline_jitter = 2;

    double slash_height_factor = 1.4; // relative to the flanking digits
    IntRange slash_width{4, 8};
    IntRange dash_width{10, 18};
    IntRange dash_height{2, 4};
    IntRange dot_size{2, 3};

    IntRange intra_gap{3, 8}; // spacing between components of one item

    double distractor_density = 2.0; // mean words per line; 0 disables words
    Stressors stressors;
    int double_digits_per_page = 1;
    int date_like_per_page = 1;
    double date_like_accept_fraction = 0.5; // fraction passing every stage
    int specks_per_page = 12;
};

struct TruthDate {
    int line_index = 0;
    DateClass cls = DateClass::Slash; // never Unrefined
    BBox region;
    std::vector<BBox> component_boxes;
    bool expected_miss = false; // double-digit stressor, < 8 components
};

enum class DistractorKind { Word, DateLikeReject, DateLikeAccept, Speck };

std::string to_string(DistractorKind kind);
std::optional<DistractorKind> distractor_kind_from_string(const std::string& s);

struct TruthDistractor {
    BBox region;
    DistractorKind kind = DistractorKind::Word;
    bool expected_false_accept = false;
};

struct GroundTruth {
    int page_width = 0;
    int page_height = 0;
    std::vector<TruthDate> dates;
    std::vector<TruthDistractor> distractors;
};

// Renders one page plus its exact ground truth. Deterministic for a given
// (spec, page_index); pages of a corpus split the seed as seed + page_index.
// Planted dates are verified against the detector stage predicates at
// generation time; impossible geometry raises ValidationError.
std::pair<BinaryImage, GroundTruth> generate_page(const SynthSpec& spec, int page_index = 0);

} // namespace datefield
