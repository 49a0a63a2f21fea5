#pragma once

#include <vector>

#include "datefield/raster.hpp"

namespace datefield {

// Axis-aligned rectangle with inclusive pixel coordinates.
struct BBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    int width() const { return x_max - x_min + 1; }
    int height() const { return y_max - y_min + 1; }
    bool operator==(const BBox&) const = default;
};

BBox bbox_union(const BBox& a, const BBox& b);

// One connected component of ink pixels with its minimum bounding rectangle.
struct ConnComp {
    int id = 0;
    BBox bbox;
    int pixel_count = 0;

    int width() const { return bbox.width(); }
    int height() const { return bbox.height(); }
    // Vertical center of the bounding rectangle (not the ink-mass centroid).
    double centroid_y() const { return (bbox.y_min + bbox.y_max) / 2.0; }
};

// Inclusive row range of one text line band.
struct RowBand {
    int y_top = 0;
    int y_bottom = 0;
    bool operator==(const RowBand&) const = default;
};

// A text line: its row band plus the components assigned to it, sorted
// ascending by bbox.x_min (ties by y_min, then id).
struct TextLine {
    int y_top = 0;
    int y_bottom = 0;
    std::vector<ConnComp> components;
};

struct LayoutParams {
    int min_gap = 3;          // blank-row runs shorter than this merge adjacent bands
    int min_ink = 1;          // a row is text if its ink count reaches this
    int noise_min_pixels = 4; // components below this pixel count are dropped
};

// Per-row ink-pixel counts (horizontal projection profile).
std::vector<int> project_rows(const BinaryImage& img);

// Maximal runs of rows with ink count >= min_ink; runs separated by fewer
// than min_gap blank rows are merged. Top-to-bottom, non-overlapping.
std::vector<RowBand> segment_lines(const BinaryImage& img, int min_gap, int min_ink);

// 8-connectivity labeling of ink pixels. Ids are dense from 0 in raster-scan
// order of each component's first pixel.
std::vector<ConnComp> label_components(const BinaryImage& img);

// Drops components below noise_min_pixels, assigns the rest to the band
// containing their centroid_y (nearest band when none contains it), and sorts
// each line by x_min. Band ranges are extended where needed so every assigned
// component's bbox intersects its line vertically.
std::vector<TextLine> assign_to_lines(const std::vector<ConnComp>& comps,
                                      const std::vector<RowBand>& bands,
                                      int noise_min_pixels);

// segment_lines + label_components + assign_to_lines in one call.
std::vector<TextLine> extract_lines(const BinaryImage& img, const LayoutParams& params);

} // namespace datefield
