#include "datefield/layout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "datefield/errors.hpp"

namespace datefield {

BBox bbox_union(const BBox& a, const BBox& b) {
    return BBox{std::min(a.x_min, b.x_min), std::min(a.y_min, b.y_min),
                std::max(a.x_max, b.x_max), std::max(a.y_max, b.y_max)};
}

std::vector<int> project_rows(const BinaryImage& img) {
    std::vector<int> counts(std::size_t(img.height), 0);
    for (int y = 0; y < img.height; ++y) {
        int c = 0;
        const std::uint8_t* row = img.bits.data() + std::size_t(y) * img.width;
        for (int x = 0; x < img.width; ++x)
            c += row[x];
        counts[std::size_t(y)] = c;
    }
    return counts;
}

std::vector<RowBand> segment_lines(const BinaryImage& img, int min_gap, int min_ink) {
    if (min_gap < 1 || min_ink < 1)
        throw ValidationError("segment_lines: min_gap and min_ink must be >= 1");

    const std::vector<int> profile = project_rows(img);

    std::vector<RowBand> bands;
    int run_start = -1;
    for (int y = 0; y <= img.height; ++y) {
        const bool text = y < img.height && profile[std::size_t(y)] >= min_ink;
        if (text && run_start < 0) {
            run_start = y;
        } else if (!text && run_start >= 0) {
            bands.push_back(RowBand{run_start, y - 1});
            run_start = -1;
        }
    }

    // Merge bands separated by fewer than min_gap blank rows.
    std::vector<RowBand> merged;
    for (const RowBand& b : bands) {
        if (!merged.empty() && b.y_top - merged.back().y_bottom - 1 < min_gap)
            merged.back().y_bottom = b.y_bottom;
        else
            merged.push_back(b);
    }
    return merged;
}

std::vector<ConnComp> label_components(const BinaryImage& img) {
    const int w = img.width;
    const int h = img.height;
    std::vector<std::int32_t> label(std::size_t(w) * h, -1);
    std::vector<ConnComp> comps;
    std::vector<std::size_t> stack;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = std::size_t(y) * w + x;
            if (!img.bits[idx] || label[idx] >= 0)
                continue;

            const int id = int(comps.size());
            ConnComp comp;
            comp.id = id;
            comp.bbox = BBox{x, y, x, y};
            comp.pixel_count = 0;

            label[idx] = id;
            stack.clear();
            stack.push_back(idx);
            while (!stack.empty()) {
                const std::size_t cur = stack.back();
                stack.pop_back();
                const int cx = int(cur % w);
                const int cy = int(cur / w);
                ++comp.pixel_count;
                comp.bbox.x_min = std::min(comp.bbox.x_min, cx);
                comp.bbox.x_max = std::max(comp.bbox.x_max, cx);
                comp.bbox.y_min = std::min(comp.bbox.y_min, cy);
                comp.bbox.y_max = std::max(comp.bbox.y_max, cy);

                for (int dy = -1; dy <= 1; ++dy) {
                    const int ny = cy + dy;
                    if (ny < 0 || ny >= h)
                        continue;
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = cx + dx;
                        if (nx < 0 || nx >= w || (dx == 0 && dy == 0))
                            continue;
                        const std::size_t nidx = std::size_t(ny) * w + nx;
                        if (img.bits[nidx] && label[nidx] < 0) {
                            label[nidx] = id;
                            stack.push_back(nidx);
                        }
                    }
                }
            }
            comps.push_back(comp);
        }
    }
    return comps;
}

std::vector<TextLine> assign_to_lines(const std::vector<ConnComp>& comps,
                                      const std::vector<RowBand>& bands,
                                      int noise_min_pixels) {
    std::vector<TextLine> lines;
    lines.reserve(bands.size());
    for (const RowBand& b : bands)
        lines.push_back(TextLine{b.y_top, b.y_bottom, {}});
    if (lines.empty())
        return lines;

    for (const ConnComp& comp : comps) {
        if (comp.pixel_count < noise_min_pixels)
            continue;
        const double cy = comp.centroid_y();
        std::size_t best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < bands.size(); ++i) {
            const double below = bands[i].y_top - cy;
            const double above = cy - bands[i].y_bottom;
            const double dist = std::max({below, above, 0.0});
            if (dist < best_dist) {
                best_dist = dist;
                best = i;
            }
            if (dist == 0.0)
                break;
        }
        lines[best].components.push_back(comp);
    }

    for (TextLine& line : lines) {
        std::sort(line.components.begin(), line.components.end(),
                  [](const ConnComp& a, const ConnComp& b) {
                      if (a.bbox.x_min != b.bbox.x_min)
                          return a.bbox.x_min < b.bbox.x_min;
                      if (a.bbox.y_min != b.bbox.y_min)
                          return a.bbox.y_min < b.bbox.y_min;
                      return a.id < b.id;
                  });
        for (const ConnComp& comp : line.components) {
            line.y_top = std::min(line.y_top, comp.bbox.y_min);
            line.y_bottom = std::max(line.y_bottom, comp.bbox.y_max);
        }
    }
    return lines;
}

std::vector<TextLine> extract_lines(const BinaryImage& img, const LayoutParams& params) {
    const std::vector<RowBand> bands = segment_lines(img, params.min_gap, params.min_ink);
    const std::vector<ConnComp> comps = label_components(img);
    return assign_to_lines(comps, bands, params.noise_min_pixels);
}

} // namespace datefield
