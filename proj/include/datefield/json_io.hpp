#pragma once

#include <filesystem>
#include <vector>

#include "datefield/detector.hpp"
#include "datefield/eval.hpp"
#include "datefield/knn.hpp"
#include "datefield/synth.hpp"

namespace datefield {

// Detector configuration file: feature intervals, spacing multiplier and
// layout parameters. Missing fields keep their defaults.
struct PipelineConfig {
    DetectorConfig detector;
    LayoutParams layout;
};

PipelineConfig load_pipeline_config(const std::filesystem::path& path);
void save_pipeline_config(const PipelineConfig& cfg, const std::filesystem::path& path);

// Detections file: a JSON array of {line_index, class, region, features,
// component_boxes}.
void save_detections(const std::vector<Detection>& detections,
                     const std::filesystem::path& path);
std::vector<Detection> load_detections(const std::filesystem::path& path);

// Ground-truth sidecar emitted next to each synthetic page.
void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth load_ground_truth(const std::filesystem::path& path);

// Generator recipe; every field is optional and defaults apply.
SynthSpec load_synth_spec(const std::filesystem::path& path);
void save_synth_spec(const SynthSpec& spec, const std::filesystem::path& path);

// Separator samples: a JSON array of {w3, w6, label}.
void save_knn_samples(const std::vector<SeparatorSample>& samples,
                      const std::filesystem::path& path);
std::vector<SeparatorSample> load_knn_samples(const std::filesystem::path& path);

// Model file: {k, samples}. A bare samples array is also accepted on load
// (k defaults to 3).
void save_knn_model(const KnnModel& model, const std::filesystem::path& path);
KnnModel load_knn_model(const std::filesystem::path& path);

void save_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

} // namespace datefield
