#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "datefield/errors.hpp"
#include "datefield/eval.hpp"
#include "datefield/json_io.hpp"
#include "datefield/knn.hpp"
#include "datefield/synth.hpp"

namespace fs = std::filesystem;
using namespace datefield;

namespace {

constexpr const char* kVersion = "datefield 1.0.0";

struct ScanArgs {
    std::vector<std::string> images;
    std::string ranges_path;
    std::string knn_path;
    std::string out_dir;
    int threshold = -1; // -1: Otsu
    int min_gap = -1;
    int min_ink = -1;
    int noise_min_pixels = -1;
    int jobs = 1;
    bool no_overlays = false;
};

struct SynthArgs {
    std::string spec_path;
    std::string out_dir;
    int pages = 1;
    std::int64_t seed = -1; // -1: keep spec seed
};

struct CalibrateArgs {
    std::string corpus_dir;
    std::string out_path;
    double quantile = 0.01;
    double margin = 1.05;
};

struct TrainKnnArgs {
    std::string in_path;
    std::string out_path;
    int k = 3;
};

struct ExtractKnnArgs {
    std::string corpus_dir;
    std::string out_path;
};

struct EvaluateArgs {
    std::string detections_dir;
    std::string truth_dir;
    double iou = 0.5;
    std::string report_path;
    bool include_expected_miss = false;
};

std::vector<fs::path> truth_files_sorted(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 11 && name.ends_with(".truth.json"))
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::string truth_stem(const fs::path& truth_file) {
    std::string name = truth_file.filename().string();
    return name.substr(0, name.size() - std::string(".truth.json").size());
}

EcccWindow window_from_truth_boxes(const std::vector<BBox>& boxes) {
    std::array<ConnComp, 8> comps;
    for (std::size_t i = 0; i < 8; ++i) {
        comps[i].id = int(i);
        comps[i].bbox = boxes[i];
        comps[i].pixel_count = boxes[i].width() * boxes[i].height();
    }
    return make_eccc_window(std::span<const ConnComp, 8>(comps.data(), 8));
}

int run_scan(const ScanArgs& args) {
    PipelineConfig cfg;
    if (!args.ranges_path.empty())
        cfg = load_pipeline_config(args.ranges_path);
    if (args.min_gap >= 0) cfg.layout.min_gap = args.min_gap;
    if (args.min_ink >= 0) cfg.layout.min_ink = args.min_ink;
    if (args.noise_min_pixels >= 0) cfg.layout.noise_min_pixels = args.noise_min_pixels;

    std::optional<KnnModel> model;
    if (!args.knn_path.empty())
        model = load_knn_model(args.knn_path);

    const fs::path out_dir = args.out_dir;
    fs::create_directories(out_dir);

    std::optional<int> threshold;
    if (args.threshold >= 0) {
        if (args.threshold > 255)
            throw ValidationError("--threshold must be in 0..255");
        threshold = args.threshold;
    }

    struct Result {
        std::string line;   // summary for stdout
        std::string error;  // diagnostic for stderr
        bool input_error = false;
    };
    std::vector<Result> results(args.images.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= args.images.size())
                return;
            const fs::path input = args.images[i];
            try {
                const GrayImage gray = load_image(input);
                const BinaryImage page = binarize(gray, threshold);
                std::vector<DateCandidate> candidates =
                    scan_document(page, cfg.detector, cfg.layout);
                if (model)
                    for (DateCandidate& cand : candidates)
                        if (cand.layout_class == LayoutClass::DashOrDot)
                            cand = knn_refine(*model, cand);

                std::vector<Detection> detections;
                detections.reserve(candidates.size());
                for (const DateCandidate& cand : candidates)
                    detections.push_back(to_detection(cand));

                const std::string stem = input.stem().string();
                save_detections(detections, out_dir / (stem + ".json"));
                if (!args.no_overlays) {
                    const bool png = input.extension() == ".png";
                    const GrayImage mask = to_gray(date_only_mask(page, candidates));
                    const GrayImage boxes = draw_candidates(page, candidates);
                    if (png) {
                        save_png(mask, out_dir / (stem + ".dates.png"));
                        save_png(boxes, out_dir / (stem + ".boxes.png"));
                    } else {
                        save_pgm(mask, out_dir / (stem + ".dates.pgm"));
                        save_pgm(boxes, out_dir / (stem + ".boxes.pgm"));
                    }
                }
                results[i].line =
                    stem + ": " + std::to_string(detections.size()) + " detection(s)";
            } catch (const IoError& e) {
                results[i].error = e.what();
                results[i].input_error = true;
            } catch (const FormatError& e) {
                results[i].error = e.what();
                results[i].input_error = true;
            } catch (const ValidationError& e) {
                results[i].error = e.what();
                results[i].input_error = true;
            } catch (const std::exception& e) {
                results[i].error = e.what();
            }
        }
    };

    const int jobs = std::max(1, args.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back(worker);
        for (std::thread& t : pool)
            t.join();
    }

    bool any_input_error = false, any_error = false;
    for (const Result& r : results) {
        if (!r.line.empty())
            std::cout << r.line << "\n";
        if (!r.error.empty()) {
            std::cerr << "error: " << r.error << "\n";
            any_error = true;
            any_input_error |= r.input_error;
        }
    }
    return any_input_error ? 2 : any_error ? 1 : 0;
}

int run_synth(const SynthArgs& args) {
    SynthSpec spec;
    if (!args.spec_path.empty())
        spec = load_synth_spec(args.spec_path);
    if (args.seed >= 0)
        spec.seed = std::uint64_t(args.seed);
    if (args.pages < 1)
        throw ValidationError("--pages must be >= 1");

    const fs::path out_dir = args.out_dir;
    fs::create_directories(out_dir);
    for (int p = 0; p < args.pages; ++p) {
        auto [image, truth] = generate_page(spec, p);
        char name[32];
        std::snprintf(name, sizeof name, "page_%03d", p);
        save_pgm(to_gray(image), out_dir / (std::string(name) + ".pgm"));
        save_ground_truth(truth, out_dir / (std::string(name) + ".truth.json"));
    }
    std::cout << "wrote " << args.pages << " page(s) to " << out_dir.string() << "\n";
    return 0;
}

int run_calibrate(const CalibrateArgs& args) {
    std::vector<LabeledWindow> windows;
    for (const fs::path& tf : truth_files_sorted(args.corpus_dir)) {
        const GroundTruth truth = load_ground_truth(tf);
        for (const TruthDate& d : truth.dates) {
            if (d.expected_miss || d.component_boxes.size() != 8)
                continue;
            windows.push_back(LabeledWindow{window_from_truth_boxes(d.component_boxes), true});
        }
    }
    PipelineConfig cfg;
    cfg.detector.ranges =
        calibrate_ranges(std::span<const LabeledWindow>(windows), args.quantile, args.margin);
    save_pipeline_config(cfg, args.out_path);
    std::cout << "calibrated " << windows.size() << " window(s) -> " << args.out_path << "\n";
    for (std::size_t k = 0; k < 6; ++k)
        std::cout << "  f" << k + 1 << ": [" << cfg.detector.ranges.intervals[k].lo << ", "
                  << cfg.detector.ranges.intervals[k].hi << "]\n";
    return 0;
}

int run_train_knn(const TrainKnnArgs& args) {
    const std::vector<SeparatorSample> samples = load_knn_samples(args.in_path);
    const KnnModel model = train_knn(samples, args.k);
    save_knn_model(model, args.out_path);
    std::cout << "trained on " << model.samples.size() << " sample(s), k=" << model.k << " -> "
              << args.out_path << "\n";
    return 0;
}

int run_extract_knn(const ExtractKnnArgs& args) {
    std::vector<SeparatorSample> samples;
    for (const fs::path& tf : truth_files_sorted(args.corpus_dir)) {
        const GroundTruth truth = load_ground_truth(tf);
        const std::vector<SeparatorSample> page =
            extract_knn_samples(std::span<const TruthDate>(truth.dates));
        samples.insert(samples.end(), page.begin(), page.end());
    }
    save_knn_samples(samples, args.out_path);
    std::cout << "extracted " << samples.size() << " sample(s) -> " << args.out_path << "\n";
    return 0;
}

int run_evaluate(const EvaluateArgs& args) {
    MatchOptions opts;
    opts.iou_min = args.iou;
    opts.include_expected_miss = args.include_expected_miss;

    const std::vector<fs::path> truths = truth_files_sorted(args.truth_dir);
    if (truths.empty())
        throw ValidationError("no *.truth.json files in " + args.truth_dir);

    EvalReport total;
    for (const fs::path& tf : truths) {
        const GroundTruth truth = load_ground_truth(tf);
        const fs::path det_path = fs::path(args.detections_dir) / (truth_stem(tf) + ".json");
        const std::vector<Detection> detections = load_detections(det_path);
        total = combine(total, match_detections(detections, truth, opts));
    }
    std::cout << format_report_table(total);
    std::cout << "dates: " << total.true_dates << ", detections: " << total.detections
              << ", matches: " << total.matches << " (" << total.class_correct_matches
              << " class-correct), false accepts: " << total.false_accepts
              << ", false rejects: " << total.false_rejects << "\n";
    if (total.expected_miss_total > 0)
        std::cout << "expected-miss dates: " << total.expected_miss_total << " ("
                  << total.expected_miss_detected << " detected)\n";
    if (!args.report_path.empty())
        save_report(total, args.report_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Localizes handwritten numerical date fields (DD/MM/YY, DD-MM-YY, DD.MM.YY) "
                 "in scanned document images"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    ScanArgs scan_args;
    CLI::App* scan = app.add_subcommand("scan", "Detect date fields in document images");
    scan->add_option("images", scan_args.images, "Input images (PGM or PNG)")->required();
    scan->add_option("--ranges", scan_args.ranges_path, "Detector config JSON");
    scan->add_option("--knn", scan_args.knn_path, "KNN model JSON for dash/dot refinement");
    scan->add_option("--out", scan_args.out_dir, "Output directory")->required();
    scan->add_option("--threshold", scan_args.threshold, "Binarization threshold (default: Otsu)");
    scan->add_option("--min-gap", scan_args.min_gap, "Line merge gap in rows");
    scan->add_option("--min-ink", scan_args.min_ink, "Min ink pixels for a text row");
    scan->add_option("--noise-min-pixels", scan_args.noise_min_pixels,
                     "Drop components smaller than this");
    scan->add_option("--jobs", scan_args.jobs, "Parallel workers over input images");
    scan->add_flag("--no-overlays", scan_args.no_overlays, "Skip overlay image output");

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "Generate synthetic pages with ground truth");
    synth->add_option("--spec", synth_args.spec_path, "Generator spec JSON");
    synth->add_option("--out", synth_args.out_dir, "Output directory")->required();
    synth->add_option("--pages", synth_args.pages, "Number of pages");
    synth->add_option("--seed", synth_args.seed, "Override the seed from the spec file");

    CalibrateArgs cal_args;
    CLI::App* cal = app.add_subcommand("calibrate", "Learn feature ranges from a labeled corpus");
    cal->add_option("--corpus", cal_args.corpus_dir, "Directory of *.truth.json files")
        ->required();
    cal->add_option("--out", cal_args.out_path, "Output ranges JSON")->required();
    cal->add_option("--quantile", cal_args.quantile, "Trim quantile (default 0.01)");
    cal->add_option("--margin", cal_args.margin, "Widening factor (default 1.05)");

    TrainKnnArgs train_args;
    CLI::App* train = app.add_subcommand("train-knn", "Train the dash/dot separator classifier");
    train->add_option("--in", train_args.in_path, "Samples JSON")->required();
    train->add_option("--out", train_args.out_path, "Model JSON")->required();
    train->add_option("--k", train_args.k, "Neighbor count (odd, default 3)");

    ExtractKnnArgs extract_args;
    CLI::App* extract =
        app.add_subcommand("extract-knn", "Extract separator samples from a labeled corpus");
    extract->add_option("--corpus", extract_args.corpus_dir, "Directory of *.truth.json files")
        ->required();
    extract->add_option("--out", extract_args.out_path, "Samples JSON")->required();

    EvaluateArgs eval_args;
    CLI::App* eval = app.add_subcommand("evaluate", "Score detections against ground truth");
    eval->add_option("--detections", eval_args.detections_dir, "Directory of detection JSON")
        ->required();
    eval->add_option("--truth", eval_args.truth_dir, "Directory of *.truth.json files")
        ->required();
    eval->add_option("--iou", eval_args.iou, "Match threshold (default 0.5)");
    eval->add_option("--report", eval_args.report_path, "Write report JSON here");
    eval->add_flag("--include-expected-miss", eval_args.include_expected_miss,
                   "Score known-failure dates as regular dates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (scan->parsed()) return run_scan(scan_args);
        if (synth->parsed()) return run_synth(synth_args);
        if (cal->parsed()) return run_calibrate(cal_args);
        if (train->parsed()) return run_train_knn(train_args);
        if (extract->parsed()) return run_extract_knn(extract_args);
        if (eval->parsed()) return run_evaluate(eval_args);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
