#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "depthfuse/metrics.hpp"
#include "depthfuse/pipeline.hpp"
#include "depthfuse/simulate.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace depthfuse;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// Failure raised before any output is touched.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GlobalOptions {
    std::string config;
    std::string out;
    int threads = -1; // -1: take the config value, else 0 = all cores
    std::optional<std::uint32_t> seed;
};

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error(Errc::write_failed, path.string());
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key)) throw ValidationError("unknown key '" + key + "' in " + where);
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

void require_file(const fs::path& p, const std::string& what) {
    if (!fs::is_regular_file(p)) throw ValidationError(what + " not found: " + p.string());
}

PipelineParams pipeline_params(const json& cfg) {
    PipelineParams p;
    if (cfg.contains("ad")) {
        const auto& ad = cfg.at("ad");
        reject_unknown_keys(ad, {"lambda", "K"}, "ad");
        p.ad.lambda = ad.value("lambda", p.ad.lambda);
        p.ad.K = ad.value("K", p.ad.K);
    }
    if (cfg.contains("seg")) {
        const auto& seg = cfg.at("seg");
        reject_unknown_keys(seg, {"felz_k", "min_region_px", "connectivity"}, "seg");
        p.seg.felz_k = seg.value("felz_k", p.seg.felz_k);
        p.seg.min_region_px = seg.value("min_region_px", p.seg.min_region_px);
        p.seg.connectivity = seg.value("connectivity", p.seg.connectivity);
    }
    p.validate();
    return p;
}

MetricParams metric_params(const json& cfg) {
    MetricParams p;
    if (!cfg.contains("metrics")) return p;
    const auto& m = cfg.at("metrics");
    reject_unknown_keys(m, {"qg_literal_orientation", "qcb_csf"}, "metrics");
    p.qg.orientation_sigmoid_on_strength = m.value("qg_literal_orientation", false);
    const auto csf = m.value("qcb_csf", std::string("dog"));
    if (csf == "dog")
        p.qcb.csf = ContrastSensitivity::dog;
    else if (csf == "mannos_sakrison")
        p.qcb.csf = ContrastSensitivity::mannos_sakrison;
    else if (csf == "barten")
        p.qcb.csf = ContrastSensitivity::barten;
    else
        throw ValidationError("qcb_csf must be dog, mannos_sakrison or barten");
    return p;
}

void apply_threads(const GlobalOptions& g, const json& cfg) {
    int n = g.threads >= 0 ? g.threads : cfg.value("threads", 0);
    if (n < 0) throw ValidationError("threads must be non-negative");
    set_thread_count(static_cast<unsigned>(n));
}

fs::path prepare_out(const std::string& out) {
    if (out.empty()) throw ValidationError("--out is required");
    fs::create_directories(out);
    return fs::path(out);
}

// ---- fuse ------------------------------------------------------------------

struct FuseInputs {
    std::string calibration, depth;
    std::vector<std::string> sources;
};

int cmd_fuse(const GlobalOptions& g, const FuseInputs& flags) {
    // Validation: everything is loaded and checked before the output
    // directory is created.
    json cfg = json::object();
    fs::path base;
    if (!g.config.empty()) {
        cfg = read_json(g.config);
        reject_unknown_keys(cfg, {"calibration", "depth", "sources", "ad", "seg", "metrics", "threads", "out"}, "fuse config");
        base = fs::path(g.config).parent_path();
    }
    const std::string calib_s = !flags.calibration.empty() ? flags.calibration : cfg.value("calibration", std::string());
    const std::string depth_s = !flags.depth.empty() ? flags.depth : cfg.value("depth", std::string());
    std::vector<std::string> source_s = flags.sources;
    if (source_s.empty() && cfg.contains("sources")) source_s = cfg.at("sources").get<std::vector<std::string>>();
    const std::string out_s = !g.out.empty() ? g.out : (cfg.contains("out") ? resolve(base, cfg.at("out")).string() : "");

    if (calib_s.empty()) throw ValidationError("no calibration file given");
    if (depth_s.empty()) throw ValidationError("no depth map given");
    if (source_s.size() < 2) throw ValidationError("at least two source images are required");
    if (out_s.empty()) throw ValidationError("--out is required");
    const fs::path calib_path = resolve(flags.calibration.empty() ? base : fs::path(), calib_s);
    const fs::path depth_path = resolve(flags.depth.empty() ? base : fs::path(), depth_s);
    require_file(calib_path, "calibration");
    require_file(depth_path, "depth map");
    std::vector<ColorImage> images;
    for (const auto& s : source_s) {
        const fs::path p = resolve(flags.sources.empty() ? base : fs::path(), s);
        require_file(p, "source image");
        images.push_back(read_color(p));
    }
    const Calibration calib = load_calibration(calib_path);
    const DepthMap raw = read_depth(depth_path);
    const ImageStack stack(std::move(images));
    const PipelineParams params = pipeline_params(cfg);
    apply_threads(g, cfg);

    std::string stage = "pipeline";
    try {
        const fs::path out = prepare_out(out_s);
        spdlog::info("fusing {} sources of {}x{}", stack.size(), stack.image_size().width, stack.image_size().height);
        const PipelineResult r = run_pipeline(raw, calib, stack, params);
        spdlog::info("{} regions, {} holes after alignment", r.segmentation.region_count, r.preprocess.holes_after_align);

        stage = "write";
        write_raster(out / "depth_preprocessed.pgm", r.depth);
        write_segmentation(out / "segmentation.pgm", out / "segmentation.json", r.segmentation, r.regions);
        write_raster(out / "labels.pgm", r.labels);
        for (std::size_t i = 0; i < stack.size(); ++i)
            write_raster(out / ("weight_" + std::to_string(i) + ".pgm"),
                         weight_to_gray(weight_map(r.labels, i, stack.size())));
        write_raster(out / "fused.png", r.fused);
        json timing = r.timings;
        timing["stage_sum_ms"] = r.timings.preprocess_ms + r.timings.segment_ms + r.timings.select_ms;
        write_text(out / "timing.json", timing.dump(2) + "\n");
        spdlog::info("total {:.1f} ms (preprocess {:.1f}, segment {:.1f}, select {:.1f})", r.timings.total_ms,
                     r.timings.preprocess_ms, r.timings.segment_ms, r.timings.select_ms);
    } catch (const std::exception& e) {
        spdlog::error("[{}] {}", stage, e.what());
        return kExitRuntime;
    }
    return 0;
}

// ---- evaluate ----------------------------------------------------------------

int cmd_evaluate(const GlobalOptions& g, const std::vector<std::string>& paths) {
    json cfg = g.config.empty() ? json::object() : read_json(g.config);
    const MetricParams params = metric_params(cfg);
    for (const auto& p : paths) require_file(p, "image");
    auto load = [](const std::string& p) {
        const AnyRaster r = read_raster(p);
        if (const auto* c = std::get_if<ColorImage>(&r)) return rgb_to_gray(*c);
        if (const auto* g8 = std::get_if<Gray8Image>(&r)) return to_gray(*g8);
        throw ValidationError(p + " is not an 8-bit image");
    };
    const GrayImage a = load(paths[0]), b = load(paths[1]), f = load(paths[2]);
    if (a.size() != f.size() || b.size() != f.size()) throw ValidationError("images differ in size");
    apply_threads(g, cfg);

    const MetricReport report = evaluate_all(a, b, f, params);
    for (const auto& [metric, message] : report.errors) spdlog::warn("{}: {}", metric, message);
    std::cout << to_csv(report);
    if (!g.out.empty()) {
        const fs::path out = prepare_out(g.out);
        write_text(out / "metrics.csv", to_csv(report));
        write_text(out / "metrics.md", to_markdown(report));
    }
    return report.errors.empty() ? 0 : kExitRuntime;
}

// ---- rank --------------------------------------------------------------------

int cmd_rank(const GlobalOptions& g, const std::string& csv) {
    require_file(csv, "score table");
    std::ifstream in(csv);
    std::stringstream text;
    text << in.rdbuf();
    MetricTable table;
    try {
        table = parse_metric_table(text.str());
    } catch (const Error& e) {
        throw ValidationError(csv + ": " + e.what());
    }
    const ScoreTable scores = rank_methods(table);
    std::cout << totals_to_markdown(scores);
    if (!g.out.empty()) {
        const fs::path out = prepare_out(g.out);
        write_text(out / "totals.csv", totals_to_csv(scores));
        write_text(out / "totals.md", totals_to_markdown(scores));
        write_text(out / "scores.md", scores_to_markdown(table, scores));
    }
    return 0;
}

// ---- simulate and bench ------------------------------------------------------

struct SceneFlags {
    int width = 640;
    int height = 480;
};

SceneSpec scene_from(const GlobalOptions& g, const SceneFlags& s) {
    if (!g.config.empty()) {
        require_file(g.config, "scene spec");
        try {
            return load_scene_spec(g.config);
        } catch (const Error& e) {
            throw ValidationError(e.what());
        }
    }
    SceneSpec spec = random_two_layer_scene(g.seed.value_or(1), Size{s.width, s.height});
    spec.validate();
    return spec;
}

int cmd_simulate(const GlobalOptions& g, const SceneFlags& flags) {
    const SceneSpec spec = scene_from(g, flags);
    if (g.out.empty()) throw ValidationError("--out is required");
    apply_threads(g, json::object());

    const fs::path out = prepare_out(g.out);
    const RenderedScene scene = render_stack(spec);
    const DepthMap raw = degrade_depth(scene.true_depth, spec.degradation, spec.intrinsics);

    json files = json::object();
    std::vector<std::string> sources;
    for (std::size_t i = 0; i < scene.sources.size(); ++i) {
        const std::string name = "source_" + std::to_string(i) + ".png";
        write_raster(out / name, scene.sources[i]);
        sources.push_back(name);
    }
    write_raster(out / "ground_truth.png", scene.ground_truth);
    write_raster(out / "true_depth.pgm", scene.true_depth);
    write_raster(out / "depth_raw.pgm", raw);
    save_calibration(out / "calibration.json", spec.calibration());
    write_text(out / "scene.json", json(spec).dump(2) + "\n");

    // Per-pixel index of the source that holds each layer in focus; 255
    // where no layer covers the pixel.
    Gray8Image gt_labels(spec.image_size, 255);
    for (std::size_t p = 0; p < gt_labels.pixel_count(); ++p)
        for (std::size_t l = 0; l < spec.layers.size(); ++l)
            if (scene.true_depth.data()[p] == std::lround(spec.layers[l].depth_mm))
                gt_labels.data()[p] = static_cast<std::uint8_t>(scene.layer_focus_index[l]);
    write_raster(out / "gt_labels.pgm", gt_labels);

    write_text(out / "fuse.json",
               json{{"calibration", "calibration.json"}, {"depth", "depth_raw.pgm"}, {"sources", sources}}.dump(2) + "\n");

    json layers = json::array();
    for (std::size_t l = 0; l < spec.layers.size(); ++l)
        layers.push_back({{"depth", spec.layers[l].depth_mm}, {"focus_index", scene.layer_focus_index[l]}});
    files = {{"sources", sources},
             {"ground_truth", "ground_truth.png"},
             {"true_depth", "true_depth.pgm"},
             {"depth_raw", "depth_raw.pgm"},
             {"calibration", "calibration.json"},
             {"scene", "scene.json"},
             {"ground_truth_labels", "gt_labels.pgm"},
             {"fuse_config", "fuse.json"}};
    const json manifest = {{"width", spec.image_size.width},
                           {"height", spec.image_size.height},
                           {"focus_depths", spec.focus_depths},
                           {"layers", layers},
                           {"files", files}};
    write_text(out / "manifest.json", manifest.dump(2) + "\n");
    spdlog::info("wrote {} sources to {}", scene.sources.size(), out.string());
    return 0;
}

int cmd_bench(const GlobalOptions& g, const SceneFlags& flags, int repetitions) {
    const SceneSpec spec = scene_from(g, flags);
    if (repetitions < 1) throw ValidationError("--repetitions must be at least 1");
    if (spec.focus_depths.size() < 2) throw ValidationError("bench needs at least two focus depths");
    apply_threads(g, json::object());

    const RenderedScene scene = render_stack(spec);
    const DepthMap raw = degrade_depth(scene.true_depth, spec.degradation, spec.intrinsics);
    const ImageStack stack(scene.sources);
    const StageTimings t = bench_pipeline(raw, spec.calibration(), stack, PipelineParams{}, repetitions);
    const json report = {{"width", spec.image_size.width},
                         {"height", spec.image_size.height},
                         {"sources", stack.size()},
                         {"repetitions", repetitions},
                         {"threads", thread_count()},
                         {"median", t}};
    std::cout << report.dump(2) << "\n";
    if (!g.out.empty()) write_text(prepare_out(g.out) / "bench.json", report.dump(2) + "\n");
    return 0;
}

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("depthfuse");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    const char* env = std::getenv("DEPTHFUSE_LOG");
    spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
}

} // namespace

int main(int argc, char** argv) {
    configure_logging();

    CLI::App app{"Depth-assisted all-in-focus fusion toolkit"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--config", g.config, "JSON configuration file");
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", g.seed, "Seed for generated scenes");

    FuseInputs fuse_in;
    auto* fuse = app.add_subcommand("fuse", "Fuse a multi-focus stack with a depth map")->fallthrough();
    fuse->add_option("--calibration", fuse_in.calibration, "Calibration JSON");
    fuse->add_option("--depth", fuse_in.depth, "Raw 16-bit depth PGM");
    fuse->add_option("--source", fuse_in.sources, "Source image (repeat per focus setting)");

    std::vector<std::string> eval_paths;
    auto* evaluate = app.add_subcommand("evaluate", "Score a fused image against two sources")->fallthrough();
    evaluate->add_option("images", eval_paths, "A B F")->required()->expected(3);

    std::string rank_csv;
    auto* rank = app.add_subcommand("rank", "Score and rank methods from a metric table")->fallthrough();
    rank->add_option("table", rank_csv, "CSV with scene,metric,<method>... columns")->required();

    SceneFlags scene_flags;
    int repetitions = 11;
    auto* simulate = app.add_subcommand("simulate", "Render a synthetic dataset")->fallthrough();
    auto* bench = app.add_subcommand("bench", "Median stage timings on a synthetic scene")->fallthrough();
    for (auto* sub : {simulate, bench}) {
        sub->add_option("--width", scene_flags.width, "Generated scene width")->check(CLI::PositiveNumber);
        sub->add_option("--height", scene_flags.height, "Generated scene height")->check(CLI::PositiveNumber);
    }
    bench->add_option("--repetitions", repetitions, "Runs to take the median over");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*fuse) return cmd_fuse(g, fuse_in);
        if (*evaluate) return cmd_evaluate(g, eval_paths);
        if (*rank) return cmd_rank(g, rank_csv);
        if (*simulate) return cmd_simulate(g, scene_flags);
        if (*bench) return cmd_bench(g, scene_flags, repetitions);
    } catch (const ValidationError& e) {
        spdlog::error("[validate] {}", e.what());
        return kExitUsage;
    } catch (const Error& e) {
        const bool input_problem = e.code() == Errc::open_failed || e.code() == Errc::malformed_header ||
                                   e.code() == Errc::truncated_payload || e.code() == Errc::unsupported_format ||
                                   e.code() == Errc::dimension_overflow || e.code() == Errc::malformed_calibration ||
                                   e.code() == Errc::non_orthonormal_rotation || e.code() == Errc::invalid_argument ||
                                   e.code() == Errc::dimension_mismatch || e.code() == Errc::stack_size;
        spdlog::error("[{}] {}", input_problem ? "validate" : "run", e.what());
        return input_problem ? kExitUsage : kExitRuntime;
    } catch (const json::exception& e) {
        spdlog::error("[validate] {}", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        spdlog::error("[run] {}", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
