#pragma once

// End-to-end run: preprocess -> segment -> select -> fuse, with stage timings.

#include <algorithm>
#include <chrono>
#include <vector>

#include <nlohmann/json.hpp>

#include "depthfuse/calibration.hpp"
#include "depthfuse/depthprep.hpp"
#include "depthfuse/dofseg.hpp"
#include "depthfuse/fusion.hpp"

namespace depthfuse {

struct PipelineParams {
    ADParams ad;
    SegParams seg;

    void validate() const {
        ad.validate();
        seg.validate();
    }
};

struct StageTimings {
    double preprocess_ms = 0.0;
    double segment_ms = 0.0;
    double select_ms = 0.0; // focus scoring, labelling and composition
    double total_ms = 0.0;
};

struct PipelineResult {
    DepthMap depth;
    PreprocessStats preprocess;
    SegmentationMap segmentation;
    std::vector<RegionStats> regions;
    LabelMap labels;
    ColorImage fused;
    StageTimings timings;
};

inline PipelineResult run_pipeline(const DepthMap& raw_depth, const Calibration& calib, const ImageStack& stack,
                                   const PipelineParams& p = {}) {
    calib.validate();
    p.validate();
    using clock = std::chrono::steady_clock;
    auto ms = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double, std::milli>(b - a).count();
    };
    PipelineResult r;
    const auto t0 = clock::now();
    r.depth = preprocess(raw_depth, calib, p.ad, stack.image_size(), &r.preprocess);
    const auto t1 = clock::now();
    r.segmentation = segment_depth(r.depth, calib.optics, p.seg);
    const auto t2 = clock::now();
    r.labels = select_in_focus(stack, r.segmentation);
    r.fused = fuse(stack, r.labels);
    const auto t3 = clock::now();
    r.regions = region_stats(r.segmentation, r.depth, calib.optics);
    r.timings = StageTimings{ms(t0, t1), ms(t1, t2), ms(t2, t3), ms(t0, t3)};
    return r;
}

inline void to_json(nlohmann::json& j, const StageTimings& t) {
    j = {{"preprocess_ms", t.preprocess_ms},
         {"segment_ms", t.segment_ms},
         {"select_ms", t.select_ms},
         {"total_ms", t.total_ms}};
}

/// Median of each stage over `repetitions` runs.
inline StageTimings bench_pipeline(const DepthMap& raw_depth, const Calibration& calib, const ImageStack& stack,
                                   const PipelineParams& p, int repetitions) {
    if (repetitions < 1) throw Error(Errc::invalid_argument, "repetitions must be at least 1");
    std::vector<StageTimings> runs;
    for (int i = 0; i < repetitions; ++i) runs.push_back(run_pipeline(raw_depth, calib, stack, p).timings);
    auto median = [&](double StageTimings::*field) {
        std::vector<double> v;
        for (const auto& t : runs) v.push_back(t.*field);
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    return StageTimings{median(&StageTimings::preprocess_ms), median(&StageTimings::segment_ms),
                        median(&StageTimings::select_ms), median(&StageTimings::total_ms)};
}

} // namespace depthfuse
