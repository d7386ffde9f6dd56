#pragma once

// Graph-based segmentation of a hole-free depth map in which every region
// must also fit inside one depth of field.
//
// Pixels are nodes of a 4-connected grid; the edge weight is the absolute
// depth difference in mm. Edges are visited in ascending (weight, source,
// target) order and two components merge only when
//
//   (1) the Felzenszwalb-Huttenlocher predicate holds:
//         w <= min(Int(C1) + k/|C1|, Int(C2) + k/|C2|)
//   (2) the union satisfies the DoF rule:
//         max - min < max(back_dof(min), front_dof(max))
//
// The union-find carries per-component min/max depth so (2) costs O(1).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <vector>

#include <nlohmann/json.hpp>

#include "depthfuse/dof.hpp"
#include "depthfuse/error.hpp"
#include "depthfuse/raster.hpp"
#include "depthfuse/raster_io.hpp"

namespace depthfuse {

struct SegParams {
    double felz_k = 100.0;        // mm
    int min_region_px = 100;
    int connectivity = 4;

    void validate() const {
        if (!(felz_k > 0.0)) throw Error(Errc::invalid_argument, "felz_k must be positive");
        if (min_region_px < 1) throw Error(Errc::invalid_argument, "min_region_px must be at least 1");
        if (connectivity != 4) throw Error(Errc::invalid_argument, "only 4-connectivity is supported");
    }
};

struct SegmentationMap {
    Raster<std::int32_t> labels; // dense in [0, region_count)
    int region_count = 0;

    Size size() const { return labels.size(); }
    int width() const { return labels.width(); }
    int height() const { return labels.height(); }
    std::int32_t operator()(int x, int y) const { return labels(x, y); }
};

struct RegionStats {
    int id = 0;
    std::size_t pixel_count = 0;
    std::uint16_t min_depth = 0;
    std::uint16_t max_depth = 0;
    std::uint16_t diff = 0;
    double max_dof = 0.0; // infinite past the hyperfocal distance
    bool dof_ok = false;
};

/// Disjoint-set forest whose roots carry the depth range, size, depth sum
/// and Felzenszwalb internal difference of their component.
class DepthUnionFind {
public:
    explicit DepthUnionFind(const DepthMap& d) : parent_(d.pixel_count()), rank_(d.pixel_count(), 0) {
        std::iota(parent_.begin(), parent_.end(), 0u);
        comp_.resize(d.pixel_count());
        for (std::size_t i = 0; i < d.pixel_count(); ++i) {
            const auto z = d.data()[i];
            comp_[i] = Component{z, z, 0.0, 1, static_cast<double>(z)};
        }
    }

    struct Component {
        std::uint16_t min_depth;
        std::uint16_t max_depth;
        double internal = 0.0;
        std::uint32_t size = 1;
        double depth_sum = 0.0;

        double mean() const { return depth_sum / size; }
    };

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    const Component& component(std::uint32_t root) const { return comp_[root]; }

    // a and b must be distinct roots.
    std::uint32_t unite(std::uint32_t a, std::uint32_t b, double weight) {
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        Component& ca = comp_[a];
        const Component& cb = comp_[b];
        ca.min_depth = std::min(ca.min_depth, cb.min_depth);
        ca.max_depth = std::max(ca.max_depth, cb.max_depth);
        ca.internal = std::max({ca.internal, cb.internal, weight});
        ca.size += cb.size;
        ca.depth_sum += cb.depth_sum;
        return a;
    }

    std::size_t element_count() const { return parent_.size(); }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint8_t> rank_;
    std::vector<Component> comp_;
};

namespace detail {

struct GridEdge {
    std::uint32_t a;
    std::uint32_t b;
    std::uint16_t w;
};

// 4-connected edges ordered by (weight, source, target). Emitting per source
// pixel (right neighbor before lower neighbor) and then counting-sorting by
// weight keeps that order, since the sort is stable.
inline std::vector<GridEdge> sorted_grid_edges(const DepthMap& d) {
    const int w = d.width();
    const int h = d.height();
    auto for_each_edge = [&](auto&& emit) {
        for (int y = 0; y < h; ++y) {
            const std::uint16_t* row = &d(0, y);
            const std::uint16_t* below = y + 1 < h ? &d(0, y + 1) : nullptr;
            const auto base = static_cast<std::uint32_t>(d.index(0, y));
            for (int x = 0; x < w; ++x) {
                const int z = row[x];
                const std::uint32_t i = base + static_cast<std::uint32_t>(x);
                if (x + 1 < w) emit(i, i + 1, static_cast<std::uint16_t>(std::abs(z - row[x + 1])));
                if (below) emit(i, i + static_cast<std::uint32_t>(w), static_cast<std::uint16_t>(std::abs(z - below[x])));
            }
        }
    };
    std::vector<std::uint32_t> offset(65537, 0);
    for_each_edge([&](std::uint32_t, std::uint32_t, std::uint16_t wt) { ++offset[wt + 1u]; });
    for (std::size_t k = 1; k < offset.size(); ++k) offset[k] += offset[k - 1];
    std::vector<GridEdge> sorted(offset.back());
    for_each_edge([&](std::uint32_t a, std::uint32_t b, std::uint16_t wt) { sorted[offset[wt]++] = GridEdge{a, b, wt}; });
    return sorted;
}

inline bool merge_allowed(const DepthUnionFind::Component& c1, const DepthUnionFind::Component& c2,
                          const OpticsConfig& o) {
    return dof_rule(std::min(c1.min_depth, c2.min_depth), std::max(c1.max_depth, c2.max_depth), o);
}

} // namespace detail

inline SegmentationMap segment_depth(const DepthMap& d, const OpticsConfig& o, const SegParams& p) {
    p.validate();
    o.validate();
    if (count_invalid(d) != 0) throw Error(Errc::invalid_depth, "segmentation needs a hole-free depth map");
    if (d.pixel_count() > std::numeric_limits<std::uint32_t>::max() / 2)
        throw Error(Errc::dimension_overflow, "depth map too large to segment");

    const auto edges = detail::sorted_grid_edges(d);
    DepthUnionFind uf(d);

    for (const auto& e : edges) {
        std::uint32_t a = uf.find(e.a);
        std::uint32_t b = uf.find(e.b);
        if (a == b) continue;
        const auto& ca = uf.component(a);
        const auto& cb = uf.component(b);
        const double ta = ca.internal + p.felz_k / ca.size;
        const double tb = cb.internal + p.felz_k / cb.size;
        if (e.w <= std::min(ta, tb) && detail::merge_allowed(ca, cb, o)) uf.unite(a, b, e.w);
    }

    // Absorb undersized components into the adjacent component whose mean
    // depth is closest, when the union still satisfies the DoF rule. Repeat
    // until a sweep changes nothing.
    const auto min_px = static_cast<std::uint32_t>(p.min_region_px);
    if (min_px > 1) {
        const std::size_t n = uf.element_count();
        constexpr auto none = std::numeric_limits<std::uint32_t>::max();
        std::vector<std::uint32_t> best(n, none);
        std::vector<double> best_gap(n);
        // Merges never split components, so internal edges stay internal.
        std::vector<detail::GridEdge> boundary;
        for (const auto& e : edges)
            if (uf.find(e.a) != uf.find(e.b)) boundary.push_back(e);
        bool changed = true;
        while (changed) {
            changed = false;
            std::fill(best.begin(), best.end(), none);
            auto consider = [&](std::uint32_t small, std::uint32_t other) {
                const auto& cs = uf.component(small);
                if (cs.size >= min_px) return;
                const auto& co = uf.component(other);
                if (!detail::merge_allowed(cs, co, o)) return;
                const double gap = std::abs(cs.mean() - co.mean());
                if (best[small] == none || gap < best_gap[small] || (gap == best_gap[small] && other < best[small])) {
                    best[small] = other;
                    best_gap[small] = gap;
                }
            };
            std::erase_if(boundary, [&](const detail::GridEdge& e) { return uf.find(e.a) == uf.find(e.b); });
            for (const auto& e : boundary) {
                const std::uint32_t a = uf.find(e.a);
                const std::uint32_t b = uf.find(e.b);
                consider(a, b);
                consider(b, a);
            }
            for (std::uint32_t s = 0; s < n; ++s) {
                if (best[s] == none) continue;
                const std::uint32_t a = uf.find(s);
                const std::uint32_t b = uf.find(best[s]);
                if (a == b) continue;
                const auto& ca = uf.component(a);
                const auto& cb = uf.component(b);
                if (std::min(ca.size, cb.size) >= min_px || !detail::merge_allowed(ca, cb, o)) continue;
                uf.unite(a, b, 0.0);
                changed = true;
            }
        }
    }

    SegmentationMap seg{Raster<std::int32_t>(d.size(), -1), 0};
    std::vector<std::int32_t> label_of_root(d.pixel_count(), -1);
    for (std::size_t i = 0; i < d.pixel_count(); ++i) {
        const auto r = uf.find(static_cast<std::uint32_t>(i));
        if (label_of_root[r] < 0) label_of_root[r] = seg.region_count++;
        seg.labels.data()[i] = label_of_root[r];
    }
    return seg;
}

inline std::vector<RegionStats> region_stats(const SegmentationMap& seg, const DepthMap& d, const OpticsConfig& o) {
    require_same_size(seg, d, "segmentation and depth map sizes differ");
    std::vector<RegionStats> out(static_cast<std::size_t>(seg.region_count));
    for (int r = 0; r < seg.region_count; ++r) {
        out[r].id = r;
        out[r].min_depth = std::numeric_limits<std::uint16_t>::max();
    }
    for (std::size_t i = 0; i < d.pixel_count(); ++i) {
        const auto label = seg.labels.data()[i];
        if (label < 0 || label >= seg.region_count) throw Error(Errc::invalid_argument, "label out of range");
        auto& s = out[static_cast<std::size_t>(label)];
        ++s.pixel_count;
        s.min_depth = std::min(s.min_depth, d.data()[i]);
        s.max_depth = std::max(s.max_depth, d.data()[i]);
    }
    for (auto& s : out) {
        if (s.pixel_count == 0) throw Error(Errc::invalid_argument, "segmentation labels are not dense");
        s.diff = static_cast<std::uint16_t>(s.max_depth - s.min_depth);
        s.max_dof = max_dof(s.min_depth, s.max_depth, o);
        s.dof_ok = s.diff < s.max_dof;
    }
    return out;
}

inline void to_json(nlohmann::json& j, const RegionStats& s) {
    j = {{"id", s.id},           {"pixel_count", s.pixel_count}, {"min_depth", s.min_depth},
         {"max_depth", s.max_depth}, {"diff", s.diff},            {"dof_ok", s.dof_ok}};
    if (std::isfinite(s.max_dof))
        j["max_dof"] = s.max_dof;
    else
        j["max_dof"] = nullptr;
}

inline void from_json(const nlohmann::json& j, RegionStats& s) {
    s.id = j.at("id").get<int>();
    s.pixel_count = j.at("pixel_count").get<std::size_t>();
    s.min_depth = j.at("min_depth").get<std::uint16_t>();
    s.max_depth = j.at("max_depth").get<std::uint16_t>();
    s.diff = j.at("diff").get<std::uint16_t>();
    s.max_dof = j.at("max_dof").is_null() ? std::numeric_limits<double>::infinity() : j.at("max_dof").get<double>();
    s.dof_ok = j.at("dof_ok").get<bool>();
}

/// Writes labels as a 16-bit PGM and the region table as a JSON sidecar.
inline void write_segmentation(const std::filesystem::path& pgm, const std::filesystem::path& sidecar,
                               const SegmentationMap& seg, const std::vector<RegionStats>& stats) {
    if (seg.region_count > 65536) throw Error(Errc::dimension_overflow, "too many regions for a 16-bit label map");
    DepthMap labels(seg.size());
    for (std::size_t i = 0; i < labels.pixel_count(); ++i)
        labels.data()[i] = static_cast<std::uint16_t>(seg.labels.data()[i]);
    write_raster(pgm, labels);
    std::ofstream out(sidecar);
    if (!out) throw Error(Errc::write_failed, sidecar.string());
    out << nlohmann::json{{"region_count", seg.region_count}, {"regions", stats}}.dump(2) << '\n';
}

inline SegmentationMap read_segmentation(const std::filesystem::path& pgm) {
    const DepthMap labels = read_depth(pgm);
    SegmentationMap seg{Raster<std::int32_t>(labels.size()), 0};
    for (std::size_t i = 0; i < labels.pixel_count(); ++i) {
        seg.labels.data()[i] = labels.data()[i];
        seg.region_count = std::max(seg.region_count, labels.data()[i] + 1);
    }
    return seg;
}

} // namespace depthfuse
