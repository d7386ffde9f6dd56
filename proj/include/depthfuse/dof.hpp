#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>

#include "depthfuse/calibration.hpp"
#include "depthfuse/error.hpp"

namespace depthfuse {

// With F the f-number, delta the acceptable CoC diameter and f the focal
// length, the depth of field around a focus distance u is
//
//   back  = F delta u^2 / (f^2 - F delta u)
//   front = F delta u^2 / (f^2 + F delta u)
//
// The back term diverges at the hyperfocal distance f^2 / (F delta).

inline double hyperfocal_mm(const OpticsConfig& o) { return o.focal_length_mm * o.focal_length_mm / (o.f_number * o.coc_mm); }

inline std::optional<double> try_back_dof(double u, const OpticsConfig& o) {
    const double k = o.f_number * o.coc_mm;
    const double denom = o.focal_length_mm * o.focal_length_mm - k * u;
    if (!(denom > 0.0)) return std::nullopt;
    return k * u * u / denom;
}

inline double back_dof(double u, const OpticsConfig& o) {
    if (auto v = try_back_dof(u, o)) return *v;
    throw Error(Errc::hyperfocal_exceeded, "focus distance " + std::to_string(u) + " mm is beyond the hyperfocal distance");
}

inline double front_dof(double u, const OpticsConfig& o) {
    if (!(u > 0.0)) return 0.0;
    const double k = o.f_number * o.coc_mm;
    return k * u * u / (o.focal_length_mm * o.focal_length_mm + k * u);
}

/// max(back(min), front(max)); infinite when focusing at min reaches past
/// the hyperfocal distance.
inline double max_dof(double min_mm, double max_mm, const OpticsConfig& o) {
    const auto back = try_back_dof(min_mm, o);
    if (!back) return std::numeric_limits<double>::infinity();
    return std::max(*back, front_dof(max_mm, o));
}

/// True when every depth in [min, max] can be sharp in a single exposure.
inline bool dof_rule(double min_mm, double max_mm, const OpticsConfig& o) {
    return (max_mm - min_mm) < max_dof(min_mm, max_mm, o);
}

} // namespace depthfuse
