#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "depthfuse/error.hpp"

namespace depthfuse {

struct CameraIntrinsics {
    double fx = 0; // px
    double fy = 0; // px
    double u0 = 0; // px
    double v0 = 0; // px

    void validate() const {
        if (!(fx > 0) || !(fy > 0)) throw Error(Errc::malformed_calibration, "focal scale factors must be positive");
    }
};

/// Maps IR-camera coordinates into the color camera: p' = R p + T.
struct Extrinsics {
    std::array<double, 9> R{1, 0, 0, 0, 1, 0, 0, 0, 1}; // row-major
    std::array<double, 3> T{0, 0, 0};                   // mm

    static Extrinsics translation(double tx, double ty, double tz) {
        Extrinsics e;
        e.T = {tx, ty, tz};
        return e;
    }

    std::array<double, 3> apply(double x, double y, double z) const {
        return {R[0] * x + R[1] * y + R[2] * z + T[0], R[3] * x + R[4] * y + R[5] * z + T[1],
                R[6] * x + R[7] * y + R[8] * z + T[2]};
    }

    Extrinsics inverse() const {
        Extrinsics inv;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) inv.R[3 * r + c] = R[3 * c + r];
        for (int r = 0; r < 3; ++r)
            inv.T[r] = -(inv.R[3 * r] * T[0] + inv.R[3 * r + 1] * T[1] + inv.R[3 * r + 2] * T[2]);
        return inv;
    }

    bool is_identity() const {
        return R == std::array<double, 9>{1, 0, 0, 0, 1, 0, 0, 0, 1} && T == std::array<double, 3>{0, 0, 0};
    }

    // R R^T = I and det R = 1, each within tol.
    bool is_rotation(double tol = 1e-6) const {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double dot = 0;
                for (int k = 0; k < 3; ++k) dot += R[3 * i + k] * R[3 * j + k];
                if (std::abs(dot - (i == j ? 1.0 : 0.0)) > tol) return false;
            }
        const double det = R[0] * (R[4] * R[8] - R[5] * R[7]) - R[1] * (R[3] * R[8] - R[5] * R[6]) +
                           R[2] * (R[3] * R[7] - R[4] * R[6]);
        return std::abs(det - 1.0) <= tol;
    }

    void validate() const {
        if (!is_rotation()) throw Error(Errc::non_orthonormal_rotation, "R must be orthonormal with det 1");
    }
};

/// Thin-lens parameters of the color camera. Defaults are the capture rig's
/// values: f = 24 mm, F = 4.0, acceptable CoC diameter 0.019 mm.
struct OpticsConfig {
    double focal_length_mm = 24.0;
    double f_number = 4.0;
    double coc_mm = 0.019;
    double pixel_pitch_mm = 0.037; // only the simulator uses this

    double aperture_mm() const { return focal_length_mm / f_number; }

    void validate() const {
        if (!(focal_length_mm > 0) || !(f_number > 0) || !(coc_mm > 0) || !(pixel_pitch_mm > 0))
            throw Error(Errc::invalid_argument, "optics parameters must be strictly positive");
    }
};

struct Calibration {
    CameraIntrinsics ir;
    CameraIntrinsics color;
    Extrinsics extrinsics;
    OpticsConfig optics;

    void validate() const {
        ir.validate();
        color.validate();
        extrinsics.validate();
        optics.validate();
    }
};

inline void to_json(nlohmann::json& j, const CameraIntrinsics& k) {
    j = {{"fx", k.fx}, {"fy", k.fy}, {"u0", k.u0}, {"v0", k.v0}};
}
inline void from_json(const nlohmann::json& j, CameraIntrinsics& k) {
    k.fx = j.at("fx").get<double>();
    k.fy = j.at("fy").get<double>();
    k.u0 = j.at("u0").get<double>();
    k.v0 = j.at("v0").get<double>();
}
inline void to_json(nlohmann::json& j, const Extrinsics& e) { j = {{"R", e.R}, {"T", e.T}}; }
inline void from_json(const nlohmann::json& j, Extrinsics& e) {
    const auto& r = j.at("R");
    const auto& t = j.at("T");
    if (!r.is_array() || r.size() != 9 || !t.is_array() || t.size() != 3)
        throw Error(Errc::malformed_calibration, "extrinsics need R[9] and T[3]");
    for (std::size_t i = 0; i < 9; ++i) e.R[i] = r[i].get<double>();
    for (std::size_t i = 0; i < 3; ++i) e.T[i] = t[i].get<double>();
}
inline void to_json(nlohmann::json& j, const OpticsConfig& o) {
    j = {{"f_mm", o.focal_length_mm}, {"f_number", o.f_number}, {"coc_mm", o.coc_mm},
         {"pixel_pitch_mm", o.pixel_pitch_mm}};
}
inline void from_json(const nlohmann::json& j, OpticsConfig& o) {
    o = OpticsConfig{};
    o.focal_length_mm = j.value("f_mm", o.focal_length_mm);
    o.f_number = j.value("f_number", o.f_number);
    o.coc_mm = j.value("coc_mm", o.coc_mm);
    o.pixel_pitch_mm = j.value("pixel_pitch_mm", o.pixel_pitch_mm);
}
inline void to_json(nlohmann::json& j, const Calibration& c) {
    j = {{"ir_intrinsics", c.ir}, {"color_intrinsics", c.color}, {"extrinsics", c.extrinsics}, {"optics", c.optics}};
}
inline void from_json(const nlohmann::json& j, Calibration& c) {
    c.ir = j.at("ir_intrinsics").get<CameraIntrinsics>();
    c.color = j.at("color_intrinsics").get<CameraIntrinsics>();
    c.extrinsics = j.at("extrinsics").get<Extrinsics>();
    c.optics = j.contains("optics") ? j.at("optics").get<OpticsConfig>() : OpticsConfig{};
}

inline Calibration load_calibration(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::open_failed, path.string());
    Calibration c;
    try {
        c = nlohmann::json::parse(in).get<Calibration>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::malformed_calibration, path.string() + ": " + e.what());
    }
    c.validate();
    return c;
}

inline void save_calibration(const std::filesystem::path& path, const Calibration& c) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::write_failed, path.string());
    out << nlohmann::json(c).dump(2) << '\n';
}

} // namespace depthfuse
