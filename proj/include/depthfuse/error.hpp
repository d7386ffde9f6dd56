#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace depthfuse {

enum class Errc {
    invalid_argument,
    dimension_mismatch,
    // raster I/O
    open_failed,
    malformed_header,
    dimension_overflow,
    truncated_payload,
    unsupported_format,
    write_failed,
    // calibration / geometry
    malformed_calibration,
    non_orthonormal_rotation,
    // depth processing
    no_valid_depth,
    invalid_depth,
    hyperfocal_exceeded,
    // fusion / metrics
    empty_mask,
    stack_size,
    degenerate_input,
    image_too_small,
    nan_input,
};

inline std::string_view to_string(Errc code) {
    switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::open_failed: return "open failed";
    case Errc::malformed_header: return "malformed header";
    case Errc::dimension_overflow: return "dimension overflow";
    case Errc::truncated_payload: return "truncated payload";
    case Errc::unsupported_format: return "unsupported format";
    case Errc::write_failed: return "write failed";
    case Errc::malformed_calibration: return "malformed calibration";
    case Errc::non_orthonormal_rotation: return "non-orthonormal rotation";
    case Errc::no_valid_depth: return "no valid depth";
    case Errc::invalid_depth: return "invalid depth";
    case Errc::hyperfocal_exceeded: return "hyperfocal distance exceeded";
    case Errc::empty_mask: return "empty mask";
    case Errc::stack_size: return "unsupported stack size";
    case Errc::degenerate_input: return "degenerate input";
    case Errc::image_too_small: return "image too small";
    case Errc::nan_input: return "NaN in input";
    }
    return "unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace depthfuse
