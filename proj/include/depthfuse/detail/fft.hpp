#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

#include "depthfuse/raster.hpp"

namespace depthfuse::detail {

// FFTW's planner is not thread safe; execution is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// 2-D complex DFT over a rows x cols grid stored row-major. The inverse is
/// normalized, so inverse(forward(x)) == x.
class Fft2d {
public:
    Fft2d(int rows, int cols) : rows_(rows), cols_(cols) {
        std::vector<std::complex<double>> scratch(static_cast<std::size_t>(rows) * cols);
        auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
        std::lock_guard lock(fftw_planner_mutex());
        fwd_ = fftw_plan_dft_2d(rows, cols, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        inv_ = fftw_plan_dft_2d(rows, cols, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }

    ~Fft2d() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
    }

    Fft2d(const Fft2d&) = delete;
    Fft2d& operator=(const Fft2d&) = delete;

    void forward(std::vector<std::complex<double>>& data) const {
        auto* p = reinterpret_cast<fftw_complex*>(data.data());
        fftw_execute_dft(fwd_, p, p);
    }

    void inverse(std::vector<std::complex<double>>& data) const {
        auto* p = reinterpret_cast<fftw_complex*>(data.data());
        fftw_execute_dft(inv_, p, p);
        const double scale = 1.0 / (static_cast<double>(rows_) * cols_);
        for (auto& v : data) v *= scale;
    }

    std::vector<std::complex<double>> forward(const GrayImage& g) const {
        std::vector<std::complex<double>> data(g.samples().begin(), g.samples().end());
        forward(data);
        return data;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

private:
    int rows_;
    int cols_;
    fftw_plan fwd_{};
    fftw_plan inv_{};
};

// Signed DFT frequency index: 0, 1, ..., ceil(n/2)-1, -floor(n/2), ..., -1.
inline int signed_frequency(int k, int n) { return k < (n + 1) / 2 ? k : k - n; }

} // namespace depthfuse::detail
