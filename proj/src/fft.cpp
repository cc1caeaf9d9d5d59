// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "omegance/fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "omegance/error.hpp"

namespace omegance {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex g_planner_mutex;

void transform(std::size_t rows, std::size_t cols, std::vector<std::complex<double>>& data, int sign) {
    static_assert(sizeof(std::complex<double>) == sizeof(fftw_complex));
    auto* buffer = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan = nullptr;
    {
        std::lock_guard lock(g_planner_mutex);
        plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), buffer, buffer, sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    if (plan == nullptr) {
        throw Error("FFTW failed to create a plan");
    }
    fftw_execute(plan);
    std::lock_guard lock(g_planner_mutex);
    fftw_destroy_plan(plan);
}

}  // namespace

std::vector<std::complex<double>> fft2d(const Latent& grid) {
    if (grid.empty()) {
        throw InvalidArgument("fft2d: empty grid");
    }
    std::vector<std::complex<double>> data(grid.values().begin(), grid.values().end());
    transform(grid.rows(), grid.cols(), data, FFTW_FORWARD);
    return data;
}

Latent ifft2d_real(std::size_t rows, std::size_t cols, const std::vector<std::complex<double>>& spectrum) {
    if (spectrum.size() != rows * cols || spectrum.empty()) {
        throw ShapeMismatch("ifft2d_real: spectrum size does not match dims");
    }
    std::vector<std::complex<double>> data = spectrum;
    transform(rows, cols, data, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(rows * cols);
    Latent out(rows, cols);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = data[i].real() * scale;
    }
    return out;
}

std::string fft_backend_version() { return fftw_version; }

}  // namespace omegance
