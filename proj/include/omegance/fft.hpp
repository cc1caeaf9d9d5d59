// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "omegance/latent.hpp"

namespace omegance {

/// Full complex spectrum of a real grid, row-major, unnormalised
/// (F_k = sum_x f_x exp(-2 pi i k.x / N)). Backed by FFTW.
std::vector<std::complex<double>> fft2d(const Latent& grid);

/// Inverse of fft2d including the 1/N factor; returns the real part.
Latent ifft2d_real(std::size_t rows, std::size_t cols, const std::vector<std::complex<double>>& spectrum);

/// Signed integer frequency of index k on an n-point grid (k or k - n).
inline double signed_frequency(std::size_t k, std::size_t n) {
    return 2 * k <= n ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
}

std::string fft_backend_version();

}  // namespace omegance
