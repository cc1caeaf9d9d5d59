// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace omegance {

/// Row-major latent grid. A 1-D vector is a grid with one row.
class Latent {
public:
    Latent() = default;
    Latent(std::size_t rows, std::size_t cols, double fill = 0.0);
    Latent(std::size_t rows, std::size_t cols, std::vector<double> values);

    static Latent vector(std::vector<double> values);

    std::size_t rows() const noexcept { return m_rows; }
    std::size_t cols() const noexcept { return m_cols; }
    std::size_t size() const noexcept { return m_values.size(); }
    bool empty() const noexcept { return m_values.empty(); }
    bool is_2d() const noexcept { return m_rows > 1 && m_cols > 1; }
    bool same_shape(const Latent& other) const noexcept {
        return m_rows == other.m_rows && m_cols == other.m_cols;
    }

    double& operator[](std::size_t i) { return m_values[i]; }
    double operator[](std::size_t i) const { return m_values[i]; }
    double& at(std::size_t r, std::size_t c) { return m_values[r * m_cols + c]; }
    double at(std::size_t r, std::size_t c) const { return m_values[r * m_cols + c]; }

    std::span<double> values() noexcept { return m_values; }
    std::span<const double> values() const noexcept { return m_values; }

    double mean() const;
    bool all_finite() const;

    friend bool operator==(const Latent&, const Latent&) = default;

private:
    std::size_t m_rows = 0;
    std::size_t m_cols = 0;
    std::vector<double> m_values;
};

/// A latent tagged with the number of completed reverse steps.
struct LatentState {
    std::size_t step = 0;
    Latent latent;

    friend bool operator==(const LatentState&, const LatentState&) = default;
};

}  // namespace omegance
