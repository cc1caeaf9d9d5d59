// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "omegance/latent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "omegance/error.hpp"

namespace omegance {

Latent::Latent(std::size_t rows, std::size_t cols, double fill)
    : m_rows(rows), m_cols(cols), m_values(rows * cols, fill) {}

Latent::Latent(std::size_t rows, std::size_t cols, std::vector<double> values)
    : m_rows(rows), m_cols(cols), m_values(std::move(values)) {
    if (m_values.size() != rows * cols) {
        throw ShapeMismatch("latent value count does not match " + std::to_string(rows) + "x" +
                            std::to_string(cols));
    }
}

Latent Latent::vector(std::vector<double> values) {
    const std::size_t n = values.size();
    return Latent(1, n, std::move(values));
}

double Latent::mean() const {
    if (m_values.empty()) {
        throw InvalidArgument("mean of an empty latent");
    }
    return std::accumulate(m_values.begin(), m_values.end(), 0.0) / static_cast<double>(m_values.size());
}

bool Latent::all_finite() const {
    return std::all_of(m_values.begin(), m_values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace omegance
