// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "omegance/rng.hpp"

#include <cmath>

namespace omegance {

std::uint64_t Rng::splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, Stream stream)
    : m_engine(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL)) {}

double Rng::uniform() {
    return static_cast<double>(m_engine() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (m_has_spare) {
        m_has_spare = false;
        return m_spare;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    m_spare = v * scale;
    m_has_spare = true;
    return u * scale;
}

}  // namespace omegance
