// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <random>
#include <string>

#include "omegance/latent.hpp"
#include "omegance/rng.hpp"

namespace omegance::test {

inline Latent random_latent(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed, Stream::kTest);
    Latent z(rows, cols);
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = scale * rng.normal();
    }
    return z;
}

inline double rel_err(double expected, double actual) {
    if (expected == actual) {
        return 0.0;
    }
    return std::abs(actual - expected) / std::max(std::abs(expected), std::numeric_limits<double>::min());
}

inline double max_rel_err(const Latent& expected, const Latent& actual) {
    double worst = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        worst = std::max(worst, rel_err(expected[i], actual[i]));
    }
    return worst;
}

inline bool bitwise_equal(const Latent& a, const Latent& b) {
    if (!a.same_shape(b)) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) {
            return false;
        }
    }
    return true;
}

// Composite Simpson rule on [lo, hi] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int panels = 20000) {
    const double h = (hi - lo) / panels;
    double sum = f(lo) + f(hi);
    for (int i = 1; i < panels; ++i) {
        sum += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        m_path = std::filesystem::temp_directory_path() /
                 ("omegance_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(m_path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(m_path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return m_path; }
    std::filesystem::path operator/(const std::string& name) const { return m_path / name; }

private:
    std::filesystem::path m_path;
};

}  // namespace omegance::test
