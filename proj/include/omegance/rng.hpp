// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace omegance {

/// Independent random streams derived from one experiment seed. Trajectory
/// noise and prior draws never share a stream.
enum class Stream : std::uint64_t {
    kInitialNoise = 1,
    kChurn = 2,
    kPrior = 3,
    kField = 4,
    kTest = 99,
};

/// Seedable generator with split-by-stream semantics.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Its seed is splitmix64(seed) mixed with splitmix64(stream), so
/// (seed, stream) pairs map to decorrelated engines. Uniform doubles take the
/// top 53 bits; normals use the Marsaglia polar method. Neither relies on the
/// implementation-defined std distributions, so sequences are identical
/// across standard libraries.
class Rng {
public:
    Rng(std::uint64_t seed, Stream stream);

    /// Uniform in [0, 1).
    double uniform();

    /// Standard normal draw.
    double normal();

    std::uint64_t next_u64() { return m_engine(); }

    static std::uint64_t splitmix64(std::uint64_t x);

private:
    std::mt19937_64 m_engine;
    double m_spare = 0.0;
    bool m_has_spare = false;
};

}  // namespace omegance
