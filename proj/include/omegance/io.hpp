// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "omegance/latent.hpp"

namespace omegance {

/// Shortest-roundtrip-safe decimal ("%.17g"); "inf", "-inf" and "nan" for
/// non-finite values.
std::string format_double(double value);

/// 8-bit grayscale image as stored in a binary PGM.
struct GrayImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> pixels;  // row-major
};

/// Reads binary PGM (P5, maxval 255). Comments after the magic are skipped.
GrayImage read_pgm(std::istream& in);
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(std::ostream& out, const GrayImage& image);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

/// Binary snapshot record, little-endian:
///   bytes 0..3   magic "OMGS"
///   bytes 4..7   uint32 rows
///   bytes 8..11  uint32 cols
///   bytes 12..15 uint32 step
///   then rows*cols IEEE-754 float64 values, row-major.
/// A trajectory file is a concatenation of records.
inline constexpr char kSnapshotMagic[4] = {'O', 'M', 'G', 'S'};

void write_snapshot_binary(std::ostream& out, const LatentState& state);
/// Reads every record until end of stream.
std::vector<LatentState> read_snapshots_binary(std::istream& in);

/// One row per snapshot: step, then rows*cols flattened values.
/// Header: step,v0,v1,...
void write_snapshots_csv(std::ostream& out, const std::vector<LatentState>& states);

/// Writes a latent grid as CSV with one row per latent row.
void write_grid_csv(std::ostream& out, const Latent& grid);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_bytes(const std::string& bytes);
std::string digest_backend_version();

}  // namespace omegance
