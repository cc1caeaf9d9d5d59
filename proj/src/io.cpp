// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "omegance/io.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>

#include "omegance/error.hpp"

namespace omegance {

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

void skip_whitespace_and_comments(std::istream& in) {
    for (;;) {
        const int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            in.get();
        } else {
            return;
        }
    }
}

std::size_t read_header_number(std::istream& in, const char* field) {
    skip_whitespace_and_comments(in);
    long long value = -1;
    if (!(in >> value) || value <= 0) {
        throw InvalidArgument(std::string("PGM header: bad ") + field);
    }
    return static_cast<std::size_t>(value);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t to_u32(std::size_t v, const char* what) {
    if (v > 0xFFFFFFFFu) {
        throw InvalidArgument(std::string("snapshot ") + what + " does not fit in 32 bits");
    }
    return static_cast<std::uint32_t>(v);
}

std::string hex(const unsigned char* digest, unsigned int length) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(kDigits[digest[i] >> 4]);
        out.push_back(kDigits[digest[i] & 0xF]);
    }
    return out;
}

using DigestContext = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

DigestContext new_sha256() {
    DigestContext ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 initialisation failed");
    }
    return ctx;
}

std::string finish(EVP_MD_CTX* ctx) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_DigestFinal_ex(ctx, digest.data(), &length) != 1) {
        throw Error("SHA-256 finalisation failed");
    }
    return hex(digest.data(), length);
}

}  // namespace

std::string format_double(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

GrayImage read_pgm(std::istream& in) {
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5') {
        throw InvalidArgument("PGM: expected binary P5 magic");
    }
    GrayImage image;
    image.width = read_header_number(in, "width");
    image.height = read_header_number(in, "height");
    const std::size_t maxval = read_header_number(in, "maxval");
    if (maxval != 255) {
        throw InvalidArgument("PGM: only maxval 255 is supported");
    }
    // Exactly one whitespace byte separates the header from the raster.
    const int separator = in.get();
    if (separator != ' ' && separator != '\n' && separator != '\r' && separator != '\t') {
        throw InvalidArgument("PGM: missing separator before raster");
    }
    image.pixels.resize(image.width * image.height);
    in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != image.pixels.size()) {
        throw InvalidArgument("PGM: raster shorter than width*height");
    }
    return image;
}

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidArgument("cannot open PGM file " + path.string());
    }
    return read_pgm(in);
}

void write_pgm(std::ostream& out, const GrayImage& image) {
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    write_pgm(out, image);
}

void write_snapshot_binary(std::ostream& out, const LatentState& state) {
    out.write(kSnapshotMagic, 4);
    put_u32(out, to_u32(state.latent.rows(), "rows"));
    put_u32(out, to_u32(state.latent.cols(), "cols"));
    put_u32(out, to_u32(state.step, "step"));
    const auto values = state.latent.values();
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
}

std::vector<LatentState> read_snapshots_binary(std::istream& in) {
    std::vector<LatentState> states;
    for (;;) {
        std::array<char, 16> header{};
        in.read(header.data(), header.size());
        if (in.gcount() == 0) {
            break;
        }
        if (in.gcount() != 16 || std::memcmp(header.data(), kSnapshotMagic, 4) != 0) {
            throw InvalidArgument("snapshot: bad record header");
        }
        std::uint32_t rows = 0;
        std::uint32_t cols = 0;
        std::uint32_t step = 0;
        std::memcpy(&rows, header.data() + 4, 4);
        std::memcpy(&cols, header.data() + 8, 4);
        std::memcpy(&step, header.data() + 12, 4);
        std::vector<double> values(static_cast<std::size_t>(rows) * cols);
        in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
        if (static_cast<std::size_t>(in.gcount()) != values.size() * sizeof(double)) {
            throw InvalidArgument("snapshot: truncated record");
        }
        states.push_back({step, Latent(rows, cols, std::move(values))});
    }
    return states;
}

void write_snapshots_csv(std::ostream& out, const std::vector<LatentState>& states) {
    const std::size_t n = states.empty() ? 0 : states.front().latent.size();
    out << "step";
    for (std::size_t i = 0; i < n; ++i) {
        out << ",v" << i;
    }
    out << '\n';
    for (const auto& state : states) {
        out << state.step;
        for (double v : state.latent.values()) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
}

void write_grid_csv(std::ostream& out, const Latent& grid) {
    for (std::size_t r = 0; r < grid.rows(); ++r) {
        for (std::size_t c = 0; c < grid.cols(); ++c) {
            if (c > 0) {
                out << ',';
            }
            out << format_double(grid.at(r, c));
        }
        out << '\n';
    }
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path.string() + " for checksum");
    }
    auto ctx = new_sha256();
    std::array<char, 1 << 16> buffer{};
    while (in) {
        in.read(buffer.data(), buffer.size());
        const auto got = in.gcount();
        if (got > 0 && EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(got)) != 1) {
            throw Error("SHA-256 update failed");
        }
    }
    return finish(ctx.get());
}

std::string sha256_bytes(const std::string& bytes) {
    auto ctx = new_sha256();
    if (EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1) {
        throw Error("SHA-256 update failed");
    }
    return finish(ctx.get());
}

std::string digest_backend_version() { return OpenSSL_version(OPENSSL_VERSION); }

}  // namespace omegance
