// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "omegance/omega_control.hpp"

namespace omegance {

/// Stable process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfigError = 2,
    kExitNumericAbort = 3,
};

/// Command-line overrides applied on top of a config file.
struct RunOptions {
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::vector<std::uint64_t>> seeds;
    std::optional<std::size_t> threads;
};

/// --threads, then OMEGANCE_THREADS, then the config, then the hardware.
std::size_t resolve_threads(const RunOptions& options, std::optional<std::size_t> config_threads);

/// One trajectory file per (seed, omega) cell plus manifest.json.
int cmd_sample(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& log);

/// snr.csv, snr_summary.csv and snr_ordering.csv for a DDIM config.
int cmd_snr(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& log);

/// spectrum.csv, band_energy.csv and ordering.csv over the omega sweep.
int cmd_spectrum(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& log);

enum class PreviewKind { kMask, kSchedule };

/// Inputs for cmd_preview. With a config, its mask or schedule is used and
/// the direct fields are ignored.
struct PreviewRequest {
    PreviewKind kind = PreviewKind::kSchedule;
    std::optional<std::filesystem::path> config_path;
    std::filesystem::path out_dir = "preview";

    std::filesystem::path mask_path;
    std::size_t factor = 1;
    double omega_lo = 0.95;
    double omega_hi = 1.05;
    Pooling pooling = Pooling::kAverage;

    /// Preset name (EXP1, ...) or kind name (constant, two_stage, exp, cos).
    std::string schedule = "constant";
    ScheduleKind schedule_kind = ConstantSchedule{};
    std::size_t steps = 50;
};

/// mask -> mask_omega.csv and mask_omega.pgm; schedule -> schedule_omega.csv.
int cmd_preview(const PreviewRequest& request, std::ostream& log);

}  // namespace omegance
