// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "omegance/denoiser.hpp"
#include "omegance/oracle_denoisers.hpp"
#include "omegance/omega_control.hpp"
#include "omegance/samplers.hpp"

namespace omegance {

struct ScheduleParams {
    std::size_t T = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    double sigma_min = 0.0292;
    double sigma_max = 14.6146;
    double rho = 7.0;
    double churn = 0.0;
};

struct MaskSpec {
    std::filesystem::path path;  // resolved against the config's directory
    std::size_t factor = 1;
    double omega_lo = 0.95;
    double omega_hi = 1.05;
    Pooling pooling = Pooling::kAverage;
};

struct ScheduleSpec {
    std::optional<std::string> preset;
    ScheduleKind kind = ConstantSchedule{};
};

struct OmegaSpec {
    /// Either user-facing varpi values (rescaled) or raw omega values.
    std::vector<double> varpi;
    std::vector<double> raw;
    RescaleParams rescale;
    std::optional<MaskSpec> mask;
    std::optional<ScheduleSpec> schedule;

    /// Base omega per sweep entry, in configuration order.
    std::vector<double> sweep() const;
};

struct StandardNormalOracle {};
struct MixtureOracle {
    std::vector<double> weights;
    std::vector<std::vector<double>> means;
    std::vector<std::vector<double>> variances;
};
struct FieldOracle {
    double exponent = -2.0;
};
using OracleSpec = std::variant<StandardNormalOracle, MixtureOracle, FieldOracle>;

enum class SnapshotFormat { kCsv, kBinary };

/// Validated experiment description. Unknown keys are rejected at every
/// level; see docs/config.schema.json.
struct ExperimentConfig {
    SamplerKind sampler = SamplerKind::kDdim;
    ScheduleParams schedule;
    std::size_t steps = 50;
    OmegaSpec omega;
    OracleSpec oracle = StandardNormalOracle{};
    std::size_t height = 16;
    std::size_t width = 16;
    std::vector<std::uint64_t> seeds{0};
    std::filesystem::path output_dir = "out";
    std::vector<std::size_t> snapshot_steps;
    SnapshotFormat snapshot_format = SnapshotFormat::kCsv;
    double band_split = 0.0;
    std::optional<std::size_t> threads;

    /// Resolved echo written into run manifests.
    nlohmann::json to_json() const;
};

/// Throws ConfigError on any schema or value violation.
ExperimentConfig parse_experiment_config(const nlohmann::json& document, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

std::unique_ptr<Denoiser> make_denoiser(const ExperimentConfig& config);
ScheduleData make_schedule(const ExperimentConfig& config);
/// Mask (if any) and schedule (if any) around base omega.
OmegaControl make_omega_control(const ExperimentConfig& config, double base);
SamplerConfig make_sampler_config(const ExperimentConfig& config, double base_omega, std::uint64_t seed);

}  // namespace omegance
