// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "omegance/io.hpp"
#include "omegance/latent.hpp"

namespace omegance {

/// Positive scale applied to the noise prediction of a reverse step.
/// omega < 1 enhances detail, omega > 1 suppresses it.
class OmegaValue {
public:
    explicit OmegaValue(double value);
    double value() const noexcept { return m_value; }

private:
    double m_value;
};

/// Sigmoid rescale of the unbounded user knob varpi into (lower, upper).
struct RescaleParams {
    double k = 0.1;
    double lower = 0.95;
    double upper = 1.05;

    /// Throws InvalidArgument unless k > 0 and 0 < lower < upper.
    void validate() const;
};

/// omega = L + (U - L) / (1 + exp(-k varpi)).
OmegaValue rescale(double varpi, const RescaleParams& params = {});

enum class Pooling { kAverage, kNearest };

/// Spatial omega grid at latent resolution (source dims divided by factor).
class OmegaMask {
public:
    OmegaMask(Latent grid, std::size_t factor, std::size_t source_height, std::size_t source_width);

    /// All cells set to `value`.
    static OmegaMask uniform(std::size_t rows, std::size_t cols, double value);

    const Latent& grid() const noexcept { return m_grid; }
    std::size_t rows() const noexcept { return m_grid.rows(); }
    std::size_t cols() const noexcept { return m_grid.cols(); }
    std::size_t factor() const noexcept { return m_factor; }
    std::size_t source_height() const noexcept { return m_source_height; }
    std::size_t source_width() const noexcept { return m_source_width; }
    double at(std::size_t i, std::size_t j) const;

private:
    Latent m_grid;
    std::size_t m_factor;
    std::size_t m_source_height;
    std::size_t m_source_width;
};

/// Downsamples an 8-bit image by `factor` and maps the pooled intensity v
/// linearly: omega = lo + (v / 255) (hi - lo).
OmegaMask mask_from_grayscale(const GrayImage& image, std::size_t factor, double omega_lo, double omega_hi,
                              Pooling pooling = Pooling::kAverage);

struct ConstantSchedule {
    double omega = 1.0;
};

/// omega_in for step < tau, omega_out afterwards.
struct TwoStageSchedule {
    std::size_t tau = 10;
    double omega_in = 1.0;
    double omega_out = 1.0;
};

/// 1 + A exp(-lambda step / T) + B.
struct ExpSchedule {
    double amplitude = 0.0;
    double rate = 1.0;
    double offset = 0.0;
};

/// 1 + A cos(pi step / T) + B.
struct CosSchedule {
    double amplitude = 0.0;
    double offset = 0.0;
};

using ScheduleKind = std::variant<ConstantSchedule, TwoStageSchedule, ExpSchedule, CosSchedule>;

/// Temporal omega curve over a fixed number of reverse steps. Every value
/// emitted over 0..T-1 is checked positive at construction.
class OmegaSchedule {
public:
    OmegaSchedule(ScheduleKind kind, std::size_t total_steps);

    /// Named parametric presets: EXP1, EXP2, COS1, COS2.
    static OmegaSchedule preset(const std::string& name, std::size_t total_steps);

    const ScheduleKind& kind() const noexcept { return m_kind; }
    std::size_t total_steps() const noexcept { return m_total_steps; }
    double at(std::size_t step) const;

private:
    ScheduleKind m_kind;
    std::size_t m_total_steps;
};

/// Evaluates the schedule formulas without positivity or range checks.
double evaluate_schedule(const ScheduleKind& kind, std::size_t step, std::size_t total_steps);

OmegaValue schedule_eval(const OmegaSchedule& schedule, std::size_t step);

/// Writes "step,omega" for every step of the schedule.
void write_schedule_preview_csv(std::ostream& out, const OmegaSchedule& schedule);

/// Per-cell omega for one step: either a single broadcast value or one
/// value per latent cell.
class OmegaField {
public:
    explicit OmegaField(double uniform = 1.0);
    OmegaField(std::size_t rows, std::size_t cols, std::vector<double> values);

    bool is_uniform() const noexcept { return m_values.size() == 1; }
    double operator[](std::size_t i) const { return m_values.size() == 1 ? m_values[0] : m_values[i]; }

    /// Throws ShapeMismatch unless uniform or exactly the latent's shape.
    void check_broadcast(const Latent& latent) const;

private:
    std::size_t m_rows = 1;
    std::size_t m_cols = 1;
    std::vector<double> m_values;
};

/// omega = base * mask(i, j) * schedule(step); absent parts contribute 1.
class OmegaControl {
public:
    OmegaControl() = default;
    explicit OmegaControl(double base, std::optional<OmegaMask> mask = std::nullopt,
                          std::optional<OmegaSchedule> schedule = std::nullopt);

    static OmegaControl identity() { return OmegaControl(1.0); }

    double base() const noexcept { return m_base; }
    const std::optional<OmegaMask>& mask() const noexcept { return m_mask; }
    const std::optional<OmegaSchedule>& schedule() const noexcept { return m_schedule; }

    /// Resolves every cell of a rows x cols latent at `step`.
    OmegaField field(std::size_t step, std::size_t rows, std::size_t cols) const;

private:
    double m_base = 1.0;
    std::optional<OmegaMask> m_mask;
    std::optional<OmegaSchedule> m_schedule;
};

OmegaValue resolve_omega(const OmegaControl& control, std::size_t i, std::size_t j, std::size_t step);

}  // namespace omegance
