// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "omegance/omega_control.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <utility>

#include "omegance/error.hpp"

namespace omegance {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool valid_omega(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

OmegaValue::OmegaValue(double value) : m_value(value) {
    if (!valid_omega(value)) {
        throw InvalidArgument("omega must be positive and finite, got " + format_double(value));
    }
}

void RescaleParams::validate() const {
    if (!(std::isfinite(k) && k > 0.0)) {
        throw InvalidArgument("rescale steepness k must be positive");
    }
    if (!(std::isfinite(lower) && std::isfinite(upper) && lower > 0.0 && lower < upper)) {
        throw InvalidArgument("rescale bounds must satisfy 0 < L < U");
    }
}

OmegaValue rescale(double varpi, const RescaleParams& params) {
    params.validate();
    if (!std::isfinite(varpi)) {
        throw InvalidArgument("varpi must be finite");
    }
    return OmegaValue(params.lower + (params.upper - params.lower) / (1.0 + std::exp(-params.k * varpi)));
}

OmegaMask::OmegaMask(Latent grid, std::size_t factor, std::size_t source_height, std::size_t source_width)
    : m_grid(std::move(grid)), m_factor(factor), m_source_height(source_height), m_source_width(source_width) {
    if (m_grid.empty()) {
        throw InvalidArgument("omega mask must not be empty");
    }
    if (factor == 0 || source_height != m_grid.rows() * factor || source_width != m_grid.cols() * factor) {
        throw ShapeMismatch("omega mask dims must equal source dims divided by the factor");
    }
    for (double v : m_grid.values()) {
        if (!valid_omega(v)) {
            throw InvalidArgument("omega mask cells must be positive and finite");
        }
    }
}

OmegaMask OmegaMask::uniform(std::size_t rows, std::size_t cols, double value) {
    return OmegaMask(Latent(rows, cols, value), 1, rows, cols);
}

double OmegaMask::at(std::size_t i, std::size_t j) const {
    if (i >= rows() || j >= cols()) {
        throw InvalidArgument("omega mask cell out of bounds");
    }
    return m_grid.at(i, j);
}

OmegaMask mask_from_grayscale(const GrayImage& image, std::size_t factor, double omega_lo, double omega_hi,
                              Pooling pooling) {
    if (image.height == 0 || image.width == 0 || image.pixels.empty()) {
        throw InvalidArgument("mask image is empty");
    }
    if (image.pixels.size() != image.height * image.width) {
        throw ShapeMismatch("mask image pixel count does not match its dims");
    }
    if (factor == 0 || image.height % factor != 0 || image.width % factor != 0) {
        throw ShapeMismatch("mask image dims must be divisible by the downsampling factor");
    }
    if (!(valid_omega(omega_lo) && valid_omega(omega_hi) && omega_lo <= omega_hi)) {
        throw InvalidArgument("mask omega bounds must satisfy 0 < lo <= hi");
    }
    const std::size_t rows = image.height / factor;
    const std::size_t cols = image.width / factor;
    Latent grid(rows, cols);
    const double block = static_cast<double>(factor * factor);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            double intensity = 0.0;
            if (pooling == Pooling::kAverage) {
                std::size_t sum = 0;
                for (std::size_t di = 0; di < factor; ++di) {
                    const std::size_t row = (i * factor + di) * image.width + j * factor;
                    for (std::size_t dj = 0; dj < factor; ++dj) {
                        sum += image.pixels[row + dj];
                    }
                }
                intensity = static_cast<double>(sum) / block;
            } else {
                const std::size_t centre = factor / 2;
                intensity = image.pixels[(i * factor + centre) * image.width + j * factor + centre];
            }
            // Convex form so intensities 0 and 255 land exactly on the bounds.
            const double s = intensity / 255.0;
            grid.at(i, j) = (1.0 - s) * omega_lo + s * omega_hi;
        }
    }
    return OmegaMask(std::move(grid), factor, image.height, image.width);
}

double evaluate_schedule(const ScheduleKind& kind, std::size_t step, std::size_t total_steps) {
    const double phase = static_cast<double>(step) / static_cast<double>(total_steps);
    return std::visit(Overloaded{
                          [](const ConstantSchedule& s) { return s.omega; },
                          [step](const TwoStageSchedule& s) { return step < s.tau ? s.omega_in : s.omega_out; },
                          [phase](const ExpSchedule& s) {
                              return 1.0 + s.amplitude * std::exp(-s.rate * phase) + s.offset;
                          },
                          [phase](const CosSchedule& s) {
                              return 1.0 + s.amplitude * std::cos(std::numbers::pi * phase) + s.offset;
                          },
                      },
                      kind);
}

OmegaSchedule::OmegaSchedule(ScheduleKind kind, std::size_t total_steps)
    : m_kind(std::move(kind)), m_total_steps(total_steps) {
    if (total_steps == 0) {
        throw InvalidArgument("omega schedule needs at least one step");
    }
    for (std::size_t step = 0; step < total_steps; ++step) {
        const double v = evaluate_schedule(m_kind, step, total_steps);
        if (!valid_omega(v)) {
            throw InvalidArgument("omega schedule emits non-positive omega " + format_double(v) + " at step " +
                                  std::to_string(step));
        }
    }
}

OmegaSchedule OmegaSchedule::preset(const std::string& name, std::size_t total_steps) {
    // Signs follow the four schedule quadrants: early omega < 1 gives a more
    // complex layout, late omega < 1 gives more fine detail.
    if (name == "EXP1") {
        return OmegaSchedule(ExpSchedule{-0.1, 3.0, -0.005}, total_steps);
    }
    if (name == "EXP2") {
        return OmegaSchedule(ExpSchedule{-0.1, 3.0, 0.02}, total_steps);
    }
    if (name == "COS1") {
        return OmegaSchedule(CosSchedule{-0.02, 0.05}, total_steps);
    }
    if (name == "COS2") {
        return OmegaSchedule(CosSchedule{0.05, 0.0}, total_steps);
    }
    throw InvalidArgument("unknown omega schedule preset '" + name + "'");
}

double OmegaSchedule::at(std::size_t step) const {
    if (step >= m_total_steps) {
        throw InvalidArgument("omega schedule step " + std::to_string(step) + " out of range");
    }
    return evaluate_schedule(m_kind, step, m_total_steps);
}

OmegaValue schedule_eval(const OmegaSchedule& schedule, std::size_t step) {
    return OmegaValue(schedule.at(step));
}

void write_schedule_preview_csv(std::ostream& out, const OmegaSchedule& schedule) {
    out << "step,omega\n";
    for (std::size_t step = 0; step < schedule.total_steps(); ++step) {
        out << step << ',' << format_double(schedule.at(step)) << '\n';
    }
}

OmegaField::OmegaField(double uniform) : m_values{uniform} {
    if (!valid_omega(uniform)) {
        throw InvalidArgument("omega field value must be positive and finite");
    }
}

OmegaField::OmegaField(std::size_t rows, std::size_t cols, std::vector<double> values)
    : m_rows(rows), m_cols(cols), m_values(std::move(values)) {
    if (m_values.size() != rows * cols || m_values.empty()) {
        throw ShapeMismatch("omega field value count does not match its dims");
    }
    for (double v : m_values) {
        if (!valid_omega(v)) {
            throw InvalidArgument("omega field cells must be positive and finite");
        }
    }
}

void OmegaField::check_broadcast(const Latent& latent) const {
    if (is_uniform()) {
        return;
    }
    if (m_rows != latent.rows() || m_cols != latent.cols()) {
        throw ShapeMismatch("omega field " + std::to_string(m_rows) + "x" + std::to_string(m_cols) +
                            " does not broadcast to latent " + std::to_string(latent.rows()) + "x" +
                            std::to_string(latent.cols()));
    }
}

OmegaControl::OmegaControl(double base, std::optional<OmegaMask> mask, std::optional<OmegaSchedule> schedule)
    : m_base(OmegaValue(base).value()), m_mask(std::move(mask)), m_schedule(std::move(schedule)) {}

OmegaField OmegaControl::field(std::size_t step, std::size_t rows, std::size_t cols) const {
    double scalar = m_base;
    if (m_schedule) {
        scalar = m_base * m_schedule->at(step);
    }
    if (!m_mask) {
        return OmegaField(scalar);
    }
    if (m_mask->rows() != rows || m_mask->cols() != cols) {
        throw ShapeMismatch("omega mask " + std::to_string(m_mask->rows()) + "x" + std::to_string(m_mask->cols()) +
                            " does not match latent " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    const auto cells = m_mask->grid().values();
    std::vector<double> values(cells.size());
    const double schedule_factor = m_schedule ? m_schedule->at(step) : 1.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        values[i] = m_base * cells[i] * schedule_factor;
    }
    return OmegaField(rows, cols, std::move(values));
}

OmegaValue resolve_omega(const OmegaControl& control, std::size_t i, std::size_t j, std::size_t step) {
    double omega = control.base();
    if (control.mask()) {
        omega *= control.mask()->at(i, j);
    }
    if (control.schedule()) {
        omega *= control.schedule()->at(step);
    }
    return OmegaValue(omega);
}

}  // namespace omegance
