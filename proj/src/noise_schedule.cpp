// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "omegance/noise_schedule.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <utility>

#include "omegance/error.hpp"
#include "omegance/io.hpp"

namespace omegance {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) {
        throw InvalidArgument(message);
    }
}

}  // namespace

BetaSchedule::BetaSchedule(std::vector<double> betas) : m_betas(std::move(betas)) {
    require(!m_betas.empty(), "beta schedule must have at least one step");
    for (double b : m_betas) {
        require(std::isfinite(b) && b > 0.0 && b < 1.0, "beta values must lie in (0, 1)");
    }
}

double BetaSchedule::beta(std::size_t t) const {
    require(t >= 1 && t <= m_betas.size(), "beta index out of range");
    return m_betas[t - 1];
}

AlphaBarSchedule::AlphaBarSchedule(std::vector<double> alpha_bars) : m_alpha_bars(std::move(alpha_bars)) {
    require(m_alpha_bars.size() >= 2, "alpha_bar schedule needs alpha_bar_0 and at least one step");
    for (std::size_t t = 0; t < m_alpha_bars.size(); ++t) {
        const double a = m_alpha_bars[t];
        require(std::isfinite(a) && a > 0.0 && a <= 1.0, "alpha_bar values must lie in (0, 1]");
        if (t > 0) {
            require(a < m_alpha_bars[t - 1], "alpha_bar must be strictly decreasing");
        }
    }
}

double AlphaBarSchedule::operator[](std::size_t t) const {
    require(t < m_alpha_bars.size(), "alpha_bar index out of range");
    return m_alpha_bars[t];
}

SigmaSchedule::SigmaSchedule(std::vector<double> sigmas, double churn)
    : m_sigmas(std::move(sigmas)), m_churn(churn) {
    require(m_sigmas.size() >= 2, "sigma schedule needs at least one level and the terminal zero");
    require(std::isfinite(churn) && churn >= 0.0, "churn must be non-negative");
    require(m_sigmas.back() == 0.0, "sigma schedule must end at zero");
    for (std::size_t i = 0; i < m_sigmas.size(); ++i) {
        require(std::isfinite(m_sigmas[i]) && m_sigmas[i] >= 0.0, "sigma values must be finite and non-negative");
        if (i > 0) {
            require(m_sigmas[i] < m_sigmas[i - 1], "sigma schedule must be strictly decreasing");
        }
    }
}

double SigmaSchedule::sigma(std::size_t i) const {
    require(i < m_sigmas.size(), "sigma index out of range");
    return m_sigmas[i];
}

FlowTimesteps::FlowTimesteps(std::vector<double> times) : m_times(std::move(times)) {
    require(m_times.size() >= 2, "flow timesteps need at least one step");
    require(m_times.front() == 1.0 && m_times.back() == 0.0, "flow timesteps must run from 1 to 0");
    for (std::size_t i = 1; i < m_times.size(); ++i) {
        require(m_times[i] < m_times[i - 1], "flow timesteps must be strictly decreasing");
    }
}

double FlowTimesteps::time(std::size_t i) const {
    require(i < m_times.size(), "flow time index out of range");
    return m_times[i];
}

double FlowTimesteps::dt(std::size_t i) const {
    require(i + 1 < m_times.size(), "flow step index out of range");
    return m_times[i + 1] - m_times[i];
}

BetaSchedule make_linear_beta(std::size_t steps, double beta_start, double beta_end) {
    require(steps >= 2, "linear beta schedule needs T >= 2");
    require(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0,
            "linear beta bounds must satisfy 0 < beta_start <= beta_end < 1");
    std::vector<double> betas(steps);
    const double span = beta_end - beta_start;
    const double denom = static_cast<double>(steps - 1);
    for (std::size_t i = 0; i < steps; ++i) {
        betas[i] = beta_start + span * (static_cast<double>(i) / denom);
    }
    betas.back() = beta_end;
    return BetaSchedule(std::move(betas));
}

AlphaBarSchedule alpha_bar_from_betas(const BetaSchedule& betas) {
    std::vector<double> alpha_bars;
    alpha_bars.reserve(betas.steps() + 1);
    alpha_bars.push_back(1.0);
    double product = 1.0;
    for (double b : betas.betas()) {
        product *= (1.0 - b);
        alpha_bars.push_back(product);
    }
    return AlphaBarSchedule(std::move(alpha_bars));
}

double snr(double alpha_bar) {
    require(alpha_bar >= 0.0 && alpha_bar <= 1.0, "alpha_bar must lie in [0, 1]");
    if (alpha_bar >= 1.0) {
        throw SignalDivergence("SNR diverges at alpha_bar = 1 (pure signal)");
    }
    return alpha_bar / (1.0 - alpha_bar);
}

double snr(const AlphaBarSchedule& schedule, std::size_t t) {
    return snr(schedule[t]);
}

double omega_noise_term(double alpha_bar_t, double alpha_bar_prev) {
    return std::sqrt(alpha_bar_t) * std::sqrt(1.0 - alpha_bar_prev) -
           std::sqrt(alpha_bar_prev) * std::sqrt(1.0 - alpha_bar_t);
}

double modified_snr_ddim(double alpha_bar_t, double alpha_bar_prev, double omega) {
    require(omega > 0.0 && std::isfinite(omega), "omega must be positive and finite");
    require(alpha_bar_t > 0.0 && alpha_bar_t < 1.0 && alpha_bar_prev > 0.0 && alpha_bar_prev <= 1.0,
            "alpha_bar values out of range for a DDIM step");
    const double sqrt_t = std::sqrt(alpha_bar_t);
    const double base = std::sqrt(alpha_bar_prev) * std::sqrt(1.0 - alpha_bar_t) / sqrt_t;
    const double slope = omega * omega_noise_term(alpha_bar_t, alpha_bar_prev) / sqrt_t;
    const double bracket = base + slope;
    if (std::abs(bracket) <= 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(base) + std::abs(slope))) {
        throw DegenerateOmega("omega cancels the DDIM noise coefficient; modified SNR diverges");
    }
    return alpha_bar_prev / (bracket * bracket);
}

double modified_snr_ddim(const AlphaBarSchedule& schedule, std::size_t t, double omega) {
    require(t >= 1 && t <= schedule.steps(), "modified SNR needs 1 <= t <= T");
    return modified_snr_ddim(schedule[t], schedule[t - 1], omega);
}

SigmaSchedule karras_sigmas(std::size_t levels, double sigma_min, double sigma_max, double rho, double churn) {
    require(levels >= 2, "Karras schedule needs at least two levels");
    require(sigma_min > 0.0 && sigma_min < sigma_max, "Karras bounds must satisfy 0 < sigma_min < sigma_max");
    require(rho > 0.0, "Karras rho must be positive");
    const double inv_rho = 1.0 / rho;
    const double max_root = std::pow(sigma_max, inv_rho);
    const double min_root = std::pow(sigma_min, inv_rho);
    std::vector<double> sigmas(levels + 1);
    for (std::size_t i = 0; i < levels; ++i) {
        const double ramp = static_cast<double>(i) / static_cast<double>(levels - 1);
        sigmas[i] = std::pow(max_root + ramp * (min_root - max_root), rho);
    }
    sigmas.front() = sigma_max;
    sigmas[levels - 1] = sigma_min;
    sigmas.back() = 0.0;
    return SigmaSchedule(std::move(sigmas), churn);
}

FlowTimesteps flow_timesteps(std::size_t steps) {
    require(steps >= 1, "flow timesteps need at least one step");
    std::vector<double> times(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        times[i] = static_cast<double>(steps - i) / static_cast<double>(steps);
    }
    return FlowTimesteps(std::move(times));
}

std::vector<std::size_t> ddim_timesteps(std::size_t schedule_steps, std::size_t sampling_steps) {
    require(sampling_steps >= 1 && sampling_steps <= schedule_steps,
            "DDIM steps must be in [1, T]");
    std::vector<std::size_t> timesteps;
    timesteps.reserve(sampling_steps + 1);
    for (std::size_t k = sampling_steps + 1; k-- > 0;) {
        // Integer rounding of k*T/N keeps the grid exact and strictly decreasing.
        const std::size_t index = (2 * k * schedule_steps + sampling_steps) / (2 * sampling_steps);
        timesteps.push_back(index);
    }
    return timesteps;
}

StepCoefficients ddim_coefficients(double alpha_bar_t, double alpha_bar_prev) {
    const double delta = std::sqrt(alpha_bar_prev) / std::sqrt(alpha_bar_t);
    return {delta, std::sqrt(1.0 - alpha_bar_prev) - delta * std::sqrt(1.0 - alpha_bar_t)};
}

StepCoefficients euler_coefficients(const SigmaSchedule& sigmas, std::size_t i) {
    require(i + 1 < sigmas.values().size(), "Euler level index out of range");
    return {1.0, sigmas.sigma(i + 1) - sigmas.sigma_hat(i)};
}

StepCoefficientsResult step_coefficients(const ScheduleData& schedule, std::size_t t) {
    if (const auto* alpha_bars = std::get_if<AlphaBarSchedule>(&schedule)) {
        require(t >= 1 && t <= alpha_bars->steps(), "DDIM coefficients need 1 <= t <= T");
        return ddim_coefficients((*alpha_bars)[t], (*alpha_bars)[t - 1]);
    }
    if (const auto* sigmas = std::get_if<SigmaSchedule>(&schedule)) {
        return euler_coefficients(*sigmas, t);
    }
    return CoefficientFormNotClosed{};
}

void write_schedule_csv(std::ostream& out, const BetaSchedule& betas) {
    const AlphaBarSchedule alpha_bars = alpha_bar_from_betas(betas);
    out << "t,beta,alpha_bar,snr\n";
    out << "0,0,1,inf\n";
    for (std::size_t t = 1; t <= betas.steps(); ++t) {
        out << t << ',' << format_double(betas.beta(t)) << ',' << format_double(alpha_bars[t]) << ','
            << format_double(snr(alpha_bars, t)) << '\n';
    }
}

}  // namespace omegance
