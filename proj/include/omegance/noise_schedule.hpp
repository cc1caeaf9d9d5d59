// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <variant>
#include <vector>

namespace omegance {

/// Per-step forward variances beta_1..beta_T, each in (0, 1).
class BetaSchedule {
public:
    explicit BetaSchedule(std::vector<double> betas);

    std::size_t steps() const noexcept { return m_betas.size(); }
    /// beta_t for 1 <= t <= T.
    double beta(std::size_t t) const;
    const std::vector<double>& betas() const noexcept { return m_betas; }

private:
    std::vector<double> m_betas;
};

/// Cumulative signal coefficients alpha_bar_0..alpha_bar_T.
///
/// Index t counts forward-process steps: alpha_bar_0 = 1 is the clean
/// latent and alpha_bar_t = prod_{i<=t} (1 - beta_i). The first stored
/// product alpha_bar_1 = 1 - beta_1 is what 0-based schedulers call
/// alphas_cumprod[0]; alpha_bar_0 plays the role of their final
/// "alpha = 1" sentinel used by the last reverse step.
class AlphaBarSchedule {
public:
    explicit AlphaBarSchedule(std::vector<double> alpha_bars);

    std::size_t steps() const noexcept { return m_alpha_bars.size() - 1; }
    double operator[](std::size_t t) const;
    const std::vector<double>& values() const noexcept { return m_alpha_bars; }

private:
    std::vector<double> m_alpha_bars;
};

/// Karras-style decreasing noise levels with a terminal zero and an
/// optional churn factor gamma (sigma_hat = sigma * (gamma + 1)).
class SigmaSchedule {
public:
    SigmaSchedule(std::vector<double> sigmas, double churn = 0.0);

    /// Number of Euler steps (levels minus the terminal zero).
    std::size_t steps() const noexcept { return m_sigmas.size() - 1; }
    double sigma(std::size_t i) const;
    double sigma_hat(std::size_t i) const { return sigma(i) * (m_churn + 1.0); }
    double churn() const noexcept { return m_churn; }
    const std::vector<double>& values() const noexcept { return m_sigmas; }

private:
    std::vector<double> m_sigmas;
    double m_churn;
};

/// Uniform flow-matching times from 1 down to 0.
class FlowTimesteps {
public:
    explicit FlowTimesteps(std::vector<double> times);

    std::size_t steps() const noexcept { return m_times.size() - 1; }
    double time(std::size_t i) const;
    /// t_{i+1} - t_i, negative.
    double dt(std::size_t i) const;
    const std::vector<double>& values() const noexcept { return m_times; }

private:
    std::vector<double> m_times;
};

/// Coefficients of the generic step z_{t-1} = delta * z_t + zeta * eps.
struct StepCoefficients {
    double delta = 1.0;
    double zeta = 0.0;
};

/// Flow matching only provides zeta * eps ~ dt * v, not a closed (delta, zeta).
struct CoefficientFormNotClosed {};

using ScheduleData = std::variant<AlphaBarSchedule, SigmaSchedule, FlowTimesteps>;
using StepCoefficientsResult = std::variant<StepCoefficients, CoefficientFormNotClosed>;

/// beta_t linearly interpolated from beta_start (t = 1) to beta_end (t = T).
BetaSchedule make_linear_beta(std::size_t steps = 1000, double beta_start = 1e-4, double beta_end = 0.02);

AlphaBarSchedule alpha_bar_from_betas(const BetaSchedule& betas);

/// alpha_bar / (1 - alpha_bar); SignalDivergence when alpha_bar == 1.
double snr(double alpha_bar);
double snr(const AlphaBarSchedule& schedule, std::size_t t);

/// Signal-to-noise ratio reached by one omega-scaled DDIM step from
/// alpha_bar_t to alpha_bar_prev. DegenerateOmega when the noise
/// coefficient vanishes.
double modified_snr_ddim(double alpha_bar_t, double alpha_bar_prev, double omega);
double modified_snr_ddim(const AlphaBarSchedule& schedule, std::size_t t, double omega);

/// sqrt(a_t) sqrt(1 - a_prev) - sqrt(a_prev) sqrt(1 - a_t): the omega
/// coefficient of the step noise term. Negative whenever a_prev > a_t.
double omega_noise_term(double alpha_bar_t, double alpha_bar_prev);

SigmaSchedule karras_sigmas(std::size_t levels, double sigma_min = 0.0292, double sigma_max = 14.6146,
                            double rho = 7.0, double churn = 0.0);

FlowTimesteps flow_timesteps(std::size_t steps);

/// Forward-process indices visited by an N-step DDIM run over a T-step
/// schedule: round(k T / N) for k = N..0, so the run starts at T and ends
/// on the clean alpha_bar_0.
std::vector<std::size_t> ddim_timesteps(std::size_t schedule_steps, std::size_t sampling_steps);

StepCoefficients ddim_coefficients(double alpha_bar_t, double alpha_bar_prev);
StepCoefficients euler_coefficients(const SigmaSchedule& sigmas, std::size_t i);

/// Dispatches on the schedule kind. For alpha-bar schedules `t` is the
/// forward index (step t -> t-1); for sigma and flow schedules it is the
/// level index (step i -> i+1).
StepCoefficientsResult step_coefficients(const ScheduleData& schedule, std::size_t t);

/// One row per forward step: t, beta_t, alpha_bar_t, SNR_t. Row 0 carries
/// beta = 0, alpha_bar = 1 and SNR = inf.
void write_schedule_csv(std::ostream& out, const BetaSchedule& betas);

}  // namespace omegance
