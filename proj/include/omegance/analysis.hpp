// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "omegance/denoiser.hpp"
#include "omegance/latent.hpp"
#include "omegance/noise_schedule.hpp"
#include "omegance/samplers.hpp"

namespace omegance {

/// z = A z0 + B eps.
struct CoefficientState {
    double a = 0.0;
    double b = 1.0;
};

enum class CoefficientMode {
    /// Every step starts from the forward-process form at its own t, so
    /// A^2 / B^2 is the one-step modified SNR.
    kReanchored,
    /// Coefficients carry over from the previous step (eps_theta = eps
    /// exactly throughout).
    kChained,
};

/// Element 0 is the forward-process state at `timesteps[0]`; element k is
/// the state after the k-th omega-scaled DDIM step timesteps[k-1] ->
/// timesteps[k]. `timesteps` must be strictly decreasing indices.
std::vector<CoefficientState> propagate_coefficients_ddim(const AlphaBarSchedule& schedule, double omega,
                                                          const std::vector<std::size_t>& timesteps,
                                                          CoefficientMode mode = CoefficientMode::kReanchored);

/// Consecutive steps from_t -> from_t - steps. Throws when steps > from_t.
std::vector<CoefficientState> propagate_coefficients_ddim(const AlphaBarSchedule& schedule, double omega,
                                                          std::size_t from_t, std::size_t steps,
                                                          CoefficientMode mode = CoefficientMode::kReanchored);

enum class SnrMode { kAnalytic, kPropagated };

struct SnrPoint {
    /// Forward index reached by the step (t - 1).
    std::size_t t = 0;
    /// +inf where the step lands on a divergent (pure-signal) state.
    double snr = 0.0;
};

struct SnrTrajectory {
    SnrMode mode = SnrMode::kAnalytic;
    double omega = 1.0;
    std::vector<SnrPoint> points;
};

/// Modified SNR after every consecutive step T -> T-1 -> ... -> 0.
SnrTrajectory snr_trajectory(const AlphaBarSchedule& schedule, double omega, SnrMode mode);

/// Per-step multipliers for the standard-normal prior. DDIM predictions
/// are scalar multiples of z, so mean and fluctuation factors coincide.
/// The mean-preserving flow step keeps the latent mean on the omega = 1
/// recursion and scales only the zero-mean part, so the two differ.
struct ScalarMultiplier {
    double mean = 1.0;
    double fluctuation = 1.0;
};

std::vector<ScalarMultiplier> closed_form_scalar_trajectory_ddim(const AlphaBarSchedule& schedule,
                                                                 const std::vector<std::size_t>& timesteps,
                                                                 double omega);
std::vector<ScalarMultiplier> closed_form_scalar_trajectory_flow(const FlowTimesteps& times, double omega);

/// Dispatches on the schedule kind; DDIM uses ddim_timesteps(T, steps).
std::vector<ScalarMultiplier> closed_form_scalar_trajectory(const ScheduleData& schedule, std::size_t steps,
                                                            double omega);

/// Latent after `steps_done` steps: mean(z) * prod(mean factors) +
/// (z - mean(z)) * prod(fluctuation factors).
Latent apply_scalar_trajectory(const Latent& z_init, const std::vector<ScalarMultiplier>& multipliers,
                               std::size_t steps_done);

/// Annularly averaged 2-D power spectrum. Power per frequency is
/// |F_k|^2 / N, so the bins sum (mean * count) to the input energy.
struct SpectrumProfile {
    /// Bin b collects frequencies with round(|k|) == b; bin 0 is DC.
    std::vector<std::size_t> counts;
    std::vector<double> mean_power;
    /// Radius separating the low band (< split) from the high band.
    double band_split = 0.0;

    std::size_t bins() const noexcept { return mean_power.size(); }
    double total_power() const;
};

/// band_split <= 0 selects half the Nyquist radius, min(rows, cols) / 4.
SpectrumProfile radial_spectrum(const Latent& z, double band_split = 0.0);

enum class Band { kLow, kHigh };

double band_energy(const SpectrumProfile& profile, Band band);

/// Seed-averaged spectra of DDIM/Euler/flow trajectories over an omega
/// sweep with paired initial noise.
struct SpectrumStudy {
    std::vector<double> omegas;
    std::vector<std::uint64_t> seeds;
    /// Completed-step index of each snapshot.
    std::vector<std::size_t> steps;
    /// [omega][snapshot] seed-averaged profile.
    std::vector<std::vector<SpectrumProfile>> profiles;
    /// [omega][snapshot] seed-averaged band energies.
    std::vector<std::vector<double>> low_energy;
    std::vector<std::vector<double>> high_energy;

    /// High-band energy strictly decreasing in omega at snapshot s.
    bool high_band_ordered(std::size_t snapshot) const;
    /// High-band energy strictly decreasing over the last `fraction` of
    /// the snapshots of omega index o.
    bool high_band_decays(std::size_t omega_index, double fraction = 0.8) const;
};

/// `base` supplies kind, schedule and steps; its omega control is
/// replaced by a uniform omega per sweep entry and snapshots are taken at
/// every step. Initial latents come from initial_latent(base, ...seed).
SpectrumStudy spectrum_study(const Denoiser& denoiser, const SamplerConfig& base, const std::vector<double>& omegas,
                             const std::vector<std::uint64_t>& seeds, std::size_t rows, std::size_t cols,
                             std::size_t threads = 1, double band_split = 0.0);

}  // namespace omegance
