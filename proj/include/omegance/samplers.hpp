// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "omegance/denoiser.hpp"
#include "omegance/latent.hpp"
#include "omegance/noise_schedule.hpp"
#include "omegance/omega_control.hpp"

namespace omegance {

enum class SamplerKind { kDdim, kEuler, kFlow };

std::string to_string(SamplerKind kind);
SamplerKind parse_sampler_kind(const std::string& name);

/// sqrt(alpha_bar) z0 + sqrt(1 - alpha_bar) eps.
Latent forward_noise(const Latent& z0, double alpha_bar, const Latent& eps);
Latent forward_noise(const Latent& z0, const AlphaBarSchedule& schedule, std::size_t t, const Latent& eps);

/// eps * omega per cell. This is the only place omega touches a prediction.
Latent scale_prediction(const Latent& prediction, const OmegaField& omega);

/// Omega-scaled DDIM step from alpha_bar_t to alpha_bar_prev:
///   z' = sqrt(a_prev) (z - sqrt(1 - a_t) eps w) / sqrt(a_t) + sqrt(1 - a_prev) eps w
Latent ddim_step(const Latent& z, double alpha_bar_t, double alpha_bar_prev, const Latent& eps_pred,
                 const OmegaField& omega);
/// Consecutive-index form: step t -> t - 1 of the schedule.
Latent ddim_step(const Latent& z, const AlphaBarSchedule& schedule, std::size_t t, const Latent& eps_pred,
                 const OmegaField& omega);

/// z' = z + (sigma_{i+1} - sigma_hat_i) eps w. `z` is the (possibly
/// churn-perturbed) latent at sigma_hat_i.
Latent euler_step(const Latent& z, const SigmaSchedule& sigmas, std::size_t i, const Latent& eps_pred,
                  const OmegaField& omega);

/// Mean-preserving flow update (dt v - m) w + m with m the mean of dt v
/// over all latent elements. Cells with w == 1 receive dt v unchanged.
Latent flow_update(double dt, const Latent& v_pred, const OmegaField& omega);
Latent flow_step(const Latent& z, double dt, const Latent& v_pred, const OmegaField& omega);

/// Noise prediction at Karras level sigma (z = z0 + sigma eps), obtained
/// from the variance-preserving interface with alpha_bar = 1 / (1 + sigma^2).
Latent epsilon_at_sigma(const Denoiser& denoiser, const Latent& z, double sigma);

struct SamplerConfig {
    SamplerKind kind = SamplerKind::kDdim;
    /// AlphaBarSchedule for DDIM, SigmaSchedule for Euler, FlowTimesteps for flow.
    ScheduleData schedule = flow_timesteps(1);
    /// Reverse steps. DDIM sub-samples the alpha_bar schedule; Euler and
    /// flow must match their schedules' step counts.
    std::size_t steps = 1;
    OmegaControl omega;
    /// Seeds the churn stream (Euler with gamma > 0).
    std::uint64_t seed = 0;
    /// Completed-step counts (0 = initial latent) to record.
    std::vector<std::size_t> snapshot_steps;

    /// Throws InvalidArgument on kind/schedule/step mismatches.
    void validate() const;
};

struct Trajectory {
    std::vector<LatentState> snapshots;
    /// State after the last step: the z0 estimate.
    LatentState final_state;
};

/// Runs the configured reverse process from z_init. Deterministic for a
/// fixed config. Throws InvalidArgument on capability mismatch and
/// NumericAbort when a step yields a non-finite value.
Trajectory run_sampler(const Denoiser& denoiser, const SamplerConfig& config, const Latent& z_init);

/// Initial latent for a kind: unit normal for DDIM and flow, sigma_max
/// scaled for Euler. Drawn from the seed's initial-noise stream.
Latent initial_latent(const SamplerConfig& config, std::size_t rows, std::size_t cols, std::uint64_t seed);

}  // namespace omegance
