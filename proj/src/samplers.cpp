// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "omegance/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "omegance/error.hpp"
#include "omegance/rng.hpp"

namespace omegance {

namespace {

void require_same_shape(const Latent& a, const Latent& b, const char* what) {
    if (!a.same_shape(b)) {
        throw ShapeMismatch(std::string(what) + ": latent shapes differ");
    }
}

void check_finite(const Latent& z, std::size_t step) {
    if (!z.all_finite()) {
        throw NumericAbort(step, "non-finite latent value");
    }
}

}  // namespace

std::string to_string(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::kDdim:
            return "ddim";
        case SamplerKind::kEuler:
            return "euler";
        case SamplerKind::kFlow:
            return "flow";
    }
    return "unknown";
}

SamplerKind parse_sampler_kind(const std::string& name) {
    if (name == "ddim") {
        return SamplerKind::kDdim;
    }
    if (name == "euler") {
        return SamplerKind::kEuler;
    }
    if (name == "flow") {
        return SamplerKind::kFlow;
    }
    throw InvalidArgument("unknown sampler kind '" + name + "'");
}

Latent forward_noise(const Latent& z0, double alpha_bar, const Latent& eps) {
    require_same_shape(z0, eps, "forward_noise");
    if (!(alpha_bar >= 0.0 && alpha_bar <= 1.0)) {
        throw InvalidArgument("forward_noise: alpha_bar must lie in [0, 1]");
    }
    const double signal = std::sqrt(alpha_bar);
    const double noise = std::sqrt(1.0 - alpha_bar);
    Latent out(z0.rows(), z0.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = signal * z0[i] + noise * eps[i];
    }
    return out;
}

Latent forward_noise(const Latent& z0, const AlphaBarSchedule& schedule, std::size_t t, const Latent& eps) {
    return forward_noise(z0, schedule[t], eps);
}

Latent scale_prediction(const Latent& prediction, const OmegaField& omega) {
    omega.check_broadcast(prediction);
    Latent out(prediction.rows(), prediction.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = prediction[i] * omega[i];
    }
    return out;
}

Latent ddim_step(const Latent& z, double alpha_bar_t, double alpha_bar_prev, const Latent& eps_pred,
                 const OmegaField& omega) {
    require_same_shape(z, eps_pred, "ddim_step");
    if (!(alpha_bar_t > 0.0 && alpha_bar_t <= 1.0 && alpha_bar_prev > 0.0 && alpha_bar_prev <= 1.0)) {
        throw InvalidArgument("ddim_step: alpha_bar values must lie in (0, 1]");
    }
    const Latent scaled = scale_prediction(eps_pred, omega);
    const double sqrt_t = std::sqrt(alpha_bar_t);
    const double sqrt_prev = std::sqrt(alpha_bar_prev);
    const double noise_t = std::sqrt(1.0 - alpha_bar_t);
    const double noise_prev = std::sqrt(1.0 - alpha_bar_prev);
    Latent out(z.rows(), z.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = sqrt_prev * ((z[i] - noise_t * scaled[i]) / sqrt_t) + noise_prev * scaled[i];
    }
    return out;
}

Latent ddim_step(const Latent& z, const AlphaBarSchedule& schedule, std::size_t t, const Latent& eps_pred,
                 const OmegaField& omega) {
    if (t < 1 || t > schedule.steps()) {
        throw InvalidArgument("ddim_step: t must satisfy 1 <= t <= T");
    }
    return ddim_step(z, schedule[t], schedule[t - 1], eps_pred, omega);
}

Latent euler_step(const Latent& z, const SigmaSchedule& sigmas, std::size_t i, const Latent& eps_pred,
                  const OmegaField& omega) {
    require_same_shape(z, eps_pred, "euler_step");
    if (i + 1 >= sigmas.values().size()) {
        throw InvalidArgument("euler_step: level index out of range");
    }
    const Latent scaled = scale_prediction(eps_pred, omega);
    const double step = sigmas.sigma(i + 1) - sigmas.sigma_hat(i);
    Latent out(z.rows(), z.cols());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = z[k] + step * scaled[k];
    }
    return out;
}

Latent flow_update(double dt, const Latent& v_pred, const OmegaField& omega) {
    if (v_pred.empty()) {
        throw InvalidArgument("flow_update: empty latent");
    }
    if (dt == 0.0 || !std::isfinite(dt)) {
        throw InvalidArgument("flow_update: dt must be finite and non-zero");
    }
    omega.check_broadcast(v_pred);
    Latent raw(v_pred.rows(), v_pred.cols());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        raw[i] = dt * v_pred[i];
    }
    const double mean = raw.mean();
    Latent out(raw.rows(), raw.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double w = omega[i];
        out[i] = (w == 1.0) ? raw[i] : (raw[i] - mean) * w + mean;
    }
    return out;
}

Latent flow_step(const Latent& z, double dt, const Latent& v_pred, const OmegaField& omega) {
    require_same_shape(z, v_pred, "flow_step");
    const Latent update = flow_update(dt, v_pred, omega);
    Latent out(z.rows(), z.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = z[i] + update[i];
    }
    return out;
}

Latent epsilon_at_sigma(const Denoiser& denoiser, const Latent& z, double sigma) {
    const double alpha_bar = 1.0 / (1.0 + sigma * sigma);
    const double to_vp = std::sqrt(alpha_bar);
    Latent scaled(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.size(); ++i) {
        scaled[i] = z[i] * to_vp;
    }
    return denoiser.epsilon_predict(scaled, alpha_bar);
}

void SamplerConfig::validate() const {
    if (steps < 1) {
        throw InvalidArgument("sampler needs at least one step");
    }
    switch (kind) {
        case SamplerKind::kDdim: {
            const auto* alpha_bars = std::get_if<AlphaBarSchedule>(&schedule);
            if (alpha_bars == nullptr) {
                throw InvalidArgument("DDIM needs an alpha_bar schedule");
            }
            if (steps > alpha_bars->steps()) {
                throw InvalidArgument("DDIM steps exceed the schedule length");
            }
            break;
        }
        case SamplerKind::kEuler: {
            const auto* sigmas = std::get_if<SigmaSchedule>(&schedule);
            if (sigmas == nullptr) {
                throw InvalidArgument("Euler needs a sigma schedule");
            }
            if (steps != sigmas->steps()) {
                throw InvalidArgument("Euler steps must match the sigma schedule");
            }
            break;
        }
        case SamplerKind::kFlow: {
            const auto* times = std::get_if<FlowTimesteps>(&schedule);
            if (times == nullptr) {
                throw InvalidArgument("flow matching needs flow timesteps");
            }
            if (steps != times->steps()) {
                throw InvalidArgument("flow steps must match the timestep grid");
            }
            break;
        }
    }
    if (omega.schedule() && omega.schedule()->total_steps() != steps) {
        throw InvalidArgument("omega schedule length must equal the sampler step count");
    }
    for (std::size_t s : snapshot_steps) {
        if (s > steps) {
            throw InvalidArgument("snapshot step " + std::to_string(s) + " beyond the last step");
        }
    }
}

Trajectory run_sampler(const Denoiser& denoiser, const SamplerConfig& config, const Latent& z_init) {
    config.validate();
    if (z_init.empty()) {
        throw InvalidArgument("run_sampler: empty initial latent");
    }
    const bool needs_velocity = config.kind == SamplerKind::kFlow;
    if (needs_velocity && !denoiser.predicts_velocity()) {
        throw InvalidArgument(denoiser.name() + " cannot drive a flow sampler (no velocity prediction)");
    }
    if (!needs_velocity && !denoiser.predicts_epsilon()) {
        throw InvalidArgument(denoiser.name() + " cannot drive " + to_string(config.kind) +
                              " (no noise prediction)");
    }
    if (config.omega.mask()) {
        // Fail before any work rather than at the first step.
        (void)config.omega.field(0, z_init.rows(), z_init.cols());
    }

    const std::set<std::size_t> wanted(config.snapshot_steps.begin(), config.snapshot_steps.end());
    Trajectory trajectory;
    Latent z = z_init;
    check_finite(z, 0);
    if (wanted.contains(0)) {
        trajectory.snapshots.push_back({0, z});
    }

    std::vector<std::size_t> timesteps;
    if (config.kind == SamplerKind::kDdim) {
        timesteps = ddim_timesteps(std::get<AlphaBarSchedule>(config.schedule).steps(), config.steps);
    }
    Rng churn_rng(config.seed, Stream::kChurn);

    for (std::size_t k = 0; k < config.steps; ++k) {
        const OmegaField omega = config.omega.field(k, z.rows(), z.cols());
        try {
            switch (config.kind) {
                case SamplerKind::kDdim: {
                    const auto& alpha_bars = std::get<AlphaBarSchedule>(config.schedule);
                    const double a_t = alpha_bars[timesteps[k]];
                    const double a_prev = alpha_bars[timesteps[k + 1]];
                    const Latent eps = denoiser.epsilon_predict(z, a_t);
                    require_same_shape(z, eps, "denoiser output");
                    z = ddim_step(z, a_t, a_prev, eps, omega);
                    break;
                }
                case SamplerKind::kEuler: {
                    const auto& sigmas = std::get<SigmaSchedule>(config.schedule);
                    const double sigma = sigmas.sigma(k);
                    const double sigma_hat = sigmas.sigma_hat(k);
                    if (sigma_hat > sigma) {
                        const double spread = std::sqrt(sigma_hat * sigma_hat - sigma * sigma);
                        for (std::size_t i = 0; i < z.size(); ++i) {
                            z[i] += spread * churn_rng.normal();
                        }
                    }
                    const Latent eps = epsilon_at_sigma(denoiser, z, sigma_hat);
                    require_same_shape(z, eps, "denoiser output");
                    z = euler_step(z, sigmas, k, eps, omega);
                    break;
                }
                case SamplerKind::kFlow: {
                    const auto& times = std::get<FlowTimesteps>(config.schedule);
                    const Latent v = denoiser.velocity_predict(z, times.time(k));
                    require_same_shape(z, v, "denoiser output");
                    z = flow_step(z, times.dt(k), v, omega);
                    break;
                }
            }
        } catch (const DegenerateMixture& e) {
            // The oracle breaks down only on numerically runaway latents.
            throw NumericAbort(k + 1, e.what());
        }
        check_finite(z, k + 1);
        if (wanted.contains(k + 1)) {
            trajectory.snapshots.push_back({k + 1, z});
        }
    }
    trajectory.final_state = {config.steps, std::move(z)};
    return trajectory;
}

Latent initial_latent(const SamplerConfig& config, std::size_t rows, std::size_t cols, std::uint64_t seed) {
    double scale = 1.0;
    if (config.kind == SamplerKind::kEuler) {
        const double sigma_max = std::get<SigmaSchedule>(config.schedule).sigma(0);
        scale = std::sqrt(1.0 + sigma_max * sigma_max);
    }
    Rng rng(seed, Stream::kInitialNoise);
    Latent z(rows, cols);
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = scale * rng.normal();
    }
    return z;
}

}  // namespace omegance
