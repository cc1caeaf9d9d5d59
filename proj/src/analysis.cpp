// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "omegance/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "omegance/error.hpp"
#include "omegance/fft.hpp"
#include "omegance/parallel.hpp"

namespace omegance {

namespace {

CoefficientState forward_state(double alpha_bar) {
    return {std::sqrt(alpha_bar), std::sqrt(1.0 - alpha_bar)};
}

// One omega-scaled DDIM step acts on z = A z0 + B eps as
// z' = delta z + omega zeta eps, with eps_theta = eps.
CoefficientState transfer(const CoefficientState& in, const StepCoefficients& step, double omega) {
    const double carried = step.delta * in.b;
    const double injected = omega * step.zeta;
    double b = carried + injected;
    // Cancellation to rounding level means the step lands on pure signal.
    if (std::abs(b) <= 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(carried) + std::abs(injected))) {
        b = 0.0;
    }
    return {step.delta * in.a, b};
}

double ratio(const CoefficientState& s) {
    if (s.b == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return (s.a * s.a) / (s.b * s.b);
}

}  // namespace

std::vector<CoefficientState> propagate_coefficients_ddim(const AlphaBarSchedule& schedule, double omega,
                                                          const std::vector<std::size_t>& timesteps,
                                                          CoefficientMode mode) {
    if (!(omega > 0.0 && std::isfinite(omega))) {
        throw InvalidArgument("omega must be positive and finite");
    }
    if (timesteps.empty()) {
        throw InvalidArgument("coefficient propagation needs a start index");
    }
    for (std::size_t k = 0; k < timesteps.size(); ++k) {
        if (timesteps[k] > schedule.steps()) {
            throw InvalidArgument("coefficient propagation index beyond the schedule");
        }
        if (k > 0 && timesteps[k] >= timesteps[k - 1]) {
            throw InvalidArgument("coefficient propagation indices must be strictly decreasing");
        }
    }
    std::vector<CoefficientState> states;
    states.reserve(timesteps.size());
    states.push_back(forward_state(schedule[timesteps.front()]));
    for (std::size_t k = 1; k < timesteps.size(); ++k) {
        const double a_t = schedule[timesteps[k - 1]];
        const double a_prev = schedule[timesteps[k]];
        const CoefficientState start = mode == CoefficientMode::kReanchored ? forward_state(a_t) : states.back();
        states.push_back(transfer(start, ddim_coefficients(a_t, a_prev), omega));
    }
    return states;
}

std::vector<CoefficientState> propagate_coefficients_ddim(const AlphaBarSchedule& schedule, double omega,
                                                          std::size_t from_t, std::size_t steps,
                                                          CoefficientMode mode) {
    if (from_t > schedule.steps() || steps > from_t) {
        throw InvalidArgument("coefficient propagation step range overflows the schedule");
    }
    std::vector<std::size_t> timesteps(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        timesteps[k] = from_t - k;
    }
    return propagate_coefficients_ddim(schedule, omega, timesteps, mode);
}

SnrTrajectory snr_trajectory(const AlphaBarSchedule& schedule, double omega, SnrMode mode) {
    SnrTrajectory trajectory{mode, omega, {}};
    const std::size_t T = schedule.steps();
    trajectory.points.reserve(T);
    if (mode == SnrMode::kPropagated) {
        const auto states = propagate_coefficients_ddim(schedule, omega, T, T, CoefficientMode::kReanchored);
        for (std::size_t k = 1; k < states.size(); ++k) {
            trajectory.points.push_back({T - k, ratio(states[k])});
        }
        return trajectory;
    }
    for (std::size_t t = T; t >= 1; --t) {
        double value = std::numeric_limits<double>::infinity();
        try {
            value = modified_snr_ddim(schedule, t, omega);
        } catch (const DegenerateOmega&) {
        }
        trajectory.points.push_back({t - 1, value});
    }
    return trajectory;
}

std::vector<ScalarMultiplier> closed_form_scalar_trajectory_ddim(const AlphaBarSchedule& schedule,
                                                                 const std::vector<std::size_t>& timesteps,
                                                                 double omega) {
    std::vector<ScalarMultiplier> out;
    for (std::size_t k = 1; k < timesteps.size(); ++k) {
        const double a_t = schedule[timesteps[k - 1]];
        const double a_prev = schedule[timesteps[k]];
        const double c = std::sqrt(a_prev) * (1.0 - (1.0 - a_t) * omega) / std::sqrt(a_t) +
                         std::sqrt(1.0 - a_prev) * std::sqrt(1.0 - a_t) * omega;
        out.push_back({c, c});
    }
    return out;
}

std::vector<ScalarMultiplier> closed_form_scalar_trajectory_flow(const FlowTimesteps& times, double omega) {
    std::vector<ScalarMultiplier> out;
    for (std::size_t i = 0; i < times.steps(); ++i) {
        const double t = times.time(i);
        const double gain = (2.0 * t - 1.0) / ((1.0 - t) * (1.0 - t) + t * t);
        const double dt = times.dt(i);
        out.push_back({1.0 + dt * gain, 1.0 + omega * dt * gain});
    }
    return out;
}

std::vector<ScalarMultiplier> closed_form_scalar_trajectory(const ScheduleData& schedule, std::size_t steps,
                                                            double omega) {
    if (const auto* alpha_bars = std::get_if<AlphaBarSchedule>(&schedule)) {
        return closed_form_scalar_trajectory_ddim(*alpha_bars, ddim_timesteps(alpha_bars->steps(), steps), omega);
    }
    if (const auto* times = std::get_if<FlowTimesteps>(&schedule)) {
        if (times->steps() != steps) {
            throw InvalidArgument("flow step count does not match the timestep grid");
        }
        return closed_form_scalar_trajectory_flow(*times, omega);
    }
    throw InvalidArgument("closed-form scalar trajectories cover DDIM and flow only");
}

Latent apply_scalar_trajectory(const Latent& z_init, const std::vector<ScalarMultiplier>& multipliers,
                               std::size_t steps_done) {
    if (steps_done > multipliers.size()) {
        throw InvalidArgument("scalar trajectory shorter than the requested step");
    }
    double mean_factor = 1.0;
    double fluctuation_factor = 1.0;
    for (std::size_t k = 0; k < steps_done; ++k) {
        mean_factor *= multipliers[k].mean;
        fluctuation_factor *= multipliers[k].fluctuation;
    }
    const double mean = z_init.mean();
    Latent out(z_init.rows(), z_init.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = mean_factor * mean + fluctuation_factor * (z_init[i] - mean);
    }
    return out;
}

double SpectrumProfile::total_power() const {
    double total = 0.0;
    for (std::size_t b = 0; b < mean_power.size(); ++b) {
        total += mean_power[b] * static_cast<double>(counts[b]);
    }
    return total;
}

SpectrumProfile radial_spectrum(const Latent& z, double band_split) {
    if (z.rows() < 4 || z.cols() < 4) {
        throw InvalidArgument("radial spectrum needs a 2-D latent of at least 4x4");
    }
    const std::size_t rows = z.rows();
    const std::size_t cols = z.cols();
    const auto spectrum = fft2d(z);
    const double max_radius = std::hypot(static_cast<double>(rows / 2), static_cast<double>(cols / 2));
    const std::size_t bins = static_cast<std::size_t>(std::lround(max_radius)) + 1;
    SpectrumProfile profile;
    profile.counts.assign(bins, 0);
    profile.mean_power.assign(bins, 0.0);
    profile.band_split = band_split > 0.0 ? band_split : static_cast<double>(std::min(rows, cols)) / 4.0;
    const double norm = 1.0 / static_cast<double>(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const double ky = signed_frequency(r, rows);
        for (std::size_t c = 0; c < cols; ++c) {
            const double kx = signed_frequency(c, cols);
            const auto bin = static_cast<std::size_t>(std::lround(std::hypot(ky, kx)));
            profile.counts[bin] += 1;
            profile.mean_power[bin] += std::norm(spectrum[r * cols + c]) * norm;
        }
    }
    for (std::size_t b = 0; b < bins; ++b) {
        if (profile.counts[b] > 0) {
            profile.mean_power[b] /= static_cast<double>(profile.counts[b]);
        }
    }
    return profile;
}

double band_energy(const SpectrumProfile& profile, Band band) {
    double energy = 0.0;
    for (std::size_t b = 0; b < profile.bins(); ++b) {
        const bool high = static_cast<double>(b) >= profile.band_split;
        if (high == (band == Band::kHigh)) {
            energy += profile.mean_power[b] * static_cast<double>(profile.counts[b]);
        }
    }
    return energy;
}

bool SpectrumStudy::high_band_ordered(std::size_t snapshot) const {
    for (std::size_t o = 1; o < omegas.size(); ++o) {
        if (!(high_energy[o - 1][snapshot] > high_energy[o][snapshot])) {
            return false;
        }
    }
    return true;
}

bool SpectrumStudy::high_band_decays(std::size_t omega_index, double fraction) const {
    const auto& series = high_energy.at(omega_index);
    if (series.size() < 2) {
        return true;
    }
    const std::size_t last = series.size() - 1;
    const auto first = static_cast<std::size_t>(
        std::floor(static_cast<double>(last) * (1.0 - fraction)));
    for (std::size_t s = first + 1; s <= last; ++s) {
        if (!(series[s] < series[s - 1])) {
            return false;
        }
    }
    return true;
}

SpectrumStudy spectrum_study(const Denoiser& denoiser, const SamplerConfig& base, const std::vector<double>& omegas,
                             const std::vector<std::uint64_t>& seeds, std::size_t rows, std::size_t cols,
                             std::size_t threads, double band_split) {
    if (omegas.empty() || seeds.empty()) {
        throw InvalidArgument("spectrum study needs at least one omega and one seed");
    }
    SpectrumStudy study;
    study.omegas = omegas;
    study.seeds = seeds;
    for (std::size_t s = 0; s <= base.steps; ++s) {
        study.steps.push_back(s);
    }
    const std::size_t cells = omegas.size() * seeds.size();
    // [cell][snapshot]
    std::vector<std::vector<SpectrumProfile>> per_cell(cells);
    parallel_for(cells, threads, [&](std::size_t cell) {
        const std::size_t o = cell / seeds.size();
        const std::size_t s = cell % seeds.size();
        SamplerConfig config = base;
        config.omega = OmegaControl(omegas[o]);
        config.seed = seeds[s];
        config.snapshot_steps = study.steps;
        const Latent z_init = initial_latent(config, rows, cols, seeds[s]);
        const Trajectory trajectory = run_sampler(denoiser, config, z_init);
        auto& profiles = per_cell[cell];
        profiles.reserve(trajectory.snapshots.size());
        for (const auto& snapshot : trajectory.snapshots) {
            profiles.push_back(radial_spectrum(snapshot.latent, band_split));
        }
    });

    const double inv_seeds = 1.0 / static_cast<double>(seeds.size());
    study.profiles.resize(omegas.size());
    study.low_energy.resize(omegas.size());
    study.high_energy.resize(omegas.size());
    for (std::size_t o = 0; o < omegas.size(); ++o) {
        for (std::size_t snap = 0; snap < study.steps.size(); ++snap) {
            SpectrumProfile averaged = per_cell[o * seeds.size()][snap];
            std::fill(averaged.mean_power.begin(), averaged.mean_power.end(), 0.0);
            for (std::size_t s = 0; s < seeds.size(); ++s) {
                const auto& p = per_cell[o * seeds.size() + s][snap];
                for (std::size_t b = 0; b < averaged.bins(); ++b) {
                    averaged.mean_power[b] += p.mean_power[b] * inv_seeds;
                }
            }
            study.low_energy[o].push_back(band_energy(averaged, Band::kLow));
            study.high_energy[o].push_back(band_energy(averaged, Band::kHigh));
            study.profiles[o].push_back(std::move(averaged));
        }
    }
    return study;
}

}  // namespace omegance
