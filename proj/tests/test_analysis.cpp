// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "omegance/analysis.hpp"
#include "omegance/error.hpp"
#include "omegance/oracle_denoisers.hpp"
#include "support.hpp"

using namespace omegance;
using omegance::test::max_rel_err;
using omegance::test::random_latent;
using omegance::test::rel_err;

namespace {

const AlphaBarSchedule& linear() {
    static const AlphaBarSchedule schedule = alpha_bar_from_betas(make_linear_beta());
    return schedule;
}

// Hand-derived coefficients of one omega step from the forward form at t.
CoefficientState expected_step(double a_t, double a_prev, double omega) {
    const double b = (std::sqrt(a_prev) * std::sqrt(1.0 - a_t) * (1.0 - omega) +
                      std::sqrt(a_t) * std::sqrt(1.0 - a_prev) * omega) /
                     std::sqrt(a_t);
    return {std::sqrt(a_prev), b};
}

SamplerConfig ddim_config(std::size_t steps, double omega) {
    SamplerConfig c;
    c.kind = SamplerKind::kDdim;
    c.schedule = linear();
    c.steps = steps;
    c.omega = OmegaControl(omega);
    for (std::size_t s = 0; s <= steps; ++s) {
        c.snapshot_steps.push_back(s);
    }
    return c;
}

SamplerConfig flow_config(std::size_t steps, double omega) {
    SamplerConfig c = ddim_config(steps, omega);
    c.kind = SamplerKind::kFlow;
    c.schedule = flow_timesteps(steps);
    return c;
}

// O(N^2) DFT used as an independent reference.
std::vector<std::complex<double>> naive_dft(const Latent& z) {
    const std::size_t R = z.rows();
    const std::size_t C = z.cols();
    std::vector<std::complex<double>> out(R * C);
    for (std::size_t u = 0; u < R; ++u) {
        for (std::size_t v = 0; v < C; ++v) {
            std::complex<double> acc = 0.0;
            for (std::size_t r = 0; r < R; ++r) {
                for (std::size_t c = 0; c < C; ++c) {
                    const double phase =
                        -2.0 * std::numbers::pi * (static_cast<double>(u * r) / R + static_cast<double>(v * c) / C);
                    acc += z.at(r, c) * std::polar(1.0, phase);
                }
            }
            out[u * C + v] = acc;
        }
    }
    return out;
}

double energy(const Latent& z) {
    double e = 0.0;
    for (double x : z.values()) {
        e += x * x;
    }
    return e;
}

}  // namespace

TEST_CASE("omega one re-lands on the forward form") {
    const auto states = propagate_coefficients_ddim(linear(), 1.0, 1000, 1000);
    REQUIRE(states.size() == 1001);
    for (std::size_t k = 1; k < states.size(); ++k) {
        const double a_prev = linear()[1000 - k];
        CHECK(states[k].a == doctest::Approx(std::sqrt(a_prev)).epsilon(1e-14));
        CHECK(std::abs(states[k].b - std::sqrt(1.0 - a_prev)) <= 1e-14);
    }
    CHECK(states.back().b == 0.0);
}

TEST_CASE("start state is essentially pure noise") {
    const auto states = propagate_coefficients_ddim(linear(), 0.9, 1000, 3);
    CHECK(states.front().a == doctest::Approx(std::sqrt(linear()[1000])));
    CHECK(std::abs(states.front().a) < 7e-3);
    CHECK(states.front().b == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("coefficients at t = 500 with omega 0.9") {
    const double a_t = linear()[500];
    const double a_prev = linear()[499];
    const auto states = propagate_coefficients_ddim(linear(), 0.9, 500, 1);
    const CoefficientState expected = expected_step(a_t, a_prev, 0.9);
    CHECK(rel_err(expected.a, states[1].a) <= 1e-12);
    CHECK(rel_err(expected.b, states[1].b) <= 1e-12);
    const double ratio = states[1].a * states[1].a / (states[1].b * states[1].b);
    CHECK(rel_err(modified_snr_ddim(linear(), 500, 0.9), ratio) <= 1e-9);
    CHECK(states[1].b > 0.0);
    CHECK(states[1].a > 0.0);
    CHECK(states[1].a <= 1.0);
}

TEST_CASE("propagated ratio matches the modified SNR over the sweep") {
    for (double omega : {0.8, 0.9, 1.0, 1.1, 1.2}) {
        const auto states = propagate_coefficients_ddim(linear(), omega, 1000, 1000);
        for (std::size_t t = 1000; t >= 2; --t) {
            const auto& s = states[1000 - t + 1];
            const double ratio = s.a * s.a / (s.b * s.b);
            CHECK(rel_err(modified_snr_ddim(linear(), t, omega), ratio) <= 1e-9);
        }
    }
}

TEST_CASE("chained mode carries coefficients forward") {
    const auto ts = ddim_timesteps(1000, 20);
    const double omega = 1.1;
    const auto chained = propagate_coefficients_ddim(linear(), omega, ts, CoefficientMode::kChained);
    double a = std::sqrt(linear()[ts[0]]);
    double b = std::sqrt(1.0 - linear()[ts[0]]);
    for (std::size_t k = 1; k < ts.size(); ++k) {
        const double a_t = linear()[ts[k - 1]];
        const double a_prev = linear()[ts[k]];
        const double delta = std::sqrt(a_prev) / std::sqrt(a_t);
        const double zeta = std::sqrt(1.0 - a_prev) - delta * std::sqrt(1.0 - a_t);
        a *= delta;
        b = delta * b + omega * zeta;
        CHECK(rel_err(a, chained[k].a) <= 1e-12);
        CHECK(std::abs(b - chained[k].b) <= 1e-12);
    }
    // With omega = 1 the chain never leaves the forward form.
    const auto exact = propagate_coefficients_ddim(linear(), 1.0, ts, CoefficientMode::kChained);
    for (std::size_t k = 0; k < ts.size(); ++k) {
        CHECK(std::abs(exact[k].b - std::sqrt(1.0 - linear()[ts[k]])) <= 1e-12);
    }
}

TEST_CASE("propagation input errors") {
    CHECK_THROWS_AS(propagate_coefficients_ddim(linear(), 0.9, 10, 11), InvalidArgument);
    CHECK_THROWS_AS(propagate_coefficients_ddim(linear(), 0.9, 1001, 1), InvalidArgument);
    CHECK_THROWS_AS(propagate_coefficients_ddim(linear(), 0.0, 10, 1), InvalidArgument);
    CHECK_THROWS_AS(propagate_coefficients_ddim(linear(), 0.9, std::vector<std::size_t>{5, 5}), InvalidArgument);
    CHECK_THROWS_AS(propagate_coefficients_ddim(linear(), 0.9, std::vector<std::size_t>{}), InvalidArgument);
    CHECK(propagate_coefficients_ddim(linear(), 0.9, 10, 10).size() == 11);
}

TEST_CASE("snr trajectories") {
    const auto unit = snr_trajectory(linear(), 1.0, SnrMode::kAnalytic);
    REQUIRE(unit.points.size() == 1000);
    CHECK(unit.points.front().t == 999);
    CHECK(unit.points.back().t == 0);
    CHECK(std::isinf(unit.points.back().snr));
    for (const auto& p : unit.points) {
        if (p.t >= 1) {
            CHECK(rel_err(snr(linear(), p.t), p.snr) <= 1e-12);
        }
    }

    const auto analytic = snr_trajectory(linear(), 1.1, SnrMode::kAnalytic);
    const auto propagated = snr_trajectory(linear(), 1.1, SnrMode::kPropagated);
    REQUIRE(analytic.points.size() == propagated.points.size());
    CHECK(propagated.mode == SnrMode::kPropagated);
    for (std::size_t k = 0; k < analytic.points.size(); ++k) {
        CHECK(analytic.points[k].t == propagated.points[k].t);
        CHECK(rel_err(analytic.points[k].snr, propagated.points[k].snr) <= 1e-9);
        CHECK(analytic.points[k].snr > 0.0);
    }

    const auto lower = snr_trajectory(linear(), 0.9, SnrMode::kAnalytic);
    for (std::size_t k = 0; k < lower.points.size(); ++k) {
        CHECK(lower.points[k].snr < unit.points[k].snr);
    }
    const auto lower_propagated = snr_trajectory(linear(), 0.9, SnrMode::kPropagated);
    CHECK(std::isfinite(lower_propagated.points.back().snr));
    CHECK(std::isinf(snr_trajectory(linear(), 1.0, SnrMode::kPropagated).points.back().snr));
}

TEST_CASE("closed-form ddim multipliers by hand") {
    const AlphaBarSchedule hand({1.0, 0.6, 0.5});
    const auto c = closed_form_scalar_trajectory_ddim(hand, {2, 1}, 1.0);
    REQUIRE(c.size() == 1);
    const double expected = std::sqrt(0.6) * 0.5 / std::sqrt(0.5) + std::sqrt(0.4) * std::sqrt(0.5);
    CHECK(c[0].mean == doctest::Approx(expected).epsilon(1e-15));
    CHECK(c[0].mean == doctest::Approx(std::sqrt(0.6 * 0.5) + std::sqrt(0.4 * 0.5)).epsilon(1e-15));
    CHECK(c[0].fluctuation == c[0].mean);

    // A vanishing step is a no-op up to its size.
    const AlphaBarSchedule tiny({1.0, 0.5 + 1e-13, 0.5});
    const auto one = closed_form_scalar_trajectory_ddim(tiny, {2, 1}, 1.0);
    CHECK(std::abs(one[0].mean - 1.0) <= 1e-12);
}

TEST_CASE("closed-form trajectories match the samplers") {
    const MixtureDenoiser standard(GaussianMixture::standard_normal());
    for (double omega : {0.9, 1.0, 1.1}) {
        for (std::size_t steps : {10u, 50u, 200u}) {
            const SamplerConfig ddim = ddim_config(steps, omega);
            const Latent z = initial_latent(ddim, 8, 8, 11);
            const Trajectory out = run_sampler(standard, ddim, z);
            const auto c = closed_form_scalar_trajectory(ddim.schedule, steps, omega);
            REQUIRE(out.snapshots.size() == steps + 1);
            for (const auto& snap : out.snapshots) {
                CHECK(max_rel_err(apply_scalar_trajectory(z, c, snap.step), snap.latent) <= 1e-10);
            }

            const SamplerConfig flow = flow_config(steps, omega);
            const Latent zf = initial_latent(flow, 8, 8, 12);
            const Trajectory fout = run_sampler(standard, flow, zf);
            const auto fc = closed_form_scalar_trajectory(flow.schedule, steps, omega);
            for (const auto& snap : fout.snapshots) {
                const Latent expected = apply_scalar_trajectory(zf, fc, snap.step);
                double scale = 0.0;
                double worst = 0.0;
                for (std::size_t i = 0; i < expected.size(); ++i) {
                    scale = std::max(scale, std::abs(expected[i]));
                    worst = std::max(worst, std::abs(expected[i] - snap.latent[i]));
                }
                CHECK(worst <= 1e-10 * scale);
            }
        }
    }
    CHECK_THROWS_AS(closed_form_scalar_trajectory(karras_sigmas(10), 10, 1.0), InvalidArgument);
    CHECK_THROWS_AS(closed_form_scalar_trajectory(flow_timesteps(10), 20, 1.0), InvalidArgument);
}

TEST_CASE("flow closed form keeps the mean on the omega one path") {
    const auto times = flow_timesteps(25);
    const auto a = closed_form_scalar_trajectory_flow(times, 0.8);
    const auto b = closed_form_scalar_trajectory_flow(times, 1.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].mean == b[i].mean);
        CHECK(b[i].mean == b[i].fluctuation);
    }
}

TEST_CASE("radial spectrum of simple images") {
    const Latent flat(16, 16, 2.5);
    const auto p = radial_spectrum(flat);
    CHECK(p.mean_power[0] == doctest::Approx(2.5 * 2.5 * 256));
    for (std::size_t b = 1; b < p.bins(); ++b) {
        CHECK(std::abs(p.mean_power[b]) <= 1e-20);
    }
    CHECK(band_energy(p, Band::kHigh) <= 1e-20);
    CHECK(p.band_split == doctest::Approx(4.0));

    Latent wave(32, 32);
    for (std::size_t r = 0; r < 32; ++r) {
        for (std::size_t c = 0; c < 32; ++c) {
            wave.at(r, c) = std::sin(2.0 * std::numbers::pi * 5.0 * c / 32.0);
        }
    }
    const auto w = radial_spectrum(wave);
    std::size_t best = 0;
    for (std::size_t b = 1; b < w.bins(); ++b) {
        if (w.mean_power[b] > w.mean_power[best]) {
            best = b;
        }
    }
    CHECK(best == 5);
    double elsewhere = 0.0;
    for (std::size_t b = 0; b < w.bins(); ++b) {
        if (b != 5) {
            elsewhere += w.mean_power[b] * w.counts[b];
        }
    }
    CHECK(elsewhere <= 1e-18 * w.total_power());
}

TEST_CASE("white noise has a flat radial profile") {
    std::vector<double> avg;
    const std::size_t seeds = 100;
    for (std::size_t s = 0; s < seeds; ++s) {
        const auto p = radial_spectrum(random_latent(32, 32, 1000 + s));
        if (avg.empty()) {
            avg.assign(p.bins(), 0.0);
        }
        for (std::size_t b = 0; b < p.bins(); ++b) {
            avg[b] += p.mean_power[b] / seeds;
        }
    }
    // Bins fully inside the Nyquist circle; bin 0 holds only DC.
    for (std::size_t b = 1; b <= 16; ++b) {
        CHECK(std::abs(avg[b] - 1.0) <= 0.1);
    }
}

TEST_CASE("parseval and band partition") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Latent z = random_latent(12, 10, seed, 3.0);
        const auto p = radial_spectrum(z);
        const auto ref = naive_dft(z);
        double ref_total = 0.0;
        for (const auto& f : ref) {
            ref_total += std::norm(f) / static_cast<double>(z.size());
        }
        CHECK(rel_err(ref_total, p.total_power()) <= 1e-9);
        CHECK(rel_err(energy(z), p.total_power()) <= 1e-9);
        const double low = band_energy(p, Band::kLow);
        const double high = band_energy(p, Band::kHigh);
        CHECK(low >= 0.0);
        CHECK(high >= 0.0);
        CHECK(rel_err(p.total_power(), low + high) <= 1e-12);
    }
    const auto custom = radial_spectrum(random_latent(16, 16, 4), 2.0);
    CHECK(custom.band_split == 2.0);
}

TEST_CASE("radial spectrum rejects small or 1-D input") {
    CHECK_THROWS_AS(radial_spectrum(Latent::vector({1, 2, 3, 4, 5})), InvalidArgument);
    CHECK_THROWS_AS(radial_spectrum(Latent(3, 8)), InvalidArgument);
    CHECK_NOTHROW(radial_spectrum(Latent(4, 4)));
}

TEST_CASE("small spectrum study shows omega ordering") {
    const MixtureDenoiser standard(GaussianMixture::standard_normal());
    SamplerConfig base = ddim_config(20, 1.0);
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 20; ++s) {
        seeds.push_back(s);
    }
    const auto study = spectrum_study(standard, base, {0.95, 1.0, 1.05}, seeds, 32, 32, 2);
    REQUIRE(study.steps.size() == 21);
    REQUIRE(study.high_energy.size() == 3);
    CHECK(study.high_band_ordered(study.steps.size() - 1));
    CHECK(study.high_band_decays(1));
    for (std::size_t o = 0; o < 3; ++o) {
        // Shared initial noise across the sweep.
        CHECK(study.high_energy[o][0] == study.high_energy[0][0]);
    }
    CHECK_THROWS_AS(spectrum_study(standard, base, {}, seeds, 32, 32), InvalidArgument);
}
