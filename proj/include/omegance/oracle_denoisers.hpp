// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "omegance/denoiser.hpp"
#include "omegance/latent.hpp"

namespace omegance {

/// Mixture of diagonal Gaussians in d dimensions.
///
/// Weights are non-negative and sum to 1 within 1e-12; zero-weight
/// components are allowed and never sampled.
class GaussianMixture {
public:
    GaussianMixture(std::vector<double> weights, std::vector<std::vector<double>> means,
                    std::vector<std::vector<double>> variances);

    /// One-dimensional mixture: one scalar mean / variance per component.
    static GaussianMixture scalar(std::vector<double> weights, std::vector<double> means,
                                  std::vector<double> variances);
    static GaussianMixture standard_normal() { return scalar({1.0}, {0.0}, {1.0}); }

    std::size_t components() const noexcept { return m_weights.size(); }
    std::size_t dimension() const noexcept { return m_dimension; }
    const std::vector<double>& weights() const noexcept { return m_weights; }
    const std::vector<std::vector<double>>& means() const noexcept { return m_means; }
    const std::vector<std::vector<double>>& variances() const noexcept { return m_variances; }

private:
    std::vector<double> m_weights;
    std::vector<std::vector<double>> m_means;
    std::vector<std::vector<double>> m_variances;
    std::size_t m_dimension = 0;
};

/// Exact E[eps | z_t = z] for z_t = sqrt(a) z0 + sqrt(1 - a) eps, z0 ~ gm.
///
/// With d == 1 every latent element is treated as an independent draw
/// (pixelwise prior); otherwise the latent size must equal d.
Latent epsilon_oracle(const GaussianMixture& gm, const Latent& z, double alpha_bar);

/// Exact E[eps - z0 | z_t = z] for z_t = (1 - t) z0 + t eps, z0 ~ gm.
/// Same dimension rules as epsilon_oracle.
Latent velocity_oracle(const GaussianMixture& gm, const Latent& z, double t);

/// n i.i.d. draws, returned as an n x d latent. Uses the prior stream.
Latent sample_prior(const GaussianMixture& gm, std::uint64_t seed, std::size_t n);

/// Bayes-optimal denoiser for a mixture prior.
class MixtureDenoiser final : public Denoiser {
public:
    explicit MixtureDenoiser(GaussianMixture gm) : m_gm(std::move(gm)) {}

    bool predicts_epsilon() const override { return true; }
    bool predicts_velocity() const override { return true; }
    Latent epsilon_predict(const Latent& z, double alpha_bar) const override;
    Latent velocity_predict(const Latent& z, double t) const override;
    std::string name() const override { return "mixture oracle"; }

    const GaussianMixture& mixture() const noexcept { return m_gm; }
    /// Output cell depends only on the same input cell.
    bool pixelwise() const noexcept { return m_gm.dimension() == 1; }

private:
    GaussianMixture m_gm;
};

/// Stationary zero-mean Gaussian random field on a rows x cols torus whose
/// spectral power follows |k|^exponent. Exponent 0 is white noise.
struct GaussianField2D {
    std::size_t rows = 64;
    std::size_t cols = 64;
    double exponent = 0.0;

    /// Expected |F_k|^2 / N per frequency, normalised to unit mean (unit
    /// field variance). For exponent != 0 the DC entry is 0.
    std::vector<double> power() const;
};

Latent gaussian_field_2d(const GaussianField2D& spec, std::uint64_t seed);

/// Bayes-optimal denoiser for a GaussianField2D prior; diagonal in the
/// Fourier domain, so not pixelwise unless the exponent is 0.
class GaussianFieldDenoiser final : public Denoiser {
public:
    explicit GaussianFieldDenoiser(GaussianField2D spec);

    bool predicts_epsilon() const override { return true; }
    bool predicts_velocity() const override { return true; }
    Latent epsilon_predict(const Latent& z, double alpha_bar) const override;
    Latent velocity_predict(const Latent& z, double t) const override;
    std::string name() const override { return "gaussian field oracle"; }

private:
    GaussianField2D m_spec;
    std::vector<double> m_power;
};

}  // namespace omegance
