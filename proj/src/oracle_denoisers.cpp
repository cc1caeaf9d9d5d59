// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "omegance/oracle_denoisers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <utility>

#include "omegance/error.hpp"
#include "omegance/fft.hpp"
#include "omegance/rng.hpp"

namespace omegance {

namespace {

// Per-component location and spread of z_t given the component, plus the
// conditional-expectation slope/intercept mapping z_t to the prediction.
struct ComponentView {
    double location;
    double variance;
    double slope;
    double intercept;
};

template <class ViewFn>
Latent mixture_predict(const GaussianMixture& gm, const Latent& z, ViewFn view) {
    const std::size_t d = gm.dimension();
    const std::size_t k_count = gm.components();
    if (d != 1 && d != z.size()) {
        throw ShapeMismatch("mixture dimension " + std::to_string(d) + " does not match latent size " +
                            std::to_string(z.size()));
    }
    const std::size_t points = d == 1 ? z.size() : 1;
    Latent out(z.rows(), z.cols());
    std::vector<double> log_resp(k_count);
    for (std::size_t p = 0; p < points; ++p) {
        const std::size_t first = d == 1 ? p : 0;
        // Responsibilities in log space with max subtraction.
        double max_log = -std::numeric_limits<double>::infinity();
        if (k_count == 1) {
            // A single component owns every point, even far out in the tails.
            log_resp[0] = 0.0;
            max_log = 0.0;
        }
        for (std::size_t k = 0; k_count > 1 && k < k_count; ++k) {
            const double w = gm.weights()[k];
            if (w <= 0.0) {
                log_resp[k] = -std::numeric_limits<double>::infinity();
                continue;
            }
            double log_p = std::log(w);
            for (std::size_t j = 0; j < d; ++j) {
                const ComponentView c = view(k, j);
                const double diff = z[first + j] - c.location;
                log_p -= 0.5 * (std::log(2.0 * std::numbers::pi * c.variance) + diff * diff / c.variance);
            }
            log_resp[k] = log_p;
            max_log = std::max(max_log, log_p);
        }
        if (!std::isfinite(max_log)) {
            throw DegenerateMixture("mixture responsibilities are undefined at this latent");
        }
        double normaliser = 0.0;
        for (double& lr : log_resp) {
            lr = std::exp(lr - max_log);
            normaliser += lr;
        }
        for (std::size_t j = 0; j < d; ++j) {
            const double zj = z[first + j];
            double acc = 0.0;
            for (std::size_t k = 0; k < k_count; ++k) {
                if (log_resp[k] == 0.0) {
                    continue;
                }
                const ComponentView c = view(k, j);
                acc += (log_resp[k] / normaliser) * (c.slope * (zj - c.location) + c.intercept);
            }
            out[first + j] = acc;
        }
    }
    return out;
}

}  // namespace

GaussianMixture::GaussianMixture(std::vector<double> weights, std::vector<std::vector<double>> means,
                                 std::vector<std::vector<double>> variances)
    : m_weights(std::move(weights)), m_means(std::move(means)), m_variances(std::move(variances)) {
    if (m_weights.empty()) {
        throw InvalidArgument("mixture needs at least one component");
    }
    if (m_means.size() != m_weights.size() || m_variances.size() != m_weights.size()) {
        throw InvalidArgument("mixture weights, means and variances must have the same component count");
    }
    m_dimension = m_means.front().size();
    if (m_dimension == 0) {
        throw InvalidArgument("mixture dimension must be positive");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < m_weights.size(); ++k) {
        const double w = m_weights[k];
        if (!(std::isfinite(w) && w >= 0.0)) {
            throw InvalidArgument("mixture weights must be non-negative");
        }
        total += w;
        if (m_means[k].size() != m_dimension || m_variances[k].size() != m_dimension) {
            throw InvalidArgument("mixture components must share one dimension");
        }
        for (std::size_t j = 0; j < m_dimension; ++j) {
            if (!std::isfinite(m_means[k][j])) {
                throw InvalidArgument("mixture means must be finite");
            }
            if (!(std::isfinite(m_variances[k][j]) && m_variances[k][j] > 0.0)) {
                throw InvalidArgument("mixture variances must be positive");
            }
        }
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw InvalidArgument("mixture weights must sum to 1");
    }
}

GaussianMixture GaussianMixture::scalar(std::vector<double> weights, std::vector<double> means,
                                        std::vector<double> variances) {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    for (double x : means) {
        m.push_back({x});
    }
    for (double x : variances) {
        v.push_back({x});
    }
    return GaussianMixture(std::move(weights), std::move(m), std::move(v));
}

Latent epsilon_oracle(const GaussianMixture& gm, const Latent& z, double alpha_bar) {
    if (!(alpha_bar >= 0.0 && alpha_bar <= 1.0)) {
        throw InvalidArgument("epsilon_oracle: alpha_bar must lie in [0, 1]");
    }
    const double signal = std::sqrt(alpha_bar);
    const double noise_var = 1.0 - alpha_bar;
    const double noise = std::sqrt(noise_var);
    // z_t | k ~ N(sqrt(a) mu, a s2 + 1 - a); E[eps | z_t, k] = sqrt(1-a) (z - sqrt(a) mu) / var.
    return mixture_predict(gm, z, [&](std::size_t k, std::size_t j) {
        const double var = alpha_bar * gm.variances()[k][j] + noise_var;
        return ComponentView{signal * gm.means()[k][j], var, noise / var, 0.0};
    });
}

Latent velocity_oracle(const GaussianMixture& gm, const Latent& z, double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw InvalidArgument("velocity_oracle: t must lie in [0, 1]");
    }
    const double keep = 1.0 - t;
    // z_t | k ~ N((1-t) mu, (1-t)^2 s2 + t^2);
    // E[eps - z0 | z_t, k] = (t - (1-t) s2) / var (z - (1-t) mu) - mu.
    return mixture_predict(gm, z, [&](std::size_t k, std::size_t j) {
        const double s2 = gm.variances()[k][j];
        const double mu = gm.means()[k][j];
        const double var = keep * keep * s2 + t * t;
        return ComponentView{keep * mu, var, (t - keep * s2) / var, -mu};
    });
}

Latent sample_prior(const GaussianMixture& gm, std::uint64_t seed, std::size_t n) {
    if (n == 0) {
        throw InvalidArgument("sample_prior: n must be positive");
    }
    Rng rng(seed, Stream::kPrior);
    const std::size_t d = gm.dimension();
    std::vector<double> cumulative(gm.components());
    std::partial_sum(gm.weights().begin(), gm.weights().end(), cumulative.begin());
    Latent out(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform() * cumulative.back();
        std::size_t k = 0;
        while (k + 1 < cumulative.size() && (u >= cumulative[k] || gm.weights()[k] <= 0.0)) {
            ++k;
        }
        for (std::size_t j = 0; j < d; ++j) {
            out.at(i, j) = gm.means()[k][j] + std::sqrt(gm.variances()[k][j]) * rng.normal();
        }
    }
    return out;
}

Latent MixtureDenoiser::epsilon_predict(const Latent& z, double alpha_bar) const {
    return epsilon_oracle(m_gm, z, alpha_bar);
}

Latent MixtureDenoiser::velocity_predict(const Latent& z, double t) const {
    return velocity_oracle(m_gm, z, t);
}

std::vector<double> GaussianField2D::power() const {
    if (rows == 0 || cols == 0) {
        throw InvalidArgument("Gaussian field dims must be positive");
    }
    if (!std::isfinite(exponent)) {
        throw InvalidArgument("Gaussian field exponent must be finite");
    }
    const std::size_t n = rows * cols;
    if (exponent == 0.0 || n == 1) {
        return std::vector<double>(n, 1.0);
    }
    std::vector<double> p(n, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double ky = signed_frequency(r, rows);
        for (std::size_t c = 0; c < cols; ++c) {
            if (r == 0 && c == 0) {
                continue;
            }
            const double kx = signed_frequency(c, cols);
            const double value = std::pow(std::hypot(ky, kx), exponent);
            p[r * cols + c] = value;
            total += value;
        }
    }
    const double scale = static_cast<double>(n) / total;
    for (double& v : p) {
        v *= scale;
    }
    return p;
}

Latent gaussian_field_2d(const GaussianField2D& spec, std::uint64_t seed) {
    const std::vector<double> power = spec.power();
    Rng rng(seed, Stream::kField);
    Latent white(spec.rows, spec.cols);
    for (std::size_t i = 0; i < white.size(); ++i) {
        white[i] = rng.normal();
    }
    if (spec.exponent == 0.0 || white.size() == 1) {
        return white;
    }
    auto spectrum = fft2d(white);
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        spectrum[i] *= std::sqrt(power[i]);
    }
    return ifft2d_real(spec.rows, spec.cols, spectrum);
}

GaussianFieldDenoiser::GaussianFieldDenoiser(GaussianField2D spec) : m_spec(spec), m_power(spec.power()) {}

Latent GaussianFieldDenoiser::epsilon_predict(const Latent& z, double alpha_bar) const {
    if (z.rows() != m_spec.rows || z.cols() != m_spec.cols) {
        throw ShapeMismatch("field oracle dims do not match the latent");
    }
    if (!(alpha_bar >= 0.0 && alpha_bar < 1.0)) {
        throw InvalidArgument("field oracle: alpha_bar must lie in [0, 1)");
    }
    const double noise_var = 1.0 - alpha_bar;
    const double noise = std::sqrt(noise_var);
    auto spectrum = fft2d(z);
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        spectrum[i] *= noise / (alpha_bar * m_power[i] + noise_var);
    }
    return ifft2d_real(z.rows(), z.cols(), spectrum);
}

Latent GaussianFieldDenoiser::velocity_predict(const Latent& z, double t) const {
    if (z.rows() != m_spec.rows || z.cols() != m_spec.cols) {
        throw ShapeMismatch("field oracle dims do not match the latent");
    }
    if (!(t > 0.0 && t <= 1.0)) {
        throw InvalidArgument("field oracle: t must lie in (0, 1]");
    }
    const double keep = 1.0 - t;
    auto spectrum = fft2d(z);
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        const double p = m_power[i];
        spectrum[i] *= (t - keep * p) / (keep * keep * p + t * t);
    }
    return ifft2d_real(z.rows(), z.cols(), spectrum);
}

}  // namespace omegance
