// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "omegance/error.hpp"
#include "omegance/latent.hpp"

namespace omegance {

/// Noise / velocity predictor consumed by the samplers.
///
/// epsilon_predict takes a latent in the variance-preserving form
/// z = sqrt(alpha_bar) z0 + sqrt(1 - alpha_bar) eps and returns the
/// prediction of eps. velocity_predict takes z = (1 - t) z0 + t eps and
/// returns the prediction of eps - z0. Outputs have the input's shape and
/// depend only on (z, position). Implementations must be safe for
/// concurrent const use.
class Denoiser {
public:
    virtual ~Denoiser() = default;

    virtual bool predicts_epsilon() const { return false; }
    virtual bool predicts_velocity() const { return false; }

    virtual Latent epsilon_predict(const Latent& z, double alpha_bar) const {
        (void)z;
        (void)alpha_bar;
        throw InvalidArgument(name() + " does not provide noise predictions");
    }

    virtual Latent velocity_predict(const Latent& z, double t) const {
        (void)z;
        (void)t;
        throw InvalidArgument(name() + " does not provide velocity predictions");
    }

    virtual std::string name() const { return "denoiser"; }
};

}  // namespace omegance
