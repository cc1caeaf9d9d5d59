// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace omegance {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument, precondition violation or malformed input.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Shape or broadcast mismatch between latents / omega fields.
class ShapeMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Raised when a signal-to-noise ratio is requested at a pure-signal
/// position (alpha_bar == 1), where the ratio diverges.
class SignalDivergence : public Error {
public:
    using Error::Error;
};

/// Raised when an omega value drives a denominator to zero.
class DegenerateOmega : public Error {
public:
    using Error::Error;
};

/// Raised when a mixture oracle cannot form responsibilities.
class DegenerateMixture : public Error {
public:
    using Error::Error;
};

/// A sampler produced a non-finite value; carries the offending step.
class NumericAbort : public Error {
public:
    NumericAbort(std::size_t step, const std::string& what)
        : Error(what + " (step " + std::to_string(step) + ")"), m_step(step) {}

    std::size_t step() const noexcept { return m_step; }

private:
    std::size_t m_step;
};

/// Experiment configuration failed validation.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace omegance
