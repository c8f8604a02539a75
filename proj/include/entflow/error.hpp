// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>

namespace entflow {

/// Invalid ensemble or run configuration. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed (non-convergence, broken invariant). Exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace entflow
