// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file complexity.hpp
 * @brief Ensemble complexity parameter Y - Y0 and its rescaled form Lambda.
 *
 * Lambda = (Y - Y0) * Delta_e^a * Omega_e^b / <I2>^c, where the exponents
 * are empirical and selectable per ensemble.
 */

#pragma once

#include "entflow/models.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace entflow {

/// Normalization count M of the generic Y formula.
enum class YNormalization {
    AllEntries,       ///< M = beta * N (N + 1) / 2, every independent entry
    EvolvingEntries,  ///< M = number of entries that differ from the initial tables
};

/// Generic Y - Y0 from current and initial mean/variance tables.
/// Throws NumericalError on |g - 2 gamma v| = 0 and on a zero mean
/// participating in the logarithm.
double y_generic(const ParameterTables& current, const ParameterTables& initial, double gamma,
                 int dyson_beta = 1, YNormalization norm = YNormalization::AllEntries);

/// QREM, initial condition b = 0.
double y_qrem(double b, int L, double gamma = 0.5);

/// RFHM, large-L form (1/gamma) ln(h0^4 D / (h^4 D0)).
double y_rfhm(double h, double D, double h0, double D0, double gamma = 1.0);

struct Chi0Recipe {
    std::string name = "custom";
    double a = 0.0;  ///< exponent of Delta_e
    double b = 0.0;  ///< exponent of Omega_e
    double c = 0.0;  ///< exponent of 1 / <I2>

    static Chi0Recipe qrem_mean() { return {"QREM_mean", -1.0, 2.0, 1.0}; }
    static Chi0Recipe qrem_var() { return {"QREM_var", -2.4, 2.0, 0.0}; }
    static Chi0Recipe rfhm_both() { return {"RFHM_both", 1.1, 3.5, 0.0}; }
    static Chi0Recipe custom(double a, double b, double c) { return {"custom", a, b, c}; }
};

/// Accepts QREM_mean, QREM_var, RFHM_both.
Chi0Recipe chi0_recipe_from_string(std::string_view s);

/// Default recipe of each model.
Chi0Recipe default_recipe(Model m);

/// Non-empty when the recipe was tuned on a different model.
std::optional<std::string> recipe_mismatch(Model m, const Chi0Recipe& recipe);

struct ComplexityInputs {
    double y_minus_y0 = 0.0;
    double delta_e = 0.0;
    double omega_e = 1.0;
    double ipr_paper = 1.0;
    std::size_t N = 1;
};

struct ComplexityPoint {
    double y_minus_y0 = 0.0;
    double delta_e = 0.0;
    double omega_e = 0.0;
    double ipr_paper = 0.0;
    Chi0Recipe recipe;
    double lambda = 0.0;
    double n_lambda = 0.0;
    double lambda_e = 0.0;  ///< (Y - Y0) / Delta_e^2, kappa = 1
};

/// Throws ConfigError when delta_e <= 0, omega_e is outside [1/N, 1] or
/// y_minus_y0 < 0.
ComplexityPoint lambda_psi(const ComplexityInputs& in, const Chi0Recipe& recipe);

}  // namespace entflow
