// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "entflow/complexity.hpp"

#include "entflow/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace entflow {

namespace {

std::string pos(Eigen::Index i, Eigen::Index j) {
    return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

}  // namespace

double y_generic(const ParameterTables& current, const ParameterTables& initial, double gamma, int dyson_beta,
                 YNormalization norm) {
    if (!(gamma > 0.0)) throw ConfigError("y_generic: gamma must be positive");
    if (dyson_beta != 1 && dyson_beta != 2) throw ConfigError("y_generic: Dyson index must be 1 or 2");
    const Eigen::Index N = current.variance.rows();
    if (current.variance.cols() != N || current.mean.rows() != N || current.mean.cols() != N ||
        initial.variance.rows() != N || initial.variance.cols() != N || initial.mean.rows() != N ||
        initial.mean.cols() != N)
        throw ConfigError("y_generic: table shapes differ");

    // Each of the beta components carries the same tables.
    double sum = 0.0;
    std::size_t evolving = 0;
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = i; j < N; ++j) {
            const double g = i == j ? 2.0 : 1.0;
            const double v = current.variance(i, j), v0 = initial.variance(i, j);
            const double m = current.mean(i, j), m0 = initial.mean(i, j);
            bool moved = false;
            if (v != v0) {
                const double a = std::abs(g - 2.0 * gamma * v), a0 = std::abs(g - 2.0 * gamma * v0);
                if (a == 0.0 || a0 == 0.0)
                    throw NumericalError("y_generic: |g - 2 gamma v| = 0 at " + pos(i, j) + " (ergodic fixed point)");
                sum += std::log(a) - std::log(a0);
                moved = true;
            }
            if (m != m0) {
                if (m == 0.0 || m0 == 0.0) throw NumericalError("y_generic: zero mean in ln|b|^2 at " + pos(i, j));
                sum += 2.0 * (std::log(std::abs(m)) - std::log(std::abs(m0)));
                moved = true;
            }
            if (moved) ++evolving;
        }
    }
    if (evolving == 0) return 0.0;
    const double entries = norm == YNormalization::AllEntries
                               ? static_cast<double>(N) * static_cast<double>(N + 1) / 2.0
                               : static_cast<double>(evolving);
    const double M = static_cast<double>(dyson_beta) * entries;
    return -static_cast<double>(dyson_beta) * sum / (2.0 * M * gamma);
}

double y_qrem(double b, int L, double gamma) {
    if (!(b >= 0.0)) throw ConfigError("y_qrem: b must be >= 0");
    if (!(gamma > 0.0)) throw ConfigError("y_qrem: gamma must be positive");
    if (L < 1 || L > 62) throw ConfigError("y_qrem: L out of range");
    if (b == 0.0) return 0.0;
    const double N = std::ldexp(1.0, L);
    double s = 0.0;
    for (int r = 0; r < L; ++r) {
        const double x = std::ldexp(1.0, r) / b;
        const double term = std::abs(1.0 - 2.0 * gamma / (1.0 + x * x));
        if (term == 0.0) return std::numeric_limits<double>::infinity();
        s += std::log(term);
    }
    return -s / (2.0 * (N + 1.0) * gamma);
}

double y_rfhm(double h, double D, double h0, double D0, double gamma) {
    if (!(h > 0.0 && D > 0.0 && h0 > 0.0 && D0 > 0.0)) throw ConfigError("y_rfhm: h, D, h0, D0 must be positive");
    if (!(gamma > 0.0)) throw ConfigError("y_rfhm: gamma must be positive");
    return (4.0 * std::log(h0 / h) + std::log(D / D0)) / gamma;
}

Chi0Recipe chi0_recipe_from_string(std::string_view s) {
    if (s == "QREM_mean") return Chi0Recipe::qrem_mean();
    if (s == "QREM_var") return Chi0Recipe::qrem_var();
    if (s == "RFHM_both") return Chi0Recipe::rfhm_both();
    throw ConfigError("unknown chi0 recipe '" + std::string(s) + "'");
}

Chi0Recipe default_recipe(Model m) {
    return m == Model::RFHM ? Chi0Recipe::rfhm_both() : Chi0Recipe::qrem_mean();
}

std::optional<std::string> recipe_mismatch(Model m, const Chi0Recipe& recipe) {
    const bool qrem_recipe = recipe.name == "QREM_mean" || recipe.name == "QREM_var";
    if (m == Model::RFHM && qrem_recipe) return "recipe " + recipe.name + " was tuned on QREM";
    if (m == Model::QREM && recipe.name == "RFHM_both") return "recipe RFHM_both was tuned on RFHM";
    return std::nullopt;
}

ComplexityPoint lambda_psi(const ComplexityInputs& in, const Chi0Recipe& recipe) {
    if (!(in.delta_e > 0.0)) throw ConfigError("lambda_psi: delta_e must be positive");
    if (in.N == 0) throw ConfigError("lambda_psi: N must be positive");
    const double lo = 1.0 / static_cast<double>(in.N);
    // Relative slack for a clamped value round-tripped through text.
    if (!(in.omega_e >= lo * (1.0 - 1e-12) && in.omega_e <= 1.0 + 1e-12))
        throw ConfigError("lambda_psi: omega_e outside [1/N, 1]");
    if (!(in.y_minus_y0 >= 0.0)) throw ConfigError("lambda_psi: Y - Y0 must be >= 0");
    if (recipe.c != 0.0 && !(in.ipr_paper > 0.0)) throw ConfigError("lambda_psi: IPR must be positive");

    ComplexityPoint p;
    p.y_minus_y0 = in.y_minus_y0;
    p.delta_e = in.delta_e;
    p.omega_e = in.omega_e;
    p.ipr_paper = in.ipr_paper;
    p.recipe = recipe;
    p.lambda = in.y_minus_y0 * std::pow(in.delta_e, recipe.a) * std::pow(in.omega_e, recipe.b);
    if (recipe.c != 0.0) p.lambda /= std::pow(in.ipr_paper, recipe.c);
    p.n_lambda = static_cast<double>(in.N) * p.lambda;
    p.lambda_e = in.y_minus_y0 / (in.delta_e * in.delta_e);
    return p;
}

}  // namespace entflow
