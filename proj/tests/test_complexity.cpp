// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "entflow/complexity.hpp"
#include "entflow/error.hpp"
#include "entflow/models.hpp"

#include <doctest.h>

#include <cmath>

using namespace entflow;

TEST_CASE("y_qrem closed values") {
    CHECK(y_qrem(0.0, 4) == 0.0);
    // L = 2, b = 1, gamma = 1/2: -(1/5)(ln|1 - 1/2| + ln|1 - 1/5|).
    const double expected = -(std::log(0.5) + std::log(0.8)) / 5.0;
    CHECK(std::abs(y_qrem(1.0, 2) - expected) < 1e-12);
    CHECK(y_qrem(1.0, 2) == doctest::Approx(0.1833).epsilon(1e-3));
    // Monotone in b.
    double prev = 0.0;
    for (double b : {0.1, 0.5, 1.0, 4.0, 32.0}) {
        const double y = y_qrem(b, 8);
        CHECK(y > prev);
        prev = y;
    }
    CHECK_THROWS(y_qrem(-1.0, 4));
}

TEST_CASE("y_generic reproduces y_qrem") {
    for (int L : {2, 3, 4, 6}) {
        for (double b : {0.3, 1.0, 2.5}) {
            const auto cur = qrem_tables(L, b);
            const auto ini = qrem_tables(L, 0.0);
            const double g = y_generic(cur, ini, 0.5);
            CHECK(std::abs(g - y_qrem(b, L)) < 1e-12);
        }
    }
}

TEST_CASE("y_generic normalization and zero-distance failure") {
    const int L = 3;
    const auto cur = qrem_tables(L, 1.0);
    const auto ini = qrem_tables(L, 0.0);
    const double all = y_generic(cur, ini, 0.5, 1, YNormalization::AllEntries);
    const double evo = y_generic(cur, ini, 0.5, 1, YNormalization::EvolvingEntries);
    // N(N+1)/2 = 36 entries, of which L N / 2 = 12 evolve.
    CHECK(evo == doctest::Approx(all * 36.0 / 12.0));

    // gamma = 1 puts v = 1/2 entries exactly at |g - 2 gamma v| = 0.
    CHECK_THROWS_AS(y_generic(qrem_tables(2, 1.0), qrem_tables(2, 0.0), 1.0), NumericalError);
    CHECK(std::isinf(y_qrem(1.0, 2, 1.0)));
}

TEST_CASE("y_rfhm") {
    CHECK(y_rfhm(10.0, 1.0, 10.0, 1.0) == doctest::Approx(0.0));
    CHECK(std::abs(y_rfhm(1.0, 1.0, 10.0, 1.0) - 4.0 * std::log(10.0)) < 1e-12);
    CHECK(std::abs(y_rfhm(2.0, 3.0, 10.0, 1.0, 2.0) - 0.5 * std::log(std::pow(5.0, 4) * 3.0)) < 1e-12);
    CHECK(y_rfhm(1.0, 1.0, 10.0, 1.0) > y_rfhm(2.0, 1.0, 10.0, 1.0));
    CHECK_THROWS(y_rfhm(0.0, 1.0, 10.0, 1.0));
}

TEST_CASE("recipes") {
    CHECK(chi0_recipe_from_string("QREM_mean").c == 1.0);
    CHECK(chi0_recipe_from_string("QREM_var").a == -2.4);
    CHECK(chi0_recipe_from_string("RFHM_both").b == 3.5);
    CHECK_THROWS_AS(chi0_recipe_from_string("bogus"), ConfigError);
    CHECK(default_recipe(Model::RFHM).name == "RFHM_both");
    CHECK(default_recipe(Model::QREM).name == "QREM_mean");
    CHECK(recipe_mismatch(Model::QREM, Chi0Recipe::rfhm_both()).has_value());
    CHECK_FALSE(recipe_mismatch(Model::QREM, Chi0Recipe::qrem_var()).has_value());
}

TEST_CASE("lambda_psi") {
    ComplexityInputs in;
    in.y_minus_y0 = 0.2;
    in.delta_e = 0.5;
    in.omega_e = 0.25;
    in.ipr_paper = 0.01;
    in.N = 64;
    const auto p = lambda_psi(in, Chi0Recipe::qrem_mean());
    const double expected = 0.2 * std::pow(0.5, -1.0) * std::pow(0.25, 2.0) / 0.01;
    CHECK(std::abs(p.lambda - expected) < 1e-12 * expected);
    CHECK(p.n_lambda == doctest::Approx(64 * expected));
    CHECK(p.lambda_e == doctest::Approx(0.2 / 0.25));

    const auto q = lambda_psi(in, Chi0Recipe::custom(0, 0, 0));
    CHECK(q.lambda == doctest::Approx(0.2));

    in.y_minus_y0 = 0.0;
    CHECK(lambda_psi(in, Chi0Recipe::rfhm_both()).lambda == 0.0);

    auto bad = in;
    bad.delta_e = 0.0;
    CHECK_THROWS_AS(lambda_psi(bad, Chi0Recipe::qrem_mean()), ConfigError);
    bad = in;
    bad.omega_e = 1.5;
    CHECK_THROWS_AS(lambda_psi(bad, Chi0Recipe::qrem_mean()), ConfigError);
    bad = in;
    bad.omega_e = 0.5 / 64;
    CHECK_THROWS_AS(lambda_psi(bad, Chi0Recipe::qrem_mean()), ConfigError);
    bad = in;
    bad.y_minus_y0 = -0.1;
    CHECK_THROWS_AS(lambda_psi(bad, Chi0Recipe::qrem_mean()), ConfigError);
}
