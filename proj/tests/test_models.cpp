// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "entflow/error.hpp"
#include "entflow/models.hpp"
#include "entflow/rng.hpp"

#include <doctest.h>

#include <bit>
#include <cmath>
#include <memory>
#include <set>

using namespace entflow;

namespace {

EnsembleSpec qrem(int L, double b, std::uint64_t seed = 7) {
    ModelParams p;
    p.b = b;
    return build_spec(Model::QREM, L, p, 0.5, seed);
}

EnsembleSpec rfhm(int L, double h, double D = 1.0, Boundary bc = Boundary::Periodic, std::uint64_t seed = 7) {
    ModelParams p;
    p.h = h;
    p.D = D;
    p.J = 1.0;
    p.boundary = bc;
    return build_spec(Model::RFHM, L, p, 1.0, seed);
}

bool exactly_symmetric(const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (m(i, j) != m(j, i)) return false;
    return true;
}

}  // namespace

TEST_CASE("build_spec computes N and validates ranges") {
    CHECK(qrem(2, 1.0).N == 4);
    CHECK(rfhm(4, 1.0).N == 6);
    CHECK(rfhm(14, 1.0).N == 3432);
    CHECK(rfhm_sector_dimension(12) == 924);

    ModelParams p;
    p.h = 1.0;
    CHECK_THROWS_AS(build_spec(Model::RFHM, 5, p, 1.0, 0), ConfigError);
    p.h = -1.0;
    CHECK_THROWS_AS(build_spec(Model::RFHM, 4, p, 1.0, 0), ConfigError);
    ModelParams q;
    q.b = -0.1;
    CHECK_THROWS_AS(build_spec(Model::QREM, 4, q, 0.5, 0), ConfigError);
    q.b = 1.0;
    CHECK_THROWS_AS(build_spec(Model::QREM, 4, q, -0.5, 0), ConfigError);
    CHECK_THROWS_AS(build_spec(Model::QREM, 1, q, 0.5, 0), ConfigError);
}

TEST_CASE("qrem_offdiag_variance") {
    CHECK(qrem_offdiag_variance(0, 1, 1.0) == doctest::Approx(0.5));
    CHECK(qrem_offdiag_variance(0, 8, 0.0) == 0.0);
    CHECK(qrem_offdiag_variance(0, 8, 1e12) == doctest::Approx(1.0));
    CHECK(qrem_offdiag_variance(0, 8, INFINITY) == 1.0);
    CHECK(qrem_offdiag_variance(4, 6, 2.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(qrem_offdiag_variance(0, 3, 1.0), std::invalid_argument);
}

TEST_CASE("BasisMap full and sector") {
    const BasisMap f = BasisMap::full(3);
    CHECK(f.size() == 8);
    CHECK(f.label(1) == "001");
    CHECK(f.label(4) == "100");
    CHECK_FALSE(f.sector().has_value());

    const BasisMap s = BasisMap::sector(4, 2);
    CHECK(s.size() == 6);
    CHECK(*s.sector() == 0);
    std::set<std::string> labels;
    for (std::size_t i = 0; i < s.size(); ++i) {
        labels.insert(s.label(i));
        CHECK(std::popcount(s.config(i)) == 2);
        CHECK(*s.index_of(s.config(i)) == i);
    }
    CHECK(labels.size() == 6);
    CHECK_FALSE(s.index_of(0b0111).has_value());
}

TEST_CASE("QREM sample: structure, symmetry and determinism") {
    SUBCASE("b = 0 is diagonal") {
        const auto s = sample_qrem(qrem(2, 0.0), 0);
        CHECK(s.matrix.rows() == 4);
        const Eigen::MatrixXd off = s.matrix - Eigen::MatrixXd(s.matrix.diagonal().asDiagonal());
        CHECK(off.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("L = 10: exactly L nonzero off-diagonals per row on the hypercube") {
        const auto s = sample_qrem(qrem(10, 3.0), 4);
        CHECK(exactly_symmetric(s.matrix));
        for (Eigen::Index i = 0; i < s.matrix.rows(); ++i) {
            int nz = 0;
            for (Eigen::Index j = 0; j < s.matrix.cols(); ++j) {
                if (i == j || s.matrix(i, j) == 0.0) continue;
                CHECK(std::popcount(static_cast<std::uint32_t>(i ^ j)) == 1);
                ++nz;
            }
            CHECK(nz == 10);
        }
        CHECK(s.couplings.size() == 1024 * 10 / 2);
    }
    SUBCASE("identical (spec, index) give bitwise identical matrices") {
        const auto a = sample_qrem(qrem(6, 2.0, 99), 3);
        const auto b = sample_qrem(qrem(6, 2.0, 99), 3);
        const auto c = sample_qrem(qrem(6, 2.0, 99), 4);
        CHECK(a.matrix == b.matrix);
        CHECK(a.seed_used == b.seed_used);
        CHECK(a.matrix != c.matrix);
    }
}

TEST_CASE("QREM element moments converge to the tables") {
    // Diagonal variance L/2 and off-diagonal variance v(b) within 3 sigma.
    const int L = 3;
    const double b = 2.0;
    const auto spec = qrem(L, b, 11);
    const int M = 20000;
    double d_sum = 0, d_sq = 0, o_sq_1 = 0, o_sq_4 = 0;
    for (int r = 0; r < M; ++r) {
        const auto s = sample_qrem(spec, static_cast<std::size_t>(r));
        d_sum += s.matrix(5, 5);
        d_sq += s.matrix(5, 5) * s.matrix(5, 5);
        o_sq_1 += s.matrix(0, 1) * s.matrix(0, 1);
        o_sq_4 += s.matrix(0, 4) * s.matrix(0, 4);
    }
    const double var_d = d_sq / M - (d_sum / M) * (d_sum / M);
    // Var of a sample variance ~ 2 sigma^4 / M.
    CHECK(std::abs(var_d - 1.5) < 3 * std::sqrt(2.0 / M) * 1.5);
    CHECK(std::abs(d_sum / M) < 3 * std::sqrt(1.5 / M));
    const double v1 = qrem_offdiag_variance(0, 1, b), v4 = qrem_offdiag_variance(0, 4, b);
    CHECK(std::abs(o_sq_1 / M - v1) < 3 * std::sqrt(2.0 / M) * v1);
    CHECK(std::abs(o_sq_4 / M - v4) < 3 * std::sqrt(2.0 / M) * v4);
}

TEST_CASE("generic sampler: degenerate tables and QREM tables") {
    SUBCASE("all variances zero returns the mean table") {
        auto t = std::make_shared<ParameterTables>();
        t->mean = Eigen::MatrixXd::Zero(4, 4);
        t->mean << 1, 2, 0, 0, 2, 3, 0, 0, 0, 0, 4, 5, 0, 0, 5, 6;
        t->variance = Eigen::MatrixXd::Zero(4, 4);
        ModelParams p;
        p.tables = t;
        const auto spec = build_spec(Model::GenericGaussian, 2, p, 0.5, 1);
        CHECK(sample_generic(spec, 0).matrix == t->mean);
    }
    SUBCASE("asymmetric or negative tables are rejected") {
        auto t = std::make_shared<ParameterTables>();
        t->mean = Eigen::MatrixXd::Zero(4, 4);
        t->variance = Eigen::MatrixXd::Ones(4, 4);
        t->variance(0, 1) = 2.0;
        ModelParams p;
        p.tables = t;
        CHECK_THROWS_AS(build_spec(Model::GenericGaussian, 2, p, 0.5, 1), ConfigError);
        t->variance = -Eigen::MatrixXd::Ones(4, 4);
        CHECK_THROWS_AS(build_spec(Model::GenericGaussian, 2, p, 0.5, 1), ConfigError);
    }
    SUBCASE("GOE tables: spectral radius near 2 sqrt(N)") {
        const int L = 8;
        const auto n = Eigen::Index{1} << L;
        auto t = std::make_shared<ParameterTables>();
        t->mean = Eigen::MatrixXd::Zero(n, n);
        t->variance = Eigen::MatrixXd::Ones(n, n);
        t->variance.diagonal().setConstant(2.0);
        ModelParams p;
        p.tables = t;
        const auto spec = build_spec(Model::GenericGaussian, L, p, 0.5, 5);
        const auto s = sample_generic(spec, 0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.matrix, Eigen::EigenvaluesOnly);
        const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
        CHECK(radius / (2.0 * std::sqrt(static_cast<double>(n))) == doctest::Approx(1.0).epsilon(0.1));
    }
    SUBCASE("QREM tables reproduce the QREM second moments") {
        const int L = 2;
        const double b = 1.5;
        auto t = std::make_shared<ParameterTables>(qrem_tables(L, b));
        ModelParams p;
        p.tables = t;
        const auto gspec = build_spec(Model::GenericGaussian, L, p, 0.5, 3);
        const auto qspec = qrem(L, b, 4);
        const int M = 20000;
        double g01 = 0, q01 = 0, g03 = 0, q03 = 0, g00 = 0, q00 = 0;
        for (int r = 0; r < M; ++r) {
            const auto g = sample_generic(gspec, static_cast<std::size_t>(r)).matrix;
            const auto q = sample_qrem(qspec, static_cast<std::size_t>(r)).matrix;
            g01 += g(0, 1) * g(0, 1);
            q01 += q(0, 1) * q(0, 1);
            g03 += g(0, 3) * g(0, 3);
            q03 += q(0, 3) * q(0, 3);
            g00 += g(0, 0) * g(0, 0);
            q00 += q(0, 0) * q(0, 0);
        }
        const double v01 = qrem_offdiag_variance(0, 1, b);
        // Two independent sample variances: difference sd = v sqrt(4 / M).
        CHECK(std::abs(g01 - q01) / M < 3 * v01 * std::sqrt(4.0 / M));
        CHECK(std::abs(g00 - q00) / M < 3 * 1.0 * std::sqrt(4.0 / M));
        CHECK(g03 == 0.0);
        CHECK(q03 == 0.0);
    }
}

TEST_CASE("RFHM sample: sector, diagonal and hopping") {
    SUBCASE("h = 0, D = 1, periodic: |udud> has diagonal -1") {
        const auto s = sample_rfhm(rfhm(4, 0.0), 0);
        const auto i = *s.basis.index_of(0b1010);
        CHECK(s.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) == doctest::Approx(-1.0));
        const auto k = *s.basis.index_of(0b1100);
        // Two aligned bonds (+1/4 each) and two anti-aligned (-1/4 each).
        CHECK(s.matrix(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) == doctest::Approx(0.0));
    }
    SUBCASE("connected pairs carry J/2 and follow adjacent transpositions") {
        const auto s = sample_rfhm(rfhm(6, 2.0, 1.0, Boundary::Open), 1);
        CHECK(exactly_symmetric(s.matrix));
        for (Eigen::Index i = 0; i < s.matrix.rows(); ++i)
            for (Eigen::Index j = i + 1; j < s.matrix.cols(); ++j) {
                const std::uint32_t x = s.basis.config(static_cast<std::size_t>(i)) ^
                                        s.basis.config(static_cast<std::size_t>(j));
                const bool adjacent = std::popcount(x) == 2 && (x & (x >> 1)) != 0;
                if (adjacent)
                    CHECK(s.matrix(i, j) == 0.5);
                else
                    CHECK(s.matrix(i, j) == 0.0);
            }
    }
    SUBCASE("periodic boundary links the first and last site") {
        const auto s = sample_rfhm(rfhm(4, 0.0), 0);
        const auto a = static_cast<Eigen::Index>(*s.basis.index_of(0b1010));
        const auto b = static_cast<Eigen::Index>(*s.basis.index_of(0b0011));
        CHECK(s.matrix(a, b) == 0.5);
        const auto so = sample_rfhm(rfhm(4, 0.0, 1.0, Boundary::Open), 0);
        CHECK(so.matrix(a, b) == 0.0);
    }
    SUBCASE("diagonal covariance matches h^2 sum_k mu_k nu_k") {
        const double h = 1.3;
        const auto spec = rfhm(4, h, 1.0, Boundary::Periodic, 21);
        const int M = 20000;
        const auto base = sample_rfhm(rfhm(4, 0.0), 0).matrix.diagonal();
        const BasisMap basis = BasisMap::sector(4, 2);
        const Eigen::Index a = 0, b = 3;
        double sa = 0, sb = 0, sab = 0;
        for (int r = 0; r < M; ++r) {
            const auto d = sample_rfhm(spec, static_cast<std::size_t>(r)).matrix.diagonal() - base;
            sa += d(a);
            sb += d(b);
            sab += d(a) * d(b);
        }
        const double cov = sab / M - (sa / M) * (sb / M);
        double dot = 0.0;
        for (int k = 0; k < 4; ++k) {
            const double mk = (basis.config(a) >> (3 - k) & 1u) ? 0.5 : -0.5;
            const double nk = (basis.config(b) >> (3 - k) & 1u) ? 0.5 : -0.5;
            dot += mk * nk;
        }
        const double expected = h * h * dot;
        // sd of a product-moment estimate is bounded by sigma_a sigma_b sqrt(2 / M).
        const double sigma2 = h * h * 4 * 0.25;
        CHECK(std::abs(cov - expected) < 3 * sigma2 * std::sqrt(2.0 / M));
    }
}

TEST_CASE("spec JSON round trip") {
    const auto a = rfhm(6, 2.5, 1.5, Boundary::Open, 1234);
    const auto j = to_json(a);
    CHECK(j.at("model") == "RFHM");
    CHECK(j.at("params").at("h") == 2.5);
    const auto b = spec_from_json(j);
    CHECK(b.N == a.N);
    CHECK(b.params.boundary == Boundary::Open);
    CHECK(b.master_seed == 1234);
    CHECK(sample(a, 2).matrix == sample(b, 2).matrix);

    const auto q = spec_from_json(to_json(qrem(4, 0.75, 3)));
    CHECK(q.params.b == 0.75);
    CHECK_THROWS_AS(spec_from_json(nlohmann::json{{"model", "QREM"}}), ConfigError);
}

TEST_CASE("stream seeds are distinct and reproducible") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(stream_seed(42, i));
    CHECK(seen.size() == 1000);
    CHECK(stream_seed(42, 5) == stream_seed(42, 5));
    CHECK(stream_seed(42, 5) != stream_seed(43, 5));
}
