// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "entflow/models.hpp"

#include "entflow/error.hpp"
#include "entflow/rng.hpp"

#include <bit>
#include <cmath>
#include <random>
#include <string>

namespace entflow {

namespace {

constexpr int kMaxSites = 30;

bool is_symmetric(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) return false;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = i + 1; j < m.cols(); ++j)
            if (m(i, j) != m(j, i)) return false;
    return true;
}

void require_model(const EnsembleSpec& spec, Model m) {
    if (spec.model != m)
        throw ConfigError("sampler for " + std::string(to_string(m)) + " called with a " +
                          std::string(to_string(spec.model)) + " spec");
}

}  // namespace

std::string_view to_string(Model m) {
    switch (m) {
        case Model::GenericGaussian: return "GenericGaussian";
        case Model::QREM: return "QREM";
        case Model::RFHM: return "RFHM";
    }
    return "?";
}

Model model_from_string(std::string_view s) {
    if (s == "QREM" || s == "qrem") return Model::QREM;
    if (s == "RFHM" || s == "rfhm") return Model::RFHM;
    if (s == "GenericGaussian" || s == "generic") return Model::GenericGaussian;
    throw ConfigError("unknown model '" + std::string(s) + "'");
}

std::string_view to_string(Boundary b) {
    return b == Boundary::Periodic ? "periodic" : "open";
}

Boundary boundary_from_string(std::string_view s) {
    if (s == "periodic") return Boundary::Periodic;
    if (s == "open") return Boundary::Open;
    throw ConfigError("unknown boundary '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// BasisMap

BasisMap BasisMap::full(int L) {
    if (L < 1 || L > kMaxSites) throw ConfigError("basis: L out of range");
    BasisMap b;
    b.L_ = L;
    const std::uint32_t n = 1u << L;
    b.configs_.resize(n);
    b.index_.resize(n);
    for (std::uint32_t c = 0; c < n; ++c) {
        b.configs_[c] = c;
        b.index_[c] = static_cast<std::int32_t>(c);
    }
    return b;
}

BasisMap BasisMap::sector(int L, int n_up) {
    if (L < 1 || L > kMaxSites) throw ConfigError("basis: L out of range");
    if (n_up < 0 || n_up > L) throw ConfigError("basis: n_up out of range");
    BasisMap b;
    b.L_ = L;
    b.sector_ = 2 * n_up - L;
    b.index_.assign(std::size_t{1} << L, -1);
    for (std::uint32_t c = 0; c < (1u << L); ++c) {
        if (std::popcount(c) == n_up) {
            b.index_[c] = static_cast<std::int32_t>(b.configs_.size());
            b.configs_.push_back(c);
        }
    }
    return b;
}

std::optional<std::size_t> BasisMap::index_of(std::uint32_t config) const {
    if (config >= index_.size() || index_[config] < 0) return std::nullopt;
    return static_cast<std::size_t>(index_[config]);
}

std::string BasisMap::label(std::size_t i) const {
    const std::uint32_t c = config(i);
    std::string s(static_cast<std::size_t>(L_), '0');
    for (int k = 0; k < L_; ++k)
        if (c & (1u << (L_ - 1 - k))) s[static_cast<std::size_t>(k)] = '1';
    return s;
}

// ---------------------------------------------------------------------------
// Specs

std::size_t rfhm_sector_dimension(int L) {
    std::size_t c = 1;
    for (int k = 1; k <= L / 2; ++k) c = c * static_cast<std::size_t>(L / 2 + k) / static_cast<std::size_t>(k);
    return c;
}

EnsembleSpec build_spec(Model model, int L, const ModelParams& params, double gamma,
                        std::uint64_t master_seed) {
    if (L < 2) throw ConfigError("L must be >= 2");
    if (L > kMaxSites) throw ConfigError("L too large");
    if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");

    EnsembleSpec spec;
    spec.model = model;
    spec.L = L;
    spec.params = params;
    spec.gamma = gamma;
    spec.master_seed = master_seed;
    spec.dyson_beta = 1;

    switch (model) {
        case Model::QREM:
            if (!(params.b >= 0.0)) throw ConfigError("QREM: b must be >= 0");
            spec.N = std::size_t{1} << L;
            break;
        case Model::RFHM:
            if (L % 2 != 0) throw ConfigError("RFHM: L must be even");
            if (!(params.h >= 0.0)) throw ConfigError("RFHM: h must be >= 0");
            if (!std::isfinite(params.J) || !std::isfinite(params.D))
                throw ConfigError("RFHM: J and D must be finite");
            spec.N = rfhm_sector_dimension(L);
            break;
        case Model::GenericGaussian: {
            if (!params.tables) throw ConfigError("GenericGaussian: tables required");
            const auto& t = *params.tables;
            if (!is_symmetric(t.mean) || !is_symmetric(t.variance))
                throw ConfigError("GenericGaussian: tables must be square and symmetric");
            if (t.mean.rows() != t.variance.rows())
                throw ConfigError("GenericGaussian: mean/variance size mismatch");
            if ((t.variance.array() < 0.0).any())
                throw ConfigError("GenericGaussian: negative variance");
            spec.N = static_cast<std::size_t>(t.mean.rows());
            if (spec.N != (std::size_t{1} << L))
                throw ConfigError("GenericGaussian: table size must be 2^L");
            break;
        }
    }
    return spec;
}

// ---------------------------------------------------------------------------
// QREM

double qrem_offdiag_variance(std::uint32_t mu, std::uint32_t nu, double b) {
    if (std::popcount(mu ^ nu) != 1)
        throw std::invalid_argument("qrem_offdiag_variance: pair is not at Hamming distance 1");
    if (b == 0.0) return 0.0;
    if (std::isinf(b)) return 1.0;
    const double ratio = std::abs(static_cast<double>(mu) - static_cast<double>(nu)) / b;
    return 1.0 / (1.0 + ratio * ratio);
}

ParameterTables qrem_tables(int L, double b) {
    const auto n = static_cast<Eigen::Index>(std::size_t{1} << L);
    ParameterTables t{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
    for (Eigen::Index mu = 0; mu < n; ++mu) {
        t.variance(mu, mu) = L / 2.0;
        for (int r = 0; r < L; ++r) {
            const auto nu = static_cast<Eigen::Index>(static_cast<std::uint32_t>(mu) ^ (1u << r));
            t.variance(mu, nu) = qrem_offdiag_variance(static_cast<std::uint32_t>(mu),
                                                       static_cast<std::uint32_t>(nu), b);
        }
    }
    return t;
}

HamiltonianSample sample_qrem(const EnsembleSpec& spec, std::size_t realization_index) {
    require_model(spec, Model::QREM);
    const int L = spec.L;
    const auto n = static_cast<std::uint32_t>(spec.N);

    HamiltonianSample s;
    s.basis = BasisMap::full(L);
    s.realization_index = realization_index;
    s.seed_used = stream_seed(spec.master_seed, realization_index);
    s.matrix = Eigen::MatrixXd::Zero(n, n);

    Rng rng(s.seed_used);
    std::normal_distribution<double> normal(0.0, 1.0);

    const double diag_sigma = std::sqrt(L / 2.0);
    for (std::uint32_t mu = 0; mu < n; ++mu) s.matrix(mu, mu) = diag_sigma * normal(rng);

    s.couplings.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(L) / 2);
    for (std::uint32_t mu = 0; mu < n; ++mu) {
        for (int r = 0; r < L; ++r) {
            const std::uint32_t nu = mu ^ (1u << r);
            if (nu < mu) continue;
            s.couplings.emplace_back(mu, nu);
            // Draw unconditionally so the stream layout does not depend on b.
            const double z = normal(rng);
            const double v = qrem_offdiag_variance(mu, nu, spec.params.b);
            const double value = std::sqrt(v) * z;
            s.matrix(mu, nu) = value;
            s.matrix(nu, mu) = value;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// RFHM

HamiltonianSample sample_rfhm(const EnsembleSpec& spec, std::size_t realization_index) {
    require_model(spec, Model::RFHM);
    const int L = spec.L;
    const auto& p = spec.params;

    HamiltonianSample s;
    s.basis = BasisMap::sector(L, L / 2);
    s.realization_index = realization_index;
    s.seed_used = stream_seed(spec.master_seed, realization_index);
    const auto n = static_cast<Eigen::Index>(s.basis.size());
    s.matrix = Eigen::MatrixXd::Zero(n, n);

    Rng rng(s.seed_used);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> fields(static_cast<std::size_t>(L));
    for (auto& f : fields) f = p.h * normal(rng);

    const auto bit = [L](int site) { return 1u << (L - 1 - site); };
    const int bonds = p.boundary == Boundary::Periodic ? L : L - 1;

    for (Eigen::Index i = 0; i < n; ++i) {
        const std::uint32_t c = s.basis.config(static_cast<std::size_t>(i));
        const auto sz = [&](int site) { return (c & bit(site)) ? 0.5 : -0.5; };
        double diag = 0.0;
        for (int k = 0; k < L; ++k) diag -= fields[static_cast<std::size_t>(k)] * sz(k);
        for (int k = 0; k < bonds; ++k) {
            const int k1 = (k + 1) % L;
            diag += p.D * sz(k) * sz(k1);
            // XX + YY flips an anti-aligned pair with amplitude J/2.
            if (sz(k) != sz(k1)) {
                const std::uint32_t flipped = c ^ bit(k) ^ bit(k1);
                const auto j = s.basis.index_of(flipped);
                const auto jj = static_cast<Eigen::Index>(*j);
                if (jj > i) {
                    s.matrix(i, jj) += p.J / 2.0;
                    s.matrix(jj, i) += p.J / 2.0;
                    s.couplings.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(jj));
                }
            }
        }
        s.matrix(i, i) = diag;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Generic

HamiltonianSample sample_generic(const EnsembleSpec& spec, std::size_t realization_index) {
    require_model(spec, Model::GenericGaussian);
    const auto& t = *spec.params.tables;
    const auto n = t.mean.rows();

    HamiltonianSample s;
    s.basis = BasisMap::full(spec.L);
    s.realization_index = realization_index;
    s.seed_used = stream_seed(spec.master_seed, realization_index);
    s.matrix.resize(n, n);

    Rng rng(s.seed_used);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double value = t.mean(i, j) + std::sqrt(t.variance(i, j)) * normal(rng);
            s.matrix(i, j) = value;
            s.matrix(j, i) = value;
            if (j > i && (t.variance(i, j) > 0.0 || t.mean(i, j) != 0.0))
                s.couplings.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
        }
    }
    return s;
}

HamiltonianSample sample(const EnsembleSpec& spec, std::size_t realization_index) {
    switch (spec.model) {
        case Model::QREM: return sample_qrem(spec, realization_index);
        case Model::RFHM: return sample_rfhm(spec, realization_index);
        case Model::GenericGaussian: return sample_generic(spec, realization_index);
    }
    throw ConfigError("unknown model");
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ConfigError("table must be an array of rows");
    const auto n = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
            throw ConfigError("table must be square");
        for (Eigen::Index c = 0; c < n; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

}  // namespace

nlohmann::json to_json(const EnsembleSpec& spec) {
    nlohmann::json params;
    switch (spec.model) {
        case Model::QREM: params = {{"b", spec.params.b}}; break;
        case Model::RFHM:
            params = {{"J", spec.params.J},
                      {"D", spec.params.D},
                      {"h", spec.params.h},
                      {"boundary", to_string(spec.params.boundary)}};
            break;
        case Model::GenericGaussian:
            params = {{"mean", matrix_to_json(spec.params.tables->mean)},
                      {"variance", matrix_to_json(spec.params.tables->variance)}};
            break;
    }
    return {{"model", to_string(spec.model)},
            {"L", spec.L},
            {"params", params},
            {"gamma", spec.gamma},
            {"master_seed", spec.master_seed}};
}

EnsembleSpec spec_from_json(const nlohmann::json& j) {
    try {
        const Model model = model_from_string(j.at("model").get<std::string>());
        const int L = j.at("L").get<int>();
        const auto& p = j.at("params");
        ModelParams params;
        switch (model) {
            case Model::QREM: params.b = p.at("b").get<double>(); break;
            case Model::RFHM:
                params.J = p.value("J", 1.0);
                params.D = p.at("D").get<double>();
                params.h = p.at("h").get<double>();
                if (p.contains("boundary"))
                    params.boundary = boundary_from_string(p.at("boundary").get<std::string>());
                break;
            case Model::GenericGaussian: {
                auto t = std::make_shared<ParameterTables>();
                t->mean = matrix_from_json(p.at("mean"));
                t->variance = matrix_from_json(p.at("variance"));
                params.tables = std::move(t);
                break;
            }
        }
        return build_spec(model, L, params, j.at("gamma").get<double>(),
                          j.at("master_seed").get<std::uint64_t>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("spec JSON: ") + e.what());
    }
}

}  // namespace entflow
