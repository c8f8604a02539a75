// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file models.hpp
 * @brief Ensemble specifications and Hamiltonian samplers.
 *
 * Three ensembles are supported:
 * - GenericGaussian: independent Gaussian entries with user tables of means
 *   and variances.
 * - QREM: random diagonal energies (variance L/2) plus Hamming-1 hopping whose
 *   variance decays as [1 + (|mu - nu| / b)^2]^{-1}.
 * - RFHM: XXZ chain in Gaussian random fields, restricted to the S_z = 0
 *   sector.
 *
 * Basis convention: configuration bit (L - 1 - k) holds site k, 1 = spin up.
 * Site 0 is therefore the most significant bit.
 */

#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace entflow {

enum class Model { GenericGaussian, QREM, RFHM };
enum class Boundary { Periodic, Open };

std::string_view to_string(Model m);
Model model_from_string(std::string_view s);
std::string_view to_string(Boundary b);
Boundary boundary_from_string(std::string_view s);

/// Means b_{mu nu} and variances v_{mu nu} of a Gaussian ensemble.
struct ParameterTables {
    Eigen::MatrixXd mean;
    Eigen::MatrixXd variance;
};

struct ModelParams {
    double b = 0.0;  ///< QREM hopping range
    double J = 1.0;  ///< RFHM exchange
    double D = 1.0;  ///< RFHM anisotropy
    double h = 0.0;  ///< RFHM disorder (std of the on-site fields)
    Boundary boundary = Boundary::Periodic;
    std::shared_ptr<const ParameterTables> tables;  ///< GenericGaussian only
};

struct EnsembleSpec {
    Model model = Model::QREM;
    int L = 0;
    std::size_t N = 0;
    ModelParams params;
    double gamma = 0.5;
    int dyson_beta = 1;
    std::uint64_t master_seed = 0;
};

/// Ordered product-state basis, optionally restricted to a magnetization sector.
class BasisMap {
public:
    static BasisMap full(int L);
    /// Configurations with `n_up` up spins, ascending in integer order.
    static BasisMap sector(int L, int n_up);

    int sites() const noexcept { return L_; }
    std::size_t size() const noexcept { return configs_.size(); }
    std::uint32_t config(std::size_t i) const { return configs_.at(i); }
    std::span<const std::uint32_t> configs() const noexcept { return configs_; }
    std::optional<std::size_t> index_of(std::uint32_t config) const;
    /// Total magnetization 2*S_z of the sector, if restricted.
    std::optional<int> sector() const noexcept { return sector_; }
    /// Bit string, site 0 first.
    std::string label(std::size_t i) const;

private:
    int L_ = 0;
    std::vector<std::uint32_t> configs_;
    std::vector<std::int32_t> index_;
    std::optional<int> sector_;
};

struct HamiltonianSample {
    Eigen::MatrixXd matrix;
    BasisMap basis;
    std::size_t realization_index = 0;
    std::uint64_t seed_used = 0;
    /// Structurally nonzero upper off-diagonal positions (row < col).
    std::vector<std::pair<std::uint32_t, std::uint32_t>> couplings;
};

/// Validates parameters and computes N. Throws ConfigError.
EnsembleSpec build_spec(Model model, int L, const ModelParams& params, double gamma,
                        std::uint64_t master_seed);

/// Sector dimension L! / ((L/2)!)^2.
std::size_t rfhm_sector_dimension(int L);

/// Hopping variance [1 + (|mu - nu| / b)^2]^{-1} for a Hamming-1 pair; 0 at b = 0.
double qrem_offdiag_variance(std::uint32_t mu, std::uint32_t nu, double b);

/// Full mean/variance tables of the QREM ensemble.
ParameterTables qrem_tables(int L, double b);

HamiltonianSample sample_qrem(const EnsembleSpec& spec, std::size_t realization_index);
HamiltonianSample sample_rfhm(const EnsembleSpec& spec, std::size_t realization_index);
HamiltonianSample sample_generic(const EnsembleSpec& spec, std::size_t realization_index);
HamiltonianSample sample(const EnsembleSpec& spec, std::size_t realization_index);

nlohmann::json to_json(const EnsembleSpec& spec);
EnsembleSpec spec_from_json(const nlohmann::json& j);

}  // namespace entflow
