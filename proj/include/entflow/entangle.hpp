// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file entangle.hpp
 * @brief Bipartite state matrices, Schmidt spectra and entanglement measures.
 *
 * Bipartition: the L/2 most significant bits of a configuration (sites
 * 0 .. L/2-1) index subsystem A (rows), the rest index B (columns).
 * Entropies are computed in nats internally.
 */

#pragma once

#include "entflow/models.hpp"
#include "entflow/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <span>
#include <string_view>
#include <vector>

namespace entflow {

/// Floor applied to lambda inside ln for R0 and Q.
inline constexpr double kLambdaFloor = 1e-30;

enum class LogBase { E, Two };

LogBase log_base_from_string(std::string_view s);
std::string_view to_string(LogBase b);

struct StateMatrix {
    Eigen::MatrixXd C;
    int N_A = 0;
    int N_B = 0;
};

/// Schmidt eigenvalues, descending, length N_A.
struct SchmidtSpectrum {
    std::vector<double> lambdas;
};

struct EntanglementRecord {
    double R1 = 0.0;  ///< von Neumann entropy in the requested base
    double R0 = 0.0;  ///< -sum ln max(lambda, floor), nats
    double Q = 0.0;   ///< sum lambda (ln lambda)^2, nats
    std::map<double, double> renyi;  ///< alpha -> R_alpha, requested base
    double energy = 0.0;
};

/// Reshapes a normalized eigenvector into C_{kl}. Sector vectors are
/// zero-embedded into the full 2^L space first.
StateMatrix state_matrix(std::span<const double> psi, const BasisMap& basis, int N_A, int N_B);

/// Even split N_A = N_B = 2^{L/2}; for odd L, A takes the smaller half.
StateMatrix state_matrix(std::span<const double> psi, const BasisMap& basis);

/// Eigenvalues of C C^T via singular values, clipped, sorted descending.
SchmidtSpectrum schmidt_spectrum(const StateMatrix& C);
SchmidtSpectrum schmidt_spectrum(const Eigen::MatrixXd& C);

EntanglementRecord measures(std::span<const double> lambdas, LogBase base = LogBase::E,
                            std::span<const double> alphas = {});

/// Rényi entropy in nats; alpha = 1 gives von Neumann, alpha = inf min-entropy.
double renyi_entropy(std::span<const double> lambdas, double alpha);

/// I.i.d. standard normal entries normalized to unit Frobenius norm.
StateMatrix haar_sample(int N_A, int N_B, Rng& rng);

/// Unbiased (n - 1) sample moments over a set of records.
struct EnsembleStats {
    std::size_t count = 0;
    double mean_R1 = 0.0;
    double var_R1 = 0.0;
    double mean_R0 = 0.0;
    double var_R0 = 0.0;
    double mean_Q = 0.0;
    double mean_R1_sq = 0.0;
    double cov_R0_R1 = 0.0;
    double se_mean_R1 = 0.0;  ///< sqrt(var_R1 / n)
    double se_var_R1 = 0.0;   ///< standard error of var_R1 from the fourth central moment
    double se_mean_R0 = 0.0;
    double se_mean_Q = 0.0;
    double se_cov = 0.0;

    /// Q - <R1^2>, the driving term of the variance equation.
    double q_minus_r1sq() const { return mean_Q - mean_R1_sq; }
};

EnsembleStats ensemble_stats(std::span<const EntanglementRecord> records);

}  // namespace entflow
