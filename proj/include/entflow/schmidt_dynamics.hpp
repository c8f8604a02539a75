// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file schmidt_dynamics.hpp
 * @brief Langevin ensemble for the Schmidt eigenvalues and the entropy
 *        moment equations.
 *
 * Drift per eigenvalue:
 *   A_n = beta [ sum_{m != n} lambda_n / (lambda_n - lambda_m) + nu - eta lambda_n ],
 *   eta = N_A N_B / 2.
 * Two choices of nu are offered. AsPublished uses nu = (N_A - N_B - 1) / 2,
 * which does not conserve sum(lambda). TraceConserving uses
 * nu = (N_B - N_A + 1) / 2, the eigenvalue process of a Brownian state matrix
 * on the unit sphere; its stationary law is the real Haar (fixed-trace
 * Wishart) ensemble.
 *
 * Noise covariance per step is 2 D dLambda with D = diag(lambda) - lambda lambda^T.
 */

#pragma once

#include "entflow/entangle.hpp"
#include "entflow/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace entflow {

enum class DriftConvention { TraceConserving, AsPublished };

std::string_view to_string(DriftConvention c);
DriftConvention drift_convention_from_string(std::string_view s);

struct InitCondition {
    enum class Kind { WeakSeparability, Uniform, Custom };
    Kind kind = Kind::WeakSeparability;
    double q = 2.0;
    std::vector<double> custom;

    static InitCondition weak_separability(double q) { return {Kind::WeakSeparability, q, {}}; }
    static InitCondition uniform() { return {Kind::Uniform, 0.0, {}}; }
    static InitCondition from(std::vector<double> l) { return {Kind::Custom, 0.0, std::move(l)}; }
};

struct LangevinConfig {
    int N_A = 2;
    int N_B = 2;
    int dyson_beta = 1;
    DriftConvention convention = DriftConvention::TraceConserving;
    /// Fixed step; 0 selects 1e-5 * 2 / N. Used when `adaptive` is false.
    double d_lambda = 0.0;
    /// Step = clamp(adaptive_fraction * Lambda, d_min, d_max); 0 bounds select
    /// 1e-5 * 2/N and 1e-3 * 2/N.
    bool adaptive = true;
    double adaptive_fraction = 0.01;
    double d_min = 0.0;
    double d_max = 0.0;
    std::vector<double> lambda_grid;  ///< checkpoints, ascending, >= 0
    std::size_t ensemble_size = 1000;
    InitCondition init;
    std::uint64_t seed = 0;

    int N() const { return N_A * N_B; }
};

/// Log-spaced checkpoints in N Lambda from x_min to x_max, with Lambda = 0 first.
std::vector<double> log_lambda_grid(int N, double n_lambda_min, double n_lambda_max, std::size_t points);

/// Throws ConfigError on q <= 1 or a custom vector that is not on the simplex.
std::vector<double> init_lambda(const LangevinConfig& config);

double nu_parameter(int N_A, int N_B, DriftConvention c);
inline double eta_parameter(int N_A, int N_B) { return 0.5 * N_A * N_B; }

/// Pair term lambda_n / (lambda_n - lambda_m) with near-degenerate pairs
/// (|gap| <= 1e-9 (lambda_n + lambda_m)) replaced by 1/2, which keeps the
/// pair identity sum = N_A (N_A - 1) / 2 exact.
Eigen::VectorXd drift(std::span<const double> lambdas, int N_A, int N_B, int beta = 1,
                      DriftConvention c = DriftConvention::AsPublished);

/// diag(lambda) - lambda lambda^T.
Eigen::MatrixXd diffusion_matrix(std::span<const double> lambdas);

/// B xi with B B^T = D on the simplex: (B xi)_n = sqrt(l_n) xi_n - l_n sum_m sqrt(l_m) xi_m.
Eigen::VectorXd apply_noise_factor(std::span<const double> lambdas, const Eigen::VectorXd& xi);

struct StepParams {
    int N_A = 2;
    int N_B = 2;
    int beta = 1;
    DriftConvention convention = DriftConvention::TraceConserving;
};

struct StepResult {
    std::vector<double> lambdas;
    double d_lambda_used = 0.0;
    int halvings = 0;
};

/// One Euler-Maruyama step, clipped at 0, renormalized and sorted descending.
/// A step with some lambda'_n < -10 (sqrt(2 lambda_n dL) + dL) is retried
/// with the same noise and half the step; NumericalError after 40 halvings.
StepResult step(std::span<const double> lambdas, double d_lambda, Rng& rng, const StepParams& p);

struct LangevinResult {
    LangevinConfig config;
    std::vector<double> grid;                  ///< Lambda checkpoints
    std::vector<Eigen::MatrixXd> checkpoints;  ///< per checkpoint, ensemble_size x N_A
    std::vector<EnsembleStats> stats;          ///< per checkpoint
    double raw_drift_sum_initial = 0.0;        ///< sum_n A_n at the initial lambda
    std::uint64_t total_steps = 0;
    std::uint64_t total_halvings = 0;

    /// Records of every trajectory at checkpoint k.
    std::vector<EntanglementRecord> records(std::size_t k) const;
};

/// Runs the ensemble; trajectories are seeded with stream_seed(seed, index).
LangevinResult evolve(const LangevinConfig& config);

double alpha_parameter(int N_A);
/// alpha + (N_B / 2) <R0> - (N_A N_B / 2) <R1>.
double r1_ode_rhs(double mean_R1, double mean_R0, int N_A, int N_B);
/// alpha0 (1 - exp(-N Lambda / 2)).
double r1_closed_form(double lambda, int N, double alpha0);
/// 2 (Q - <R1^2>) + N_B cov(R0, R1) - N var(R1).
double var_ode_rhs(double var_R1, double mean_Q, double mean_R1_sq, double cov_R0_R1, int N_A, int N_B);
/// 2 (Q - <R1^2>) (1 - exp(-N Lambda)) / N.
double var_large_lambda(double lambda, int N, double q_minus_r1sq);

/// Finite-difference check of a moment equation over one checkpoint interval.
struct OdeResidual {
    double lambda_mid = 0.0;
    double finite_difference = 0.0;
    double rhs = 0.0;    ///< mean of the rhs at the two ends
    double se = 0.0;       ///< block-jackknife standard error of (fd - rhs)
    double z() const { return se > 0.0 ? (finite_difference - rhs) / se : 0.0; }
};

/// Residuals of the <R1> and var(R1) equations for every interval of the
/// grid, with errors from a `blocks`-block jackknife over trajectories.
struct OdeResiduals {
    std::vector<OdeResidual> mean_R1;
    std::vector<OdeResidual> var_R1;
};
OdeResiduals ode_residuals(const LangevinResult& result, std::size_t blocks = 20);

}  // namespace entflow
