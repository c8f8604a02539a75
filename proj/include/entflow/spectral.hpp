// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "entflow/models.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace entflow {

/// Dense samples larger than this are refused by diagonalize().
inline constexpr std::size_t kDenseLimit = 4096;

struct Eigensystem {
    Eigen::VectorXd values;   ///< ascending
    Eigen::MatrixXd vectors;  ///< columns, unit norm
};

/// Full dense symmetric eigendecomposition.
/// Throws NumericalError (mentioning the realization index) on failure.
Eigensystem diagonalize(const HamiltonianSample& sample, std::size_t dense_limit = kDenseLimit);
Eigensystem diagonalize(const Eigen::MatrixXd& h, std::size_t realization_index = 0,
                        std::size_t dense_limit = kDenseLimit);

/// max |H V - V diag(e)| relative to max |H|.
double eigen_residual(const Eigen::MatrixXd& h, const Eigensystem& es);

/// How many states a window keeps: an explicit count, or a fraction of N
/// bounded below by `min_count`.
struct WindowSize {
    std::size_t count = 0;
    double fraction = 0.0;
    std::size_t min_count = 2;

    static WindowSize of_count(std::size_t n) { return {n, 0.0, 2}; }
    static WindowSize of_fraction(double f, std::size_t min_count = 2) { return {0, f, min_count}; }
    std::size_t resolve(std::size_t N) const;
};

struct IprValues {
    double paper = 0.0;  ///< (1/N) sum |psi|^4
    double standard = 0.0;  ///< sum |psi|^4
};

/// Inverse participation ratio of a unit vector. Throws if | ||psi|| - 1 | > 1e-8.
IprValues ipr(std::span<const double> psi);

struct EigenWindow {
    double target_E = 0.0;
    std::vector<std::size_t> indices;  ///< positions in the full spectrum, ascending
    Eigen::VectorXd eigenvalues;       ///< ascending
    Eigen::MatrixXd eigenvectors;      ///< one column per kept state
    std::size_t center = 0;            ///< column of the state closest to target_E
    std::size_t N_f = 0;
    double delta_e = 0.0;              ///< (e_max - e_min) / (N_f - 1)
    std::vector<IprValues> ipr_states;
    double ipr_paper = 0.0;            ///< window mean of the 1/N-normalized IPR
    double ipr_std = 0.0;              ///< window mean of sum |psi|^4
};

/// Keeps the N_f eigenpairs closest to E; ties go to the lower index.
EigenWindow select_window(const Eigensystem& es, double E, WindowSize size);

/// Builds a window directly from vectors (columns) and energies; used for
/// synthetic inputs and tests.
EigenWindow make_window(double E, const Eigen::VectorXd& energies, const Eigen::MatrixXd& vectors);

enum class OmegaEstimator {
    AbsOverlap,  ///< |sum_mu |U_mu(e0)| |U_mu(e_n)||^2 across realizations (default)
    RawOverlap,  ///< |<U(e0)|U(e_n)>|^2 across realizations
    IprSpacing,  ///< N <I2> Delta_e with kappa = 1
};

std::string_view to_string(OmegaEstimator e);
OmegaEstimator omega_estimator_from_string(std::string_view s);

/// Correlation volume Omega_e from windows of >= 2 realizations with a common
/// N_f, averaged over ordered realization pairs and over the N_f - 1
/// non-central states, clamped to [1/N, 1].
double omega_e(std::span<const EigenWindow> windows, OmegaEstimator estimator = OmegaEstimator::AbsOverlap);

}  // namespace entflow
