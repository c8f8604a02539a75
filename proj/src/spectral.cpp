// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "entflow/spectral.hpp"

#include "entflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace entflow {

Eigensystem diagonalize(const HamiltonianSample& sample, std::size_t dense_limit) {
    return diagonalize(sample.matrix, sample.realization_index, dense_limit);
}

Eigensystem diagonalize(const Eigen::MatrixXd& h, std::size_t realization_index, std::size_t dense_limit) {
    if (h.rows() != h.cols()) throw std::invalid_argument("diagonalize: matrix is not square");
    if (static_cast<std::size_t>(h.rows()) > dense_limit)
        throw ConfigError("diagonalize: N = " + std::to_string(h.rows()) + " exceeds the dense limit " +
                          std::to_string(dense_limit));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw NumericalError("diagonalize: eigensolver did not converge for realization " +
                             std::to_string(realization_index));
    return {solver.eigenvalues(), solver.eigenvectors()};
}

double eigen_residual(const Eigen::MatrixXd& h, const Eigensystem& es) {
    const double scale = std::max(h.cwiseAbs().maxCoeff(), 1e-300);
    const Eigen::MatrixXd r = h * es.vectors - es.vectors * es.values.asDiagonal();
    return r.cwiseAbs().maxCoeff() / scale;
}

std::size_t WindowSize::resolve(std::size_t N) const {
    std::size_t n = count;
    if (n == 0) n = std::max(min_count, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(N))));
    return n;
}

IprValues ipr(std::span<const double> psi) {
    if (psi.empty()) throw std::invalid_argument("ipr: empty vector");
    double norm2 = 0.0, p4 = 0.0;
    for (double x : psi) {
        const double x2 = x * x;
        norm2 += x2;
        p4 += x2 * x2;
    }
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-8) throw std::invalid_argument("ipr: vector is not normalized");
    return {p4 / static_cast<double>(psi.size()), p4};
}

namespace {

void fill_window_stats(EigenWindow& w) {
    w.N_f = static_cast<std::size_t>(w.eigenvalues.size());
    if (w.N_f < 2) throw std::invalid_argument("window needs at least 2 states");
    w.delta_e = (w.eigenvalues.maxCoeff() - w.eigenvalues.minCoeff()) / static_cast<double>(w.N_f - 1);
    if (!(w.delta_e > 0.0)) throw NumericalError("window: degenerate energies give a zero level spacing");

    w.ipr_states.clear();
    w.ipr_paper = 0.0;
    w.ipr_std = 0.0;
    for (Eigen::Index c = 0; c < w.eigenvectors.cols(); ++c) {
        const auto col = w.eigenvectors.col(c);
        const auto v = ipr(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
        w.ipr_states.push_back(v);
        w.ipr_paper += v.paper;
        w.ipr_std += v.standard;
    }
    w.ipr_paper /= static_cast<double>(w.N_f);
    w.ipr_std /= static_cast<double>(w.N_f);

    std::size_t best = 0;
    for (std::size_t k = 1; k < w.N_f; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const auto b = static_cast<Eigen::Index>(best);
        if (std::abs(w.eigenvalues(i) - w.target_E) < std::abs(w.eigenvalues(b) - w.target_E)) best = k;
    }
    w.center = best;
}

}  // namespace

EigenWindow select_window(const Eigensystem& es, double E, WindowSize size) {
    const auto N = static_cast<std::size_t>(es.values.size());
    if (N == 0) throw std::invalid_argument("select_window: empty spectrum");
    const std::size_t n_f = size.resolve(N);
    if (n_f < 2 || n_f > N) throw std::invalid_argument("select_window: window size must lie in [2, N]");

    // Nearest n_f levels; stable sort keeps the lower index on equal distance.
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(es.values(static_cast<Eigen::Index>(a)) - E) <
               std::abs(es.values(static_cast<Eigen::Index>(b)) - E);
    });
    order.resize(n_f);
    std::sort(order.begin(), order.end());

    EigenWindow w;
    w.target_E = E;
    w.indices = order;
    w.eigenvalues.resize(static_cast<Eigen::Index>(n_f));
    w.eigenvectors.resize(es.vectors.rows(), static_cast<Eigen::Index>(n_f));
    for (std::size_t k = 0; k < n_f; ++k) {
        const auto src = static_cast<Eigen::Index>(order[k]);
        w.eigenvalues(static_cast<Eigen::Index>(k)) = es.values(src);
        w.eigenvectors.col(static_cast<Eigen::Index>(k)) = es.vectors.col(src);
    }
    fill_window_stats(w);
    return w;
}

EigenWindow make_window(double E, const Eigen::VectorXd& energies, const Eigen::MatrixXd& vectors) {
    if (energies.size() != vectors.cols()) throw std::invalid_argument("make_window: size mismatch");
    EigenWindow w;
    w.target_E = E;
    w.eigenvalues = energies;
    w.eigenvectors = vectors;
    w.indices.resize(static_cast<std::size_t>(energies.size()));
    std::iota(w.indices.begin(), w.indices.end(), std::size_t{0});
    fill_window_stats(w);
    return w;
}

std::string_view to_string(OmegaEstimator e) {
    switch (e) {
        case OmegaEstimator::AbsOverlap: return "abs_overlap";
        case OmegaEstimator::RawOverlap: return "raw_overlap";
        case OmegaEstimator::IprSpacing: return "ipr_spacing";
    }
    return "?";
}

OmegaEstimator omega_estimator_from_string(std::string_view s) {
    if (s == "abs_overlap") return OmegaEstimator::AbsOverlap;
    if (s == "raw_overlap") return OmegaEstimator::RawOverlap;
    if (s == "ipr_spacing") return OmegaEstimator::IprSpacing;
    throw ConfigError("unknown omega estimator '" + std::string(s) + "'");
}

double omega_e(std::span<const EigenWindow> windows, OmegaEstimator estimator) {
    if (windows.size() < 2) throw std::invalid_argument("omega_e: needs at least 2 realizations");
    const std::size_t n_f = windows.front().N_f;
    const auto N = windows.front().eigenvectors.rows();
    for (const auto& w : windows)
        if (w.N_f != n_f || w.eigenvectors.rows() != N)
            throw std::invalid_argument("omega_e: mismatched window sizes");

    const double floor = 1.0 / static_cast<double>(N);
    const auto clamp = [floor](double x) { return std::clamp(x, floor, 1.0); };

    if (estimator == OmegaEstimator::IprSpacing) {
        double acc = 0.0;
        for (const auto& w : windows) acc += static_cast<double>(N) * w.ipr_paper * w.delta_e;
        return clamp(acc / static_cast<double>(windows.size()));
    }

    // Pre-take absolute values once for the amplitude estimator.
    std::vector<Eigen::MatrixXd> mags;
    if (estimator == OmegaEstimator::AbsOverlap) {
        mags.reserve(windows.size());
        for (const auto& w : windows) mags.push_back(w.eigenvectors.cwiseAbs());
    }

    double acc = 0.0;
    std::size_t terms = 0;
    for (std::size_t r = 0; r < windows.size(); ++r) {
        const auto c = static_cast<Eigen::Index>(windows[r].center);
        for (std::size_t s = 0; s < windows.size(); ++s) {
            if (s == r) continue;
            Eigen::RowVectorXd overlaps;
            if (estimator == OmegaEstimator::AbsOverlap)
                overlaps = mags[r].col(c).transpose() * mags[s];
            else
                overlaps = windows[r].eigenvectors.col(c).transpose() * windows[s].eigenvectors;
            const auto cs = static_cast<Eigen::Index>(windows[s].center);
            for (Eigen::Index n = 0; n < overlaps.size(); ++n) {
                if (n == cs) continue;
                acc += overlaps(n) * overlaps(n);
                ++terms;
            }
        }
    }
    return clamp(acc / static_cast<double>(terms));
}

}  // namespace entflow
