// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "entflow/entangle.hpp"

#include "entflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace entflow {

LogBase log_base_from_string(std::string_view s) {
    if (s == "e" || s == "nats") return LogBase::E;
    if (s == "2" || s == "bits") return LogBase::Two;
    throw ConfigError("log base must be 2 or e, got '" + std::string(s) + "'");
}

std::string_view to_string(LogBase b) { return b == LogBase::E ? "e" : "2"; }

StateMatrix state_matrix(std::span<const double> psi, const BasisMap& basis, int N_A, int N_B) {
    const int L = basis.sites();
    if (N_A < 1 || N_B < 1 || (std::uint64_t{1} << L) != static_cast<std::uint64_t>(N_A) * N_B)
        throw std::invalid_argument("state_matrix: N_A * N_B must equal 2^L");
    if (psi.size() != basis.size())
        throw std::invalid_argument("state_matrix: vector length " + std::to_string(psi.size()) +
                                    " does not match basis size " + std::to_string(basis.size()));
    const double norm2 = std::inner_product(psi.begin(), psi.end(), psi.begin(), 0.0);
    if (std::abs(norm2 - 1.0) > 1e-10) throw std::invalid_argument("state_matrix: vector is not normalized");

    StateMatrix out{Eigen::MatrixXd::Zero(N_A, N_B), N_A, N_B};
    const auto configs = basis.configs();
    const auto nb = static_cast<std::uint32_t>(N_B);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const std::uint32_t c = configs[i];
        out.C(static_cast<Eigen::Index>(c / nb), static_cast<Eigen::Index>(c % nb)) = psi[i];
    }
    return out;
}

StateMatrix state_matrix(std::span<const double> psi, const BasisMap& basis) {
    const int L = basis.sites();
    const int la = L / 2;
    return state_matrix(psi, basis, 1 << la, 1 << (L - la));
}

SchmidtSpectrum schmidt_spectrum(const StateMatrix& C) { return schmidt_spectrum(C.C); }

SchmidtSpectrum schmidt_spectrum(const Eigen::MatrixXd& C) {
    if (C.size() == 0) throw std::invalid_argument("schmidt_spectrum: empty state matrix");
    const double norm2 = C.squaredNorm();
    if (std::abs(norm2 - 1.0) > 1e-10) throw std::invalid_argument("schmidt_spectrum: state matrix is not normalized");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(C);
    const Eigen::VectorXd& s = svd.singularValues();

    SchmidtSpectrum out;
    out.lambdas.assign(static_cast<std::size_t>(C.rows()), 0.0);
    for (Eigen::Index k = 0; k < s.size(); ++k) out.lambdas[static_cast<std::size_t>(k)] = s(k) * s(k);
    std::sort(out.lambdas.begin(), out.lambdas.end(), std::greater<>());

    const double trace = std::accumulate(out.lambdas.begin(), out.lambdas.end(), 0.0);
    if (std::abs(trace - 1.0) > 1e-8) throw NumericalError("schmidt_spectrum: trace drifted to " + std::to_string(trace));
    if (std::abs(trace - 1.0) <= 1e-10)
        for (double& l : out.lambdas) l /= trace;
    return out;
}

double renyi_entropy(std::span<const double> lambdas, double alpha) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("renyi_entropy: alpha must be >= 0");
    if (alpha == 1.0) {
        double r = 0.0;
        for (double l : lambdas)
            if (l > 0.0) r -= l * std::log(l);
        return r;
    }
    if (std::isinf(alpha)) {
        const double top = *std::max_element(lambdas.begin(), lambdas.end());
        return -std::log(top);
    }
    double s = 0.0;
    for (double l : lambdas)
        if (l > 0.0) s += std::pow(l, alpha);
    return std::log(s) / (1.0 - alpha);
}

EntanglementRecord measures(std::span<const double> lambdas, LogBase base, std::span<const double> alphas) {
    if (lambdas.empty()) throw std::invalid_argument("measures: empty spectrum");
    const double scale = base == LogBase::Two ? 1.0 / std::log(2.0) : 1.0;

    EntanglementRecord rec;
    double r1 = 0.0, r0 = 0.0, q = 0.0;
    for (double l : lambdas) {
        const double ln = std::log(std::max(l, kLambdaFloor));
        if (l > 0.0) r1 -= l * ln;
        r0 -= ln;
        q += l * ln * ln;
    }
    rec.R1 = r1 * scale;
    rec.R0 = r0;
    rec.Q = q;
    for (double a : alphas) rec.renyi[a] = renyi_entropy(lambdas, a) * scale;
    return rec;
}

StateMatrix haar_sample(int N_A, int N_B, Rng& rng) {
    if (N_A < 1 || N_B < 1) throw std::invalid_argument("haar_sample: dimensions must be positive");
    std::normal_distribution<double> gauss(0.0, 1.0);
    StateMatrix out{Eigen::MatrixXd(N_A, N_B), N_A, N_B};
    // Row-major fill so the stream order is independent of the storage order.
    for (int k = 0; k < N_A; ++k)
        for (int l = 0; l < N_B; ++l) out.C(k, l) = gauss(rng);
    out.C /= out.C.norm();
    return out;
}

EnsembleStats ensemble_stats(std::span<const EntanglementRecord> records) {
    const std::size_t n = records.size();
    if (n < 2) throw std::invalid_argument("ensemble_stats: needs at least 2 records");
    const double dn = static_cast<double>(n);

    EnsembleStats st;
    st.count = n;
    for (const auto& r : records) {
        st.mean_R1 += r.R1;
        st.mean_R0 += r.R0;
        st.mean_Q += r.Q;
        st.mean_R1_sq += r.R1 * r.R1;
    }
    st.mean_R1 /= dn;
    st.mean_R0 /= dn;
    st.mean_Q /= dn;
    st.mean_R1_sq /= dn;

    double m4 = 0.0, var_q = 0.0;
    std::vector<double> prod(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = records[i];
        const double d1 = r.R1 - st.mean_R1, d0 = r.R0 - st.mean_R0, dq = r.Q - st.mean_Q;
        st.var_R1 += d1 * d1;
        st.var_R0 += d0 * d0;
        st.cov_R0_R1 += d0 * d1;
        m4 += d1 * d1 * d1 * d1;
        var_q += dq * dq;
        prod[i] = d0 * d1;
    }
    const double pop_var = st.var_R1 / dn;
    const double pop_cov = st.cov_R0_R1 / dn;
    st.var_R1 /= dn - 1.0;
    st.var_R0 /= dn - 1.0;
    st.cov_R0_R1 /= dn - 1.0;
    var_q /= dn - 1.0;
    m4 /= dn;

    double var_prod = 0.0;
    for (double p : prod) var_prod += (p - pop_cov) * (p - pop_cov);
    var_prod /= dn - 1.0;

    st.se_mean_R1 = std::sqrt(st.var_R1 / dn);
    st.se_mean_R0 = std::sqrt(st.var_R0 / dn);
    st.se_mean_Q = std::sqrt(var_q / dn);
    st.se_var_R1 = std::sqrt(std::max(0.0, m4 - pop_var * pop_var) / dn);
    st.se_cov = std::sqrt(var_prod / dn);
    return st;
}

}  // namespace entflow
