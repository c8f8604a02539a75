// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "entflow/schmidt_dynamics.hpp"

#include "entflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <string>

namespace entflow {

std::string_view to_string(DriftConvention c) {
    return c == DriftConvention::TraceConserving ? "trace_conserving" : "as_published";
}

DriftConvention drift_convention_from_string(std::string_view s) {
    if (s == "trace_conserving") return DriftConvention::TraceConserving;
    if (s == "as_published") return DriftConvention::AsPublished;
    throw ConfigError("unknown drift convention '" + std::string(s) + "'");
}

std::vector<double> log_lambda_grid(int N, double n_lambda_min, double n_lambda_max, std::size_t points) {
    if (N < 1 || !(n_lambda_min > 0.0) || !(n_lambda_max > n_lambda_min) || points < 2)
        throw ConfigError("log_lambda_grid: need N >= 1, 0 < min < max and >= 2 points");
    std::vector<double> grid{0.0};
    const double a = std::log(n_lambda_min), b = std::log(n_lambda_max);
    for (std::size_t k = 0; k < points; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(points - 1);
        grid.push_back(std::exp(a + t * (b - a)) / N);
    }
    return grid;
}

std::vector<double> init_lambda(const LangevinConfig& config) {
    const int na = config.N_A;
    if (na < 1 || config.N_B < 1) throw ConfigError("init_lambda: dimensions must be positive");
    std::vector<double> l;
    switch (config.init.kind) {
        case InitCondition::Kind::Uniform:
            l.assign(static_cast<std::size_t>(na), 1.0 / na);
            return l;
        case InitCondition::Kind::WeakSeparability: {
            const double q = config.init.q;
            if (!(q > 1.0)) throw ConfigError("init_lambda: weak separability needs q > 1");
            l.assign(static_cast<std::size_t>(na), std::pow(na, -(q + 1.0)));
            l[0] = 1.0 - std::pow(na, -q);
            break;
        }
        case InitCondition::Kind::Custom:
            l = config.init.custom;
            if (l.size() != static_cast<std::size_t>(na)) throw ConfigError("init_lambda: custom vector needs N_A entries");
            if (std::any_of(l.begin(), l.end(), [](double x) { return !(x >= 0.0); }))
                throw ConfigError("init_lambda: custom vector has negative entries");
            if (std::abs(std::accumulate(l.begin(), l.end(), 0.0) - 1.0) > 1e-9)
                throw ConfigError("init_lambda: custom vector must sum to 1");
            break;
    }
    const double s = std::accumulate(l.begin(), l.end(), 0.0);
    for (double& x : l) x /= s;
    std::sort(l.begin(), l.end(), std::greater<>());
    return l;
}

double nu_parameter(int N_A, int N_B, DriftConvention c) {
    return c == DriftConvention::AsPublished ? 0.5 * (N_A - N_B - 1) : 0.5 * (N_B - N_A + 1);
}

Eigen::VectorXd drift(std::span<const double> lambdas, int N_A, int N_B, int beta, DriftConvention c) {
    const auto n = static_cast<Eigen::Index>(lambdas.size());
    const double nu = nu_parameter(N_A, N_B, c), eta = eta_parameter(N_A, N_B);
    Eigen::VectorXd a(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double li = lambdas[static_cast<std::size_t>(i)];
        double pair = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double lj = lambdas[static_cast<std::size_t>(j)];
            const double gap = li - lj;
            pair += std::abs(gap) <= 1e-9 * (li + lj) ? 0.5 : li / gap;
        }
        a(i) = beta * (pair + nu - eta * li);
    }
    return a;
}

Eigen::MatrixXd diffusion_matrix(std::span<const double> lambdas) {
    const Eigen::Map<const Eigen::VectorXd> l(lambdas.data(), static_cast<Eigen::Index>(lambdas.size()));
    Eigen::MatrixXd d = -l * l.transpose();
    d.diagonal() += l;
    return d;
}

Eigen::VectorXd apply_noise_factor(std::span<const double> lambdas, const Eigen::VectorXd& xi) {
    const auto n = static_cast<Eigen::Index>(lambdas.size());
    Eigen::VectorXd out(n);
    double proj = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i) = std::sqrt(std::max(lambdas[static_cast<std::size_t>(i)], 0.0)) * xi(i);
        proj += out(i);
    }
    for (Eigen::Index i = 0; i < n; ++i) out(i) -= lambdas[static_cast<std::size_t>(i)] * proj;
    return out;
}

StepResult step(std::span<const double> lambdas, double d_lambda, Rng& rng, const StepParams& p) {
    if (!(d_lambda >= 0.0)) throw std::invalid_argument("step: d_lambda must be >= 0");
    StepResult res{std::vector<double>(lambdas.begin(), lambdas.end()), d_lambda, 0};
    if (d_lambda == 0.0) return res;

    const auto n = static_cast<Eigen::Index>(lambdas.size());
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd xi(n);
    for (Eigen::Index i = 0; i < n; ++i) xi(i) = gauss(rng);

    const Eigen::VectorXd a = drift(lambdas, p.N_A, p.N_B, p.beta, p.convention);
    const Eigen::VectorXd noise = apply_noise_factor(lambdas, xi);

    double dt = d_lambda;
    for (;;) {
        bool ok = true;
        const double s = std::sqrt(2.0 * dt);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double li = lambdas[static_cast<std::size_t>(i)];
            const double x = li + a(i) * dt + s * noise(i);
            if (x < -10.0 * (std::sqrt(2.0 * std::max(li, 0.0) * dt) + dt)) {
                ok = false;
                break;
            }
            res.lambdas[static_cast<std::size_t>(i)] = x;
        }
        if (ok) break;
        if (++res.halvings > 40) throw NumericalError("step: blow-up guard exhausted 40 halvings");
        dt *= 0.5;
    }
    res.d_lambda_used = dt;

    double sum = 0.0;
    for (double& x : res.lambdas) {
        x = std::max(x, 0.0);
        sum += x;
    }
    if (!(sum > 0.0)) throw NumericalError("step: all eigenvalues clipped to zero");
    for (double& x : res.lambdas) x /= sum;
    std::sort(res.lambdas.begin(), res.lambdas.end(), std::greater<>());
    return res;
}

std::vector<EntanglementRecord> LangevinResult::records(std::size_t k) const {
    const Eigen::MatrixXd& m = checkpoints.at(k);
    std::vector<EntanglementRecord> out;
    out.reserve(static_cast<std::size_t>(m.rows()));
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index t = 0; t < m.rows(); ++t) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(t, j);
        out.push_back(measures(row));
    }
    return out;
}

LangevinResult evolve(const LangevinConfig& config) {
    if (config.dyson_beta != 1 && config.dyson_beta != 2) throw ConfigError("evolve: Dyson index must be 1 or 2");
    if (config.ensemble_size < 2) throw ConfigError("evolve: ensemble needs at least 2 trajectories");
    if (config.lambda_grid.empty()) throw ConfigError("evolve: empty checkpoint grid");
    if (!(config.lambda_grid.front() >= 0.0) ||
        !std::is_sorted(config.lambda_grid.begin(), config.lambda_grid.end()))
        throw ConfigError("evolve: checkpoint grid must be ascending and >= 0");

    const int N = config.N();
    const double base = 2.0 / N;
    const double d_fixed = config.d_lambda > 0.0 ? config.d_lambda : 1e-5 * base;
    const double d_min = config.d_min > 0.0 ? config.d_min : 1e-5 * base;
    const double d_max = config.d_max > 0.0 ? config.d_max : 1e-3 * base;
    if (config.adaptive && !(d_min <= d_max)) throw ConfigError("evolve: d_min exceeds d_max");

    const std::vector<double> l0 = init_lambda(config);
    const StepParams sp{config.N_A, config.N_B, config.dyson_beta, config.convention};
    const std::size_t T = config.ensemble_size;
    const std::size_t K = config.lambda_grid.size();

    LangevinResult out;
    out.config = config;
    out.grid = config.lambda_grid;
    out.checkpoints.assign(K, Eigen::MatrixXd(static_cast<Eigen::Index>(T), config.N_A));
    out.raw_drift_sum_initial = drift(l0, config.N_A, config.N_B, config.dyson_beta, config.convention).sum();

    std::vector<std::uint64_t> steps(T, 0), halvings(T, 0);
    std::exception_ptr failure;
    std::size_t failed_traj = 0;

#pragma omp parallel for schedule(dynamic, 8)
    for (std::size_t t = 0; t < T; ++t) {
        try {
            Rng rng = make_rng(config.seed, t);
            std::vector<double> l = l0;
            double lam = 0.0;
            for (std::size_t k = 0; k < K;) {
                const double target = out.grid[k];
                const double remaining = target - lam;
                if (remaining <= 1e-14 * std::max(target, base)) {
                    for (int j = 0; j < config.N_A; ++j)
                        out.checkpoints[k](static_cast<Eigen::Index>(t), j) = l[static_cast<std::size_t>(j)];
                    ++k;
                    continue;
                }
                double dt = config.adaptive ? std::clamp(config.adaptive_fraction * lam, d_min, d_max) : d_fixed;
                const bool last = dt >= remaining;
                if (last) dt = remaining;
                StepResult r = step(l, dt, rng, sp);
                l = std::move(r.lambdas);
                lam = last && r.halvings == 0 ? target : lam + r.d_lambda_used;
                ++steps[t];
                halvings[t] += static_cast<std::uint64_t>(r.halvings);
            }
        } catch (...) {
#pragma omp critical(entflow_evolve_failure)
            if (!failure || t < failed_traj) {
                failure = std::current_exception();
                failed_traj = t;
            }
        }
    }
    if (failure) {
        try {
            std::rethrow_exception(failure);
        } catch (const std::exception& e) {
            throw NumericalError("evolve: trajectory " + std::to_string(failed_traj) + " failed: " + e.what());
        }
    }

    out.total_steps = std::accumulate(steps.begin(), steps.end(), std::uint64_t{0});
    out.total_halvings = std::accumulate(halvings.begin(), halvings.end(), std::uint64_t{0});
    out.stats.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        const auto recs = out.records(k);
        out.stats.push_back(ensemble_stats(recs));
    }
    return out;
}

double alpha_parameter(int N_A) { return 1.0 - 0.5 * N_A * (N_A + 1); }

double r1_ode_rhs(double mean_R1, double mean_R0, int N_A, int N_B) {
    return alpha_parameter(N_A) + 0.5 * N_B * mean_R0 - 0.5 * N_A * N_B * mean_R1;
}

double r1_closed_form(double lambda, int N, double alpha0) { return alpha0 * (1.0 - std::exp(-0.5 * N * lambda)); }

double var_ode_rhs(double var_R1, double mean_Q, double mean_R1_sq, double cov_R0_R1, int N_A, int N_B) {
    return 2.0 * (mean_Q - mean_R1_sq) + N_B * cov_R0_R1 - static_cast<double>(N_A) * N_B * var_R1;
}

double var_large_lambda(double lambda, int N, double q_minus_r1sq) {
    return 2.0 * q_minus_r1sq * (1.0 - std::exp(-N * lambda)) / N;
}

namespace {

// Raw power sums of one checkpoint over a set of trajectories.
struct Sums {
    double n = 0, r1 = 0, r11 = 0, r0 = 0, r01 = 0, q = 0;

    void add(const EntanglementRecord& e) {
        n += 1;
        r1 += e.R1;
        r11 += e.R1 * e.R1;
        r0 += e.R0;
        r01 += e.R0 * e.R1;
        q += e.Q;
    }
    Sums operator-(const Sums& o) const { return {n - o.n, r1 - o.r1, r11 - o.r11, r0 - o.r0, r01 - o.r01, q - o.q}; }

    double mean_r1() const { return r1 / n; }
    double mean_r0() const { return r0 / n; }
    double mean_q() const { return q / n; }
    double mean_r1sq() const { return r11 / n; }
    double var_r1() const { return (r11 - r1 * r1 / n) / (n - 1); }
    double cov() const { return (r01 - r0 * r1 / n) / (n - 1); }
};

double mean_residual(const Sums& a, const Sums& b, double dl, int na, int nb) {
    const double fd = (b.mean_r1() - a.mean_r1()) / dl;
    const double rhs = 0.5 * (r1_ode_rhs(a.mean_r1(), a.mean_r0(), na, nb) + r1_ode_rhs(b.mean_r1(), b.mean_r0(), na, nb));
    return fd - rhs;
}

double var_rhs(const Sums& s, int na, int nb) {
    return var_ode_rhs(s.var_r1(), s.mean_q(), s.mean_r1sq(), s.cov(), na, nb);
}

double var_residual(const Sums& a, const Sums& b, double dl, int na, int nb) {
    const double fd = (b.var_r1() - a.var_r1()) / dl;
    return fd - 0.5 * (var_rhs(a, na, nb) + var_rhs(b, na, nb));
}

}  // namespace

OdeResiduals ode_residuals(const LangevinResult& result, std::size_t blocks) {
    const std::size_t K = result.grid.size();
    const int na = result.config.N_A, nb = result.config.N_B;
    if (K < 2) throw std::invalid_argument("ode_residuals: needs at least 2 checkpoints");
    const auto T = static_cast<std::size_t>(result.checkpoints.front().rows());
    if (blocks < 2 || T < 2 * blocks) throw std::invalid_argument("ode_residuals: too few trajectories for the jackknife");

    // Block sums per checkpoint.
    std::vector<std::vector<Sums>> block_sums(K, std::vector<Sums>(blocks));
    std::vector<Sums> totals(K);
    for (std::size_t k = 0; k < K; ++k) {
        const auto recs = result.records(k);
        for (std::size_t t = 0; t < T; ++t) {
            block_sums[k][t * blocks / T].add(recs[t]);
            totals[k].add(recs[t]);
        }
    }

    const double bf = static_cast<double>(blocks);
    auto jackknife = [&](std::size_t k, auto&& stat, double dl) {
        std::vector<double> th(blocks);
        double mean = 0.0;
        for (std::size_t j = 0; j < blocks; ++j) {
            th[j] = stat(totals[k] - block_sums[k][j], totals[k + 1] - block_sums[k + 1][j], dl, na, nb);
            mean += th[j] / bf;
        }
        double ss = 0.0;
        for (double x : th) ss += (x - mean) * (x - mean);
        return std::sqrt((bf - 1.0) / bf * ss);
    };

    OdeResiduals out;
    for (std::size_t k = 0; k + 1 < K; ++k) {
        const double dl = result.grid[k + 1] - result.grid[k];
        if (!(dl > 0.0)) continue;
        const Sums& a = totals[k];
        const Sums& b = totals[k + 1];
        const double mid = 0.5 * (result.grid[k] + result.grid[k + 1]);

        OdeResidual m;
        m.lambda_mid = mid;
        m.finite_difference = (b.mean_r1() - a.mean_r1()) / dl;
        m.rhs = m.finite_difference - mean_residual(a, b, dl, na, nb);
        m.se = jackknife(k, mean_residual, dl);
        out.mean_R1.push_back(m);

        OdeResidual v;
        v.lambda_mid = mid;
        v.finite_difference = (b.var_r1() - a.var_r1()) / dl;
        v.rhs = v.finite_difference - var_residual(a, b, dl, na, nb);
        v.se = jackknife(k, var_residual, dl);
        out.var_R1.push_back(v);
    }
    return out;
}

}  // namespace entflow
