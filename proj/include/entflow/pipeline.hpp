// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file pipeline.hpp
 * @brief Parameter sweeps: sample, diagonalize, window, entangle, score.
 *
 * A group is one (L, parameter point); every realization of a group is
 * diagonalized once and reused for all target energies E. A cell is a
 * (group, E) pair and carries one Omega_e and one Lambda. Output is written
 * group by group and each group is closed by a cell_done line, which is
 * also the unit of resumption.
 */

#pragma once

#include "entflow/complexity.hpp"
#include "entflow/entangle.hpp"
#include "entflow/models.hpp"
#include "entflow/records.hpp"
#include "entflow/schmidt_dynamics.hpp"
#include "entflow/spectral.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace entflow {

struct RunConfig {
    Model model = Model::QREM;
    std::vector<int> L{8};
    std::vector<double> b;          ///< QREM sweep
    std::vector<double> h;          ///< RFHM sweep
    std::vector<double> D{1.0};     ///< RFHM sweep
    double J = 1.0;
    Boundary boundary = Boundary::Periodic;
    std::vector<double> E{0.0};
    std::size_t realizations = 50;
    std::uint64_t seed = 1;
    double gamma = 0.0;             ///< 0 selects 1/2 (QREM) or 1 (RFHM)
    LogBase log_base = LogBase::E;
    std::string chi0_recipe;        ///< empty selects the model default
    double chi0_a = 0.0, chi0_b = 0.0, chi0_c = 0.0;  ///< used when chi0_recipe == "custom"
    OmegaEstimator estimator = OmegaEstimator::AbsOverlap;
    WindowSize window = WindowSize::of_fraction(0.01, 2);
    double h0 = 10.0;               ///< RFHM reference disorder (Y = Y0)
    double D0 = 1.0;                ///< RFHM reference anisotropy
    int max_L = 12;

    double resolved_gamma() const;
    Chi0Recipe resolved_recipe() const;
};

/// Reads a config object; unknown keys raise ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);
/// Checks ranges and the desk-scale guard. Throws ConfigError.
void validate(const RunConfig& c);

struct Group {
    int L = 0;
    ModelParams params;
    nlohmann::json params_json;
    std::string key() const;
};

/// Groups in sweep order: L outermost, then D, then b or h.
std::vector<Group> groups(const RunConfig& c);

struct GroupResult {
    std::vector<ExperimentRecord> records;  ///< ordered by (E, realization, state)
    std::vector<std::size_t> failed;        ///< realizations skipped after a numerical failure
    std::vector<std::string> warnings;
};

/// Runs every realization of one group. Per-realization numerical failures
/// are collected, not thrown; a cell left with < 2 realizations throws.
GroupResult compute_group(const RunConfig& c, const Group& g);

struct RunSummary {
    std::size_t groups_total = 0;
    std::size_t groups_skipped = 0;  ///< already complete in the output file
    std::size_t records_written = 0;
    std::size_t failed_realizations = 0;
};

/// Appends to `out_path`, resuming after the last complete group when the
/// file exists with an identical header. Progress goes to `log` if given.
RunSummary run(const RunConfig& c, const std::string& out_path, std::ostream* log = nullptr);

/// Same sweep without touching disk.
std::vector<ExperimentRecord> run_in_memory(const RunConfig& c, std::ostream* log = nullptr);

/// Reads the "langevin" block of a config file. Keys: N_A, N_B, dyson_beta,
/// convention, init ("weak_separability" | "uniform" | array), q,
/// trajectories, seed, n_lambda_min, n_lambda_max, points, adaptive,
/// d_lambda, d_min, d_max, adaptive_fraction.
LangevinConfig langevin_config_from_json(const nlohmann::json& j);

/// Header line of a records file for this config.
nlohmann::json records_header(const RunConfig& c);

}  // namespace entflow
