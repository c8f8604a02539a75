// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file records.hpp
 * @brief On-disk formats: per-state JSONL records and CSV curve tables.
 *
 * JSONL stream layout, one JSON object per line:
 *   {"type":"header","format":"entflow.records","version":1,"config":{...}}
 *   {"type":"record", ...}            one per (realization, selected state)
 *   {"type":"cell_done", ...}         closes a (L, params) group
 *
 * CSV tables start with a comment line "# format=<name> version=1"
 * followed by a column header.
 */

#pragma once

#include "entflow/models.hpp"
#include "entflow/schmidt_dynamics.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace entflow {

inline constexpr int kRecordsVersion = 1;
inline constexpr const char* kRecordsFormat = "entflow.records";
inline constexpr const char* kCurvesFormat = "entflow.curves";
inline constexpr const char* kLangevinFormat = "entflow.langevin";
inline constexpr const char* kHistogramFormat = "entflow.hist";

struct ExperimentRecord {
    std::string model;
    int L = 0;
    std::size_t N = 0;
    nlohmann::json params;  ///< {"b"} or {"h","D","J","boundary"}
    double gamma = 0.0;
    double E_target = 0.0;
    std::size_t realization_index = 0;
    std::size_t state_index = 0;  ///< position in the full spectrum
    double energy = 0.0;
    double R1 = 0.0;
    double R0 = 0.0;
    double Q = 0.0;
    double renyi2 = 0.0;
    std::string log_base = "e";   ///< base of R1 and renyi2
    double delta_e = 0.0;         ///< cell mean level spacing entering Lambda
    double delta_e_realization = 0.0;
    double ipr_paper = 0.0;       ///< cell mean entering Lambda
    double ipr_std = 0.0;         ///< cell mean, standard normalization
    double ipr_state = 0.0;       ///< this state, standard normalization
    double omega_e = 0.0;
    std::string estimator_name;
    double y_minus_y0 = 0.0;
    std::string y_prefactor;      ///< "1/(2(N+1)gamma)" or "1/gamma"
    double lambda = 0.0;
    double n_lambda = 0.0;
    std::string chi0_recipe;
    double chi0_a = 0.0, chi0_b = 0.0, chi0_c = 0.0;
    std::uint64_t seed_used = 0;
};

nlohmann::json to_json(const ExperimentRecord& r);
ExperimentRecord record_from_json(const nlohmann::json& j);

/// Contents of a records file. Lines of other types are skipped;
/// unparsable lines raise ConfigError with the line number.
struct RecordFile {
    nlohmann::json header;
    std::vector<ExperimentRecord> records;
    std::vector<nlohmann::json> cells_done;
};
RecordFile read_records(const std::string& path);

struct CurvePoint {
    double x = 0.0;
    std::size_t count = 0;
    double mean = 0.0;
    double se_mean = 0.0;
    double var = 0.0;
    double se_var = 0.0;
    double mean_normalized = 0.0;  ///< mean / max over the curve
};

struct Curve {
    std::string label;
    std::vector<CurvePoint> points;
};

void write_curves_csv(std::ostream& os, const std::vector<Curve>& curves, const std::string& x_name = "N_Lambda");
std::vector<Curve> read_curves_csv(std::istream& is);

/// Columns Lambda, N_Lambda, mean_R1, var_R1, mean_R0, Q, cov_R0_R1 plus
/// standard errors and the closed-form references. Entropies in `base`.
void write_langevin_csv(std::ostream& os, const LangevinResult& result, LogBase base = LogBase::E);

}  // namespace entflow
