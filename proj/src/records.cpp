// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "entflow/records.hpp"

#include "entflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace entflow {

using nlohmann::json;

json to_json(const ExperimentRecord& r) {
    json j;
    j["type"] = "record";
    j["model"] = r.model;
    j["L"] = r.L;
    j["N"] = r.N;
    j["params"] = r.params;
    j["gamma"] = r.gamma;
    j["E_target"] = r.E_target;
    j["realization_index"] = r.realization_index;
    j["state_index"] = r.state_index;
    j["energy"] = r.energy;
    j["R1"] = r.R1;
    j["R0"] = r.R0;
    j["Q"] = r.Q;
    j["renyi2"] = r.renyi2;
    j["log_base"] = r.log_base;
    j["delta_e"] = r.delta_e;
    j["delta_e_realization"] = r.delta_e_realization;
    j["ipr_paper"] = r.ipr_paper;
    j["ipr_std"] = r.ipr_std;
    j["ipr_state"] = r.ipr_state;
    j["omega_e"] = r.omega_e;
    j["estimator_name"] = r.estimator_name;
    j["y_minus_y0"] = r.y_minus_y0;
    j["y_prefactor"] = r.y_prefactor;
    j["lambda"] = r.lambda;
    j["n_lambda"] = r.n_lambda;
    j["chi0_recipe"] = r.chi0_recipe;
    j["chi0_exponents"] = {r.chi0_a, r.chi0_b, r.chi0_c};
    j["seed_used"] = r.seed_used;
    return j;
}

ExperimentRecord record_from_json(const json& j) {
    ExperimentRecord r;
    j.at("model").get_to(r.model);
    j.at("L").get_to(r.L);
    j.at("N").get_to(r.N);
    r.params = j.at("params");
    j.at("gamma").get_to(r.gamma);
    j.at("E_target").get_to(r.E_target);
    j.at("realization_index").get_to(r.realization_index);
    j.at("state_index").get_to(r.state_index);
    j.at("energy").get_to(r.energy);
    j.at("R1").get_to(r.R1);
    j.at("R0").get_to(r.R0);
    j.at("Q").get_to(r.Q);
    j.at("renyi2").get_to(r.renyi2);
    j.at("log_base").get_to(r.log_base);
    j.at("delta_e").get_to(r.delta_e);
    j.at("delta_e_realization").get_to(r.delta_e_realization);
    j.at("ipr_paper").get_to(r.ipr_paper);
    j.at("ipr_std").get_to(r.ipr_std);
    j.at("ipr_state").get_to(r.ipr_state);
    j.at("omega_e").get_to(r.omega_e);
    j.at("estimator_name").get_to(r.estimator_name);
    j.at("y_minus_y0").get_to(r.y_minus_y0);
    j.at("y_prefactor").get_to(r.y_prefactor);
    j.at("lambda").get_to(r.lambda);
    j.at("n_lambda").get_to(r.n_lambda);
    j.at("chi0_recipe").get_to(r.chi0_recipe);
    const auto& e = j.at("chi0_exponents");
    r.chi0_a = e.at(0).get<double>();
    r.chi0_b = e.at(1).get<double>();
    r.chi0_c = e.at(2).get<double>();
    j.at("seed_used").get_to(r.seed_used);
    return r;
}

RecordFile read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open records file '" + path + "'");
    RecordFile out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            const std::string type = j.value("type", "");
            if (type == "header") {
                if (j.value("format", "") != kRecordsFormat) throw ConfigError("not an entflow records file");
                if (j.value("version", 0) != kRecordsVersion) throw ConfigError("unsupported records version");
                out.header = j;
            } else if (type == "record") {
                out.records.push_back(record_from_json(j));
            } else if (type == "cell_done") {
                out.cells_done.push_back(j);
            }
        } catch (const json::exception& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (out.header.is_null()) throw ConfigError("records file '" + path + "' has no header line");
    return out;
}

namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void write_curves_csv(std::ostream& os, const std::vector<Curve>& curves, const std::string& x_name) {
    os << "# format=" << kCurvesFormat << " version=1\n";
    os << "label," << x_name << ",count,mean,se_mean,var,se_var,mean_normalized\n";
    os << std::setprecision(17);
    for (const auto& c : curves)
        for (const auto& p : c.points)
            os << csv_quote(c.label) << ',' << p.x << ',' << p.count << ',' << p.mean << ',' << p.se_mean << ','
               << p.var << ',' << p.se_var << ',' << p.mean_normalized << '\n';
}

std::vector<Curve> read_curves_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind(std::string("# format=") + kCurvesFormat, 0) != 0)
        throw ConfigError("curves file: missing '# format=entflow.curves' line");
    if (!std::getline(is, line)) throw ConfigError("curves file: missing column header");
    const auto cols = csv_split(line);
    if (cols.size() != 8 || cols[0] != "label") throw ConfigError("curves file: unexpected columns");

    std::vector<Curve> curves;
    std::size_t lineno = 2;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = csv_split(line);
        if (f.size() != 8) throw ConfigError("curves file line " + std::to_string(lineno) + ": expected 8 fields");
        CurvePoint p;
        try {
            p.x = std::stod(f[1]);
            p.count = static_cast<std::size_t>(std::stoull(f[2]));
            p.mean = std::stod(f[3]);
            p.se_mean = std::stod(f[4]);
            p.var = std::stod(f[5]);
            p.se_var = std::stod(f[6]);
            p.mean_normalized = std::stod(f[7]);
        } catch (const std::exception&) {
            throw ConfigError("curves file line " + std::to_string(lineno) + ": bad number");
        }
        if (curves.empty() || curves.back().label != f[0]) curves.push_back({f[0], {}});
        curves.back().points.push_back(p);
    }
    return curves;
}

void write_langevin_csv(std::ostream& os, const LangevinResult& result, LogBase base) {
    const auto& c = result.config;
    const int N = c.N();
    const double s = base == LogBase::Two ? 1.0 / std::log(2.0) : 1.0;
    const double page = std::log(static_cast<double>(c.N_A)) - 0.5 * c.N_A / c.N_B;

    os << "# format=" << kLangevinFormat << " version=1 N_A=" << c.N_A << " N_B=" << c.N_B
       << " trajectories=" << c.ensemble_size << " drift=" << to_string(c.convention) << " seed=" << c.seed
       << " R1_base=" << to_string(base) << " raw_drift_sum=" << std::setprecision(17) << result.raw_drift_sum_initial
       << "\n";
    os << "Lambda,N_Lambda,mean_R1,var_R1,mean_R0,Q,cov_R0_R1,q_minus_r1sq,se_mean_R1,se_var_R1,se_mean_R0,se_Q,"
          "se_cov,closed_form_R1,var_large_lambda\n";
    for (std::size_t k = 0; k < result.grid.size(); ++k) {
        const auto& st = result.stats[k];
        const double lam = result.grid[k];
        os << lam << ',' << N * lam << ',' << st.mean_R1 * s << ',' << st.var_R1 * s * s << ',' << st.mean_R0 << ','
           << st.mean_Q << ',' << st.cov_R0_R1 << ',' << st.q_minus_r1sq() << ',' << st.se_mean_R1 * s << ','
           << st.se_var_R1 * s * s << ',' << st.se_mean_R0 << ',' << st.se_mean_Q << ',' << st.se_cov << ','
           << r1_closed_form(lam, N, page) * s << ',' << var_large_lambda(lam, N, st.q_minus_r1sq()) * s * s << '\n';
    }
}

}  // namespace entflow
