// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "entflow/pipeline.hpp"

#include "entflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <string>

namespace entflow {

using nlohmann::json;

double RunConfig::resolved_gamma() const {
    if (gamma > 0.0) return gamma;
    return model == Model::RFHM ? 1.0 : 0.5;
}

Chi0Recipe RunConfig::resolved_recipe() const {
    if (chi0_recipe.empty()) return default_recipe(model);
    if (chi0_recipe == "custom") return Chi0Recipe::custom(chi0_a, chi0_b, chi0_c);
    return chi0_recipe_from_string(chi0_recipe);
}

namespace {

template <class T>
std::vector<T> scalar_or_array(const json& j) {
    if (j.is_array()) return j.get<std::vector<T>>();
    return {j.get<T>()};
}

const std::set<std::string> kRunKeys = {
    "model", "L", "b", "h", "D", "J", "boundary", "E", "realizations", "seed", "gamma", "log_base", "chi0_recipe",
    "omega_estimator", "window", "h0", "D0", "max_L",
    // Read by other subcommands or ignored.
    "langevin", "out", "comment"};

}  // namespace

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!kRunKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
    RunConfig c;
    try {
        if (j.contains("model")) c.model = model_from_string(j["model"].get<std::string>());
        if (j.contains("L")) c.L = scalar_or_array<int>(j["L"]);
        if (j.contains("b")) c.b = scalar_or_array<double>(j["b"]);
        if (j.contains("h")) c.h = scalar_or_array<double>(j["h"]);
        if (j.contains("D")) c.D = scalar_or_array<double>(j["D"]);
        if (j.contains("J")) c.J = j["J"].get<double>();
        if (j.contains("boundary")) c.boundary = boundary_from_string(j["boundary"].get<std::string>());
        if (j.contains("E")) c.E = scalar_or_array<double>(j["E"]);
        if (j.contains("realizations")) c.realizations = j["realizations"].get<std::size_t>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
        if (j.contains("log_base")) {
            const auto& v = j["log_base"];
            c.log_base = log_base_from_string(v.is_number() ? std::to_string(v.get<int>()) : v.get<std::string>());
        }
        if (j.contains("chi0_recipe")) {
            const auto& r = j["chi0_recipe"];
            if (r.is_object()) {
                c.chi0_recipe = "custom";
                c.chi0_a = r.value("a", 0.0);
                c.chi0_b = r.value("b", 0.0);
                c.chi0_c = r.value("c", 0.0);
            } else {
                c.chi0_recipe = r.get<std::string>();
            }
        }
        if (j.contains("omega_estimator"))
            c.estimator = omega_estimator_from_string(j["omega_estimator"].get<std::string>());
        if (j.contains("window")) {
            const auto& w = j["window"];
            if (w.contains("count"))
                c.window = WindowSize::of_count(w["count"].get<std::size_t>());
            else
                c.window = WindowSize::of_fraction(w.value("fraction", 0.01), w.value("min_count", std::size_t{2}));
        }
        if (j.contains("h0")) c.h0 = j["h0"].get<double>();
        if (j.contains("D0")) c.D0 = j["D0"].get<double>();
        if (j.contains("max_L")) c.max_L = j["max_L"].get<int>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

json to_json(const RunConfig& c) {
    json j;
    j["model"] = std::string(to_string(c.model));
    j["L"] = c.L;
    if (c.model == Model::QREM) {
        j["b"] = c.b;
    } else {
        j["h"] = c.h;
        j["D"] = c.D;
        j["J"] = c.J;
        j["boundary"] = std::string(to_string(c.boundary));
        j["h0"] = c.h0;
        j["D0"] = c.D0;
    }
    j["E"] = c.E;
    j["realizations"] = c.realizations;
    j["seed"] = c.seed;
    j["gamma"] = c.resolved_gamma();
    j["log_base"] = std::string(to_string(c.log_base));
    const Chi0Recipe r = c.resolved_recipe();
    if (r.name == "custom")
        j["chi0_recipe"] = {{"a", r.a}, {"b", r.b}, {"c", r.c}};
    else
        j["chi0_recipe"] = r.name;
    j["omega_estimator"] = std::string(to_string(c.estimator));
    if (c.window.count > 0)
        j["window"] = {{"count", c.window.count}};
    else
        j["window"] = {{"fraction", c.window.fraction}, {"min_count", c.window.min_count}};
    j["max_L"] = c.max_L;
    return j;
}

void validate(const RunConfig& c) {
    if (c.model == Model::GenericGaussian)
        throw ConfigError("run: sweeps support QREM and RFHM; generic ensembles are sampled through the library");
    if (c.L.empty()) throw ConfigError("run: no system sizes");
    for (int L : c.L)
        if (L > c.max_L)
            throw ConfigError("run: L = " + std::to_string(L) + " exceeds the desk-scale limit max_L = " +
                              std::to_string(c.max_L));
    if (c.E.empty()) throw ConfigError("run: no target energies");
    if (c.realizations < 2) throw ConfigError("run: Omega_e needs at least 2 realizations");
    if (c.model == Model::QREM && c.b.empty()) throw ConfigError("run: QREM sweep needs a b grid");
    if (c.model == Model::RFHM) {
        if (c.h.empty() || c.D.empty()) throw ConfigError("run: RFHM sweep needs h and D grids");
        for (double h : c.h)
            if (!(h > 0.0)) throw ConfigError("run: RFHM h must be > 0");
        for (double d : c.D)
            if (!(d > 0.0)) throw ConfigError("run: RFHM D must be > 0");
        if (!(c.h0 > 0.0 && c.D0 > 0.0)) throw ConfigError("run: h0 and D0 must be > 0");
    }
    if (c.window.count == 0 && !(c.window.fraction > 0.0)) throw ConfigError("run: window fraction must be > 0");
    (void)c.resolved_recipe();
}

std::string Group::key() const { return json{{"L", L}, {"params", params_json}}.dump(); }

std::vector<Group> groups(const RunConfig& c) {
    std::vector<Group> out;
    for (int L : c.L) {
        if (c.model == Model::QREM) {
            for (double b : c.b) {
                Group g;
                g.L = L;
                g.params.b = b;
                g.params_json = {{"b", b}};
                out.push_back(std::move(g));
            }
        } else {
            for (double D : c.D)
                for (double h : c.h) {
                    Group g;
                    g.L = L;
                    g.params.h = h;
                    g.params.D = D;
                    g.params.J = c.J;
                    g.params.boundary = c.boundary;
                    g.params_json = {{"h", h}, {"D", D}, {"J", c.J}, {"boundary", std::string(to_string(c.boundary))}};
                    out.push_back(std::move(g));
                }
        }
    }
    return out;
}

namespace {

struct StateResult {
    std::size_t state_index = 0;
    double energy = 0.0;
    EntanglementRecord ent;
    double ipr_state = 0.0;
};

struct RealizationResult {
    bool ok = false;
    std::string error;
    std::exception_ptr fatal;
    std::uint64_t seed_used = 0;
    std::vector<EigenWindow> windows;            ///< one per E
    std::vector<std::vector<StateResult>> states;  ///< one list per E
};

}  // namespace

GroupResult compute_group(const RunConfig& c, const Group& g) {
    const double gamma = c.resolved_gamma();
    const EnsembleSpec spec = build_spec(c.model, g.L, g.params, gamma, c.seed);
    const Chi0Recipe recipe = c.resolved_recipe();
    const std::size_t R = c.realizations;
    const std::size_t nE = c.E.size();
    const double alphas[] = {2.0};

    double y = 0.0;
    std::string prefactor;
    if (c.model == Model::QREM) {
        y = y_qrem(g.params.b, g.L, gamma);
        prefactor = "1/(2(N+1)gamma)";
    } else {
        y = y_rfhm(g.params.h, g.params.D, c.h0, c.D0, gamma);
        prefactor = "1/gamma";
        if (y < 0.0) throw ConfigError("run: Y - Y0 < 0; h0 must be >= every h and D >= D0");
    }

    std::vector<RealizationResult> res(R);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t r = 0; r < R; ++r) {
        RealizationResult& out = res[r];
        try {
            const HamiltonianSample s = sample(spec, r);
            out.seed_used = s.seed_used;
            const Eigensystem es = diagonalize(s);
            for (std::size_t e = 0; e < nE; ++e) {
                EigenWindow w = select_window(es, c.E[e], c.window);
                std::vector<StateResult> states;
                for (std::size_t k = 0; k < w.N_f; ++k) {
                    const auto col = w.eigenvectors.col(static_cast<Eigen::Index>(k));
                    const std::span<const double> psi(col.data(), static_cast<std::size_t>(col.size()));
                    const StateMatrix C = state_matrix(psi, s.basis);
                    const SchmidtSpectrum sp = schmidt_spectrum(C);
                    StateResult st;
                    st.state_index = w.indices[k];
                    st.energy = w.eigenvalues(static_cast<Eigen::Index>(k));
                    st.ent = measures(sp.lambdas, c.log_base, alphas);
                    st.ipr_state = w.ipr_states[k].standard;
                    states.push_back(std::move(st));
                }
                out.windows.push_back(std::move(w));
                out.states.push_back(std::move(states));
            }
            out.ok = true;
        } catch (const ConfigError&) {
            out.fatal = std::current_exception();
        } catch (const NumericalError& e) {
            out.error = e.what();
        } catch (const std::invalid_argument& e) {
            // Normalization checks downstream of the solver.
            out.error = e.what();
        } catch (...) {
            out.fatal = std::current_exception();
        }
    }
    for (const auto& r : res)
        if (r.fatal) std::rethrow_exception(r.fatal);

    GroupResult gr;
    for (std::size_t r = 0; r < R; ++r)
        if (!res[r].ok) {
            gr.failed.push_back(r);
            gr.warnings.push_back("realization " + std::to_string(r) + " skipped: " + res[r].error);
        }
    if (auto m = recipe_mismatch(c.model, recipe)) gr.warnings.push_back(*m);

    for (std::size_t e = 0; e < nE; ++e) {
        std::vector<EigenWindow> ws;
        double delta = 0.0, ipr_p = 0.0, ipr_s = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
            if (!res[r].ok) continue;
            ws.push_back(res[r].windows[e]);
            delta += res[r].windows[e].delta_e;
            ipr_p += res[r].windows[e].ipr_paper;
            ipr_s += res[r].windows[e].ipr_std;
        }
        if (ws.size() < 2)
            throw NumericalError("run: fewer than 2 usable realizations for L = " + std::to_string(g.L) + ", " +
                                 g.params_json.dump());
        const double n = static_cast<double>(ws.size());
        delta /= n;
        ipr_p /= n;
        ipr_s /= n;
        const double omega = omega_e(ws, c.estimator);
        const ComplexityPoint p = lambda_psi({y, delta, omega, ipr_p, spec.N}, recipe);

        for (std::size_t r = 0; r < R; ++r) {
            if (!res[r].ok) continue;
            for (const auto& st : res[r].states[e]) {
                ExperimentRecord rec;
                rec.model = std::string(to_string(c.model));
                rec.L = g.L;
                rec.N = spec.N;
                rec.params = g.params_json;
                rec.gamma = gamma;
                rec.E_target = c.E[e];
                rec.realization_index = r;
                rec.state_index = st.state_index;
                rec.energy = st.energy;
                rec.R1 = st.ent.R1;
                rec.R0 = st.ent.R0;
                rec.Q = st.ent.Q;
                rec.renyi2 = st.ent.renyi.at(2.0);
                rec.log_base = std::string(to_string(c.log_base));
                rec.delta_e = delta;
                rec.delta_e_realization = res[r].windows[e].delta_e;
                rec.ipr_paper = ipr_p;
                rec.ipr_std = ipr_s;
                rec.ipr_state = st.ipr_state;
                rec.omega_e = omega;
                rec.estimator_name = std::string(to_string(c.estimator));
                rec.y_minus_y0 = y;
                rec.y_prefactor = prefactor;
                rec.lambda = p.lambda;
                rec.n_lambda = p.n_lambda;
                rec.chi0_recipe = recipe.name;
                rec.chi0_a = recipe.a;
                rec.chi0_b = recipe.b;
                rec.chi0_c = recipe.c;
                rec.seed_used = res[r].seed_used;
                gr.records.push_back(std::move(rec));
            }
        }
    }
    return gr;
}

LangevinConfig langevin_config_from_json(const json& j) {
    static const std::set<std::string> keys = {"N_A", "N_B", "dyson_beta", "convention", "init", "q",
                                               "trajectories", "seed", "n_lambda_min", "n_lambda_max", "points",
                                               "adaptive", "d_lambda", "d_min", "d_max", "adaptive_fraction"};
    if (!j.is_object()) throw ConfigError("langevin config must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!keys.count(key)) throw ConfigError("unknown langevin key '" + key + "'");
    LangevinConfig c;
    try {
        c.N_A = j.value("N_A", 8);
        c.N_B = j.value("N_B", c.N_A);
        c.dyson_beta = j.value("dyson_beta", 1);
        if (j.contains("convention")) c.convention = drift_convention_from_string(j["convention"].get<std::string>());
        const double q = j.value("q", 2.0);
        c.init = InitCondition::weak_separability(q);
        if (j.contains("init")) {
            const auto& i = j["init"];
            if (i.is_array())
                c.init = InitCondition::from(i.get<std::vector<double>>());
            else if (i.get<std::string>() == "uniform")
                c.init = InitCondition::uniform();
            else if (i.get<std::string>() != "weak_separability")
                throw ConfigError("langevin: unknown init '" + i.get<std::string>() + "'");
        }
        c.ensemble_size = j.value("trajectories", std::size_t{2000});
        c.seed = j.value("seed", std::uint64_t{1});
        c.adaptive = j.value("adaptive", true);
        c.d_lambda = j.value("d_lambda", 0.0);
        c.d_min = j.value("d_min", 0.0);
        c.d_max = j.value("d_max", 0.0);
        c.adaptive_fraction = j.value("adaptive_fraction", 0.01);
        if (c.N_A < 1 || c.N_B < 1) throw ConfigError("langevin: N_A and N_B must be positive");
        c.lambda_grid = log_lambda_grid(c.N(), j.value("n_lambda_min", 2e-3), j.value("n_lambda_max", 40.0),
                                        j.value("points", std::size_t{60}));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("langevin config: ") + e.what());
    }
    return c;
}

json records_header(const RunConfig& c) {
    return {{"type", "header"}, {"format", kRecordsFormat}, {"version", kRecordsVersion}, {"config", to_json(c)}};
}

RunSummary run(const RunConfig& c, const std::string& out_path, std::ostream* log) {
    validate(c);
    const auto gs = groups(c);
    const std::string header = records_header(c).dump();

    std::set<std::string> done;
    std::uintmax_t keep_bytes = 0;
    bool fresh = true;
    if (std::filesystem::exists(out_path) && std::filesystem::file_size(out_path) > 0) {
        std::ifstream in(out_path, std::ios::binary);
        std::string line;
        std::uintmax_t offset = 0;
        bool first = true;
        while (std::getline(in, line)) {
            const bool complete = !in.eof();
            offset += line.size() + (complete ? 1 : 0);
            if (first) {
                if (line != header)
                    throw ConfigError("run: '" + out_path + "' was written with a different config; refusing to resume");
                keep_bytes = offset;
                first = false;
                continue;
            }
            if (!complete) break;  // torn final line
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception&) {
                break;
            }
            if (j.value("type", "") == "cell_done") {
                done.insert(json{{"L", j.at("L")}, {"params", j.at("params")}}.dump());
                keep_bytes = offset;
            }
        }
        fresh = first;
    }
    if (!fresh) std::filesystem::resize_file(out_path, keep_bytes);

    std::ofstream out(out_path, fresh ? std::ios::trunc : std::ios::app);
    if (!out) throw ConfigError("run: cannot open '" + out_path + "' for writing");
    if (fresh) out << header << '\n';

    RunSummary sum;
    sum.groups_total = gs.size();
    for (std::size_t i = 0; i < gs.size(); ++i) {
        const auto& g = gs[i];
        if (done.count(g.key())) {
            ++sum.groups_skipped;
            continue;
        }
        const GroupResult gr = compute_group(c, g);
        for (const auto& r : gr.records) out << to_json(r).dump() << '\n';
        json marker = {{"type", "cell_done"}, {"L", g.L},           {"params", g.params_json},
                       {"records", gr.records.size()}, {"failed", gr.failed}};
        out << marker.dump() << '\n';
        out.flush();
        if (!out) throw NumericalError("run: write to '" + out_path + "' failed");
        sum.records_written += gr.records.size();
        sum.failed_realizations += gr.failed.size();
        if (log) {
            *log << "[" << i + 1 << "/" << gs.size() << "] L=" << g.L << ' ' << g.params_json.dump() << ": "
                 << gr.records.size() << " records";
            if (!gr.records.empty()) *log << ", N Lambda = " << gr.records.front().n_lambda;
            *log << '\n';
            for (const auto& w : gr.warnings) *log << "  warning: " << w << '\n';
        }
    }
    return sum;
}

std::vector<ExperimentRecord> run_in_memory(const RunConfig& c, std::ostream* log) {
    validate(c);
    std::vector<ExperimentRecord> all;
    const auto gs = groups(c);
    for (std::size_t i = 0; i < gs.size(); ++i) {
        GroupResult gr = compute_group(c, gs[i]);
        if (log) {
            *log << "[" << i + 1 << "/" << gs.size() << "] L=" << gs[i].L << ' ' << gs[i].params_json.dump() << '\n';
            for (const auto& w : gr.warnings) *log << "  warning: " << w << '\n';
        }
        std::move(gr.records.begin(), gr.records.end(), std::back_inserter(all));
    }
    return all;
}

}  // namespace entflow
