// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

// entflow command line: sample, run, langevin, aggregate, collapse, fss, hist.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include "entflow/analysis.hpp"
#include "entflow/error.hpp"
#include "entflow/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace entflow;

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
}

// Writes to the named file, or stdout for "" / "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw ConfigError("cannot open '" + path + "' for writing");
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

// Options shared by sample and run; unset values leave the config untouched.
struct Overrides {
    std::string config;
    std::optional<std::string> model;
    std::vector<int> L;
    std::vector<double> b, h, D, E;
    std::optional<std::size_t> realizations;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> log_base, chi0_recipe, omega_estimator;
    std::string out;

    void attach(CLI::App* app, bool sweep) {
        app->add_option("--config", config, "JSON config file");
        app->add_option("--model", model, "QREM | RFHM | GenericGaussian");
        app->add_option("--L", L, "system size(s)");
        app->add_option("--b", b, "QREM hopping range(s)");
        app->add_option("--h", h, "RFHM disorder strength(s)");
        app->add_option("--D", D, "RFHM anisotropy value(s)");
        app->add_option("--seed", seed, "master seed");
        app->add_option("--out", out, "output path (default stdout)");
        if (!sweep) return;
        app->add_option("--E", E, "target energies");
        app->add_option("--realizations", realizations, "disorder realizations per group");
        app->add_option("--log-base", log_base, "entropy base")->check(CLI::IsMember({"2", "e"}));
        app->add_option("--chi0-recipe", chi0_recipe, "QREM_mean | QREM_var | RFHM_both");
        app->add_option("--omega-estimator", omega_estimator, "abs_overlap | raw_overlap | ipr_spacing");
    }

    json merged() const {
        json j = load_config(config);
        if (model) j["model"] = *model;
        if (!L.empty()) j["L"] = L;
        if (!b.empty()) j["b"] = b;
        if (!h.empty()) j["h"] = h;
        if (!D.empty()) j["D"] = D;
        if (!E.empty()) j["E"] = E;
        if (realizations) j["realizations"] = *realizations;
        if (seed) j["seed"] = *seed;
        if (log_base) j["log_base"] = *log_base;
        if (chi0_recipe) j["chi0_recipe"] = *chi0_recipe;
        if (omega_estimator) j["omega_estimator"] = *omega_estimator;
        return j;
    }

    std::string out_path(const json& cfg) const {
        if (!out.empty()) return out;
        return cfg.value("out", std::string());
    }
};

int cmd_sample(const Overrides& o, std::size_t realization) {
    const json cfg = o.merged();
    const RunConfig rc = run_config_from_json(cfg);
    ModelParams p;
    if (!rc.b.empty()) p.b = rc.b.front();
    if (!rc.h.empty()) p.h = rc.h.front();
    if (!rc.D.empty()) p.D = rc.D.front();
    p.J = rc.J;
    p.boundary = rc.boundary;
    const EnsembleSpec spec = build_spec(rc.model, rc.L.front(), p, rc.resolved_gamma(), rc.seed);
    const HamiltonianSample s = sample(spec, realization);

    json j;
    j["spec"] = to_json(spec);
    j["realization_index"] = s.realization_index;
    j["seed_used"] = s.seed_used;
    json labels = json::array();
    for (std::size_t i = 0; i < s.basis.size(); ++i) labels.push_back(s.basis.label(i));
    j["basis"] = labels;
    json rows = json::array();
    for (Eigen::Index r = 0; r < s.matrix.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < s.matrix.cols(); ++c) row.push_back(s.matrix(r, c));
        rows.push_back(row);
    }
    j["matrix"] = rows;
    Output out(o.out_path(cfg));
    out.stream() << j.dump() << '\n';
    return 0;
}

int cmd_run(const Overrides& o) {
    const json cfg = o.merged();
    const RunConfig rc = run_config_from_json(cfg);
    const std::string path = o.out_path(cfg);
    if (path.empty() || path == "-") throw ConfigError("run: --out <records.jsonl> is required");
    const RunSummary s = run(rc, path, &std::cerr);
    std::cerr << "groups: " << s.groups_total << " (" << s.groups_skipped << " already complete), records written: "
              << s.records_written << ", failed realizations: " << s.failed_realizations << '\n';
    return 0;
}

struct LangevinArgs {
    std::string config, out, convention, log_base = "e";
    std::optional<int> N_A, N_B;
    std::optional<std::size_t> trajectories;
    std::optional<double> q;
    std::optional<std::uint64_t> seed;
};

int cmd_langevin(const LangevinArgs& a) {
    json cfg = load_config(a.config);
    json lj = cfg.value("langevin", json::object());
    if (a.N_A) lj["N_A"] = *a.N_A;
    if (a.N_B) lj["N_B"] = *a.N_B;
    if (a.trajectories) lj["trajectories"] = *a.trajectories;
    if (a.q) lj["q"] = *a.q;
    if (a.seed) lj["seed"] = *a.seed;
    if (!a.convention.empty()) lj["convention"] = a.convention;
    const LangevinConfig lc = langevin_config_from_json(lj);
    const LangevinResult res = evolve(lc);
    Output out(a.out.empty() ? cfg.value("out", std::string()) : a.out);
    write_langevin_csv(out.stream(), res, log_base_from_string(a.log_base));
    std::cerr << "steps: " << res.total_steps << ", halvings: " << res.total_halvings
              << ", raw drift sum at start: " << res.raw_drift_sum_initial << '\n';
    return 0;
}

int cmd_aggregate(const std::string& in, const std::string& out, const std::string& measure, std::size_t bins,
                  const std::vector<std::string>& group_by) {
    const RecordFile rf = read_records(in);
    AggregateOptions opts;
    opts.measure = measure_from_string(measure);
    opts.bins = bins;
    if (!group_by.empty()) opts.group_by = group_by;
    const auto curves = aggregate(rf.records, opts);
    Output o(out);
    write_curves_csv(o.stream(), curves);
    return 0;
}

int cmd_collapse(const std::string& in, bool raw, bool linear_x) {
    std::ifstream is(in);
    if (!is) throw ConfigError("cannot open curves file '" + in + "'");
    const auto curves = read_curves_csv(is);
    std::vector<Series> s;
    for (const auto& c : curves) s.push_back(series_from_curve(c, !raw));
    CollapseOptions opts;
    opts.log_x = !linear_x;
    json j;
    j["curves"] = s.size();
    j["normalized"] = !raw;
    j["quality"] = collapse_quality(s, opts);
    std::cout << j.dump() << '\n';
    return 0;
}

int cmd_fss(const std::string& in, const std::string& quantity, const FssOptions& opts) {
    const RecordFile rf = read_records(in);
    FssQuantity q;
    if (quantity == "n_lambda")
        q = FssQuantity::NLambda;
    else if (quantity == "R1_normalized")
        q = FssQuantity::R1Normalized;
    else
        throw ConfigError("fss: --quantity must be n_lambda or R1_normalized");
    const auto table = fss_table(rf.records, q);
    const FssResult r = fss_fit(table, opts);
    json j;
    j["h_c"] = r.h_c;
    j["nu"] = r.nu;
    j["quality"] = r.quality;
    j["degenerate"] = r.degenerate;
    j["note"] = r.note;
    json cross = json::array();
    for (std::size_t a = 0; a < table.size(); ++a)
        for (std::size_t b = a + 1; b < table.size(); ++b)
            cross.push_back({{"L1", table[a].L}, {"L2", table[b].L}, {"h", crossings(table[a], table[b])}});
    j["crossings"] = cross;
    std::cout << j.dump() << '\n';
    return 0;
}

int cmd_hist(const std::string& in, const std::string& out, const std::vector<double>& window, std::size_t bins,
             const std::string& measure) {
    const RecordFile rf = read_records(in);
    if (window.size() != 2) throw ConfigError("hist: --window needs two values");
    HistogramOptions opts;
    opts.n_lambda_lo = window[0];
    opts.n_lambda_hi = window[1];
    opts.bins = bins;
    opts.measure = measure_from_string(measure);
    const HistogramTable t = histogram(rf.records, opts);
    Output o(out);
    write_histogram_csv(o.stream(), t);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entflow: entanglement flow in multiparametric Gaussian ensembles"};
    app.require_subcommand(1);
    // "-h" is left free: "--h" sets the RFHM disorder strength.
    app.set_help_flag("--help", "print this help and exit");

    Overrides sample_o, run_o;
    std::size_t realization = 0;
    auto* sample_cmd = app.add_subcommand("sample", "draw one Hamiltonian and print it as JSON");
    sample_o.attach(sample_cmd, false);
    sample_cmd->add_option("--realization", realization, "realization index");

    auto* run_cmd = app.add_subcommand("run", "parameter sweep to JSONL records");
    run_o.attach(run_cmd, true);

    LangevinArgs la;
    auto* lang_cmd = app.add_subcommand("langevin", "Schmidt-eigenvalue Langevin ensemble to CSV");
    lang_cmd->add_option("--config", la.config, "JSON config file with a \"langevin\" block");
    lang_cmd->add_option("--N-A", la.N_A);
    lang_cmd->add_option("--N-B", la.N_B);
    lang_cmd->add_option("--trajectories", la.trajectories);
    lang_cmd->add_option("--q", la.q, "weak separability exponent");
    lang_cmd->add_option("--seed", la.seed);
    lang_cmd->add_option("--convention", la.convention, "trace_conserving | as_published");
    lang_cmd->add_option("--log-base", la.log_base, "base of the R1 columns")->check(CLI::IsMember({"2", "e"}));
    lang_cmd->add_option("--out", la.out, "CSV path (default stdout)");

    std::string in, out, measure = "R1", quantity = "n_lambda";
    std::size_t bins = 40, hist_bins = 30;
    std::vector<std::string> group_by;
    auto* agg_cmd = app.add_subcommand("aggregate", "bin records into curves versus N Lambda");
    agg_cmd->add_option("--in", in, "records JSONL")->required();
    agg_cmd->add_option("--out", out, "curves CSV (default stdout)");
    agg_cmd->add_option("--measure", measure, "R1 | R0 | Q | renyi2");
    agg_cmd->add_option("--bins", bins, "log-spaced N Lambda bins");
    agg_cmd->add_option("--group-by", group_by, "label keys: model L E b h D");

    bool raw = false, linear_x = false;
    auto* col_cmd = app.add_subcommand("collapse", "score the collapse of a curves CSV");
    col_cmd->add_option("--in", in, "curves CSV")->required();
    col_cmd->add_flag("--raw", raw, "use raw means instead of max-normalized ones");
    col_cmd->add_flag("--linear-x", linear_x, "interpolate on a linear x axis");

    FssOptions fo;
    fo.hc_min = 2.0;
    fo.hc_max = 6.0;
    auto* fss_cmd = app.add_subcommand("fss", "finite-size scaling fit of RFHM records");
    fss_cmd->add_option("--in", in, "records JSONL")->required();
    fss_cmd->add_option("--quantity", quantity, "n_lambda | R1_normalized");
    fss_cmd->add_option("--hc-min", fo.hc_min);
    fss_cmd->add_option("--hc-max", fo.hc_max);
    fss_cmd->add_option("--nu-min", fo.nu_min);
    fss_cmd->add_option("--nu-max", fo.nu_max);
    fss_cmd->add_flag("--log-y", fo.log_y, "collapse ln y");

    std::vector<double> window;
    auto* hist_cmd = app.add_subcommand("hist", "R1 histograms at fixed N Lambda");
    hist_cmd->add_option("--in", in, "records JSONL")->required();
    hist_cmd->add_option("--out", out, "CSV (default stdout)");
    hist_cmd->add_option("--window", window, "N Lambda window: lo hi")->expected(2)->required();
    hist_cmd->add_option("--bins", hist_bins);
    hist_cmd->add_option("--measure", measure);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sample_cmd) return cmd_sample(sample_o, realization);
        if (*run_cmd) return cmd_run(run_o);
        if (*lang_cmd) return cmd_langevin(la);
        if (*agg_cmd) return cmd_aggregate(in, out, measure, bins, group_by);
        if (*col_cmd) return cmd_collapse(in, raw, linear_x);
        if (*fss_cmd) return cmd_fss(in, quantity, fo);
        if (*hist_cmd) return cmd_hist(in, out, window, hist_bins, measure);
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
