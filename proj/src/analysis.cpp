// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "entflow/analysis.hpp"

#include "entflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

namespace entflow {

Measure measure_from_string(std::string_view s) {
    if (s == "R1") return Measure::R1;
    if (s == "R0") return Measure::R0;
    if (s == "Q") return Measure::Q;
    if (s == "renyi2") return Measure::Renyi2;
    throw ConfigError("unknown measure '" + std::string(s) + "'");
}

std::string_view to_string(Measure m) {
    switch (m) {
        case Measure::R1: return "R1";
        case Measure::R0: return "R0";
        case Measure::Q: return "Q";
        case Measure::Renyi2: return "renyi2";
    }
    return "?";
}

double measure_of(const ExperimentRecord& r, Measure m) {
    switch (m) {
        case Measure::R1: return r.R1;
        case Measure::R0: return r.R0;
        case Measure::Q: return r.Q;
        case Measure::Renyi2: return r.renyi2;
    }
    return 0.0;
}

std::string record_label(const ExperimentRecord& r, std::span<const std::string> group_by) {
    std::ostringstream os;
    bool first = true;
    auto put = [&](const std::string& key, const auto& value) {
        if (!first) os << ';';
        os << key << '=' << value;
        first = false;
    };
    for (const auto& key : group_by) {
        if (key == "model") {
            put(key, r.model);
        } else if (key == "L") {
            put(key, r.L);
        } else if (key == "E") {
            put(key, r.E_target);
        } else if (key == "b" || key == "h" || key == "D") {
            if (r.params.contains(key)) put(key, r.params.at(key).get<double>());
        } else {
            throw ConfigError("unknown group-by key '" + key + "'");
        }
    }
    return os.str();
}

namespace {

struct Moments {
    double mean = 0.0, var = 0.0, se_mean = 0.0, se_var = 0.0;
};

Moments moments(std::span<const double> v) {
    Moments m;
    const double n = static_cast<double>(v.size());
    if (v.empty()) return m;
    m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    if (v.size() < 2) return m;
    double s2 = 0.0, s4 = 0.0;
    for (double x : v) {
        const double d = (x - m.mean) * (x - m.mean);
        s2 += d;
        s4 += d * d;
    }
    m.var = s2 / (n - 1.0);
    m.se_mean = std::sqrt(m.var / n);
    const double pop = s2 / n;
    m.se_var = std::sqrt(std::max(0.0, s4 / n - pop * pop) / n);
    return m;
}

// Sorted, de-duplicated (x, y) with x transformed; duplicates averaged.
struct Prepared {
    std::vector<double> x, y;
};

Prepared prepare(const Series& s, bool log_x) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("series '" + s.label + "': x and y differ in length");
    std::vector<std::pair<double, double>> p;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (log_x && !(s.x[i] > 0.0)) continue;
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        p.emplace_back(log_x ? std::log(s.x[i]) : s.x[i], s.y[i]);
    }
    std::sort(p.begin(), p.end());
    Prepared out;
    for (std::size_t i = 0; i < p.size();) {
        std::size_t j = i;
        double acc = 0.0;
        while (j < p.size() && p[j].first == p[i].first) acc += p[j++].second;
        out.x.push_back(p[i].first);
        out.y.push_back(acc / static_cast<double>(j - i));
        i = j;
    }
    return out;
}

double interp(const Prepared& p, double t) {
    if (t <= p.x.front()) return p.y.front();
    if (t >= p.x.back()) return p.y.back();
    const auto it = std::upper_bound(p.x.begin(), p.x.end(), t);
    const auto k = static_cast<std::size_t>(it - p.x.begin());
    const double w = (t - p.x[k - 1]) / (p.x[k] - p.x[k - 1]);
    return p.y[k - 1] + w * (p.y[k] - p.y[k - 1]);
}

}  // namespace

std::vector<Curve> aggregate(std::span<const ExperimentRecord> records, const AggregateOptions& opts) {
    if (opts.bins == 0) throw ConfigError("aggregate: bins must be positive");
    struct Entry {
        std::string label;
        double x;
        std::size_t realization, state;
        double energy, value;
        auto key() const { return std::tie(label, x, realization, state, energy, value); }
    };
    std::vector<Entry> entries;
    for (const auto& r : records) {
        if (!(r.n_lambda > 0.0) || !std::isfinite(r.n_lambda)) continue;
        entries.push_back({record_label(r, opts.group_by), r.n_lambda, r.realization_index, r.state_index, r.energy,
                           measure_of(r, opts.measure)});
    }
    if (entries.empty()) throw ConfigError("aggregate: no records with N Lambda > 0");
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.key() < b.key(); });

    double lo = entries.front().x, hi = lo;
    for (const auto& e : entries) {
        lo = std::min(lo, e.x);
        hi = std::max(hi, e.x);
    }
    const double llo = std::log(lo), span = std::log(hi) - llo;
    const std::size_t nb = span > 0.0 ? opts.bins : 1;
    auto bin_of = [&](double x) {
        if (nb == 1) return std::size_t{0};
        const auto b = static_cast<std::size_t>((std::log(x) - llo) / span * static_cast<double>(nb));
        return std::min(b, nb - 1);
    };

    std::vector<Curve> curves;
    for (std::size_t i = 0; i < entries.size();) {
        std::size_t j = i;
        while (j < entries.size() && entries[j].label == entries[i].label) ++j;

        std::vector<std::vector<double>> vals(nb);
        std::vector<double> logx(nb, 0.0);
        for (std::size_t k = i; k < j; ++k) {
            const std::size_t b = bin_of(entries[k].x);
            vals[b].push_back(entries[k].value);
            logx[b] += std::log(entries[k].x);
        }
        Curve c{entries[i].label, {}};
        for (std::size_t b = 0; b < nb; ++b) {
            if (vals[b].empty()) continue;
            const Moments m = moments(vals[b]);
            CurvePoint p;
            p.x = std::exp(logx[b] / static_cast<double>(vals[b].size()));
            p.count = vals[b].size();
            p.mean = m.mean;
            p.se_mean = m.se_mean;
            p.var = m.var;
            p.se_var = m.se_var;
            c.points.push_back(p);
        }
        double top = -std::numeric_limits<double>::infinity();
        for (const auto& p : c.points) top = std::max(top, p.mean);
        for (auto& p : c.points) p.mean_normalized = top > 0.0 ? p.mean / top : p.mean;
        curves.push_back(std::move(c));
        i = j;
    }
    return curves;
}

Series series_from_curve(const Curve& c, bool normalized) {
    Series s{c.label, {}, {}};
    for (const auto& p : c.points) {
        s.x.push_back(p.x);
        s.y.push_back(normalized ? p.mean_normalized : p.mean);
    }
    return s;
}

double collapse_quality(std::span<const Series> curves, const CollapseOptions& opts) {
    if (curves.size() < 2) throw std::invalid_argument("collapse_quality: needs at least 2 curves");
    if (opts.grid < 2) throw std::invalid_argument("collapse_quality: grid needs >= 2 points");
    std::vector<Prepared> prep;
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    double narrowest = std::numeric_limits<double>::infinity();
    for (const auto& s : curves) {
        prep.push_back(prepare(s, opts.log_x));
        const auto& p = prep.back();
        if (p.x.size() < 2) throw std::invalid_argument("collapse_quality: curve '" + s.label + "' has < 2 usable points");
        lo = std::max(lo, p.x.front());
        hi = std::min(hi, p.x.back());
        narrowest = std::min(narrowest, p.x.back() - p.x.front());
    }
    if (!(hi > lo)) throw std::invalid_argument("collapse_quality: curves have no overlapping support");
    if ((hi - lo) < opts.min_overlap_fraction * narrowest)
        throw std::invalid_argument("collapse_quality: overlap narrower than the required fraction");

    const std::size_t G = opts.grid;
    const double K = static_cast<double>(curves.size());
    std::vector<std::vector<double>> vals(prep.size(), std::vector<double>(G));
    std::vector<double> master(G, 0.0);
    for (std::size_t g = 0; g < G; ++g) {
        const double t = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(G - 1);
        for (std::size_t c = 0; c < prep.size(); ++c) {
            vals[c][g] = interp(prep[c], t);
            master[g] += vals[c][g] / K;
        }
    }
    double msd_sum = 0.0;
    for (std::size_t c = 0; c < prep.size(); ++c) {
        double msd = 0.0;
        for (std::size_t g = 0; g < G; ++g) msd += (vals[c][g] - master[g]) * (vals[c][g] - master[g]);
        msd_sum += msd / static_cast<double>(G);
    }
    const auto [mn, mx] = std::minmax_element(master.begin(), master.end());
    const double range = *mx - *mn;
    if (msd_sum == 0.0) return 0.0;
    if (!(range > 0.0)) return std::numeric_limits<double>::infinity();
    return std::sqrt(msd_sum / (K - 1.0)) / range;
}

double fss_objective(std::span<const FssSeries> series, double h_c, double nu, const FssOptions& opts) {
    if (!(nu > 0.0)) return std::numeric_limits<double>::infinity();
    std::vector<Series> s;
    for (const auto& f : series) {
        Series c{"L=" + std::to_string(f.L), {}, {}};
        const double scale = std::pow(static_cast<double>(f.L), 1.0 / nu);
        for (std::size_t i = 0; i < f.h.size(); ++i) {
            c.x.push_back((f.h[i] - h_c) * scale);
            c.y.push_back(opts.log_y ? std::log(f.y[i]) : f.y[i]);
        }
        s.push_back(std::move(c));
    }
    try {
        return collapse_quality(s, {false, 64, opts.min_overlap_fraction});
    } catch (const std::invalid_argument&) {
        return std::numeric_limits<double>::infinity();
    }
}

namespace {

// Golden-section minimum of f on [a, b].
template <class F>
std::pair<double, double> golden(F&& f, double a, double b, int iters = 40) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

}  // namespace

FssResult fss_fit(std::span<const FssSeries> series, const FssOptions& opts) {
    if (series.size() < 3) throw ConfigError("fss_fit: needs at least 3 system sizes");
    for (const auto& s : series) {
        if (s.h.size() != s.y.size()) throw ConfigError("fss_fit: h and y differ in length");
        if (s.h.size() < 8) throw ConfigError("fss_fit: each size needs at least 8 h points");
        if (opts.log_y && std::any_of(s.y.begin(), s.y.end(), [](double v) { return !(v > 0.0); }))
            throw ConfigError("fss_fit: log_y needs positive y");
    }
    if (!(opts.hc_max > opts.hc_min) || !(opts.nu_max > opts.nu_min) || !(opts.nu_min > 0.0) || opts.hc_grid < 2 ||
        opts.nu_grid < 2)
        throw ConfigError("fss_fit: invalid search ranges");

    FssResult res;
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    for (const auto& s : series)
        for (double v : s.y) {
            const double t = opts.log_y ? std::log(v) : v;
            ymin = std::min(ymin, t);
            ymax = std::max(ymax, t);
        }
    if (ymax - ymin <= 1e-12 * std::max(1.0, std::abs(ymax))) {
        res.degenerate = true;
        res.h_c = std::numeric_limits<double>::quiet_NaN();
        res.nu = std::numeric_limits<double>::quiet_NaN();
        res.note = "input has no h dependence";
        return res;
    }

    const double lnu0 = std::log(opts.nu_min), lnu1 = std::log(opts.nu_max);
    double best_hc = opts.hc_min, best_lnu = lnu0, best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < opts.hc_grid; ++i) {
        const double hc = opts.hc_min + (opts.hc_max - opts.hc_min) * static_cast<double>(i) / (opts.hc_grid - 1.0);
        for (std::size_t j = 0; j < opts.nu_grid; ++j) {
            const double lnu = lnu0 + (lnu1 - lnu0) * static_cast<double>(j) / (opts.nu_grid - 1.0);
            const double q = fss_objective(series, hc, std::exp(lnu), opts);
            if (q < best) {
                best = q;
                best_hc = hc;
                best_lnu = lnu;
            }
        }
    }
    if (!std::isfinite(best)) throw NumericalError("fss_fit: rescaled supports never overlap");

    double dh = (opts.hc_max - opts.hc_min) / (opts.hc_grid - 1.0);
    double dl = (lnu1 - lnu0) / (opts.nu_grid - 1.0);
    for (int round = 0; round < opts.refine_rounds; ++round) {
        const auto [hc, qh] = golden([&](double h) { return fss_objective(series, h, std::exp(best_lnu), opts); },
                                     std::max(opts.hc_min, best_hc - dh), std::min(opts.hc_max, best_hc + dh));
        if (qh < best) {
            best = qh;
            best_hc = hc;
        }
        const auto [ln, ql] = golden([&](double l) { return fss_objective(series, best_hc, std::exp(l), opts); },
                                     std::max(lnu0, best_lnu - dl), std::min(lnu1, best_lnu + dl));
        if (ql < best) {
            best = ql;
            best_lnu = ln;
        }
        dh *= 0.5;
        dl *= 0.5;
    }
    res.h_c = best_hc;
    res.nu = std::exp(best_lnu);
    res.quality = best;
    const double eps = 1e-6;
    if (std::abs(res.h_c - opts.hc_min) < eps * (opts.hc_max - opts.hc_min) ||
        std::abs(res.h_c - opts.hc_max) < eps * (opts.hc_max - opts.hc_min))
        res.note = "h_c at the edge of the search range";
    else if (std::abs(best_lnu - lnu0) < eps || std::abs(best_lnu - lnu1) < eps)
        res.note = "nu at the edge of the search range";
    return res;
}

std::vector<FssSeries> fss_table(std::span<const ExperimentRecord> records, FssQuantity q) {
    // (L, h) -> (sum, count)
    std::map<int, std::map<double, std::pair<double, std::size_t>>> acc;
    for (const auto& r : records) {
        if (!r.params.contains("h")) throw ConfigError("fss_table: records carry no h parameter");
        auto& cell = acc[r.L][r.params.at("h").get<double>()];
        cell.first += q == FssQuantity::NLambda ? r.n_lambda : r.R1;
        ++cell.second;
    }
    std::vector<FssSeries> out;
    for (const auto& [L, by_h] : acc) {
        FssSeries s;
        s.L = L;
        for (const auto& [h, sc] : by_h) {
            s.h.push_back(h);
            s.y.push_back(sc.first / static_cast<double>(sc.second));
        }
        if (q == FssQuantity::R1Normalized) {
            const double top = *std::max_element(s.y.begin(), s.y.end());
            if (top > 0.0)
                for (double& v : s.y) v /= top;
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<double> crossings(const FssSeries& a, const FssSeries& b) {
    if (a.h.size() < 2 || b.h.size() < 2) throw std::invalid_argument("crossings: curves need >= 2 points");
    const double lo = std::max(*std::min_element(a.h.begin(), a.h.end()), *std::min_element(b.h.begin(), b.h.end()));
    const double hi = std::min(*std::max_element(a.h.begin(), a.h.end()), *std::max_element(b.h.begin(), b.h.end()));
    std::vector<double> grid;
    for (double h : a.h)
        if (h >= lo && h <= hi) grid.push_back(h);
    for (double h : b.h)
        if (h >= lo && h <= hi) grid.push_back(h);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const Prepared pa = prepare({"a", a.h, a.y}, false), pb = prepare({"b", b.h, b.y}, false);
    std::vector<double> out;
    double prev_h = 0.0, prev_d = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = interp(pa, grid[i]) - interp(pb, grid[i]);
        if (d == 0.0) {
            if (out.empty() || out.back() != grid[i]) out.push_back(grid[i]);
        } else if (i > 0 && prev_d != 0.0 && (d > 0.0) != (prev_d > 0.0)) {
            out.push_back(prev_h + (grid[i] - prev_h) * prev_d / (prev_d - d));
        }
        prev_h = grid[i];
        prev_d = d;
    }
    return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double t = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == t) ++i;
        while (j < b.size() && b[j] == t) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

HistogramTable histogram(std::span<const ExperimentRecord> records, const HistogramOptions& opts) {
    if (!(opts.n_lambda_hi >= opts.n_lambda_lo)) throw ConfigError("histogram: window upper bound below lower bound");
    if (opts.bins == 0) throw ConfigError("histogram: bins must be positive");
    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : records)
        if (r.n_lambda >= opts.n_lambda_lo && r.n_lambda <= opts.n_lambda_hi)
            groups[record_label(r, opts.group_by)].push_back(measure_of(r, opts.measure));
    if (groups.empty()) throw ConfigError("histogram: no records inside the N Lambda window");
    if (groups.size() < 2) throw ConfigError("histogram: window holds only one parameter combination");

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& [label, v] : groups)
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }

    HistogramTable t;
    const std::size_t B = opts.bins;
    const double w = (hi - lo) / static_cast<double>(B);
    for (std::size_t b = 0; b <= B; ++b) t.edges.push_back(lo + w * static_cast<double>(b));
    for (auto& [label, v] : groups) {
        std::sort(v.begin(), v.end());
        std::vector<double> dens(B, 0.0);
        for (double x : v) dens[std::min(B - 1, static_cast<std::size_t>((x - lo) / w))] += 1.0;
        for (double& d : dens) d /= static_cast<double>(v.size()) * w;
        t.labels.push_back(label);
        t.density.push_back(std::move(dens));
        t.counts.push_back(v.size());
    }
    std::vector<const std::vector<double>*> samples;
    for (const auto& [label, v] : groups) samples.push_back(&v);
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = i + 1; j < samples.size(); ++j) t.ks.push_back({i, j, ks_statistic(*samples[i], *samples[j])});
    return t;
}

void write_histogram_csv(std::ostream& os, const HistogramTable& t) {
    os << "# format=" << kHistogramFormat << " version=1\n";
    os << "kind,label,bin_lo,bin_hi,count,density,other_label,ks\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < t.labels.size(); ++i)
        for (std::size_t b = 0; b + 1 < t.edges.size(); ++b)
            os << "bin," << t.labels[i] << ',' << t.edges[b] << ',' << t.edges[b + 1] << ',' << t.counts[i] << ','
               << t.density[i][b] << ",,\n";
    for (const auto& d : t.ks) os << "ks," << t.labels[d.i] << ",,,,," << t.labels[d.j] << ',' << d.ks << '\n';
}

SaturationFit fit_closed_form(std::span<const double> n_lambda, std::span<const double> y) {
    if (n_lambda.size() != y.size() || y.size() < 2) throw std::invalid_argument("fit_closed_form: need >= 2 matched points");
    double sfy = 0.0, sff = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double f = 1.0 - std::exp(-0.5 * n_lambda[i]);
        sfy += f * y[i];
        sff += f * f;
        ybar += y[i];
    }
    if (!(sff > 0.0)) throw std::invalid_argument("fit_closed_form: all points at N Lambda = 0");
    ybar /= static_cast<double>(y.size());
    SaturationFit fit;
    fit.alpha0 = sfy / sff;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - fit.alpha0 * (1.0 - std::exp(-0.5 * n_lambda[i]));
        ss_res += r * r;
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    return fit;
}

double knee_location(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("knee_location: size mismatch");
    std::vector<std::pair<double, double>> p;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > 0.0) p.emplace_back(std::log(x[i]), y[i]);
    std::sort(p.begin(), p.end());
    if (p.size() < 3) throw std::invalid_argument("knee_location: needs >= 3 points with x > 0");
    std::vector<double> u, d;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        const double du = p[i + 1].first - p[i].first;
        if (!(du > 0.0)) continue;
        u.push_back(0.5 * (p[i].first + p[i + 1].first));
        d.push_back((p[i + 1].second - p[i].second) / du);
    }
    const auto k = static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
    double ustar = u[k];
    if (k > 0 && k + 1 < d.size()) {
        // Vertex of the parabola through three neighbouring slopes.
        const double x0 = u[k - 1], x1 = u[k], x2 = u[k + 1];
        const double y0 = d[k - 1], y1 = d[k], y2 = d[k + 1];
        const double den = (x0 - x1) * (x0 - x2) * (x1 - x2);
        const double A = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den;
        const double B = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den;
        if (A < 0.0) ustar = std::clamp(-B / (2.0 * A), x0, x2);
    }
    return std::exp(ustar);
}

}  // namespace entflow
