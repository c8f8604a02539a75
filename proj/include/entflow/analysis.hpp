// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file analysis.hpp
 * @brief Curve aggregation, collapse scoring, finite-size scaling fits and
 *        fixed-N Lambda histograms.
 */

#pragma once

#include "entflow/records.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace entflow {

enum class Measure { R1, R0, Q, Renyi2 };

Measure measure_from_string(std::string_view s);
std::string_view to_string(Measure m);
double measure_of(const ExperimentRecord& r, Measure m);

/// Label built from record fields; accepted keys: model, L, E, b, h, D.
std::string record_label(const ExperimentRecord& r, std::span<const std::string> group_by);

struct AggregateOptions {
    Measure measure = Measure::R1;
    std::size_t bins = 40;
    std::vector<std::string> group_by{"model", "L", "E"};
};

/// Bins records by N Lambda on a log grid shared by all labels. Records with
/// N Lambda <= 0 have no place on a log axis and are dropped. Result does not
/// depend on the input order.
std::vector<Curve> aggregate(std::span<const ExperimentRecord> records, const AggregateOptions& opts = {});

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// (x, mean) or (x, mean / max) of a curve.
Series series_from_curve(const Curve& c, bool normalized);

struct CollapseOptions {
    bool log_x = true;
    std::size_t grid = 64;
    /// Overlap width over the narrowest curve's width must reach this.
    double min_overlap_fraction = 0.0;
};

/// sqrt(sum_c msd_c / (K - 1)) / range(master), with msd_c the mean squared
/// deviation of curve c from the mean curve on a common grid over the shared
/// x support. Throws std::invalid_argument without overlap.
double collapse_quality(std::span<const Series> curves, const CollapseOptions& opts = {});

struct FssSeries {
    int L = 0;
    std::vector<double> h;
    std::vector<double> y;
};

struct FssOptions {
    double hc_min = 0.0;
    double hc_max = 1.0;
    double nu_min = 0.2;
    double nu_max = 5.0;
    std::size_t hc_grid = 61;
    std::size_t nu_grid = 61;
    int refine_rounds = 6;
    bool log_y = false;
    double min_overlap_fraction = 0.25;
};

struct FssResult {
    double h_c = 0.0;
    double nu = 0.0;
    double quality = 0.0;
    bool degenerate = false;
    std::string note;
};

/// Minimizes the collapse quality of y against (h - h_c) L^{1/nu} on a linear
/// axis: coarse grid, then alternating golden-section refinement.
FssResult fss_fit(std::span<const FssSeries> series, const FssOptions& opts);

/// Collapse quality at a given (h_c, nu); +inf when the supports do not overlap.
double fss_objective(std::span<const FssSeries> series, double h_c, double nu, const FssOptions& opts);

enum class FssQuantity {
    NLambda,       ///< cell N Lambda
    R1Normalized,  ///< <R1> divided by its maximum over h, per size
};

/// One series per L from RFHM records: y(h) averaged over target energies
/// and states. Throws ConfigError when records lack an "h" parameter.
std::vector<FssSeries> fss_table(std::span<const ExperimentRecord> records, FssQuantity q);

/// h values where the piecewise-linear curves a and b cross (sign changes of
/// a - b on the union of their h grids within the shared range).
std::vector<double> crossings(const FssSeries& a, const FssSeries& b);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);

struct HistogramOptions {
    double n_lambda_lo = 0.0;
    double n_lambda_hi = 0.0;
    std::size_t bins = 30;
    Measure measure = Measure::R1;
    std::vector<std::string> group_by{"model", "L", "E", "b", "h", "D"};
};

struct HistogramTable {
    std::vector<double> edges;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> density;  ///< per label, integrates to 1
    std::vector<std::size_t> counts;
    struct Distance {
        std::size_t i = 0, j = 0;
        double ks = 0.0;
    };
    std::vector<Distance> ks;
};

/// Requires records of >= 2 labels inside [lo, hi]; throws ConfigError otherwise.
HistogramTable histogram(std::span<const ExperimentRecord> records, const HistogramOptions& opts);
void write_histogram_csv(std::ostream& os, const HistogramTable& t);

/// Least-squares alpha0 of y = alpha0 (1 - exp(-x / 2)) and its R^2.
struct SaturationFit {
    double alpha0 = 0.0;
    double r2 = 0.0;
};
SaturationFit fit_closed_form(std::span<const double> n_lambda, std::span<const double> y);

/// Position of the maximum of dy / d ln x, refined by a parabola in ln x.
/// Points with x <= 0 are ignored. Equals 2 for alpha0 (1 - exp(-x / 2)).
double knee_location(std::span<const double> x, std::span<const double> y);

}  // namespace entflow
