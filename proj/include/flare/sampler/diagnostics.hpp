#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flare/sampler/trace.hpp"

namespace flare::sampler {

// Split R-hat over chains of equal length (>= 2 chains, >= 4 draws each).
// Returns 1 when every chain is constant.
double rhat(std::span<const std::vector<double>> chains);
double rhat(const Trace& trace, std::string_view param);

// Multi-chain effective sample size from autocovariances truncated by Geyer's
// initial monotone sequence, capped at 1.5 x total draws.
double ess(std::span<const std::vector<double>> chains);
double ess(const Trace& trace, std::string_view param);

// Type-7 (linear interpolation) quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Equal-tailed interval at prob.
Interval central_interval(std::vector<double> draws, double prob);
// Shortest window covering ceil(prob * n) sorted draws.
Interval hdi(std::vector<double> draws, double prob);

struct SummaryRow {
    std::string param;
    double mean = 0.0;
    double sd = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double hdi_lo = 0.0;
    double hdi_hi = 0.0;
    double iqr = 0.0;
    double rhat = 1.0;
    double ess = 0.0;
};

// One row per scalar component.
std::vector<SummaryRow> summarize(const Trace& trace, double prob = 0.90);

// CSV: param,mean,sd,ci_lo,ci_hi,hdi_lo,hdi_hi,rhat,ess
std::string summary_csv(const std::vector<SummaryRow>& rows);

}  // namespace flare::sampler
