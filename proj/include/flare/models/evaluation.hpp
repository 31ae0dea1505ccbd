#pragma once

// WAIC scoring, model ranking, posterior predictive simulation and
// percentile band tables.

#include <cstdint>
#include <string>
#include <vector>

#include "flare/models/common.hpp"
#include "flare/models/gp_series.hpp"
#include "flare/models/regression.hpp"

namespace flare::models {

struct WaicResult {
    double waic = 0.0;
    double se = 0.0;
    double p_waic = 0.0;
    double lppd = 0.0;
    std::vector<double> pointwise;  // -2 (lppd_i - p_i)
};

// log_lik is S x n, draw-major, S >= 100. Each observation needs >= 2 finite
// draws; non-finite draws are skipped.
WaicResult waic(std::span<const double> log_lik, std::size_t draws, std::size_t n_obs);
WaicResult waic(const Trace& trace);

struct RankedModel {
    std::string name;
    std::size_t index = 0;  // position in the input list
    WaicResult score;
    double d_waic = 0.0;  // relative to the first entry
    double d_se = 0.0;    // se of the pointwise difference to the first entry
};

// Ascending WAIC. Throws ValidationError when observation counts differ.
std::vector<RankedModel> compare_models(const std::vector<std::pair<std::string, const Trace*>>& fits);

// Exactly rounded floating-point sum.
double exact_sum(std::span<const double> xs);

// -- posterior predictive --------------------------------------------------------
// Each dataset comes from one posterior draw (evenly spaced through the trace)
// pushed through the observation model; output is [dataset][observation].

std::vector<std::vector<double>> posterior_predictive_state(const Trace& trace, std::span<const double> viirs,
                                                            std::size_t n_datasets, std::uint64_t seed);
std::vector<std::vector<double>> posterior_predictive_county(const Trace& trace,
                                                             const std::vector<CountyMonthly>& rows,
                                                             std::size_t n_datasets, std::uint64_t seed);
std::vector<std::vector<double>> posterior_predictive_negbin(const Trace& trace, std::size_t n_obs,
                                                             std::size_t n_datasets, std::uint64_t seed);
std::vector<std::vector<double>> posterior_predictive_gmm(const Trace& trace, std::size_t n_obs,
                                                          std::size_t n_datasets, std::uint64_t seed);
std::vector<std::vector<double>> posterior_predictive_gp(const Trace& trace, const EntitySeries& series, GpKind kind,
                                                         std::size_t n_datasets, std::uint64_t seed);

// Rows "value,observed,simulated_mean,simulated_lo,simulated_hi": histogram of
// counts per integer value, with a 90% band over datasets.
std::string count_histogram_csv(std::span<const long> observed, const std::vector<std::vector<double>>& datasets,
                                long max_value);

// -- bands ------------------------------------------------------------------------

struct Band {
    double grid = 0.0;
    double percentile_lo = 0.0;
    double percentile_hi = 0.0;
    double value_lo = 0.0;
    double value_hi = 0.0;
};

// (1,99), (5,95), (10,90), ..., (45,55), (49,51)
std::vector<std::pair<double, double>> default_band_edges();

// samples[g] holds the draws at grid[g], at least 100 of them.
std::vector<Band> percentile_bands(std::span<const double> grid, const std::vector<std::vector<double>>& samples,
                                   const std::vector<std::pair<double, double>>& edges = default_band_edges());

// Transposes [draw][point] into [point][draw].
std::vector<std::vector<double>> by_point(const std::vector<std::vector<double>>& draws);

// header grid,percentile_lo,percentile_hi,value_lo,value_hi
std::string bands_csv(const std::vector<Band>& bands);

}  // namespace flare::models
