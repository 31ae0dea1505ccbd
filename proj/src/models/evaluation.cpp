#include "flare/models/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flare/dist/distributions.hpp"
#include "flare/error.hpp"
#include "flare/sampler/diagnostics.hpp"

namespace flare::models {

namespace {
constexpr std::size_t kMinDraws = 100;
}  // namespace

double exact_sum(std::span<const double> xs) {
    std::vector<double> partials;
    for (double x : xs) {
        std::size_t i = 0;
        for (double y : partials) {
            if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) partials[i++] = lo;
            x = hi;
        }
        partials.resize(i);
        partials.push_back(x);
    }
    if (partials.empty()) return 0.0;
    std::size_t n = partials.size();
    double hi = partials[--n];
    double lo = 0.0;
    while (n > 0) {
        const double x = hi;
        const double y = partials[--n];
        hi = x + y;
        lo = y - (hi - x);
        if (lo != 0.0) break;
    }
    // Round half-even across the remaining partials.
    if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
        const double y = lo * 2.0;
        const double x = hi + y;
        if (y == x - hi) hi = x;
    }
    return hi;
}

WaicResult waic(std::span<const double> log_lik, std::size_t draws, std::size_t n_obs) {
    if (log_lik.size() != draws * n_obs) throw ValidationError("log-likelihood array has the wrong size");
    if (n_obs == 0) throw ValidationError("WAIC needs at least one observation");
    if (draws < kMinDraws) throw ValidationError("WAIC needs at least 100 posterior draws");
    WaicResult r;
    r.pointwise.resize(n_obs);
    std::vector<double> lppd_i(n_obs);
    std::vector<double> p_i(n_obs);
    std::vector<double> col;
    for (std::size_t i = 0; i < n_obs; ++i) {
        col.clear();
        for (std::size_t s = 0; s < draws; ++s) {
            const double v = log_lik[s * n_obs + i];
            if (std::isfinite(v)) col.push_back(v);
        }
        if (col.size() < 2) {
            throw ValidationError("observation " + std::to_string(i) + " has fewer than 2 finite log-likelihood draws");
        }
        const double m = static_cast<double>(col.size());
        const double mx = *std::max_element(col.begin(), col.end());
        double acc = 0.0;
        double mean = 0.0;
        for (double v : col) {
            acc += std::exp(v - mx);
            mean += v;
        }
        mean /= m;
        double var = 0.0;
        for (double v : col) var += (v - mean) * (v - mean);
        var /= m - 1.0;
        lppd_i[i] = mx + std::log(acc / m);
        p_i[i] = var;
        r.pointwise[i] = -2.0 * (lppd_i[i] - p_i[i]);
    }
    r.lppd = exact_sum(lppd_i);
    r.p_waic = exact_sum(p_i);
    r.waic = exact_sum(r.pointwise);
    const double n = static_cast<double>(n_obs);
    const double mean = r.waic / n;
    double var = 0.0;
    for (double c : r.pointwise) var += (c - mean) * (c - mean);
    var = n > 1 ? var / (n - 1.0) : 0.0;
    r.se = std::sqrt(n * var);
    return r;
}

WaicResult waic(const Trace& trace) {
    if (trace.n_obs == 0 || trace.log_lik.empty()) throw ValidationError("trace has no log-likelihood");
    return waic(trace.log_lik, trace.total_draws(), trace.n_obs);
}

std::vector<RankedModel> compare_models(const std::vector<std::pair<std::string, const Trace*>>& fits) {
    if (fits.empty()) return {};
    std::vector<RankedModel> out;
    const std::size_t n = fits.front().second->n_obs;
    for (std::size_t i = 0; i < fits.size(); ++i) {
        if (fits[i].second->n_obs != n) {
            throw ValidationError("model '" + fits[i].first + "' is scored on " +
                                  std::to_string(fits[i].second->n_obs) + " observations, expected " +
                                  std::to_string(n));
        }
        out.push_back({fits[i].first, i, waic(*fits[i].second), 0.0, 0.0});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const RankedModel& a, const RankedModel& b) { return a.score.waic < b.score.waic; });
    const auto& best = out.front().score.pointwise;
    for (auto& m : out) {
        std::vector<double> diff(n);
        for (std::size_t i = 0; i < n; ++i) diff[i] = m.score.pointwise[i] - best[i];
        m.d_waic = m.score.waic - out.front().score.waic;
        double mean = 0.0;
        for (double d : diff) mean += d;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double d : diff) var += (d - mean) * (d - mean);
        var = n > 1 ? var / static_cast<double>(n - 1) : 0.0;
        m.d_se = std::sqrt(static_cast<double>(n) * var);
    }
    return out;
}

// -- posterior predictive --------------------------------------------------------

std::vector<std::vector<double>> posterior_predictive_state(const Trace& trace, std::span<const double> viirs,
                                                            std::size_t n_datasets, std::uint64_t seed) {
    std::vector<std::vector<double>> out;
    const std::vector<std::size_t> picks = spread_draws(trace, n_datasets);
    for (std::size_t k = 0; k < picks.size(); ++k) {
        const double a = block_at(trace, "alpha", picks[k])[0];
        const double b = block_at(trace, "beta", picks[k])[0];
        const double s = block_at(trace, "sigma", picks[k])[0];
        dist::Rng rng(seed, k);
        std::vector<double> y(viirs.size());
        for (std::size_t i = 0; i < viirs.size(); ++i) y[i] = a + b * viirs[i] + s * rng.normal();
        out.push_back(std::move(y));
    }
    return out;
}

std::vector<std::vector<double>> posterior_predictive_county(const Trace& trace,
                                                             const std::vector<CountyMonthly>& rows,
                                                             std::size_t n_datasets, std::uint64_t seed) {
    std::vector<std::vector<double>> out;
    const std::vector<std::size_t> picks = spread_draws(trace, n_datasets);
    for (std::size_t k = 0; k < picks.size(); ++k) {
        const std::vector<double> a = block_at(trace, "alpha_county", picks[k]);
        const std::vector<double> b = block_at(trace, "beta_county", picks[k]);
        const double s = block_at(trace, "sigma", picks[k])[0];
        dist::Rng rng(seed, k);
        std::vector<double> y(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::size_t c = rows[i].county;
            y[i] = a.at(c) + b.at(c) * rows[i].viirs_bcm + s * rng.normal();
        }
        out.push_back(std::move(y));
    }
    return out;
}

std::vector<std::vector<double>> posterior_predictive_negbin(const Trace& trace, std::size_t n_obs,
                                                             std::size_t n_datasets, std::uint64_t seed) {
    std::vector<std::vector<double>> out;
    const std::vector<std::size_t> picks = spread_draws(trace, n_datasets);
    for (std::size_t k = 0; k < picks.size(); ++k) {
        const double mu = block_at(trace, "mu", picks[k])[0];
        const double phi = block_at(trace, "phi", picks[k])[0];
        dist::Rng rng(seed, k);
        std::vector<double> y(n_obs);
        for (auto& v : y) v = static_cast<double>(dist::draw_neg_binomial(rng, mu, phi));
        out.push_back(std::move(y));
    }
    return out;
}

std::vector<std::vector<double>> posterior_predictive_gmm(const Trace& trace, std::size_t n_obs,
                                                          std::size_t n_datasets, std::uint64_t seed) {
    std::vector<std::vector<double>> out;
    const std::vector<std::size_t> picks = spread_draws(trace, n_datasets);
    for (std::size_t k = 0; k < picks.size(); ++k) {
        const std::vector<double> w = block_at(trace, "w", picks[k]);
        const std::vector<double> mu = block_at(trace, "mu", picks[k]);
        const std::vector<double> sd = block_at(trace, "sigma", picks[k]);
        dist::Rng rng(seed, k);
        std::vector<double> y(n_obs);
        for (auto& v : y) {
            double u = rng.uniform();
            std::size_t j = 0;
            while (j + 1 < w.size() && u > w[j]) u -= w[j++];
            v = mu[j] + sd[j] * rng.normal();
        }
        out.push_back(std::move(y));
    }
    return out;
}

std::vector<std::vector<double>> posterior_predictive_gp(const Trace& trace, const EntitySeries& series, GpKind kind,
                                                         std::size_t n_datasets, std::uint64_t seed) {
    validate_series(series, kind);
    std::vector<std::vector<double>> out;
    const std::vector<std::size_t> picks = spread_draws(trace, n_datasets);
    const std::string latent = latent_name(kind);
    const bool has_phi = trace.layout.contains("phi");
    for (std::size_t k = 0; k < picks.size(); ++k) {
        const std::vector<double> q = block_at(trace, latent, picks[k]);
        dist::Rng rng(seed, k);
        std::vector<double> y(q.size());
        double nu = 0.0;
        double precision = 0.0;
        if (trace.layout.contains("nu")) {
            nu = block_at(trace, "nu", picks[k])[0];
            precision = 1.0 / block_at(trace, "sigma2_hat", picks[k])[0];
        }
        for (std::size_t i = 0; i < q.size(); ++i) {
            switch (kind) {
                case GpKind::gas_proportion:
                    y[i] = dist::draw_student_t(rng, nu, q[i] * series.gas[i], precision);
                    break;
                case GpKind::boe_proportion:
                    y[i] = kMcfPerBoe * dist::draw_student_t(rng, nu, q[i] * series.oil[i], precision);
                    break;
                case GpKind::scale_factor:
                    y[i] = dist::draw_student_t(rng, nu, q[i] * series.viirs[i], precision);
                    break;
                case GpKind::well_proportion:
                    y[i] = static_cast<double>(dist::draw_binomial(rng, series.wells[i], q[i]));
                    break;
                case GpKind::detection_count:
                    y[i] = has_phi ? static_cast<double>(dist::draw_neg_binomial(
                                         rng, q[i], block_at(trace, "phi", picks[k])[0]))
                                   : static_cast<double>(dist::draw_poisson(rng, q[i]));
                    break;
            }
        }
        out.push_back(std::move(y));
    }
    return out;
}

std::string count_histogram_csv(std::span<const long> observed, const std::vector<std::vector<double>>& datasets,
                                long max_value) {
    std::ostringstream os;
    os << "value,observed,simulated_mean,simulated_lo,simulated_hi\n";
    const std::size_t bins = static_cast<std::size_t>(max_value + 1);
    std::vector<double> obs(bins, 0.0);
    for (long v : observed) {
        if (v >= 0 && v <= max_value) obs[static_cast<std::size_t>(v)] += 1.0;
    }
    std::vector<std::vector<double>> sim(bins, std::vector<double>(datasets.size(), 0.0));
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        for (double v : datasets[d]) {
            if (v >= 0 && v <= static_cast<double>(max_value)) sim[static_cast<std::size_t>(v)][d] += 1.0;
        }
    }
    for (std::size_t b = 0; b < bins; ++b) {
        std::vector<double> s = sim[b];
        double mean = 0.0;
        for (double v : s) mean += v;
        mean = s.empty() ? 0.0 : mean / static_cast<double>(s.size());
        std::sort(s.begin(), s.end());
        const double lo = s.empty() ? 0.0 : sampler::quantile_sorted(s, 0.05);
        const double hi = s.empty() ? 0.0 : sampler::quantile_sorted(s, 0.95);
        os << b << ',' << obs[b] << ',' << mean << ',' << lo << ',' << hi << '\n';
    }
    return os.str();
}

// -- bands ------------------------------------------------------------------------

std::vector<std::pair<double, double>> default_band_edges() {
    std::vector<std::pair<double, double>> e{{1, 99}};
    for (int p = 5; p <= 45; p += 5) e.emplace_back(p, 100 - p);
    e.emplace_back(49, 51);
    return e;
}

std::vector<Band> percentile_bands(std::span<const double> grid, const std::vector<std::vector<double>>& samples,
                                   const std::vector<std::pair<double, double>>& edges) {
    if (grid.size() != samples.size()) throw ValidationError("band grid and sample table differ in length");
    for (const auto& [lo, hi] : edges) {
        if (!(lo >= 0 && lo <= hi && hi <= 100)) throw ValidationError("band edges must satisfy 0 <= lo <= hi <= 100");
    }
    std::vector<Band> out;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (samples[g].size() < kMinDraws) throw ValidationError("bands need at least 100 samples per grid point");
        std::vector<double> s = samples[g];
        if (s.empty()) throw ValidationError("no samples at grid point " + std::to_string(g));
        std::sort(s.begin(), s.end());
        for (const auto& [lo, hi] : edges) {
            out.push_back({grid[g], lo, hi, sampler::quantile_sorted(s, lo / 100.0),
                           sampler::quantile_sorted(s, hi / 100.0)});
        }
    }
    return out;
}

std::vector<std::vector<double>> by_point(const std::vector<std::vector<double>>& draws) {
    if (draws.empty()) return {};
    std::vector<std::vector<double>> out(draws.front().size(), std::vector<double>(draws.size()));
    for (std::size_t d = 0; d < draws.size(); ++d) {
        for (std::size_t p = 0; p < draws[d].size(); ++p) out[p][d] = draws[d][p];
    }
    return out;
}

std::string bands_csv(const std::vector<Band>& bands) {
    std::ostringstream os;
    os.precision(17);
    os << "grid,percentile_lo,percentile_hi,value_lo,value_hi\n";
    for (const auto& b : bands) {
        os << b.grid << ',' << b.percentile_lo << ',' << b.percentile_hi << ',' << b.value_lo << ',' << b.value_hi
           << '\n';
    }
    return os.str();
}

}  // namespace flare::models
