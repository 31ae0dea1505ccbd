#include "flare/sampler/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "flare/error.hpp"

namespace flare::sampler {

namespace {

void check_chains(std::span<const std::vector<double>> chains) {
    if (chains.size() < 2) throw ParameterError("diagnostics need at least 2 chains");
    const std::size_t n = chains[0].size();
    if (n < 4) throw ParameterError("diagnostics need at least 4 draws per chain");
    for (const auto& c : chains) {
        if (c.size() != n) throw ParameterError("chains must have equal length");
    }
}

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// Sample variance (n - 1 denominator).
double var_of(std::span<const double> x) {
    const double m = mean_of(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

// Biased autocovariance at one lag of a centered series.
double autocovariance(std::span<const double> centered, std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < centered.size(); ++i) s += centered[i] * centered[i + lag];
    return s / static_cast<double>(centered.size());
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

double rhat(std::span<const std::vector<double>> chains) {
    check_chains(chains);
    const std::size_t half = chains[0].size() / 2;
    const std::size_t n = chains[0].size();
    std::vector<std::span<const double>> split;
    for (const auto& c : chains) {
        split.emplace_back(c.data(), half);
        split.emplace_back(c.data() + (n - half), half);
    }
    const double m = static_cast<double>(split.size());
    const double len = static_cast<double>(half);
    std::vector<double> means;
    double w = 0.0;
    for (const auto& s : split) {
        means.push_back(mean_of(s));
        w += var_of(s);
    }
    w /= m;
    if (w <= 0.0) return 1.0;
    const double b = len * var_of(means);
    const double var_plus = (len - 1.0) / len * w + b / len;
    return std::sqrt(var_plus / w);
}

double rhat(const Trace& trace, std::string_view param) {
    const auto chains = trace.chains_of(param);
    return rhat(chains);
}

double ess(std::span<const std::vector<double>> chains) {
    check_chains(chains);
    const std::size_t m = chains.size();
    const std::size_t n = chains[0].size();
    const double total = static_cast<double>(m * n);

    std::vector<std::vector<double>> centered(m, std::vector<double>(n));
    std::vector<double> chain_mean(m);
    std::vector<double> chain_var(m);
    for (std::size_t c = 0; c < m; ++c) {
        chain_mean[c] = mean_of(chains[c]);
        for (std::size_t i = 0; i < n; ++i) centered[c][i] = chains[c][i] - chain_mean[c];
        chain_var[c] = autocovariance(centered[c], 0) * static_cast<double>(n) / static_cast<double>(n - 1);
    }
    const double mean_var = mean_of(chain_var);
    double var_plus = mean_var * static_cast<double>(n - 1) / static_cast<double>(n);
    var_plus += var_of(chain_mean);
    if (!(var_plus > 0.0)) return total;

    auto rho = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t c = 0; c < m; ++c) s += autocovariance(centered[c], lag);
        return 1.0 - (mean_var - s / static_cast<double>(m)) / var_plus;
    };

    // Geyer: sums of adjacent pairs, truncated at the first non-positive pair
    // and forced monotone non-increasing.
    std::vector<double> pairs;
    for (std::size_t t = 0; t + 1 < n; t += 2) {
        const double g = rho(t) + rho(t + 1);
        if (!(g > 0.0)) break;
        if (!pairs.empty()) pairs.push_back(std::min(g, pairs.back()));
        else pairs.push_back(g);
    }
    double tau = -1.0;
    for (double g : pairs) tau += 2.0 * g;
    tau = std::max(tau, 1.0 / std::log10(total));
    return std::min(total / tau, 1.5 * total);
}

double ess(const Trace& trace, std::string_view param) {
    const auto chains = trace.chains_of(param);
    return ess(chains);
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw ParameterError("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Interval central_interval(std::vector<double> draws, double prob) {
    std::sort(draws.begin(), draws.end());
    return {quantile_sorted(draws, 0.5 * (1.0 - prob)), quantile_sorted(draws, 0.5 * (1.0 + prob))};
}

Interval hdi(std::vector<double> draws, double prob) {
    if (draws.empty()) throw ParameterError("HDI of an empty sample");
    std::sort(draws.begin(), draws.end());
    const std::size_t n = draws.size();
    std::size_t window = static_cast<std::size_t>(std::ceil(prob * static_cast<double>(n) - 1e-9));
    window = std::clamp<std::size_t>(window, 1, n);
    Interval best{draws[0], draws[window - 1]};
    for (std::size_t i = 1; i + window <= n; ++i) {
        if (draws[i + window - 1] - draws[i] < best.hi - best.lo) best = {draws[i], draws[i + window - 1]};
    }
    return best;
}

std::vector<SummaryRow> summarize(const Trace& trace, double prob) {
    if (trace.total_draws() == 0) throw ParameterError("cannot summarize an empty trace");
    if (!(prob > 0.0 && prob < 1.0)) throw ParameterError("prob must lie in (0, 1)");
    const std::vector<std::string> names = trace.layout.component_names();
    std::vector<SummaryRow> rows;
    rows.reserve(names.size());
    for (std::size_t j = 0; j < names.size(); ++j) {
        SummaryRow r;
        r.param = names[j];
        std::vector<double> all = trace.pooled(j);
        r.mean = mean_of(all);
        r.sd = all.size() > 1 ? std::sqrt(var_of(all)) : 0.0;
        std::sort(all.begin(), all.end());
        r.ci_lo = quantile_sorted(all, 0.5 * (1.0 - prob));
        r.ci_hi = quantile_sorted(all, 0.5 * (1.0 + prob));
        const Interval h = hdi(all, prob);
        r.hdi_lo = h.lo;
        r.hdi_hi = h.hi;
        r.iqr = quantile_sorted(all, 0.75) - quantile_sorted(all, 0.25);
        if (trace.chains >= 2 && trace.draws >= 4) {
            const auto chains = trace.chains_of(j);
            r.rhat = rhat(chains);
            r.ess = ess(chains);
        } else {
            r.rhat = std::nan("");
            r.ess = std::nan("");
        }
        rows.push_back(r);
    }
    return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream os;
    os << "param,mean,sd,ci_lo,ci_hi,hdi_lo,hdi_hi,rhat,ess\n";
    os << std::setprecision(10);
    for (const auto& r : rows) {
        os << csv_field(r.param) << ',' << r.mean << ',' << r.sd << ',' << r.ci_lo << ',' << r.ci_hi << ',' << r.hdi_lo
           << ',' << r.hdi_hi << ',' << r.rhat << ',' << r.ess << '\n';
    }
    return os.str();
}

}  // namespace flare::sampler
