#include "flare/models/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "flare/dist/lpdf.hpp"
#include "flare/error.hpp"

namespace flare::models {

using ppl::Var;

// -- negative binomial ---------------------------------------------------------

NegBinCountModel::NegBinCountModel(std::vector<long> counts)
    : counts_(std::move(counts)),
      layout_({ppl::scalar_param("mu", ppl::Constraint::positive()),
               ppl::scalar_param("phi", ppl::Constraint::positive())}) {
    std::map<long, double> h;
    for (long c : counts_) h[c] += 1.0;
    histogram_.assign(h.begin(), h.end());
}

Var NegBinCountModel::log_density(ppl::Tape&, std::span<const Var> theta) const {
    const Var mu = theta[0];
    const Var phi = theta[1];
    std::vector<Var> terms{dist::gamma_lpdf(mu, 2.0, 1.0), dist::exponential_lpdf(phi, 1.0)};
    for (const auto& [value, count] : histogram_) terms.push_back(count * dist::neg_binomial_2_lpmf(value, mu, phi));
    return ppl::sum(terms);
}

std::vector<double> NegBinCountModel::pointwise_log_lik(std::span<const double> theta) const {
    std::vector<double> out(counts_.size());
    for (std::size_t i = 0; i < counts_.size(); ++i) out[i] = dist::neg_binomial_2_lpmf(counts_[i], theta[0], theta[1]);
    return out;
}

Trace fit_negbin_counts(const std::vector<long>& counts, const SamplerConfig& cfg) {
    if (counts.size() < 10) throw ValidationError("count model needs at least 10 observations");
    for (long c : counts) {
        if (c < 0) throw ValidationError("detection counts must be non-negative");
    }
    return run_nuts(std::make_shared<NegBinCountModel>(counts), cfg);
}

// -- Gaussian mixture ----------------------------------------------------------

double mixture_log_density(double x, std::span<const double> w, std::span<const double> mu,
                           std::span<const double> sigma) {
    std::vector<double> terms(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        terms[k] = (w[k] > 0.0 ? std::log(w[k]) : dist::kNegInf) + dist::normal_lpdf(x, mu[k], sigma[k]);
    }
    return ppl::log_sum_exp(terms);
}

GaussianMixtureModel::GaussianMixtureModel(std::vector<double> data, std::size_t k, GmmOptions options)
    : data_(std::move(data)), k_(k), options_(options) {
    if (k_ < options_.k_min || k_ > options_.k_max) {
        throw ValidationError("component count " + std::to_string(k_) + " outside [" +
                              std::to_string(options_.k_min) + ", " + std::to_string(options_.k_max) + "]");
    }
    if (data_.size() <= k_) throw ValidationError("mixture needs more observations than components");
    for (double v : data_) {
        if (!std::isfinite(v)) throw ValidationError("mixture data must be finite");
    }
    const auto [lo, hi] = std::minmax_element(data_.begin(), data_.end());
    mu0_.resize(k_);
    for (std::size_t j = 0; j < k_; ++j) {
        mu0_[j] = k_ == 1 ? 0.5 * (*lo + *hi)
                          : *lo + static_cast<double>(j) * (*hi - *lo) / static_cast<double>(k_ - 1);
    }
    layout_ = ppl::ParamLayout({ppl::simplex_param("w", k_), ppl::vector_param("mu", k_),
                                ppl::vector_param("sigma", k_, ppl::Constraint::positive())});
}

Var GaussianMixtureModel::log_density(ppl::Tape&, std::span<const Var> theta) const {
    std::span<const Var> w = theta.subspan(0, k_);
    std::span<const Var> mu = theta.subspan(k_, k_);
    std::span<const Var> sigma = theta.subspan(2 * k_, k_);
    std::vector<Var> terms;
    terms.reserve(3 * k_ + data_.size() + 1);
    if (k_ > 1) {
        const std::vector<double> alpha(k_, options_.concentration);
        terms.push_back(dist::dirichlet_lpdf<Var>(w, alpha));
    }
    std::vector<Var> log_w(k_);
    std::vector<Var> log_sigma(k_);
    std::vector<Var> inv_sigma(k_);
    for (std::size_t j = 0; j < k_; ++j) {
        terms.push_back(dist::normal_lpdf(mu[j], mu0_[j], options_.mean_prior_sd));
        terms.push_back(dist::half_normal_lpdf(sigma[j], options_.sd_prior_scale));
        log_w[j] = ppl::log(w[j]);
        log_sigma[j] = ppl::log(sigma[j]);
        inv_sigma[j] = 1.0 / sigma[j];
    }
    std::vector<Var> comp(k_);
    for (double x : data_) {
        for (std::size_t j = 0; j < k_; ++j) {
            const Var z = (x - mu[j]) * inv_sigma[j];
            comp[j] = log_w[j] - 0.5 * ppl::square(z) - log_sigma[j] - dist::kHalfLog2Pi;
        }
        terms.push_back(k_ == 1 ? comp[0] : ppl::log_sum_exp(comp));
    }
    return ppl::sum(terms);
}

std::vector<double> GaussianMixtureModel::pointwise_log_lik(std::span<const double> theta) const {
    std::vector<double> out(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) {
        out[i] = mixture_log_density(data_[i], theta.subspan(0, k_), theta.subspan(k_, k_), theta.subspan(2 * k_, k_));
    }
    return out;
}

MixtureFit fit_gmm(const std::vector<double>& magnitudes, std::size_t k, const SamplerConfig& cfg,
                   const GmmOptions& options) {
    MixtureFit fit;
    fit.k = k;
    fit.trace = run_nuts(std::make_shared<GaussianMixtureModel>(magnitudes, k, options), cfg);
    Trace& t = fit.trace;
    const std::size_t dim = t.dim();
    std::vector<std::size_t> order(k);
    std::vector<double> tmp(3 * k);
    for (std::size_t d = 0; d < t.total_draws(); ++d) {
        double* row = t.values.data() + d * dim;
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[k + a] < row[k + b]; });
        for (std::size_t j = 0; j < k; ++j) {
            tmp[j] = row[order[j]];
            tmp[k + j] = row[k + order[j]];
            tmp[2 * k + j] = row[2 * k + order[j]];
        }
        std::copy(tmp.begin(), tmp.end(), row);
    }
    fit.weights.assign(k, 0.0);
    fit.means.assign(k, 0.0);
    fit.sds.assign(k, 0.0);
    const double n = static_cast<double>(t.total_draws());
    for (std::size_t d = 0; d < t.total_draws(); ++d) {
        const double* row = t.values.data() + d * dim;
        for (std::size_t j = 0; j < k; ++j) {
            fit.weights[j] += row[j] / n;
            fit.means[j] += row[k + j] / n;
            fit.sds[j] += row[2 * k + j] / n;
        }
    }
    return fit;
}

std::vector<double> responsibilities(const MixtureFit& fit, double x) {
    const std::size_t k = fit.weights.size();
    std::vector<double> lp(k);
    for (std::size_t j = 0; j < k; ++j) {
        lp[j] = (fit.weights[j] > 0.0 ? std::log(fit.weights[j]) : dist::kNegInf) +
                dist::normal_lpdf(x, fit.means[j], fit.sds[j]);
    }
    const double norm = ppl::log_sum_exp(lp);
    std::vector<double> out(k);
    for (std::size_t j = 0; j < k; ++j) out[j] = std::exp(lp[j] - norm);
    return out;
}

}  // namespace flare::models
