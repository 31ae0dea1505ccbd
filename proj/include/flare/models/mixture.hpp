#pragma once

// Oilfield-level cross-sectional models: negative binomial detection counts
// and Gaussian mixtures over log flared volume.

#include <cstddef>
#include <vector>

#include "flare/models/common.hpp"

namespace flare::models {

// mu ~ Gamma(2, 1), phi ~ Exponential(1), C_i ~ NegBinomial(mu, phi).
class NegBinCountModel : public ppl::Model {
  public:
    explicit NegBinCountModel(std::vector<long> counts);

    const ppl::ParamLayout& layout() const override { return layout_; }
    ppl::Var log_density(ppl::Tape& tape, std::span<const ppl::Var> theta) const override;
    std::vector<double> pointwise_log_lik(std::span<const double> theta) const override;
    std::size_t observation_count() const override { return counts_.size(); }

  private:
    std::vector<long> counts_;
    std::vector<std::pair<long, double>> histogram_;  // distinct value, multiplicity
    ppl::ParamLayout layout_;
};

// Requires at least 10 non-negative counts.
Trace fit_negbin_counts(const std::vector<long>& counts, const SamplerConfig& cfg);

struct GmmOptions {
    std::size_t k_min = 1;
    std::size_t k_max = 7;
    double concentration = 6.0;  // symmetric Dirichlet alpha
    double mean_prior_sd = 2.0;
    double sd_prior_scale = 2.0;
};

// w ~ Dirichlet(alpha 1_K), mu_k ~ N(mu0_k, 2) with mu0 evenly spaced over
// [min L, max L] (the midpoint when K = 1), sigma_k ~ HalfNormal(2),
// L_i ~ sum_k w_k N(mu_k, sigma_k) with the assignments marginalized out.
class GaussianMixtureModel : public ppl::Model {
  public:
    GaussianMixtureModel(std::vector<double> data, std::size_t k, GmmOptions options = {});

    const ppl::ParamLayout& layout() const override { return layout_; }
    ppl::Var log_density(ppl::Tape& tape, std::span<const ppl::Var> theta) const override;
    std::vector<double> pointwise_log_lik(std::span<const double> theta) const override;
    std::size_t observation_count() const override { return data_.size(); }

    std::size_t components() const { return k_; }
    const std::vector<double>& prior_locations() const { return mu0_; }

  private:
    std::vector<double> data_;
    std::size_t k_;
    GmmOptions options_;
    std::vector<double> mu0_;
    ppl::ParamLayout layout_;
};

// log sum_k w_k N(x | mu_k, sigma_k)
double mixture_log_density(double x, std::span<const double> w, std::span<const double> mu,
                           std::span<const double> sigma);

struct MixtureFit {
    std::size_t k = 0;
    std::vector<double> weights;  // posterior means after per-draw ordering by mu
    std::vector<double> means;
    std::vector<double> sds;
    Trace trace;
};

// Components are relabelled in every draw so that mu is increasing.
MixtureFit fit_gmm(const std::vector<double>& magnitudes, std::size_t k, const SamplerConfig& cfg,
                   const GmmOptions& options = {});

// Posterior probability of each component for x under the posterior-mean
// parameters; sums to one.
std::vector<double> responsibilities(const MixtureFit& fit, double x);

}  // namespace flare::models
