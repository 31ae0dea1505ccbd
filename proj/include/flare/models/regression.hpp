#pragma once

// State-level and county-level linear models of NDIC against VIIRS volumes.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "flare/models/common.hpp"

namespace flare::models {

struct StateMonthly {
    int month = 0;
    double viirs_bcm = 0.0;
    double ndic_bcm = 0.0;
};

// alpha ~ HalfNormal(0.2), beta ~ Gamma(2, 2), sigma ~ HalfCauchy(0.1),
// NDIC_i ~ N(alpha + beta * VIIRS_i, sigma).
class StateLinearModel : public ppl::Model {
  public:
    explicit StateLinearModel(std::vector<StateMonthly> data);

    const ppl::ParamLayout& layout() const override { return layout_; }
    ppl::Var log_density(ppl::Tape& tape, std::span<const ppl::Var> theta) const override;
    std::vector<double> pointwise_log_lik(std::span<const double> theta) const override;
    std::size_t observation_count() const override { return data_.size(); }

    const std::vector<StateMonthly>& data() const { return data_; }

  private:
    std::vector<StateMonthly> data_;
    ppl::ParamLayout layout_;
};

// Empty data gives a prior-only fit; 1 or 2 months are rejected. Identical
// VIIRS values add a warning to the trace.
Trace fit_state_linear(const std::vector<StateMonthly>& data, const SamplerConfig& cfg);

inline double state_point_prediction(double alpha, double beta, double viirs) {
    return alpha + beta * viirs;
}

// County codes and names; indices are positions in the table.
class CountyRegistry {
  public:
    static CountyRegistry north_dakota();

    std::size_t add(std::string code, std::string name);
    // Throws ValidationError for unknown codes.
    std::size_t index_of(std::string_view code) const;
    bool contains(std::string_view code) const;
    const std::string& code(std::size_t i) const { return codes_.at(i); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    std::size_t size() const { return codes_.size(); }

  private:
    std::vector<std::string> codes_;
    std::vector<std::string> names_;
};

struct CountyMonthly {
    std::size_t county = 0;
    int month = 0;
    double viirs_bcm = 0.0;
    double ndic_bcm = 0.0;
};

enum class Parameterization { centered, noncentered, mixed };

struct CountyOptions {
    Parameterization parameterization = Parameterization::noncentered;
    // For mixed: one flag per county, true = noncentered.
    std::vector<bool> noncentered;
    double lkj_eta = 2.0;
};

// mu_alpha ~ HalfNormal(0.1), mu_beta ~ Gamma(2, 2), sigma_alpha, sigma_beta ~
// HalfNormal(0.1), sigma ~ HalfNormal(0.05), L_corr ~ LKJ(2) Cholesky factor,
// (alpha_j, beta_j) ~ MVNormal((mu_alpha, mu_beta), diag(s) R diag(s)),
// NDIC ~ N(alpha_county + beta_county * VIIRS, sigma).
// Centered counties sample (alpha_j, beta_j) directly as ab_centered; the
// others sample standard normal z_noncentered and set mu + L z.
class CountyHierarchicalModel : public ppl::Model {
  public:
    CountyHierarchicalModel(std::vector<CountyMonthly> data, std::size_t counties, CountyOptions options);

    const ppl::ParamLayout& layout() const override { return layout_; }
    ppl::Var log_density(ppl::Tape& tape, std::span<const ppl::Var> theta) const override;
    std::vector<double> pointwise_log_lik(std::span<const double> theta) const override;
    std::size_t observation_count() const override { return data_.size(); }

    std::size_t counties() const { return counties_; }
    // (alpha_j, beta_j) for every county at constrained theta.
    std::vector<double> county_coefficients(std::span<const double> theta) const;

  private:
    template <class T>
    std::vector<T> coefficients(std::span<const T> theta, T* prior) const;

    std::vector<CountyMonthly> data_;
    std::size_t counties_;
    CountyOptions options_;
    std::vector<bool> nc_;
    std::vector<std::size_t> slot_;  // position within its own block
    ppl::ParamLayout layout_;
};

// Trace gains alpha_county[J], beta_county[J] and rho.
Trace fit_county_hierarchical(const std::vector<CountyMonthly>& data, std::size_t counties,
                              const CountyOptions& options, const SamplerConfig& cfg);

// "beta_county[3]" for the county with this code.
std::string county_component(const CountyRegistry& registry, std::string_view code, std::string_view coef);

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
};
// Ordinary least squares for one county (no pooling).
LineFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace flare::models
