#pragma once

// Latent-GP monthly series models with noncentered Matern (and periodic)
// priors and kind-specific links and observation models.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flare/gp/gp.hpp"
#include "flare/gp/kernel.hpp"
#include "flare/models/common.hpp"

namespace flare::models {

enum class GpKind { gas_proportion, well_proportion, detection_count, boe_proportion, scale_factor };

std::string to_string(GpKind kind);
// Throws ValidationError for unknown names.
GpKind parse_gp_kind(std::string_view name);

inline constexpr double kMcfPerBoe = 6.0;

// Per-month data; each kind validates the fields it needs.
struct EntitySeries {
    std::vector<double> months;  // grid x (month index)
    std::vector<double> flared;  // F_i (mcf, or NDIC volume for scale_factor)
    std::vector<double> gas;     // G_i
    std::vector<double> oil;     // O_i (boe)
    std::vector<long> wells;     // N_i
    std::vector<long> flaring_wells;  // W_i
    std::vector<long> detections;     // C_i
    std::vector<double> viirs;        // VIIRS_i
};

enum class CountLikelihood { poisson, neg_binomial };

struct GpSeriesOptions {
    CountLikelihood count_likelihood = CountLikelihood::poisson;
    double jitter = 1e-6;
};

// Name of the per-month derived quantity: pi, p, lambda, pi (boe), beta.
std::string latent_name(GpKind kind);
// link(f): inverse logit for proportions, exp otherwise.
double apply_link(GpKind kind, double f);

// Kernel for a kind with hyperparameters taken from theta-ordered values:
// Matern kinds use (ell, eta); scale_factor uses (ell_mat, eta_mat, period,
// ell_per, eta_per) plus a fixed white noise of 1e-6.
gp::KernelExpr kind_kernel(GpKind kind, std::span<const double> hyper);
std::vector<std::string> kind_hyperparameters(GpKind kind);

class GpSeriesModel : public ppl::Model {
  public:
    GpSeriesModel(EntitySeries series, GpKind kind, GpSeriesOptions options = {});

    const ppl::ParamLayout& layout() const override { return layout_; }
    ppl::Var log_density(ppl::Tape& tape, std::span<const ppl::Var> theta) const override;
    std::vector<double> pointwise_log_lik(std::span<const double> theta) const override;
    std::size_t observation_count() const override { return series_.months.size(); }
    // Positive parameters at 1, the period at its prior mean.
    std::vector<double> initial_point() const override;

    GpKind kind() const { return kind_; }
    const EntitySeries& series() const { return series_; }
    // Latent f at constrained theta (NaN when the factorization fails).
    std::vector<double> latent(std::span<const double> theta) const;

  private:
    EntitySeries series_;
    GpKind kind_;
    GpSeriesOptions options_;
    ppl::ParamLayout layout_;
    std::size_t n_hyper_ = 0;
    std::size_t f_offset_ = 0;
    std::shared_ptr<const gp::DistancePlan> plan_;
};

// Validates required fields for the kind (ValidationError naming field and kind).
void validate_series(const EntitySeries& s, GpKind kind, const GpSeriesOptions& options = {});

// Trace gains f[n] (latent values) and the linked quantity (latent_name(kind)).
Trace fit_gp_series(const EntitySeries& series, GpKind kind, const SamplerConfig& cfg,
                    const GpSeriesOptions& options = {});

// Predictive samples of the linked latent quantity at x_new, one row per used
// posterior draw ([draw][point]). Uses at most max_draws evenly spaced draws.
std::vector<std::vector<double>> forecast_latent_at(const Trace& trace, GpKind kind,
                                                    std::span<const double> months,
                                                    std::span<const double> x_new, std::uint64_t seed,
                                                    std::size_t max_draws = 1000, double jitter = 1e-6);

// horizon months after the last training month.
std::vector<std::vector<double>> forecast_latent(const Trace& trace, GpKind kind, std::span<const double> months,
                                                 int horizon, std::uint64_t seed, std::size_t max_draws = 1000);

inline double gas_capture_from_proportion(double pi) {
    if (!(pi >= 0.0 && pi <= 1.0)) throw DomainError("flared proportion must lie in [0, 1]");
    return 1.0 - pi;
}

}  // namespace flare::models
