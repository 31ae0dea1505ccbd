#include "flare/models/gp_series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flare/dist/lpdf.hpp"
#include "flare/dist/rng.hpp"
#include "flare/error.hpp"
#include "flare/gp/gp.hpp"

namespace flare::models {

using ppl::Var;

std::string to_string(GpKind kind) {
    switch (kind) {
        case GpKind::gas_proportion: return "gas_proportion";
        case GpKind::well_proportion: return "well_proportion";
        case GpKind::detection_count: return "detection_count";
        case GpKind::boe_proportion: return "boe_proportion";
        case GpKind::scale_factor: return "scale_factor";
    }
    return "";
}

GpKind parse_gp_kind(std::string_view name) {
    for (GpKind k : {GpKind::gas_proportion, GpKind::well_proportion, GpKind::detection_count,
                     GpKind::boe_proportion, GpKind::scale_factor}) {
        if (to_string(k) == name) return k;
    }
    throw ValidationError("unknown GP model kind '" + std::string(name) + "'");
}

std::string latent_name(GpKind kind) {
    switch (kind) {
        case GpKind::gas_proportion:
        case GpKind::boe_proportion: return "pi";
        case GpKind::well_proportion: return "p";
        case GpKind::detection_count: return "lambda";
        case GpKind::scale_factor: return "beta";
    }
    return "";
}

double apply_link(GpKind kind, double f) {
    switch (kind) {
        case GpKind::gas_proportion:
        case GpKind::boe_proportion:
        case GpKind::well_proportion: return ppl::inv_logit(f);
        default: return std::exp(f);
    }
}

namespace {

constexpr double kScaleFactorDelta = 1e-6;

Var link(GpKind kind, Var f) {
    switch (kind) {
        case GpKind::gas_proportion:
        case GpKind::boe_proportion:
        case GpKind::well_proportion: return ppl::inv_logit(f);
        default: return ppl::exp(f);
    }
}

bool has_student_t(GpKind kind) {
    return kind == GpKind::gas_proportion || kind == GpKind::boe_proportion || kind == GpKind::scale_factor;
}

gp::KernelExpr kind_structure(GpKind kind) {
    if (kind == GpKind::scale_factor) {
        return gp::KernelExpr::matern52(1, 1) + gp::KernelExpr::periodic(12, 1, 1) +
               gp::KernelExpr::white_noise(kScaleFactorDelta);
    }
    return gp::KernelExpr::matern52(1, 1);
}

void require_size(std::size_t got, std::size_t n, const char* field, GpKind kind) {
    if (got != n) {
        throw ValidationError("field '" + std::string(field) + "' is required by kind " + to_string(kind) +
                              " with one value per month (" + std::to_string(n) + "), got " +
                              std::to_string(got));
    }
}

template <class V>
void require_nonnegative(const std::vector<V>& v, const char* field) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 0) || !std::isfinite(static_cast<double>(v[i]))) {
            throw ValidationError("field '" + std::string(field) + "' must be non-negative (index " +
                                  std::to_string(i) + ")");
        }
    }
}

}  // namespace

std::vector<std::string> kind_hyperparameters(GpKind kind) {
    if (kind == GpKind::scale_factor) return {"ell_mat", "eta_mat", "period", "ell_per", "eta_per"};
    return {"ell", "eta"};
}

gp::KernelExpr kind_kernel(GpKind kind, std::span<const double> hyper) {
    std::vector<double> h(hyper.begin(), hyper.end());
    if (kind == GpKind::scale_factor) h.push_back(kScaleFactorDelta);
    return kind_structure(kind).with_hyperparameters(h);
}

void validate_series(const EntitySeries& s, GpKind kind, const GpSeriesOptions& options) {
    const std::size_t n = s.months.size();
    if (n == 0) throw ValidationError("series for kind " + to_string(kind) + " has no months");
    for (double m : s.months) {
        if (!std::isfinite(m)) throw ValidationError("month grid must be finite");
    }
    if (!(options.jitter >= 0.0)) throw ValidationError("jitter must be non-negative");
    switch (kind) {
        case GpKind::gas_proportion:
            require_size(s.flared.size(), n, "flared", kind);
            require_size(s.gas.size(), n, "gas", kind);
            require_nonnegative(s.flared, "flared");
            require_nonnegative(s.gas, "gas");
            break;
        case GpKind::boe_proportion:
            require_size(s.flared.size(), n, "flared", kind);
            require_size(s.oil.size(), n, "oil", kind);
            require_nonnegative(s.flared, "flared");
            require_nonnegative(s.oil, "oil");
            break;
        case GpKind::well_proportion:
            require_size(s.wells.size(), n, "wells", kind);
            require_size(s.flaring_wells.size(), n, "flaring_wells", kind);
            require_nonnegative(s.wells, "wells");
            require_nonnegative(s.flaring_wells, "flaring_wells");
            for (std::size_t i = 0; i < n; ++i) {
                if (s.flaring_wells[i] > s.wells[i]) {
                    throw ValidationError("flaring wells exceed active wells at month index " + std::to_string(i));
                }
            }
            break;
        case GpKind::detection_count:
            require_size(s.detections.size(), n, "detections", kind);
            require_nonnegative(s.detections, "detections");
            break;
        case GpKind::scale_factor:
            require_size(s.flared.size(), n, "flared", kind);
            require_size(s.viirs.size(), n, "viirs", kind);
            require_nonnegative(s.flared, "flared");
            require_nonnegative(s.viirs, "viirs");
            break;
    }
}

GpSeriesModel::GpSeriesModel(EntitySeries series, GpKind kind, GpSeriesOptions options)
    : series_(std::move(series)), kind_(kind), options_(options) {
    validate_series(series_, kind_, options_);
    const auto pos = ppl::Constraint::positive();
    std::vector<ppl::ParamSpec> specs;
    for (const auto& name : kind_hyperparameters(kind_)) specs.push_back(ppl::scalar_param(name, pos));
    n_hyper_ = specs.size();
    if (has_student_t(kind_)) {
        specs.push_back(ppl::scalar_param("nu", pos));
        specs.push_back(ppl::scalar_param("sigma2_hat", pos));
    }
    if (kind_ == GpKind::detection_count && options_.count_likelihood == CountLikelihood::neg_binomial) {
        specs.push_back(ppl::scalar_param("phi", pos));
    }
    specs.push_back(ppl::vector_param("f_tilde", series_.months.size()));
    layout_ = ppl::ParamLayout(std::move(specs));
    f_offset_ = layout_.offset(layout_.index_of("f_tilde"));
    plan_ = std::make_shared<const gp::DistancePlan>(gp::distance_plan(series_.months));
}

Var GpSeriesModel::log_density(ppl::Tape& tape, std::span<const Var> theta) const {
    const std::size_t n = series_.months.size();
    std::vector<Var> terms;
    if (kind_ == GpKind::scale_factor) {
        terms.push_back(dist::gamma_lpdf(theta[0], 8.0, 2.0));
        terms.push_back(dist::half_cauchy_lpdf(theta[1], 5.0));
        terms.push_back(dist::normal_lpdf(theta[2], 12.0, 1.0));
        terms.push_back(dist::gamma_lpdf(theta[3], 4.0, 3.0));
        terms.push_back(dist::half_cauchy_lpdf(theta[4], 5.0));
    } else {
        terms.push_back(dist::gamma_lpdf(theta[0], 2.0, 1.0));
        terms.push_back(dist::half_cauchy_lpdf(theta[1], 5.0));
    }
    std::size_t next = n_hyper_;
    Var nu;
    Var precision;
    Var phi;
    if (has_student_t(kind_)) {
        nu = theta[next++];
        const Var s2 = theta[next++];
        terms.push_back(dist::gamma_lpdf(nu, 2.0, 0.1));
        terms.push_back(dist::half_cauchy_lpdf(s2, 5.0));
        precision = 1.0 / s2;
    }
    const bool negbin = kind_ == GpKind::detection_count && options_.count_likelihood == CountLikelihood::neg_binomial;
    if (negbin) {
        phi = theta[next++];
        terms.push_back(dist::exponential_lpdf(phi, 1.0));
    }

    std::span<const Var> f_tilde = theta.subspan(f_offset_, n);
    for (const Var& z : f_tilde) terms.push_back(-0.5 * ppl::square(z));

    std::vector<Var> hyper(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(n_hyper_));
    if (kind_ == GpKind::scale_factor) hyper.push_back(tape.leaf(kScaleFactorDelta));
    const std::vector<Var> f =
        gp::latent_noncentered(tape, kind_structure(kind_), hyper, plan_, f_tilde, options_.jitter);
    if (!std::isfinite(f[0].value())) return tape.leaf(-std::numeric_limits<double>::infinity());

    const EntitySeries& s = series_;
    for (std::size_t i = 0; i < n; ++i) {
        switch (kind_) {
            case GpKind::gas_proportion:
                terms.push_back(dist::student_t_lpdf(s.flared[i], nu, link(kind_, f[i]) * s.gas[i], precision));
                break;
            case GpKind::boe_proportion:
                terms.push_back(
                    dist::student_t_lpdf(s.flared[i] / kMcfPerBoe, nu, link(kind_, f[i]) * s.oil[i], precision));
                break;
            case GpKind::scale_factor:
                terms.push_back(dist::student_t_lpdf(s.flared[i], nu, ppl::exp(f[i]) * s.viirs[i], precision));
                break;
            case GpKind::well_proportion:
                terms.push_back(dist::binomial_logit_lpmf(s.flaring_wells[i], s.wells[i], f[i]));
                break;
            case GpKind::detection_count:
                if (negbin) {
                    terms.push_back(dist::neg_binomial_2_lpmf(s.detections[i], ppl::exp(f[i]), phi));
                } else {
                    terms.push_back(dist::poisson_log_lpmf(s.detections[i], f[i]));
                }
                break;
        }
    }
    return ppl::sum(terms);
}

std::vector<double> GpSeriesModel::initial_point() const {
    std::vector<double> theta(layout_.total_size(), 0.0);
    for (std::size_t p = 0; p < layout_.count(); ++p) {
        if (layout_.spec(p).constraint.kind != ppl::ConstraintKind::positive) continue;
        std::fill_n(theta.begin() + static_cast<std::ptrdiff_t>(layout_.offset(p)), layout_.spec(p).size(), 1.0);
    }
    if (kind_ == GpKind::scale_factor) theta[layout_.offset(layout_.index_of("period"))] = 12.0;
    return theta;
}

std::vector<double> GpSeriesModel::latent(std::span<const double> theta) const {
    const std::size_t n = series_.months.size();
    try {
        return gp::latent_noncentered(kind_kernel(kind_, theta.first(n_hyper_)), series_.months,
                                      theta.subspan(f_offset_, n), options_.jitter);
    } catch (const std::exception&) {
        return std::vector<double>(n, std::numeric_limits<double>::quiet_NaN());
    }
}

std::vector<double> GpSeriesModel::pointwise_log_lik(std::span<const double> theta) const {
    const std::size_t n = series_.months.size();
    const std::vector<double> f = latent(theta);
    std::size_t next = n_hyper_;
    double nu = 0.0;
    double precision = 0.0;
    double phi = 0.0;
    if (has_student_t(kind_)) {
        nu = theta[next++];
        precision = 1.0 / theta[next++];
    }
    const bool negbin = kind_ == GpKind::detection_count && options_.count_likelihood == CountLikelihood::neg_binomial;
    if (negbin) phi = theta[next++];
    const EntitySeries& s = series_;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        switch (kind_) {
            case GpKind::gas_proportion:
                out[i] = dist::student_t_lpdf(s.flared[i], nu, apply_link(kind_, f[i]) * s.gas[i], precision);
                break;
            case GpKind::boe_proportion:
                out[i] = dist::student_t_lpdf(s.flared[i] / kMcfPerBoe, nu, apply_link(kind_, f[i]) * s.oil[i],
                                              precision);
                break;
            case GpKind::scale_factor:
                out[i] = dist::student_t_lpdf(s.flared[i], nu, std::exp(f[i]) * s.viirs[i], precision);
                break;
            case GpKind::well_proportion:
                out[i] = dist::binomial_logit_lpmf(s.flaring_wells[i], s.wells[i], f[i]);
                break;
            case GpKind::detection_count:
                out[i] = negbin ? dist::neg_binomial_2_lpmf(s.detections[i], std::exp(f[i]), phi)
                                : dist::poisson_log_lpmf(s.detections[i], f[i]);
                break;
        }
    }
    return out;
}

Trace fit_gp_series(const EntitySeries& series, GpKind kind, const SamplerConfig& cfg,
                    const GpSeriesOptions& options) {
    auto model = std::make_shared<GpSeriesModel>(series, kind, options);
    Trace t = run_nuts(model, cfg);
    const std::size_t n = series.months.size();
    append_derived(t, {ppl::vector_param("f", n), ppl::vector_param(latent_name(kind), n)},
                   [&](std::span<const double> theta, std::span<double> out) {
                       const std::vector<double> f = model->latent(theta);
                       for (std::size_t i = 0; i < n; ++i) {
                           out[i] = f[i];
                           out[n + i] = apply_link(kind, f[i]);
                       }
                   });
    return t;
}

std::vector<std::vector<double>> forecast_latent_at(const Trace& trace, GpKind kind, std::span<const double> months,
                                                    std::span<const double> x_new, std::uint64_t seed,
                                                    std::size_t max_draws, double jitter) {
    if (x_new.empty()) throw ValidationError("forecast grid is empty");
    const std::vector<std::string> names = kind_hyperparameters(kind);
    const std::size_t used = std::min(max_draws, trace.total_draws());
    std::vector<std::vector<double>> out;
    out.reserve(used);
    for (std::size_t d : spread_draws(trace, used)) {
        std::vector<double> h;
        for (const auto& name : names) h.push_back(block_at(trace, name, d)[0]);
        const std::vector<double> f = block_at(trace, "f", d);
        if (f.size() != months.size()) throw ValidationError("trace latent length differs from the month grid");
        const gp::Conditional c = gp::gp_condition(months, f, kind_kernel(kind, h), x_new, jitter);
        dist::Rng rng(seed, d);
        std::vector<double> row = gp::draw(c, rng, jitter);
        for (auto& v : row) v = apply_link(kind, v);
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<std::vector<double>> forecast_latent(const Trace& trace, GpKind kind, std::span<const double> months,
                                                 int horizon, std::uint64_t seed, std::size_t max_draws) {
    if (horizon <= 0) throw ValidationError("forecast horizon must be positive");
    if (months.empty()) throw ValidationError("month grid is empty");
    double last = months[0];
    for (double m : months) last = std::max(last, m);
    std::vector<double> grid(static_cast<std::size_t>(horizon));
    for (int h = 0; h < horizon; ++h) grid[static_cast<std::size_t>(h)] = last + 1.0 + h;
    return forecast_latent_at(trace, kind, months, grid, seed, max_draws);
}

}  // namespace flare::models
