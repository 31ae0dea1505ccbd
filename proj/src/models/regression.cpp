#include "flare/models/regression.hpp"

#include <cmath>
#include <numbers>

#include "flare/dist/lpdf.hpp"
#include "flare/error.hpp"

namespace flare::models {

using ppl::Var;

namespace {

constexpr double kLog2Pi = 1.83787706640934548356;

}  // namespace

// -- state ---------------------------------------------------------------------

StateLinearModel::StateLinearModel(std::vector<StateMonthly> data)
    : data_(std::move(data)),
      layout_({ppl::scalar_param("alpha", ppl::Constraint::positive()),
               ppl::scalar_param("beta", ppl::Constraint::positive()),
               ppl::scalar_param("sigma", ppl::Constraint::positive())}) {}

Var StateLinearModel::log_density(ppl::Tape& tape, std::span<const Var> theta) const {
    const Var alpha = theta[0];
    const Var beta = theta[1];
    const Var sigma = theta[2];
    Var lp = dist::half_normal_lpdf(alpha, 0.2) + dist::gamma_lpdf(beta, 2.0, 2.0) +
             dist::half_cauchy_lpdf(sigma, 0.1);
    if (data_.empty()) return lp;
    std::vector<Var> sq;
    sq.reserve(data_.size());
    for (const auto& d : data_) sq.push_back(ppl::square(d.ndic_bcm - (alpha + beta * d.viirs_bcm)));
    const double n = static_cast<double>(data_.size());
    return lp - 0.5 * ppl::sum(sq) / ppl::square(sigma) - n * ppl::log(sigma) - n * dist::kHalfLog2Pi;
}

std::vector<double> StateLinearModel::pointwise_log_lik(std::span<const double> theta) const {
    std::vector<double> out(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) {
        out[i] = dist::normal_lpdf(data_[i].ndic_bcm, theta[0] + theta[1] * data_[i].viirs_bcm, theta[2]);
    }
    return out;
}

Trace fit_state_linear(const std::vector<StateMonthly>& data, const SamplerConfig& cfg) {
    if (!data.empty() && data.size() < 3) {
        throw ValidationError("state model needs at least 3 months, got " + std::to_string(data.size()));
    }
    for (const auto& d : data) {
        if (!(d.viirs_bcm >= 0.0) || !(d.ndic_bcm >= 0.0) || !std::isfinite(d.viirs_bcm) ||
            !std::isfinite(d.ndic_bcm)) {
            throw ValidationError("volumes must be finite and non-negative (month " + std::to_string(d.month) + ")");
        }
    }
    Trace t = run_nuts(std::make_shared<StateLinearModel>(data), cfg);
    bool degenerate = !data.empty();
    for (const auto& d : data) degenerate = degenerate && d.viirs_bcm == data.front().viirs_bcm;
    if (degenerate) t.warnings.push_back("all VIIRS values are identical; slope is not identified");
    return t;
}

// -- county registry -----------------------------------------------------------

CountyRegistry CountyRegistry::north_dakota() {
    CountyRegistry r;
    r.add("MCK", "McKenzie County");
    r.add("DUN", "Dunn County");
    r.add("WIL", "Williams County");
    r.add("MTL", "Mountrail County");
    r.add("BOW", "Bowman County");
    r.add("DIV", "Divide County");
    r.add("BRK", "Burke County");
    r.add("MCL", "McLean County");
    r.add("BIL", "Billings County");
    r.add("STK", "Stark County");
    r.add("SLP", "Slope County");
    r.add("GV", "Golden Valley County");
    return r;
}

std::size_t CountyRegistry::add(std::string code, std::string name) {
    if (contains(code)) throw ValidationError("county code '" + code + "' already registered");
    codes_.push_back(std::move(code));
    names_.push_back(std::move(name));
    return codes_.size() - 1;
}

bool CountyRegistry::contains(std::string_view code) const {
    for (const auto& c : codes_) {
        if (c == code) return true;
    }
    return false;
}

std::size_t CountyRegistry::index_of(std::string_view code) const {
    for (std::size_t i = 0; i < codes_.size(); ++i) {
        if (codes_[i] == code) return i;
    }
    throw ValidationError("unknown county label '" + std::string(code) + "'");
}

std::string county_component(const CountyRegistry& registry, std::string_view code, std::string_view coef) {
    return std::string(coef) + "_county[" + std::to_string(registry.index_of(code)) + "]";
}

// -- county hierarchy ----------------------------------------------------------

CountyHierarchicalModel::CountyHierarchicalModel(std::vector<CountyMonthly> data, std::size_t counties,
                                                 CountyOptions options)
    : data_(std::move(data)), counties_(counties), options_(std::move(options)) {
    if (counties_ < 2) throw ValidationError("hierarchical model needs at least 2 counties");
    for (const auto& d : data_) {
        if (d.county >= counties_) {
            throw ValidationError("county index " + std::to_string(d.county) + " outside the registry");
        }
    }
    switch (options_.parameterization) {
        case Parameterization::centered: nc_.assign(counties_, false); break;
        case Parameterization::noncentered: nc_.assign(counties_, true); break;
        case Parameterization::mixed:
            if (options_.noncentered.size() != counties_) {
                throw ValidationError("mixed parameterization needs one flag per county");
            }
            nc_ = options_.noncentered;
            break;
    }
    std::size_t nc = 0;
    std::size_t c = 0;
    for (bool f : nc_) slot_.push_back(f ? nc++ : c++);
    std::vector<ppl::ParamSpec> specs{
        ppl::scalar_param("mu_alpha", ppl::Constraint::positive()),
        ppl::scalar_param("mu_beta", ppl::Constraint::positive()),
        ppl::scalar_param("sigma_alpha", ppl::Constraint::positive()),
        ppl::scalar_param("sigma_beta", ppl::Constraint::positive()),
        ppl::scalar_param("sigma", ppl::Constraint::positive()),
        ppl::cholesky_corr_param("L_corr", 2)};
    if (c > 0) specs.push_back({"ab_centered", {c, 2}, ppl::Constraint::real()});
    if (nc > 0) specs.push_back({"z_noncentered", {nc, 2}, ppl::Constraint::real()});
    layout_ = ppl::ParamLayout(std::move(specs));
}

template <class T>
std::vector<T> CountyHierarchicalModel::coefficients(std::span<const T> theta, T* prior) const {
    using std::log;
    const T& mu_a = theta[0];
    const T& mu_b = theta[1];
    const T& s_a = theta[2];
    const T& s_b = theta[3];
    const T& r = theta[7];  // L_corr[1,0]
    const T& lc = theta[8];  // L_corr[1,1]
    const std::size_t base = 9;
    std::size_t centered = 0;
    for (bool f : nc_) centered += f ? 0 : 1;
    const std::size_t nc_base = base + 2 * centered;

    std::vector<T> out(2 * counties_);
    std::vector<T> terms;
    for (std::size_t j = 0; j < counties_; ++j) {
        if (nc_[j]) {
            const T& z0 = theta[nc_base + 2 * slot_[j]];
            const T& z1 = theta[nc_base + 2 * slot_[j] + 1];
            out[2 * j] = mu_a + s_a * z0;
            out[2 * j + 1] = mu_b + s_b * (r * z0 + lc * z1);
            if (prior) terms.push_back(-0.5 * (z0 * z0 + z1 * z1) - kLog2Pi);
        } else {
            const T& a = theta[base + 2 * slot_[j]];
            const T& b = theta[base + 2 * slot_[j] + 1];
            out[2 * j] = a;
            out[2 * j + 1] = b;
            if (prior) {
                const T z0 = (a - mu_a) / s_a;
                const T z1 = (b - mu_b - s_b * r * z0) / (s_b * lc);
                terms.push_back(-0.5 * (z0 * z0 + z1 * z1) - log(s_a) - log(s_b) - log(lc) - kLog2Pi);
            }
        }
    }
    if (prior) {
        if constexpr (std::is_same_v<T, Var>) {
            *prior = ppl::sum(terms);
        } else {
            T s = 0.0;
            for (const auto& t : terms) s += t;
            *prior = s;
        }
    }
    return out;
}

Var CountyHierarchicalModel::log_density(ppl::Tape& tape, std::span<const Var> theta) const {
    Var lp = dist::half_normal_lpdf(theta[0], 0.1) + dist::gamma_lpdf(theta[1], 2.0, 2.0) +
             dist::half_normal_lpdf(theta[2], 0.1) + dist::half_normal_lpdf(theta[3], 0.1) +
             dist::half_normal_lpdf(theta[4], 0.05) +
             dist::lkj_corr_cholesky_lpdf<Var>(theta.subspan(5, 4), 2, options_.lkj_eta);
    Var prior = tape.leaf(0.0);
    const std::vector<Var> ab = coefficients<Var>(theta, &prior);
    lp = lp + prior;
    if (data_.empty()) return lp;
    const Var sigma = theta[4];
    std::vector<Var> sq;
    sq.reserve(data_.size());
    for (const auto& d : data_) {
        sq.push_back(ppl::square(d.ndic_bcm - (ab[2 * d.county] + ab[2 * d.county + 1] * d.viirs_bcm)));
    }
    const double n = static_cast<double>(data_.size());
    return lp - 0.5 * ppl::sum(sq) / ppl::square(sigma) - n * ppl::log(sigma) - n * dist::kHalfLog2Pi;
}

std::vector<double> CountyHierarchicalModel::county_coefficients(std::span<const double> theta) const {
    return coefficients<double>(theta, nullptr);
}

std::vector<double> CountyHierarchicalModel::pointwise_log_lik(std::span<const double> theta) const {
    const std::vector<double> ab = county_coefficients(theta);
    std::vector<double> out(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) {
        const auto& d = data_[i];
        out[i] = dist::normal_lpdf(d.ndic_bcm, ab[2 * d.county] + ab[2 * d.county + 1] * d.viirs_bcm, theta[4]);
    }
    return out;
}

Trace fit_county_hierarchical(const std::vector<CountyMonthly>& data, std::size_t counties,
                              const CountyOptions& options, const SamplerConfig& cfg) {
    auto model = std::make_shared<CountyHierarchicalModel>(data, counties, options);
    Trace t = run_nuts(model, cfg);
    append_derived(t,
                   {ppl::vector_param("alpha_county", counties), ppl::vector_param("beta_county", counties),
                    ppl::scalar_param("rho")},
                   [&](std::span<const double> theta, std::span<double> out) {
                       const std::vector<double> ab = model->county_coefficients(theta);
                       for (std::size_t j = 0; j < counties; ++j) {
                           out[j] = ab[2 * j];
                           out[counties + j] = ab[2 * j + 1];
                       }
                       out[2 * counties] = theta[7];
                   });
    return t;
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("least squares needs >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw NumericalError("least squares: x values are identical");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

}  // namespace flare::models
