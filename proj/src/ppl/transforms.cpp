#include "flare/ppl/transforms.hpp"

#include <cmath>
#include <string>

#include "flare/error.hpp"

namespace flare::ppl {

namespace {

constexpr double kSimplexTol = 1e-10;
constexpr double kCorrTol = 1e-10;

[[noreturn]] void fail(const ParamSpec& spec, const std::string& why) {
    throw DomainError("parameter '" + spec.name + "' (" + to_string(spec.constraint) +
                      "): " + why);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

}  // namespace

Unconstrained to_unconstrained(const ParamSpec& spec, std::span<const double> x) {
    if (x.size() != spec.size()) fail(spec, "wrong number of values");
    for (double v : x) {
        if (!std::isfinite(v)) fail(spec, "non-finite value");
    }
    Unconstrained out;
    out.u.resize(spec.free_dim());
    switch (spec.constraint.kind) {
        case ConstraintKind::real:
            std::copy(x.begin(), x.end(), out.u.begin());
            break;
        case ConstraintKind::positive:
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (!(x[i] > 0.0)) fail(spec, "value must be > 0");
                out.u[i] = std::log(x[i]);
            }
            break;
        case ConstraintKind::unit_interval:
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (!(x[i] > 0.0 && x[i] < 1.0)) fail(spec, "value must lie in (0, 1)");
                out.u[i] = logit(x[i]);
            }
            break;
        case ConstraintKind::simplex: {
            const std::size_t k = spec.constraint.k;
            double total = 0.0;
            for (double v : x) {
                if (!(v > 0.0)) fail(spec, "simplex entries must be > 0");
                total += v;
            }
            if (std::fabs(total - 1.0) > kSimplexTol) fail(spec, "simplex must sum to 1");
            double stick = 1.0;
            for (std::size_t i = 0; i + 1 < k; ++i) {
                const double z = x[i] / stick;
                out.u[i] = logit(z) + std::log(static_cast<double>(k - 1 - i));
                stick -= x[i];
            }
            break;
        }
        case ConstraintKind::cholesky_corr: {
            const std::size_t k = spec.constraint.k;
            std::size_t pos = 0;
            for (std::size_t i = 0; i < k; ++i) {
                double row_sq = 0.0;
                for (std::size_t j = 0; j < k; ++j) {
                    const double v = x[i * k + j];
                    if (j > i && v != 0.0) fail(spec, "factor must be lower triangular");
                    if (j <= i) row_sq += v * v;
                }
                if (std::fabs(row_sq - 1.0) > kCorrTol) fail(spec, "factor rows must have unit norm");
                if (!(x[i * k + i] > 0.0)) fail(spec, "factor diagonal must be > 0");
                double sum_sq = 0.0;
                for (std::size_t j = 0; j < i; ++j) {
                    const double entry = x[i * k + j];
                    const double z = entry / std::sqrt(1.0 - sum_sq);
                    if (!(std::fabs(z) < 1.0)) fail(spec, "partial correlation outside (-1, 1)");
                    out.u[pos++] = std::atanh(z);
                    sum_sq += entry * entry;
                }
            }
            break;
        }
    }
    out.log_jacobian = log_jacobian(spec, out.u);
    return out;
}

std::vector<double> from_unconstrained(const ParamSpec& spec, std::span<const double> u) {
    std::vector<double> x(spec.size());
    std::vector<double> terms;
    constrain<double>(spec, u, x, terms);
    return x;
}

double log_jacobian(const ParamSpec& spec, std::span<const double> u) {
    std::vector<double> x(spec.size());
    std::vector<double> terms;
    constrain<double>(spec, u, x, terms);
    double total = 0.0;
    for (double t : terms) total += t;
    return total;
}

}  // namespace flare::ppl
