#include "flare/ppl/tape.hpp"

#include <algorithm>
#include <limits>
#include <math.h>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>

#include "flare/simd/kernels.hpp"

namespace flare::ppl {

void Tape::backward(Var out) {
    adjoints_.assign(values_.size(), 0.0);
    adjoints_[out.id] = 1.0;
    std::size_t pending = callbacks_.size();
    for (std::size_t i = values_.size(); i-- > 0;) {
        while (pending > 0 && callbacks_[pending - 1].anchor > i) {
            callbacks_[--pending].fn(*this);
        }
        const double a = adjoints_[i];
        if (a == 0.0) continue;
        for (std::uint32_t e = offsets_[i]; e < offsets_[i + 1]; ++e) {
            adjoints_[parents_[e]] += a * partials_[e];
        }
    }
    while (pending > 0) callbacks_[--pending].fn(*this);
}

double log_gamma(double x) {
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

double digamma(double x) { return boost::math::digamma(x); }

double log_sum_exp(std::span<const double> xs) {
    if (xs.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(xs.begin(), xs.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

Var log_sum_exp(std::span<const Var> xs) {
    if (xs.empty()) throw std::invalid_argument("log_sum_exp of an empty Var list");
    std::vector<double> vals(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) vals[i] = xs[i].value();
    const double lse = log_sum_exp(vals);
    std::vector<double> partials(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        partials[i] = std::isfinite(lse) ? std::exp(vals[i] - lse) : 0.0;
    }
    return xs.front().tape->nary(lse, xs, partials);
}

double sum(std::span<const double> xs) { return simd::sum(xs); }

Var sum(std::span<const Var> xs) {
    if (xs.empty()) throw std::invalid_argument("sum of an empty Var list");
    double s = 0.0;
    for (const Var& x : xs) s += x.value();
    std::vector<double> ones(xs.size(), 1.0);
    return xs.front().tape->nary(s, xs, ones);
}

Var dot(std::span<const Var> a, std::span<const double> b) {
    if (a.empty()) throw std::invalid_argument("dot of an empty Var list");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i].value() * b[i];
    return a.front().tape->nary(s, a, b.first(a.size()));
}

}  // namespace flare::ppl
