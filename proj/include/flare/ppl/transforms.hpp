#pragma once

// Bijections between each constraint set and an unconstrained real vector.
//
//   positive        x = exp(u)                          log|J| = u
//   unit_interval   x = logistic(u)                     log|J| = log x + log(1-x)
//   simplex(K)      centered stick-breaking, K-1 free values; u = 0 maps to
//                   the uniform simplex
//   cholesky_corr   tanh-transformed canonical partial correlations filling the
//                   rows of a unit-row-norm lower-triangular factor, K(K-1)/2
//                   free values in row-major order of the strict lower triangle
//
// constrain() is templated on the scalar so the same code runs on doubles and
// on tape variables; Jacobian terms are appended to a caller-owned list.

#include <cmath>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "flare/ppl/param.hpp"
#include "flare/ppl/tape.hpp"

namespace flare::ppl {

namespace detail {

template <class T>
T constant(double v, Tape* tape) {
    if constexpr (std::is_same_v<T, Var>) {
        return tape->leaf(v);
    } else {
        return v;
    }
}

}  // namespace detail

// u.size() == spec.free_dim(), x.size() == spec.size().
template <class T>
void constrain(const ParamSpec& spec, std::span<const T> u, std::span<T> x,
               std::vector<T>& log_jacobian_terms, Tape* tape = nullptr) {
    using std::exp;
    using std::log;
    using std::sqrt;
    using std::tanh;
    switch (spec.constraint.kind) {
        case ConstraintKind::real:
            for (std::size_t i = 0; i < u.size(); ++i) x[i] = u[i];
            return;
        case ConstraintKind::positive:
            for (std::size_t i = 0; i < u.size(); ++i) {
                x[i] = exp(u[i]);
                log_jacobian_terms.push_back(u[i]);
            }
            return;
        case ConstraintKind::unit_interval:
            for (std::size_t i = 0; i < u.size(); ++i) {
                x[i] = inv_logit(u[i]);
                log_jacobian_terms.push_back(log_inv_logit(u[i]) + log1m_inv_logit(u[i]));
            }
            return;
        case ConstraintKind::simplex: {
            const std::size_t k = spec.constraint.k;
            if (k == 1) {
                x[0] = detail::constant<T>(1.0, tape);
                return;
            }
            // The first break uses the full unit stick.
            T adj = u[0] - std::log(static_cast<double>(k - 1));
            x[0] = inv_logit(adj);
            log_jacobian_terms.push_back(log_inv_logit(adj) + log1m_inv_logit(adj));
            T stick = 1.0 - x[0];
            for (std::size_t i = 1; i + 1 < k; ++i) {
                adj = u[i] - std::log(static_cast<double>(k - 1 - i));
                x[i] = stick * inv_logit(adj);
                log_jacobian_terms.push_back(log(stick) + log_inv_logit(adj) +
                                             log1m_inv_logit(adj));
                stick = stick - x[i];
            }
            x[k - 1] = stick;
            return;
        }
        case ConstraintKind::cholesky_corr: {
            const std::size_t k = spec.constraint.k;
            const T zero = detail::constant<T>(0.0, tape);
            for (std::size_t i = 0; i < k * k; ++i) x[i] = zero;
            x[0] = detail::constant<T>(1.0, tape);
            std::size_t pos = 0;
            for (std::size_t i = 1; i < k; ++i) {
                T z = tanh(u[pos++]);
                log_jacobian_terms.push_back(log(1.0 - z * z));
                x[i * k] = z;
                T sum_sq = z * z;
                for (std::size_t j = 1; j < i; ++j) {
                    z = tanh(u[pos++]);
                    log_jacobian_terms.push_back(log(1.0 - z * z));
                    log_jacobian_terms.push_back(0.5 * log(1.0 - sum_sq));
                    const T entry = z * sqrt(1.0 - sum_sq);
                    x[i * k + j] = entry;
                    sum_sq = sum_sq + entry * entry;
                }
                x[i * k + i] = sqrt(1.0 - sum_sq);
            }
            return;
        }
    }
}

// Result of mapping a constrained value back to the free space.
struct Unconstrained {
    std::vector<double> u;
    double log_jacobian = 0.0;  // log|det dx/du| evaluated at u
};

// Throws DomainError when x violates the constraint.
Unconstrained to_unconstrained(const ParamSpec& spec, std::span<const double> x);

std::vector<double> from_unconstrained(const ParamSpec& spec, std::span<const double> u);

// Log-Jacobian of from_unconstrained at u.
double log_jacobian(const ParamSpec& spec, std::span<const double> u);

}  // namespace flare::ppl
