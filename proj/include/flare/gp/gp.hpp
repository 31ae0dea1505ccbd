#pragma once

// Gram matrices, the noncentered latent GP prior, and Gaussian conditioning
// for prediction. All GP means are zero.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "flare/dist/rng.hpp"
#include "flare/gp/kernel.hpp"
#include "flare/linalg/dense.hpp"
#include "flare/ppl/tape.hpp"

namespace flare::gp {

inline constexpr double kDefaultJitter = 1e-6;

struct Gram {
    linalg::Matrix k;      // K(xs, xs) without jitter
    linalg::Matrix lower;  // Cholesky factor of K + jitter_used * I
    double jitter_used = 0.0;
};

// Throws NumericalError (with the smallest eigenvalue) when the factorization
// fails at jitter and again at 10 * jitter.
Gram gram(const KernelExpr& k, std::span<const double> xs, double jitter = kDefaultJitter);

// K(xs, xs) only; white noise on the diagonal.
linalg::Matrix gram_matrix(const KernelExpr& k, std::span<const double> xs);

// K(xs, ys), rows indexed by xs.
linalg::Matrix cross_covariance(const KernelExpr& k, std::span<const double> xs, std::span<const double> ys);

// f = L * f_tilde.
std::vector<double> latent_noncentered(const KernelExpr& k, std::span<const double> xs,
                                       std::span<const double> f_tilde, double jitter = kDefaultJitter);

// Distinct pairwise distances of a fixed grid. Every atom is stationary, so
// off-diagonal Gram entries only need one kernel evaluation per distance.
struct DistancePlan {
    std::size_t n = 0;
    std::vector<double> distances;
    std::vector<std::uint32_t> pair;  // packed strict lower triangle, i * (i - 1) / 2 + j
};

DistancePlan distance_plan(std::span<const double> xs);

// Tape version with hyperparameters as variables (depth-first order of
// `structure`; its stored values are ignored). Invalid hyperparameters or a
// failed factorization give NaN outputs, which the sampler rejects.
std::vector<ppl::Var> latent_noncentered(ppl::Tape& tape, const KernelExpr& structure,
                                         std::span<const ppl::Var> hyper, std::span<const double> xs,
                                         std::span<const ppl::Var> f_tilde, double jitter = kDefaultJitter);
std::vector<ppl::Var> latent_noncentered(ppl::Tape& tape, const KernelExpr& structure,
                                         std::span<const ppl::Var> hyper, std::shared_ptr<const DistancePlan> plan,
                                         std::span<const ppl::Var> f_tilde, double jitter = kDefaultJitter);

struct Conditional {
    std::vector<double> mean;
    linalg::Matrix cov;  // symmetrized
};

Conditional gp_condition(std::span<const double> xs, std::span<const double> f, const KernelExpr& k,
                         std::span<const double> x_new, double jitter = kDefaultJitter);

// One draw from N(mean, cov); adds jitter to the diagonal as needed.
std::vector<double> draw(const Conditional& c, dist::Rng& rng, double jitter = kDefaultJitter);

}  // namespace flare::gp
