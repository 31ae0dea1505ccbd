#include "flare/gp/gp.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "flare/error.hpp"

namespace flare::gp {

using linalg::Matrix;
using ppl::Tape;
using ppl::Var;

namespace {

bool factor_with_jitter(const Matrix& k, double jitter, Matrix& lower) {
    lower = k;
    for (std::size_t i = 0; i < k.rows(); ++i) lower(i, i) += jitter;
    return linalg::cholesky_in_place(lower);
}

// Tries jitter then 10 * jitter.
bool factor(const Matrix& k, double jitter, Matrix& lower, double& used) {
    for (double j : {jitter, 10.0 * jitter}) {
        if (factor_with_jitter(k, j, lower)) {
            used = j;
            return true;
        }
    }
    return false;
}

bool all_valid(std::span<const double> h) {
    for (double v : h) {
        if (!(std::isfinite(v) && v > 0.0)) return false;
    }
    return true;
}

}  // namespace

Matrix gram_matrix(const KernelExpr& k, std::span<const double> xs) {
    const std::size_t n = xs.size();
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = k.eval(xs[i], xs[j], i == j);
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

Matrix cross_covariance(const KernelExpr& k, std::span<const double> xs, std::span<const double> ys) {
    Matrix out(xs.size(), ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < ys.size(); ++j) out(i, j) = k(xs[i], ys[j]);
    }
    return out;
}

Gram gram(const KernelExpr& k, std::span<const double> xs, double jitter) {
    k.validate();
    if (!(jitter >= 0.0)) throw ValidationError("jitter must be non-negative");
    for (double x : xs) {
        if (!std::isfinite(x)) throw ValidationError("GP inputs must be finite");
    }
    Gram g;
    g.k = gram_matrix(k, xs);
    if (!factor(g.k, jitter, g.lower, g.jitter_used)) {
        const std::vector<double> ev = linalg::symmetric_eigenvalues(g.k);
        std::ostringstream os;
        os << "Gram matrix of " << k.describe() << " is not positive definite after jitter "
           << 10.0 * jitter << "; smallest eigenvalue " << (ev.empty() ? 0.0 : ev.front());
        throw NumericalError(os.str());
    }
    return g;
}

std::vector<double> latent_noncentered(const KernelExpr& k, std::span<const double> xs,
                                       std::span<const double> f_tilde, double jitter) {
    if (f_tilde.size() != xs.size()) throw ValidationError("whitened vector length differs from the grid");
    const Gram g = gram(k, xs, jitter);
    return g.lower * f_tilde;
}

DistancePlan distance_plan(std::span<const double> xs) {
    DistancePlan plan;
    plan.n = xs.size();
    std::map<double, std::uint32_t> seen;
    plan.pair.reserve(plan.n * (plan.n - (plan.n > 0 ? 1 : 0)) / 2);
    for (std::size_t i = 1; i < plan.n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double r = std::fabs(xs[i] - xs[j]);
            auto [it, fresh] = seen.emplace(r, static_cast<std::uint32_t>(plan.distances.size()));
            if (fresh) plan.distances.push_back(r);
            plan.pair.push_back(it->second);
        }
    }
    return plan;
}

std::vector<Var> latent_noncentered(Tape& tape, const KernelExpr& structure, std::span<const Var> hyper,
                                    std::span<const double> xs, std::span<const Var> f_tilde, double jitter) {
    for (double x : xs) {
        if (!std::isfinite(x)) throw ValidationError("GP inputs must be finite");
    }
    return latent_noncentered(tape, structure, hyper, std::make_shared<const DistancePlan>(distance_plan(xs)), f_tilde,
                              jitter);
}

std::vector<Var> latent_noncentered(Tape& tape, const KernelExpr& structure, std::span<const Var> hyper,
                                    std::shared_ptr<const DistancePlan> plan, std::span<const Var> f_tilde,
                                    double jitter) {
    const std::size_t n = plan->n;
    const std::size_t p = structure.hyperparameter_count();
    if (f_tilde.size() != n) throw ValidationError("whitened vector length differs from the grid");
    if (hyper.size() != p) throw ValidationError("hyperparameter count does not match the kernel");

    std::vector<double> h(p);
    for (std::size_t i = 0; i < p; ++i) h[i] = hyper[i].value();
    std::vector<Var> out(n);
    auto fail = [&] {
        for (auto& v : out) v = tape.leaf(std::numeric_limits<double>::quiet_NaN());
        return out;
    };
    if (!all_valid(h)) return fail();

    const KernelExpr kern = structure.with_hyperparameters(h);
    const std::size_t u = plan->distances.size();
    std::vector<double> kv(u);
    for (std::size_t d = 0; d < u; ++d) kv[d] = kern.eval(0.0, plan->distances[d], false);
    Matrix k(n, n);
    const double diag = kern.eval(0.0, 0.0, true);
    for (std::size_t i = 0, q = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j, ++q) {
            k(i, j) = kv[plan->pair[q]];
            k(j, i) = k(i, j);
        }
        k(i, i) = diag;
    }
    auto lower = std::make_shared<Matrix>();
    double used = 0.0;
    if (!factor(k, jitter, *lower, used)) return fail();

    auto z = std::make_shared<std::vector<double>>(n);
    for (std::size_t i = 0; i < n; ++i) (*z)[i] = f_tilde[i].value();
    const std::vector<double> f = *lower * std::span<const double>(*z);
    for (std::size_t i = 0; i < n; ++i) out[i] = tape.leaf(f[i]);

    std::vector<std::uint32_t> out_ids(n), z_ids(n), h_ids(p);
    for (std::size_t i = 0; i < n; ++i) {
        out_ids[i] = out[i].id;
        z_ids[i] = f_tilde[i].id;
    }
    for (std::size_t i = 0; i < p; ++i) h_ids[i] = hyper[i].id;

    tape.on_backward([=, kern = std::make_shared<const KernelExpr>(kern)](Tape& t) {
        std::vector<double> fbar(n);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            fbar[i] = t.adjoint(out_ids[i]);
            any = any || fbar[i] != 0.0;
        }
        if (!any) return;
        const Matrix& l = *lower;
        // d/d f_tilde = L^T fbar
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t i = j; i < n; ++i) acc += l(i, j) * fbar[i];
            t.add_adjoint(z_ids[j], acc);
        }
        if (p == 0) return;
        const Matrix kbar = linalg::cholesky_adjoint_rank_one(l, fbar, *z);
        // Collapse the Gram adjoint onto distinct distances.
        std::vector<double> wsum(plan->distances.size(), 0.0);
        double wdiag = 0.0;
        for (std::size_t i = 0, q = 0; i < n; ++i) {
            for (std::size_t j = 0; j < i; ++j, ++q) wsum[plan->pair[q]] += kbar(i, j) + kbar(j, i);
            wdiag += kbar(i, i);
        }
        std::vector<double> hbar(p, 0.0);
        std::vector<double> grad(p);
        kern->eval_grad(0.0, 0.0, true, grad.data());
        for (std::size_t q = 0; q < p; ++q) hbar[q] += wdiag * grad[q];
        for (std::size_t d = 0; d < wsum.size(); ++d) {
            kern->eval_grad(0.0, plan->distances[d], false, grad.data());
            for (std::size_t q = 0; q < p; ++q) hbar[q] += wsum[d] * grad[q];
        }
        for (std::size_t q = 0; q < p; ++q) t.add_adjoint(h_ids[q], hbar[q]);
    });
    return out;
}

Conditional gp_condition(std::span<const double> xs, std::span<const double> f, const KernelExpr& k,
                         std::span<const double> x_new, double jitter) {
    if (f.size() != xs.size()) throw ValidationError("latent values length differs from the grid");
    const Gram g = gram(k, xs, jitter);
    const Matrix kxs = cross_covariance(k, xs, x_new);
    const Matrix a = linalg::forward_solve(g.lower, kxs);  // L^{-1} K_x*
    const std::vector<double> v = linalg::forward_solve(g.lower, f);
    const std::size_t m = x_new.size();
    const std::size_t n = xs.size();
    Conditional c;
    c.mean.assign(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) c.mean[j] += a(i, j) * v[i];
    }
    c.cov = gram_matrix(k, x_new);
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a.row(i);
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t s = 0; s < m; ++s) c.cov(r, s) -= ai[r] * ai[s];
        }
    }
    linalg::symmetrize(c.cov);
    return c;
}

std::vector<double> draw(const Conditional& c, dist::Rng& rng, double jitter) {
    const std::size_t m = c.mean.size();
    Matrix lower;
    double j = jitter;
    bool ok = false;
    for (int attempt = 0; attempt < 8 && !ok; ++attempt, j *= 10.0) ok = factor_with_jitter(c.cov, j, lower);
    if (!ok) throw NumericalError("predictive covariance is not positive semidefinite");
    std::vector<double> z(m);
    for (auto& v : z) v = rng.normal();
    std::vector<double> out = lower * std::span<const double>(z);
    for (std::size_t i = 0; i < m; ++i) out[i] += c.mean[i];
    return out;
}

}  // namespace flare::gp
