#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "flare/dist/rng.hpp"
#include "flare/error.hpp"
#include "flare/gp/gp.hpp"

using namespace flare;
using namespace flare::gp;
using linalg::Matrix;

namespace {

std::vector<double> grid(std::size_t n, double step = 1.0) {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = step * static_cast<double>(i);
    return xs;
}

double matern_reference(double r, double ell, double eta) {
    const double a = std::sqrt(5.0 * r * r) / ell;
    return eta * eta * (1.0 + a + 5.0 * r * r / (3.0 * ell * ell)) * std::exp(-a);
}

}  // namespace

TEST_CASE("kernel values") {
    CHECK(kernel_eval(KernelExpr::matern52(1, 1), 3.0, 3.0) == 1.0);
    CHECK(kernel_eval(KernelExpr::periodic(12, 1, 1), 0.0, 12.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(kernel_eval(KernelExpr::white_noise(1e-3), 1.0, 2.0) == 0.0);
    CHECK(kernel_eval(KernelExpr::white_noise(1e-3), 2.0, 2.0) == doctest::Approx(1e-6).epsilon(1e-12));
    for (double r : {0.0, 0.3, 1.0, 2.5, 7.0}) {
        CHECK(kernel_eval(KernelExpr::matern52(1.7, 2.0), 1.0, 1.0 + r) ==
              doctest::Approx(matern_reference(r, 1.7, 2.0)).epsilon(1e-13));
        CHECK(kernel_eval(KernelExpr::matern52(1.7, 2.0), 1.0 + r, 1.0) ==
              kernel_eval(KernelExpr::matern52(1.7, 2.0), 1.0, 1.0 + r));
        const double s = std::sin(std::numbers::pi * r / 12.0);
        CHECK(kernel_eval(KernelExpr::periodic(12, 0.8, 3.0), 0.0, r) ==
              doctest::Approx(9.0 * std::exp(-s * s / (2 * 0.64))).epsilon(1e-13));
    }
    CHECK_THROWS_AS(KernelExpr::matern52(-1, 1).validate(), ParameterError);
    CHECK_THROWS_AS((KernelExpr::matern52(1, 1) + KernelExpr::white_noise(0)).validate(), ParameterError);
}

TEST_CASE("hyperparameter gradients match finite differences") {
    const KernelExpr k = KernelExpr::matern52(2.3, 1.4) * KernelExpr::periodic(11.5, 0.9, 0.7) +
                         KernelExpr::white_noise(0.2) + KernelExpr::matern52(0.6, 0.5);
    const std::vector<double> h = k.hyperparameters();
    REQUIRE(h.size() == 8);
    for (double r : {0.0, 0.4, 3.2, 9.0}) {
        const bool same = r == 0.0;
        std::vector<double> g(h.size());
        k.eval_grad(0.0, r, same, g.data());
        for (std::size_t q = 0; q < h.size(); ++q) {
            std::vector<double> hp = h;
            std::vector<double> hm = h;
            const double eps = 1e-6 * h[q];
            hp[q] += eps;
            hm[q] -= eps;
            const double fd = (k.with_hyperparameters(hp).eval(0.0, r, same) -
                               k.with_hyperparameters(hm).eval(0.0, r, same)) /
                              (2 * eps);
            CHECK(g[q] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("gram matrix") {
    const std::vector<double> one{4.0};
    const Gram g1 = gram(KernelExpr::matern52(1, 2), one, 1e-6);
    CHECK(g1.k(0, 0) == 4.0);
    CHECK(g1.lower(0, 0) * g1.lower(0, 0) == doctest::Approx(4.0 + 1e-6));

    const auto xs = grid(30, 0.5);
    const Gram g = gram(KernelExpr::matern52(3, 1), xs);
    for (std::size_t j = 1; j < xs.size(); ++j) CHECK(g.k(0, j) < g.k(0, j - 1));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < xs.size(); ++j) CHECK(g.k(i, j) == g.k(j, i));
    }

    const std::vector<double> dup{0, 1, 1, 2, 2, 2, 3};
    CHECK_NOTHROW(gram(KernelExpr::matern52(2, 1), dup, 1e-6));
    CHECK_NOTHROW(gram(KernelExpr::matern52(2, 1) + KernelExpr::white_noise(1e-6), dup, 1e-6));
    CHECK_THROWS_AS(gram(KernelExpr::matern52(2, 1), dup, 0.0), NumericalError);
    try {
        gram(KernelExpr::matern52(2, 1), dup, 0.0);
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("smallest eigenvalue") != std::string::npos);
    }
}

TEST_CASE("sum and product closure is elementwise") {
    const auto xs = grid(17, 0.7);
    const KernelExpr a = KernelExpr::matern52(1.3, 0.8);
    const KernelExpr b = KernelExpr::periodic(12, 1.1, 1.9);
    const KernelExpr w = KernelExpr::white_noise(0.05);
    const Matrix ka = gram_matrix(a, xs);
    const Matrix kb = gram_matrix(b, xs);
    const Matrix kw = gram_matrix(w, xs);
    const Matrix ks = gram_matrix(a + b, xs);
    const Matrix kp = gram_matrix(a * b, xs);
    const Matrix kpw = gram_matrix(b * w, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < xs.size(); ++j) {
            CHECK(ks(i, j) == ka(i, j) + kb(i, j));
            CHECK(kp(i, j) == ka(i, j) * kb(i, j));
            CHECK(kpw(i, j) == kb(i, j) * kw(i, j));
        }
    }
}

TEST_CASE("positive definiteness over random grids") {
    dist::Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.below(63);
        std::vector<double> xs(n);
        for (auto& x : xs) x = rng.uniform(0.0, 84.0);
        const KernelExpr k = KernelExpr::matern52(rng.uniform(0.2, 20), rng.uniform(0.1, 5)) +
                             KernelExpr::periodic(rng.uniform(6, 18), rng.uniform(0.2, 5), rng.uniform(0.1, 5)) +
                             KernelExpr::white_noise(1e-6);
        CHECK_NOTHROW(gram(k, xs, 1e-6));
    }
}

TEST_CASE("noncentered latent draws") {
    const auto xs = grid(10);
    const KernelExpr k = KernelExpr::matern52(2.5, 1.5);
    const std::vector<double> zero(10, 0.0);
    for (double v : latent_noncentered(k, xs, zero)) CHECK(v == 0.0);

    std::vector<double> z(10);
    dist::Rng rng(5);
    for (auto& v : z) v = rng.normal();
    const auto same = latent_noncentered(KernelExpr::white_noise(1.0), xs, z, 0.0);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(same[i] == doctest::Approx(z[i]).epsilon(1e-15));

    // Empirical covariance against K.
    const std::size_t draws = 100000;
    Matrix acc(10, 10);
    for (std::size_t d = 0; d < draws; ++d) {
        for (auto& v : z) v = rng.normal();
        const auto f = latent_noncentered(k, xs, z);
        for (std::size_t i = 0; i < 10; ++i) {
            for (std::size_t j = 0; j < 10; ++j) acc(i, j) += f[i] * f[j];
        }
    }
    const Matrix kk = gram_matrix(k, xs);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
        for (std::size_t j = 0; j < 10; ++j) {
            const double e = acc(i, j) / static_cast<double>(draws) - kk(i, j);
            num += e * e;
            den += kk(i, j) * kk(i, j);
        }
    }
    CHECK(std::sqrt(num / den) < 0.05);
}

TEST_CASE("tape latent GP gradient") {
    const std::vector<double> xs{0, 1, 2, 3.5, 5, 6, 8};
    const KernelExpr structure = KernelExpr::matern52(1, 1) + KernelExpr::periodic(12, 1, 1) +
                                 KernelExpr::white_noise(1e-3);
    const std::vector<double> h0{2.1, 1.3, 11.0, 0.9, 0.6, 1e-3};
    const std::vector<double> z0{0.3, -1.2, 0.8, 0.1, -0.4, 1.5, -0.7};
    const std::vector<double> w{1.0, -0.5, 0.25, 2.0, -1.0, 0.3, 0.7};

    auto objective = [&](const std::vector<double>& h, const std::vector<double>& z) {
        const auto f = latent_noncentered(structure.with_hyperparameters(h), xs, z);
        double s = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i] + 0.1 * f[i] * f[i];
        return s;
    };

    ppl::Tape tape;
    std::vector<ppl::Var> hv;
    std::vector<ppl::Var> zv;
    for (double v : h0) hv.push_back(tape.leaf(v));
    for (double v : z0) zv.push_back(tape.leaf(v));
    const auto f = latent_noncentered(tape, structure, hv, xs, zv);
    ppl::Var s = tape.leaf(0.0);
    for (std::size_t i = 0; i < f.size(); ++i) s = s + w[i] * f[i] + 0.1 * ppl::square(f[i]);
    CHECK(s.value() == doctest::Approx(objective(h0, z0)).epsilon(1e-14));
    tape.backward(s);

    for (std::size_t q = 0; q < h0.size(); ++q) {
        auto hp = h0;
        auto hm = h0;
        const double eps = 1e-5 * h0[q];
        hp[q] += eps;
        hm[q] -= eps;
        const double fd = (objective(hp, z0) - objective(hm, z0)) / (2 * eps);
        INFO("hyperparameter " << q);
        CHECK(tape.adjoint(hv[q].id) == doctest::Approx(fd).epsilon(1e-5));
    }
    for (std::size_t i = 0; i < z0.size(); ++i) {
        auto zp = z0;
        auto zm = z0;
        zp[i] += 1e-6;
        zm[i] -= 1e-6;
        const double fd = (objective(h0, zp) - objective(h0, zm)) / 2e-6;
        CHECK(tape.adjoint(zv[i].id) == doctest::Approx(fd).epsilon(1e-6));
    }

    ppl::Tape bad;
    std::vector<ppl::Var> hb{bad.leaf(-1.0), bad.leaf(1.0), bad.leaf(12), bad.leaf(1), bad.leaf(1), bad.leaf(1e-3)};
    std::vector<ppl::Var> zb;
    for (double v : z0) zb.push_back(bad.leaf(v));
    for (const auto& v : latent_noncentered(bad, structure, hb, xs, zb)) CHECK(std::isnan(v.value()));
}

TEST_CASE("conditioning") {
    const std::vector<double> xs{0, 1, 2, 3, 5, 8};
    const std::vector<double> f{0.2, 0.7, 0.4, -0.3, -1.0, 0.5};
    const KernelExpr k = KernelExpr::matern52(2.0, 1.2);

    const Conditional self = gp_condition(xs, f, k, xs, 1e-10);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(self.mean[i] == doctest::Approx(f[i]).epsilon(1e-6));
        CHECK(self.cov(i, i) < 1e-6);
        for (std::size_t j = 0; j < xs.size(); ++j) CHECK(self.cov(i, j) == self.cov(j, i));
    }

    const std::vector<double> far{8.0 + 20.0 * 2.0};
    const Conditional c = gp_condition(xs, f, k, far);
    CHECK(std::fabs(c.mean[0]) < 1e-4);
    CHECK(std::fabs(c.cov(0, 0) - k(far[0], far[0])) < 1e-4);

    // Two training points, inverse written out by hand.
    const std::vector<double> x2{0.0, 1.5};
    const std::vector<double> f2{1.0, -0.5};
    const std::vector<double> xn{0.7, 4.0};
    const double jitter = 1e-6;
    const double a = k(0, 0) + jitter;
    const double b = k(0, 1.5);
    const double d = k(1.5, 1.5) + jitter;
    const double det = a * d - b * b;
    const double i00 = d / det;
    const double i01 = -b / det;
    const double i11 = a / det;
    const Conditional c2 = gp_condition(x2, f2, k, xn, jitter);
    for (std::size_t r = 0; r < 2; ++r) {
        const double k0r = k(0.0, xn[r]);
        const double k1r = k(1.5, xn[r]);
        const double mean = (k0r * i00 + k1r * i01) * f2[0] + (k0r * i01 + k1r * i11) * f2[1];
        CHECK(std::fabs(c2.mean[r] - mean) < 1e-10);
        for (std::size_t s = 0; s < 2; ++s) {
            const double k0s = k(0.0, xn[s]);
            const double k1s = k(1.5, xn[s]);
            const double quad = k0r * (i00 * k0s + i01 * k1s) + k1r * (i01 * k0s + i11 * k1s);
            CHECK(std::fabs(c2.cov(r, s) - (k(xn[r], xn[s]) - quad)) < 1e-10);
        }
    }

    dist::Rng rng(1);
    const auto y = draw(c2, rng);
    CHECK(y.size() == 2);
}

TEST_CASE("rank-one Cholesky adjoint matches the general form") {
    dist::Rng rng(41);
    const Gram g = gram(KernelExpr::matern52(2.5, 1.3), grid(17));
    std::vector<double> u(17);
    std::vector<double> v(17);
    for (auto& x : u) x = rng.normal();
    for (auto& x : v) x = rng.normal();
    Matrix lbar(17, 17);
    for (std::size_t i = 0; i < 17; ++i) {
        for (std::size_t j = 0; j <= i; ++j) lbar(i, j) = u[i] * v[j];
    }
    const Matrix a = linalg::cholesky_adjoint(g.lower, lbar);
    const Matrix b = linalg::cholesky_adjoint_rank_one(g.lower, u, v);
    for (std::size_t i = 0; i < 17; ++i) {
        for (std::size_t j = 0; j < 17; ++j) CHECK(b(i, j) == doctest::Approx(a(i, j)).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("distance plan") {
    const std::vector<double> xs{0.0, 1.0, 2.0, 2.0, 5.0};
    const DistancePlan plan = distance_plan(xs);
    CHECK(plan.n == 5);
    CHECK(plan.pair.size() == 10);
    CHECK(plan.distances == std::vector<double>{1.0, 2.0, 0.0, 5.0, 4.0, 3.0});
}
