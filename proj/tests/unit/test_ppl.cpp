#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "flare/dist/lpdf.hpp"
#include "flare/ppl/program.hpp"
#include "flare/ppl/tape.hpp"
#include "flare/ppl/transforms.hpp"

using namespace flare;
using namespace flare::ppl;

namespace {

// Central finite difference of f at x along coordinate i.
template <class F>
double fd(F&& f, std::vector<double> x, std::size_t i, double h = 1e-5) {
    x[i] += h;
    const double up = f(x);
    x[i] -= 2.0 * h;
    const double down = f(x);
    return (up - down) / (2.0 * h);
}

class HalfNormalPrior : public Model {
  public:
    HalfNormalPrior() : layout_({scalar_param("s", Constraint::positive())}) {}
    const ParamLayout& layout() const override { return layout_; }
    Var log_density(Tape&, std::span<const Var> theta) const override {
        return dist::half_normal_lpdf(theta[0], 1.0);
    }

  private:
    ParamLayout layout_;
};

class MixedModel : public Model {
  public:
    MixedModel()
        : layout_({scalar_param("mu"), scalar_param("sigma", Constraint::positive()), simplex_param("w", 3),
                   cholesky_corr_param("L", 3), scalar_param("p", Constraint::unit_interval())}) {}
    const ParamLayout& layout() const override { return layout_; }
    Var log_density(Tape&, std::span<const Var> t) const override {
        Var lp = dist::normal_lpdf(0.4, t[0], t[1]) + dist::half_normal_lpdf(t[1], 2.0);
        const double alpha[] = {2.0, 3.0, 4.0};
        lp = lp + dist::dirichlet_lpdf<Var>(t.subspan(2, 3), alpha);
        lp = lp + dist::lkj_corr_cholesky_lpdf<Var>(t.subspan(5, 9), 3, 2.0);
        lp = lp + dist::binomial_logit_lpmf(3, 10, log(t[14]) - log(1.0 - t[14]));
        return lp;
    }

  private:
    ParamLayout layout_;
};

class BadModel : public Model {
  public:
    BadModel() : layout_({scalar_param("a"), scalar_param("b")}) {}
    const ParamLayout& layout() const override { return layout_; }
    Var log_density(Tape&, std::span<const Var> t) const override { return t[0] + log(t[1] - 100.0); }

  private:
    ParamLayout layout_;
};

}  // namespace

TEST_CASE("tape: polynomial and product rule") {
    Tape tape;
    Var x = tape.leaf(3.0);
    Var f = x * x;
    tape.backward(f);
    CHECK(f.value() == 9.0);
    CHECK(tape.adjoint(x.id) == 6.0);

    tape.clear();
    Var a = tape.leaf(2.0);
    Var b = tape.leaf(5.0);
    Var g = a * b;
    tape.backward(g);
    CHECK(g.value() == 10.0);
    CHECK(tape.adjoint(a.id) == 5.0);
    CHECK(tape.adjoint(b.id) == 2.0);
}

TEST_CASE("tape: log-sum-exp gradient matches finite differences") {
    const std::vector<double> x0{0.3, -1.2, 2.0};
    Tape tape;
    std::vector<Var> xs;
    for (double v : x0) xs.push_back(tape.leaf(v));
    const Var out = log_sum_exp(xs);
    tape.backward(out);
    auto f = [](const std::vector<double>& x) { return log_sum_exp(x); };
    for (std::size_t i = 0; i < 3; ++i) {
        const double num = fd(f, x0, i);
        CHECK(std::fabs(tape.adjoint(xs[i].id) - num) / std::fabs(num) < 1e-6);
    }
}

TEST_CASE("tape: elementary functions against finite differences") {
    const std::vector<double> x0{0.7, 1.3};
    auto build = [](Tape& t, std::vector<Var>& v) {
        Var a = v[0];
        Var b = v[1];
        return exp(a) * log(b) + sqrt(b) / (1.0 + a) - tanh(a * b) + sin(a) * cos(b) + log_gamma(b) +
               inv_logit(a - b) + log1p_exp(a) + pow(b, 2.5) + log1p(a) + expm1(b) + abs(a - b) + square(a);
    };
    Tape tape;
    std::vector<Var> v{tape.leaf(x0[0]), tape.leaf(x0[1])};
    const Var out = build(tape, v);
    tape.backward(out);
    auto f = [&](const std::vector<double>& x) {
        Tape t;
        std::vector<Var> w{t.leaf(x[0]), t.leaf(x[1])};
        return build(t, w).value();
    };
    for (std::size_t i = 0; i < 2; ++i) {
        const double num = fd(f, x0, i);
        CHECK(std::fabs(tape.adjoint(v[i].id) - num) < 1e-6 * std::max(1.0, std::fabs(num)));
    }
}

TEST_CASE("tape: callbacks see completed adjoints") {
    Tape tape;
    Var x = tape.leaf(2.0);
    // Custom op y = x^3 whose output is a fresh leaf.
    Var y = tape.leaf(8.0);
    tape.on_backward([x, y](Tape& t) { t.add_adjoint(x.id, 3.0 * 4.0 * t.adjoint(y.id)); });
    Var out = y * 2.0 + x;
    tape.backward(out);
    CHECK(tape.adjoint(x.id) == doctest::Approx(25.0));
}

TEST_CASE("transforms: documented examples") {
    const ParamSpec pos = scalar_param("s", Constraint::positive());
    const std::vector<double> one{1.0};
    const Unconstrained r = to_unconstrained(pos, one);
    CHECK(r.u[0] == 0.0);
    CHECK(r.log_jacobian == 0.0);
    CHECK(from_unconstrained(pos, std::vector<double>{0.0})[0] == 1.0);

    const ParamSpec unit = scalar_param("p", Constraint::unit_interval());
    CHECK(std::fabs(to_unconstrained(unit, std::vector<double>{0.5}).u[0]) < 1e-15);

    const ParamSpec s3 = simplex_param("w", 3);
    const std::vector<double> third{1.0 / 3, 1.0 / 3, 1.0 / 3};
    const auto u3 = to_unconstrained(s3, third).u;
    REQUIRE(u3.size() == 2);
    CHECK(std::fabs(u3[0]) < 1e-12);
    CHECK(std::fabs(u3[1]) < 1e-12);
    const auto back = from_unconstrained(s3, std::vector<double>{0.0, 0.0});
    for (double v : back) CHECK(std::fabs(v - 1.0 / 3) < 1e-15);

    const ParamSpec s2 = simplex_param("w", 2);
    const auto half = from_unconstrained(s2, std::vector<double>{0.0});
    CHECK(half[0] == doctest::Approx(0.5));
    CHECK(half[1] == doctest::Approx(0.5));

    const ParamSpec c2 = cholesky_corr_param("L", 2);
    const auto eye = from_unconstrained(c2, std::vector<double>{0.0});
    CHECK(eye == std::vector<double>{1, 0, 0, 1});
}

TEST_CASE("transforms: constraint violations are domain errors") {
    CHECK_THROWS_AS(to_unconstrained(scalar_param("s", Constraint::positive()), std::vector<double>{-1.0}),
                    DomainError);
    CHECK_THROWS_AS(to_unconstrained(scalar_param("p", Constraint::unit_interval()), std::vector<double>{1.5}),
                    DomainError);
    CHECK_THROWS_AS(to_unconstrained(simplex_param("w", 3), std::vector<double>{0.5, 0.6, 0.1}), DomainError);
    CHECK_THROWS_AS(to_unconstrained(cholesky_corr_param("L", 2), std::vector<double>{1, 0, 0.5, 0.5}),
                    DomainError);
}

TEST_CASE("transforms: round trips and exact constraint satisfaction") {
    std::mt19937_64 g(11);
    std::normal_distribution<double> nd(0.0, 1.5);
    const std::vector<ParamSpec> specs{vector_param("r", 3), vector_param("s", 3, Constraint::positive()),
                                       vector_param("p", 3, Constraint::unit_interval()), simplex_param("w", 5),
                                       cholesky_corr_param("L", 4)};
    for (const auto& spec : specs) {
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> u(spec.free_dim());
            for (double& v : u) v = nd(g);
            const std::vector<double> x = from_unconstrained(spec, u);
            if (spec.constraint.kind == ConstraintKind::simplex) {
                double total = 0.0;
                for (double v : x) total += v;
                CHECK(std::fabs(total - 1.0) < 1e-12);
            }
            if (spec.constraint.kind == ConstraintKind::cholesky_corr) {
                const std::size_t k = spec.constraint.k;
                for (std::size_t i = 0; i < k; ++i) {
                    double row = 0.0;
                    for (std::size_t j = 0; j < k; ++j) row += x[i * k + j] * x[i * k + j];
                    CHECK(std::fabs(row - 1.0) < 1e-12);
                }
            }
            const std::vector<double> x2 = from_unconstrained(spec, to_unconstrained(spec, x).u);
            for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::fabs(x[i] - x2[i]));
        }
        INFO(spec.name);
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("transforms: log-Jacobian matches a numerical determinant") {
    // Scalar and simplex kinds where the map is square after dropping the last
    // simplex coordinate.
    const ParamSpec w = simplex_param("w", 4);
    const std::vector<double> u{0.3, -0.4, 0.8};
    const double h = 1e-6;
    double jac[3][3];
    for (std::size_t j = 0; j < 3; ++j) {
        std::vector<double> up = u;
        std::vector<double> dn = u;
        up[j] += h;
        dn[j] -= h;
        const auto xu = from_unconstrained(w, up);
        const auto xd = from_unconstrained(w, dn);
        for (std::size_t i = 0; i < 3; ++i) jac[i][j] = (xu[i] - xd[i]) / (2 * h);
    }
    const double det = jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1]) -
                       jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0]) +
                       jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]);
    CHECK(log_jacobian(w, u) == doctest::Approx(std::log(std::fabs(det))).epsilon(1e-6));
    CHECK(to_unconstrained(w, from_unconstrained(w, u)).log_jacobian ==
          doctest::Approx(log_jacobian(w, u)).epsilon(1e-10));
}

TEST_CASE("program: gradient of a mixed-constraint model matches finite differences") {
    LogDensityProgram prog(std::make_shared<MixedModel>());
    REQUIRE(prog.dimension() == 1 + 1 + 2 + 3 + 1);
    std::mt19937_64 g(5);
    std::normal_distribution<double> nd(0.0, 0.7);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> u(prog.dimension());
        for (double& v : u) v = nd(g);
        const auto ev = prog.evaluate(u);
        auto f = [&](const std::vector<double>& x) { return prog.log_density(x); };
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double num = fd(f, u, i);
            CHECK(std::fabs(ev.gradient[i] - num) <= std::max(1e-5 * std::fabs(num), 1e-7));
        }
    }
}

TEST_CASE("program: non-finite handling") {
    LogDensityProgram prog(std::make_shared<BadModel>());
    const std::vector<double> u{0.0, 1.0};
    try {
        prog.evaluate(u);
        FAIL("expected EvalError");
    } catch (const EvalError& e) {
        CHECK(!e.param().empty());
    }
    std::vector<double> grad(2, 1.0);
    CHECK(prog.log_density_gradient(u, grad) == -std::numeric_limits<double>::infinity());
    CHECK(grad == std::vector<double>{0.0, 0.0});
    CHECK_THROWS(prog.evaluate(std::vector<double>{0.0}));
}

TEST_CASE("program: pure prior through the unconstrained space recovers prior moments") {
    // Importance-free check: the Jacobian-corrected density in u, pushed
    // through exp, must integrate to the Half-Normal(1) mean sqrt(2/pi).
    LogDensityProgram prog(std::make_shared<HalfNormalPrior>());
    double num = 0.0;
    double den = 0.0;
    for (double u = -30.0; u <= 6.0; u += 1e-3) {
        const double w = std::exp(prog.log_density(std::vector<double>{u}));
        num += w * std::exp(u);
        den += w;
    }
    CHECK(num / den == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-6));
}

TEST_CASE("param layout") {
    const ParamLayout lay({scalar_param("a"), simplex_param("w", 3), cholesky_corr_param("L", 2)});
    CHECK(lay.total_size() == 1 + 3 + 4);
    CHECK(lay.total_free() == 1 + 2 + 1);
    CHECK(lay.index_of("w") == 1);
    CHECK_THROWS_AS(lay.index_of("zzz"), ValidationError);
    const auto names = lay.component_names();
    CHECK(names[1] == "w[0]");
    CHECK(names[6] == "L[1,0]");
    CHECK_THROWS(ParamLayout({scalar_param("a"), scalar_param("a")}));
    CHECK(parse_constraint("simplex(4)") == Constraint::simplex(4));
    CHECK(to_string(Constraint::cholesky_corr(3)) == "cholesky_corr(3)");
}
