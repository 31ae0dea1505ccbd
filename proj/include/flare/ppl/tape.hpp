#pragma once

// Reverse-mode automatic differentiation over a linear tape.
//
// Each Var is a handle (tape, node id). Nodes record their value and the
// partial derivatives with respect to their operands; one backward sweep from
// an output accumulates adjoints for every node. Composite operations with a
// cheaper hand-written adjoint (Cholesky-based GP priors, for one) register a
// callback instead of per-element partials.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace flare::ppl {

class Tape;

struct Var {
    Tape* tape = nullptr;
    std::uint32_t id = 0;

    double value() const;
};

class Tape {
  public:
    using Backward = std::function<void(Tape&)>;

    Tape() { offsets_.push_back(0); }

    // Independent input or constant leaf.
    Var leaf(double v) { return {this, push(v)}; }

    Var unary(double v, Var a, double da) {
        parents_.push_back(a.id);
        partials_.push_back(da);
        return {this, push(v)};
    }

    Var binary(double v, Var a, double da, Var b, double db) {
        parents_.push_back(a.id);
        partials_.push_back(da);
        parents_.push_back(b.id);
        partials_.push_back(db);
        return {this, push(v)};
    }

    Var nary(double v, std::span<const Var> operands, std::span<const double> partials) {
        for (std::size_t i = 0; i < operands.size(); ++i) {
            parents_.push_back(operands[i].id);
            partials_.push_back(partials[i]);
        }
        return {this, push(v)};
    }

    // Runs fn during the backward sweep once every node created so far has
    // received its full adjoint contribution from later nodes.
    void on_backward(Backward fn) {
        callbacks_.push_back({static_cast<std::uint32_t>(values_.size()), std::move(fn)});
    }

    double value(std::uint32_t id) const { return values_[id]; }
    double adjoint(std::uint32_t id) const { return adjoints_[id]; }
    void add_adjoint(std::uint32_t id, double a) { adjoints_[id] += a; }

    std::size_t size() const { return values_.size(); }

    // Seeds d(out)/d(out) = 1 and sweeps the whole tape.
    void backward(Var out);

    void clear() {
        values_.clear();
        adjoints_.clear();
        offsets_.resize(1);
        parents_.clear();
        partials_.clear();
        callbacks_.clear();
    }

  private:
    struct Callback {
        std::uint32_t anchor;
        Backward fn;
    };

    std::uint32_t push(double v) {
        values_.push_back(v);
        offsets_.push_back(static_cast<std::uint32_t>(parents_.size()));
        return static_cast<std::uint32_t>(values_.size() - 1);
    }

    std::vector<double> values_;
    std::vector<double> adjoints_;
    std::vector<std::uint32_t> offsets_;
    std::vector<std::uint32_t> parents_;
    std::vector<double> partials_;
    std::vector<Callback> callbacks_;
};

inline double Var::value() const { return tape->value(id); }

inline double value_of(double x) { return x; }
inline double value_of(Var x) { return x.value(); }

// -- arithmetic ---------------------------------------------------------------

inline Var operator+(Var a, Var b) { return a.tape->binary(a.value() + b.value(), a, 1.0, b, 1.0); }
inline Var operator+(Var a, double b) { return a.tape->unary(a.value() + b, a, 1.0); }
inline Var operator+(double a, Var b) { return b + a; }

inline Var operator-(Var a, Var b) { return a.tape->binary(a.value() - b.value(), a, 1.0, b, -1.0); }
inline Var operator-(Var a, double b) { return a.tape->unary(a.value() - b, a, 1.0); }
inline Var operator-(double a, Var b) { return b.tape->unary(a - b.value(), b, -1.0); }
inline Var operator-(Var a) { return a.tape->unary(-a.value(), a, -1.0); }

inline Var operator*(Var a, Var b) {
    const double av = a.value();
    const double bv = b.value();
    return a.tape->binary(av * bv, a, bv, b, av);
}
inline Var operator*(Var a, double b) { return a.tape->unary(a.value() * b, a, b); }
inline Var operator*(double a, Var b) { return b * a; }

inline Var operator/(Var a, Var b) {
    const double av = a.value();
    const double bv = b.value();
    const double q = av / bv;
    return a.tape->binary(q, a, 1.0 / bv, b, -q / bv);
}
inline Var operator/(Var a, double b) { return a.tape->unary(a.value() / b, a, 1.0 / b); }
inline Var operator/(double a, Var b) {
    const double bv = b.value();
    const double q = a / bv;
    return b.tape->unary(q, b, -q / bv);
}

inline Var& operator+=(Var& a, Var b) { return a = a + b; }
inline Var& operator+=(Var& a, double b) { return a = a + b; }
inline Var& operator-=(Var& a, Var b) { return a = a - b; }
inline Var& operator-=(Var& a, double b) { return a = a - b; }
inline Var& operator*=(Var& a, Var b) { return a = a * b; }
inline Var& operator*=(Var& a, double b) { return a = a * b; }

inline bool operator<(Var a, double b) { return a.value() < b; }
inline bool operator>(Var a, double b) { return a.value() > b; }
inline bool operator<=(Var a, double b) { return a.value() <= b; }
inline bool operator>=(Var a, double b) { return a.value() >= b; }

// -- elementary functions -----------------------------------------------------

inline Var exp(Var a) {
    const double e = std::exp(a.value());
    return a.tape->unary(e, a, e);
}
inline Var log(Var a) { return a.tape->unary(std::log(a.value()), a, 1.0 / a.value()); }
inline Var log1p(Var a) { return a.tape->unary(std::log1p(a.value()), a, 1.0 / (1.0 + a.value())); }
inline Var expm1(Var a) { return a.tape->unary(std::expm1(a.value()), a, std::exp(a.value())); }
inline Var sqrt(Var a) {
    const double s = std::sqrt(a.value());
    return a.tape->unary(s, a, 0.5 / s);
}
inline Var tanh(Var a) {
    const double t = std::tanh(a.value());
    return a.tape->unary(t, a, 1.0 - t * t);
}
inline Var sin(Var a) { return a.tape->unary(std::sin(a.value()), a, std::cos(a.value())); }
inline Var cos(Var a) { return a.tape->unary(std::cos(a.value()), a, -std::sin(a.value())); }
inline Var abs(Var a) {
    const double v = a.value();
    return a.tape->unary(std::fabs(v), a, v < 0.0 ? -1.0 : 1.0);
}
inline Var pow(Var a, double p) {
    const double v = a.value();
    return a.tape->unary(std::pow(v, p), a, p * std::pow(v, p - 1.0));
}

inline double square(double x) { return x * x; }
inline Var square(Var a) {
    const double v = a.value();
    return a.tape->unary(v * v, a, 2.0 * v);
}

// Thread-safe log|Gamma(x)| (std::lgamma writes the global signgam).
double log_gamma(double x);
double digamma(double x);
inline Var log_gamma(Var a) { return a.tape->unary(log_gamma(a.value()), a, digamma(a.value())); }

inline double inv_logit(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}
inline Var inv_logit(Var a) {
    const double p = inv_logit(a.value());
    return a.tape->unary(p, a, p * (1.0 - p));
}

// log(1 + exp(x)) without overflow.
inline double log1p_exp(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}
inline Var log1p_exp(Var a) { return a.tape->unary(log1p_exp(a.value()), a, inv_logit(a.value())); }

inline double log_inv_logit(double x) { return -log1p_exp(-x); }
inline Var log_inv_logit(Var a) {
    return a.tape->unary(log_inv_logit(a.value()), a, 1.0 - inv_logit(a.value()));
}
inline double log1m_inv_logit(double x) { return -log1p_exp(x); }
inline Var log1m_inv_logit(Var a) {
    return a.tape->unary(log1m_inv_logit(a.value()), a, -inv_logit(a.value()));
}

double log_sum_exp(std::span<const double> xs);
Var log_sum_exp(std::span<const Var> xs);

double sum(std::span<const double> xs);
Var sum(std::span<const Var> xs);

// Sum of a[i] * b[i] with constant weights b.
Var dot(std::span<const Var> a, std::span<const double> b);

}  // namespace flare::ppl
