#pragma once

// Covariance functions over scalar month indices, composed by sum and product.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace flare::gp {

enum class KernelKind { matern52, periodic, white_noise, sum, product };

class KernelExpr {
  public:
    // eta scales the kernel by eta^2.
    static KernelExpr matern52(double ell, double eta = 1.0);
    static KernelExpr periodic(double period, double ell, double eta = 1.0);
    static KernelExpr white_noise(double delta);

    friend KernelExpr operator+(const KernelExpr& a, const KernelExpr& b);
    friend KernelExpr operator*(const KernelExpr& a, const KernelExpr& b);

    KernelKind kind() const { return kind_; }

    // Hyperparameters in depth-first order; atoms contribute
    // matern52: (ell, eta), periodic: (period, ell, eta), white_noise: (delta).
    std::vector<double> hyperparameters() const;
    std::size_t hyperparameter_count() const;
    std::vector<std::string> hyperparameter_names() const;
    KernelExpr with_hyperparameters(std::span<const double> values) const;

    // Throws ParameterError unless every hyperparameter is finite and > 0.
    void validate() const;

    // k(x, x2). White noise contributes delta^2 when x == x2.
    double operator()(double x, double x2) const { return eval(x, x2, x == x2); }

    // `same` marks the diagonal of a Gram matrix; white noise is added only
    // there so repeated inputs stay distinct observations.
    double eval(double x, double x2, bool same) const;
    // Value plus d k / d hyperparameter (hyperparameter_count() entries).
    double eval_grad(double x, double x2, bool same, double* grad) const;

    std::string describe() const;

  private:
    KernelKind kind_ = KernelKind::white_noise;
    std::vector<double> h_;
    std::shared_ptr<const KernelExpr> lhs_;
    std::shared_ptr<const KernelExpr> rhs_;
};

double kernel_eval(const KernelExpr& k, double x, double x2);

}  // namespace flare::gp
