#include "flare/gp/kernel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "flare/error.hpp"

namespace flare::gp {

namespace {

constexpr double kSqrt5 = 2.23606797749978969641;

}  // namespace

KernelExpr KernelExpr::matern52(double ell, double eta) {
    KernelExpr k;
    k.kind_ = KernelKind::matern52;
    k.h_ = {ell, eta};
    return k;
}

KernelExpr KernelExpr::periodic(double period, double ell, double eta) {
    KernelExpr k;
    k.kind_ = KernelKind::periodic;
    k.h_ = {period, ell, eta};
    return k;
}

KernelExpr KernelExpr::white_noise(double delta) {
    KernelExpr k;
    k.kind_ = KernelKind::white_noise;
    k.h_ = {delta};
    return k;
}

KernelExpr operator+(const KernelExpr& a, const KernelExpr& b) {
    KernelExpr k;
    k.kind_ = KernelKind::sum;
    k.lhs_ = std::make_shared<const KernelExpr>(a);
    k.rhs_ = std::make_shared<const KernelExpr>(b);
    return k;
}

KernelExpr operator*(const KernelExpr& a, const KernelExpr& b) {
    KernelExpr k;
    k.kind_ = KernelKind::product;
    k.lhs_ = std::make_shared<const KernelExpr>(a);
    k.rhs_ = std::make_shared<const KernelExpr>(b);
    return k;
}

std::size_t KernelExpr::hyperparameter_count() const {
    if (lhs_) return lhs_->hyperparameter_count() + rhs_->hyperparameter_count();
    return h_.size();
}

std::vector<double> KernelExpr::hyperparameters() const {
    if (!lhs_) return h_;
    std::vector<double> out = lhs_->hyperparameters();
    const std::vector<double> r = rhs_->hyperparameters();
    out.insert(out.end(), r.begin(), r.end());
    return out;
}

std::vector<std::string> KernelExpr::hyperparameter_names() const {
    switch (kind_) {
        case KernelKind::matern52: return {"matern52.ell", "matern52.eta"};
        case KernelKind::periodic: return {"periodic.period", "periodic.ell", "periodic.eta"};
        case KernelKind::white_noise: return {"white_noise.delta"};
        default: break;
    }
    std::vector<std::string> out = lhs_->hyperparameter_names();
    const std::vector<std::string> r = rhs_->hyperparameter_names();
    out.insert(out.end(), r.begin(), r.end());
    return out;
}

KernelExpr KernelExpr::with_hyperparameters(std::span<const double> values) const {
    if (values.size() != hyperparameter_count()) {
        throw ParameterError("kernel expects " + std::to_string(hyperparameter_count()) +
                             " hyperparameters, got " + std::to_string(values.size()));
    }
    if (!lhs_) {
        KernelExpr k = *this;
        k.h_.assign(values.begin(), values.end());
        return k;
    }
    const std::size_t nl = lhs_->hyperparameter_count();
    const KernelExpr a = lhs_->with_hyperparameters(values.first(nl));
    const KernelExpr b = rhs_->with_hyperparameters(values.subspan(nl));
    return kind_ == KernelKind::sum ? a + b : a * b;
}

void KernelExpr::validate() const {
    const std::vector<double> h = hyperparameters();
    const std::vector<std::string> names = hyperparameter_names();
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(std::isfinite(h[i]) && h[i] > 0.0)) {
            std::ostringstream os;
            os << "kernel hyperparameter " << names[i] << " must be positive and finite, got " << h[i];
            throw ParameterError(os.str());
        }
    }
}

double KernelExpr::eval(double x, double x2, bool same) const {
    const double r = std::fabs(x - x2);
    switch (kind_) {
        case KernelKind::matern52: {
            const double s = kSqrt5 * r / h_[0];
            return h_[1] * h_[1] * (1.0 + s + s * s / 3.0) * std::exp(-s);
        }
        case KernelKind::periodic: {
            const double sn = std::sin(std::numbers::pi * r / h_[0]);
            return h_[2] * h_[2] * std::exp(-sn * sn / (2.0 * h_[1] * h_[1]));
        }
        case KernelKind::white_noise: return same ? h_[0] * h_[0] : 0.0;
        case KernelKind::sum: return lhs_->eval(x, x2, same) + rhs_->eval(x, x2, same);
        case KernelKind::product: return lhs_->eval(x, x2, same) * rhs_->eval(x, x2, same);
    }
    return 0.0;
}

double KernelExpr::eval_grad(double x, double x2, bool same, double* grad) const {
    const double r = std::fabs(x - x2);
    switch (kind_) {
        case KernelKind::matern52: {
            const double ell = h_[0];
            const double eta = h_[1];
            const double s = kSqrt5 * r / ell;
            const double e = std::exp(-s);
            const double k = eta * eta * (1.0 + s + s * s / 3.0) * e;
            grad[0] = eta * eta * e * s * s * (1.0 + s) / (3.0 * ell);
            grad[1] = 2.0 * k / eta;
            return k;
        }
        case KernelKind::periodic: {
            const double period = h_[0];
            const double ell = h_[1];
            const double eta = h_[2];
            const double a = std::numbers::pi * r / period;
            const double sn = std::sin(a);
            const double u = sn * sn;
            const double k = eta * eta * std::exp(-u / (2.0 * ell * ell));
            grad[0] = k * std::sin(2.0 * a) * a / (2.0 * ell * ell * period);
            grad[1] = k * u / (ell * ell * ell);
            grad[2] = 2.0 * k / eta;
            return k;
        }
        case KernelKind::white_noise:
            grad[0] = same ? 2.0 * h_[0] : 0.0;
            return same ? h_[0] * h_[0] : 0.0;
        case KernelKind::sum: {
            const std::size_t nl = lhs_->hyperparameter_count();
            return lhs_->eval_grad(x, x2, same, grad) + rhs_->eval_grad(x, x2, same, grad + nl);
        }
        case KernelKind::product: {
            const std::size_t nl = lhs_->hyperparameter_count();
            const std::size_t nr = rhs_->hyperparameter_count();
            const double a = lhs_->eval_grad(x, x2, same, grad);
            const double b = rhs_->eval_grad(x, x2, same, grad + nl);
            for (std::size_t i = 0; i < nl; ++i) grad[i] *= b;
            for (std::size_t i = 0; i < nr; ++i) grad[nl + i] *= a;
            return a * b;
        }
    }
    return 0.0;
}

std::string KernelExpr::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case KernelKind::matern52: os << "Matern52(ell=" << h_[0] << ", eta=" << h_[1] << ")"; break;
        case KernelKind::periodic:
            os << "Periodic(T=" << h_[0] << ", ell=" << h_[1] << ", eta=" << h_[2] << ")";
            break;
        case KernelKind::white_noise: os << "WhiteNoise(delta=" << h_[0] << ")"; break;
        case KernelKind::sum: os << "(" << lhs_->describe() << " + " << rhs_->describe() << ")"; break;
        case KernelKind::product: os << "(" << lhs_->describe() << " * " << rhs_->describe() << ")"; break;
    }
    return os.str();
}

double kernel_eval(const KernelExpr& k, double x, double x2) {
    return k(x, x2);
}

}  // namespace flare::gp
