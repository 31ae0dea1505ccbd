#include "flare/linalg/dense.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flare/simd/kernels.hpp"

namespace flare::linalg {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    }
    return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matrix product shape mismatch");
    Matrix c(a.rows(), b.cols());
    const auto& k = simd::kernels();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t p = 0; p < a.cols(); ++p) {
            const double s = a(i, p);
            if (s != 0.0) k.axpy(s, b.row(p), c.row(i), b.cols());
        }
    }
    return c;
}

std::vector<double> operator*(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw std::invalid_argument("matrix-vector shape mismatch");
    std::vector<double> y(a.rows());
    const auto& k = simd::kernels();
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = k.dot(a.row(i), x.data(), a.cols());
    return y;
}

bool cholesky_in_place(Matrix& a) {
    const std::size_t n = a.rows();
    const auto& k = simd::kernels();
    for (std::size_t j = 0; j < n; ++j) {
        double* rj = a.row(j);
        const double d = rj[j] - k.dot(rj, rj, j);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        rj[j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double* ri = a.row(i);
            ri[j] = (ri[j] - k.dot(ri, rj, j)) / ljj;
        }
        for (std::size_t c = j + 1; c < n; ++c) rj[c] = 0.0;
    }
    return true;
}

std::vector<double> forward_solve(const Matrix& lower, std::span<const double> b) {
    const std::size_t n = lower.rows();
    std::vector<double> z(n);
    const auto& k = simd::kernels();
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = (b[i] - k.dot(lower.row(i), z.data(), i)) / lower(i, i);
    }
    return z;
}

std::vector<double> backward_solve_transpose(const Matrix& lower, std::span<const double> b) {
    const std::size_t n = lower.rows();
    std::vector<double> x(b.begin(), b.end());
    for (std::size_t ii = n; ii-- > 0;) {
        x[ii] /= lower(ii, ii);
        const double xi = x[ii];
        const double* r = lower.row(ii);
        for (std::size_t j = 0; j < ii; ++j) x[j] -= r[j] * xi;
    }
    return x;
}

std::vector<double> cholesky_solve(const Matrix& lower, std::span<const double> b) {
    return backward_solve_transpose(lower, forward_solve(lower, b));
}

Matrix forward_solve(const Matrix& lower, const Matrix& b) {
    const std::size_t n = lower.rows();
    const std::size_t m = b.cols();
    Matrix z = b;
    const auto& k = simd::kernels();
    for (std::size_t i = 0; i < n; ++i) {
        double* zi = z.row(i);
        for (std::size_t p = 0; p < i; ++p) {
            const double l = lower(i, p);
            if (l != 0.0) k.axpy(-l, z.row(p), zi, m);
        }
        const double inv = 1.0 / lower(i, i);
        for (std::size_t c = 0; c < m; ++c) zi[c] *= inv;
    }
    return z;
}

double log_det_from_cholesky(const Matrix& lower) {
    double s = 0.0;
    for (std::size_t i = 0; i < lower.rows(); ++i) s += std::log(lower(i, i));
    return 2.0 * s;
}

namespace {

// Solves L^T X = B in place (B overwritten by X), all columns at once.
void backward_solve_transpose_rows(const Matrix& lower, Matrix& b) {
    const std::size_t n = lower.rows();
    const std::size_t m = b.cols();
    const auto& k = simd::kernels();
    for (std::size_t ii = n; ii-- > 0;) {
        double* bi = b.row(ii);
        const double inv = 1.0 / lower(ii, ii);
        for (std::size_t c = 0; c < m; ++c) bi[c] *= inv;
        const double* r = lower.row(ii);
        for (std::size_t j = 0; j < ii; ++j) {
            if (r[j] != 0.0) k.axpy(-r[j], bi, b.row(j), m);
        }
    }
}

}  // namespace

namespace {

// dF/dA from P = Phi(L^T Lbar): symmetrized L^{-T} P L^{-1}.
Matrix adjoint_from_phi(const Matrix& lower, Matrix& p) {
    const std::size_t n = lower.rows();
    // S^T = L^{-T} (L^{-T} P)^T
    backward_solve_transpose_rows(lower, p);
    Matrix st = p.transpose();
    backward_solve_transpose_rows(lower, st);
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) out(i, j) = 0.5 * (st(i, j) + st(j, i));
    }
    return out;
}

}  // namespace

Matrix cholesky_adjoint(const Matrix& lower, const Matrix& lower_adjoint) {
    const std::size_t n = lower.rows();
    const auto& k = simd::kernels();
    // P = Phi(L^T Lbar): lower triangle, halved diagonal.
    Matrix p(n, n);
    std::vector<double> lbar_row(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) lbar_row[c] = c <= r ? lower_adjoint(r, c) : 0.0;
        const double* lr = lower.row(r);
        for (std::size_t i = 0; i <= r; ++i) {
            if (lr[i] != 0.0) k.axpy(lr[i], lbar_row.data(), p.row(i), r + 1);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        p(i, i) *= 0.5;
        for (std::size_t j = i + 1; j < n; ++j) p(i, j) = 0.0;
    }
    return adjoint_from_phi(lower, p);
}


Matrix cholesky_adjoint_rank_one(const Matrix& lower, std::span<const double> u, std::span<const double> v) {
    const std::size_t n = lower.rows();
    // Phi(L^T tril(u v^T)) = Phi(a v^T) with a = L^T u.
    std::vector<double> a(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* li = lower.row(i);
        for (std::size_t j = 0; j <= i; ++j) a[j] += li[j] * u[i];
    }
    Matrix p(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) p(i, j) = a[i] * v[j];
        p(i, i) = 0.5 * a[i] * v[i];
    }
    return adjoint_from_phi(lower, p);
}

std::vector<double> symmetric_eigenvalues(Matrix a) {
    const std::size_t n = a.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        }
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t r = 0; r < n; ++r) {
                    const double arp = a(r, p);
                    const double arq = a(r, q);
                    a(r, p) = c * arp - s * arq;
                    a(r, q) = s * arp + c * arq;
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const double apr = a(p, r);
                    const double aqr = a(q, r);
                    a(p, r) = c * apr - s * aqr;
                    a(q, r) = s * apr + c * aqr;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

void symmetrize(Matrix& a) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = i + 1; j < a.cols(); ++j) {
            const double m = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = m;
            a(j, i) = m;
        }
    }
}

}  // namespace flare::linalg
