#pragma once

// Small dense row-major linear algebra for the GP and hierarchical models.
// Sizes here are at most a few hundred, so everything is unblocked.

#include <cstddef>
#include <span>
#include <vector>

namespace flare::linalg {

class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    Matrix transpose() const;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
std::vector<double> operator*(const Matrix& a, std::span<const double> x);

// In-place lower Cholesky factor (upper triangle zeroed). Returns false when a
// pivot is not strictly positive; the matrix is then left partially factored.
bool cholesky_in_place(Matrix& a);

// Solves L z = b for lower-triangular L.
std::vector<double> forward_solve(const Matrix& lower, std::span<const double> b);
// Solves L^T x = b for lower-triangular L.
std::vector<double> backward_solve_transpose(const Matrix& lower, std::span<const double> b);
// Solves (L L^T) x = b.
std::vector<double> cholesky_solve(const Matrix& lower, std::span<const double> b);

// Column-wise forward solve L Z = B.
Matrix forward_solve(const Matrix& lower, const Matrix& b);

// log det(L L^T)
double log_det_from_cholesky(const Matrix& lower);

// Reverse-mode adjoint of A = L L^T: given L and dF/dL (lower part used),
// returns the symmetric dF/dA.
Matrix cholesky_adjoint(const Matrix& lower, const Matrix& lower_adjoint);

// Same, when dF/dL = tril(u v^T) (the adjoint of f = L v with df = u).
Matrix cholesky_adjoint_rank_one(const Matrix& lower, std::span<const double> u, std::span<const double> v);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(Matrix a);

void symmetrize(Matrix& a);

}  // namespace flare::linalg
