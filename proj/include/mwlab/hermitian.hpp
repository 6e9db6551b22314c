#ifndef MWLAB_HERMITIAN_HPP
#define MWLAB_HERMITIAN_HPP

#include <complex>
#include <span>
#include <vector>

#include "mwlab/errors.hpp"

namespace mwlab {

using cx = std::complex<double>;
using Vec = std::vector<cx>;

double vec_norm(std::span<const cx> v);
// Hermitian inner product, linear in the first argument.
cx vec_dot(std::span<const cx> u, std::span<const cx> v);

// Dense complex d x d matrix, row-major. Small d (the design envelope is d <= 16).
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(int d) : d_(d), a_(static_cast<size_t>(d) * d) {}
    static Matrix identity(int d);

    int dim() const { return d_; }
    cx& at(int i, int j) { return a_[static_cast<size_t>(i) * d_ + j]; }
    const cx& at(int i, int j) const { return a_[static_cast<size_t>(i) * d_ + j]; }
    const cx* data() const { return a_.data(); }
    cx* data() { return a_.data(); }

    Matrix adjoint() const;
    Matrix operator+(const Matrix& o) const;
    Matrix operator-(const Matrix& o) const;
    Matrix operator*(const Matrix& o) const;
    Matrix operator*(cx s) const;
    Vec apply(std::span<const cx> v) const;

    double max_abs() const;
    bool is_hermitian(double rel_tol = 1e-12) const;

private:
    int d_ = 0;
    std::vector<cx> a_;
};

// Eigendecomposition H = U diag(lambda) U* of a Hermitian matrix, eigenvalues ascending.
struct EigenH {
    std::vector<double> lambda;
    Matrix u;
};

// Cyclic Jacobi for complex Hermitian matrices.
EigenH eig_hermitian(const Matrix& h);

// Largest singular value.
double op_norm(const Matrix& a);

// Positive-definite Hermitian matrix with its eigendecomposition attached.
class PDMatrix {
public:
    PDMatrix() = default;

    // Throws NotHermitian / NotPositiveDefinite. `floor_rel` is relative to the
    // largest eigenvalue.
    static PDMatrix validate(const Matrix& m, double floor_rel = 1e-12);
    static PDMatrix identity(int d);

    int dim() const { return m_.dim(); }
    const Matrix& matrix() const { return m_; }
    const std::vector<double>& eigenvalues() const { return eig_.lambda; }
    const Matrix& unitary() const { return eig_.u; }

    // U diag(lambda^s) U*. power(1) == *this up to round-off.
    PDMatrix power(double s) const;
    PDMatrix inverse() const { return power(-1.0); }

    Vec apply(std::span<const cx> v) const { return m_.apply(v); }
    double op_norm() const { return eig_.lambda.back(); }
    double min_eigenvalue() const { return eig_.lambda.front(); }

private:
    PDMatrix(Matrix m, EigenH e) : m_(std::move(m)), eig_(std::move(e)) {}
    Matrix m_;
    EigenH eig_;
};

} // namespace mwlab

#endif
