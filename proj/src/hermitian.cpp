#include "mwlab/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mwlab {

double vec_norm(std::span<const cx> v) {
    double s = 0.0;
    for (const cx& z : v) s += std::norm(z);
    return std::sqrt(s);
}

cx vec_dot(std::span<const cx> u, std::span<const cx> v) {
    cx s = 0.0;
    for (size_t i = 0; i < u.size(); ++i) s += u[i] * std::conj(v[i]);
    return s;
}

Matrix Matrix::identity(int d) {
    Matrix m(d);
    for (int i = 0; i < d; ++i) m.at(i, i) = 1.0;
    return m;
}

Matrix Matrix::adjoint() const {
    Matrix m(d_);
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j) m.at(j, i) = std::conj(at(i, j));
    return m;
}

Matrix Matrix::operator+(const Matrix& o) const {
    Matrix m(d_);
    for (size_t k = 0; k < a_.size(); ++k) m.a_[k] = a_[k] + o.a_[k];
    return m;
}

Matrix Matrix::operator-(const Matrix& o) const {
    Matrix m(d_);
    for (size_t k = 0; k < a_.size(); ++k) m.a_[k] = a_[k] - o.a_[k];
    return m;
}

Matrix Matrix::operator*(const Matrix& o) const {
    Matrix m(d_);
    for (int i = 0; i < d_; ++i)
        for (int k = 0; k < d_; ++k) {
            const cx aik = at(i, k);
            if (aik == cx{}) continue;
            for (int j = 0; j < d_; ++j) m.at(i, j) += aik * o.at(k, j);
        }
    return m;
}

Matrix Matrix::operator*(cx s) const {
    Matrix m(d_);
    for (size_t k = 0; k < a_.size(); ++k) m.a_[k] = a_[k] * s;
    return m;
}

Vec Matrix::apply(std::span<const cx> v) const {
    Vec y(d_);
    for (int i = 0; i < d_; ++i) {
        cx s = 0.0;
        for (int j = 0; j < d_; ++j) s += at(i, j) * v[j];
        y[i] = s;
    }
    return y;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (const cx& z : a_) m = std::max(m, std::abs(z));
    return m;
}

bool Matrix::is_hermitian(double rel_tol) const {
    const double scale = std::max(max_abs(), 1e-300);
    for (int i = 0; i < d_; ++i)
        for (int j = i; j < d_; ++j)
            if (std::abs(at(i, j) - std::conj(at(j, i))) > rel_tol * scale) return false;
    return true;
}

EigenH eig_hermitian(const Matrix& h) {
    const int d = h.dim();
    Matrix a = h;
    // work on the Hermitian part; callers validated closeness already
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            const cx m = 0.5 * (a.at(i, j) + std::conj(a.at(j, i)));
            a.at(i, j) = m;
            a.at(j, i) = std::conj(m);
        }
        a.at(i, i) = cx(a.at(i, i).real(), 0.0);
    }
    Matrix u = Matrix::identity(d);

    double fro = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) fro += std::norm(a.at(i, j));
    fro = std::sqrt(fro);
    const double stop = std::max(1e-300, 1e-15 * fro);

    for (int sweep = 0; sweep < 60 && d > 1; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) off += 2.0 * std::norm(a.at(i, j));
        if (std::sqrt(off) <= stop) break;

        for (int p = 0; p < d - 1; ++p) {
            for (int q = p + 1; q < d; ++q) {
                const cx b = a.at(p, q);
                const double beta = std::abs(b);
                if (beta <= 1e-300) continue;
                const cx w = std::conj(b) / beta;
                const double app = a.at(p, p).real();
                const double aqq = a.at(q, q).real();
                const double tau = (aqq - app) / (2.0 * beta);
                double t;
                if (tau >= 0)
                    t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
                else
                    t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                // A <- R* A R with R[p][p]=c, R[p][q]=s, R[q][p]=-s w, R[q][q]=c w
                for (int i = 0; i < d; ++i) {
                    const cx aip = a.at(i, p), aiq = a.at(i, q);
                    a.at(i, p) = c * aip - s * w * aiq;
                    a.at(i, q) = s * aip + c * w * aiq;
                }
                for (int j = 0; j < d; ++j) {
                    const cx apj = a.at(p, j), aqj = a.at(q, j);
                    a.at(p, j) = c * apj - s * std::conj(w) * aqj;
                    a.at(q, j) = s * apj + c * std::conj(w) * aqj;
                }
                a.at(p, q) = 0.0;
                a.at(q, p) = 0.0;
                a.at(p, p) = cx(a.at(p, p).real(), 0.0);
                a.at(q, q) = cx(a.at(q, q).real(), 0.0);
                for (int i = 0; i < d; ++i) {
                    const cx uip = u.at(i, p), uiq = u.at(i, q);
                    u.at(i, p) = c * uip - s * w * uiq;
                    u.at(i, q) = s * uip + c * w * uiq;
                }
            }
        }
    }

    EigenH e;
    e.lambda.resize(d);
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(d);
    for (int i = 0; i < d; ++i) diag[i] = a.at(i, i).real();
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return diag[x] < diag[y]; });
    e.u = Matrix(d);
    for (int k = 0; k < d; ++k) {
        e.lambda[k] = diag[order[k]];
        for (int i = 0; i < d; ++i) e.u.at(i, k) = u.at(i, order[k]);
    }
    return e;
}

double op_norm(const Matrix& a) {
    if (a.max_abs() == 0.0) return 0.0;
    const Matrix g = a.adjoint() * a;
    EigenH e = eig_hermitian(g);
    return std::sqrt(std::max(0.0, e.lambda.back()));
}

PDMatrix PDMatrix::validate(const Matrix& m, double floor_rel) {
    if (!m.is_hermitian())
        throw ValidationError("NotHermitian", "matrix is not Hermitian within 1e-12 relative");
    EigenH e = eig_hermitian(m);
    const double lmax = e.lambda.back();
    const double floor_abs = floor_rel * std::max(lmax, 0.0);
    if (!(lmax > 0.0) || e.lambda.front() <= floor_abs) {
        std::ostringstream os;
        os << "eigenvalue " << e.lambda.front() << " not above floor " << floor_abs;
        throw ValidationError("NotPositiveDefinite", os.str());
    }
    // rebuild from the decomposition so matrix and cache agree exactly
    Matrix rec(m.dim());
    const int d = m.dim();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            cx s = 0.0;
            for (int k = 0; k < d; ++k) s += e.u.at(i, k) * e.lambda[k] * std::conj(e.u.at(j, k));
            rec.at(i, j) = (i == j) ? cx(s.real(), 0.0) : s;
        }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            const cx v = 0.5 * (rec.at(i, j) + std::conj(rec.at(j, i)));
            rec.at(i, j) = v;
            rec.at(j, i) = std::conj(v);
        }
    return PDMatrix(std::move(rec), std::move(e));
}

PDMatrix PDMatrix::identity(int d) { return validate(Matrix::identity(d)); }

PDMatrix PDMatrix::power(double s) const {
    const int d = dim();
    EigenH e;
    e.lambda.resize(d);
    for (int k = 0; k < d; ++k) e.lambda[k] = std::pow(eig_.lambda[k], s);
    e.u = eig_.u;
    if (s < 0) {
        // keep eigenvalues ascending
        std::reverse(e.lambda.begin(), e.lambda.end());
        Matrix u(d);
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < d; ++i) u.at(i, k) = e.u.at(i, d - 1 - k);
        e.u = std::move(u);
    }
    Matrix m(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            cx acc = 0.0;
            for (int k = 0; k < d; ++k) acc += e.u.at(i, k) * e.lambda[k] * std::conj(e.u.at(j, k));
            m.at(i, j) = (i == j) ? cx(acc.real(), 0.0) : acc;
        }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            const cx v = 0.5 * (m.at(i, j) + std::conj(m.at(j, i)));
            m.at(i, j) = v;
            m.at(j, i) = std::conj(v);
        }
    return PDMatrix(std::move(m), std::move(e));
}

} // namespace mwlab
