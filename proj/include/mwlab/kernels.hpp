#ifndef MWLAB_KERNELS_HPP
#define MWLAB_KERNELS_HPP

#include <complex>
#include <cstddef>

namespace mwlab::kernels {

// Data-parallel inner loops used by the transforms, maximal operators and the
// ellipsoid solver. Scalar reference implementations always exist; an AVX2+FMA
// variant is selected at runtime when the CPU supports it. The two backends
// agree to rounding (equivalence-tested), not bit-for-bit.

double sum_squares(const double* x, std::size_t n);
double sum_abs(const double* x, std::size_t n);
double max_value(const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);

// out[i] = |A v_i|^2 for n complex vectors stored contiguously (d entries each),
// A row-major d x d.
void cmatvec_norms2(const std::complex<double>* a, int d, const std::complex<double>* vecs,
                    std::size_t n, double* out);

// acc[i] += w * x2[i]^(p/2) for nonnegative x2 (squared norms). Fast lanes for
// p in {1, 1.5, 2, 3}.
void accum_pow(double* acc, const double* x2, std::size_t n, double w, double p);

// sum_i w[i] * x[i]^p for nonnegative x.
double weighted_pow_sum(const double* x, const double* w, std::size_t n, double p);

const char* backend();               // "avx2" or "scalar"
bool set_backend(const char* name);  // returns false if unavailable

} // namespace mwlab::kernels

#endif
