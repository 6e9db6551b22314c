#include "mwlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#if defined(__x86_64__)
#include <immintrin.h>
#define MWLAB_X86 1
#endif

namespace mwlab::kernels {

using cx = std::complex<double>;

// ---------------------------------------------------------------- scalar ----

namespace scalar {

double sum_squares(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

double sum_abs(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(x[i]);
    return s;
}

double max_value(const double* x, std::size_t n) {
    double m = n ? x[0] : 0.0;
    for (std::size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
    return m;
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void cmatvec_norms2(const cx* a, int d, const cx* vecs, std::size_t n, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const cx* v = vecs + static_cast<std::size_t>(i) * d;
        double acc = 0.0;
        for (int r = 0; r < d; ++r) {
            cx y = 0.0;
            const cx* row = a + static_cast<std::size_t>(r) * d;
            for (int k = 0; k < d; ++k) y += row[k] * v[k];
            acc += std::norm(y);
        }
        out[i] = acc;
    }
}

void accum_pow(double* acc, const double* x2, std::size_t n, double w, double p) {
    if (p == 2.0) {
        for (std::size_t i = 0; i < n; ++i) acc[i] += w * x2[i];
    } else if (p == 1.0) {
        for (std::size_t i = 0; i < n; ++i) acc[i] += w * std::sqrt(x2[i]);
    } else if (p == 3.0) {
        for (std::size_t i = 0; i < n; ++i) acc[i] += w * x2[i] * std::sqrt(x2[i]);
    } else if (p == 1.5) {
        for (std::size_t i = 0; i < n; ++i) {
            const double r = std::sqrt(x2[i]);
            acc[i] += w * r * std::sqrt(r);
        }
    } else {
        const double h = 0.5 * p;
        for (std::size_t i = 0; i < n; ++i) acc[i] += w * std::pow(x2[i], h);
    }
}

double weighted_pow_sum(const double* x, const double* w, std::size_t n, double p) {
    double s = 0.0;
    if (p == 2.0) {
        for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * x[i];
    } else if (p == 1.0) {
        for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i];
    } else if (p == 3.0) {
        for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * x[i] * x[i];
    } else if (p == 1.5) {
        for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * std::sqrt(x[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) s += w[i] * std::pow(x[i], p);
    }
    return s;
}

} // namespace scalar

// ------------------------------------------------------------------ avx2 ----

#if MWLAB_X86

namespace avx2 {

__attribute__((target("avx2,fma"))) static double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

__attribute__((target("avx2,fma"))) double sum_squares(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

__attribute__((target("avx2,fma"))) double sum_abs(const double* x, std::size_t n) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffll));
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(x + i)));
    double s = hsum(acc);
    for (; i < n; ++i) s += std::abs(x[i]);
    return s;
}

__attribute__((target("avx2,fma"))) double max_value(const double* x, std::size_t n) {
    if (n == 0) return 0.0;
    double m = x[0];
    std::size_t i = 0;
    if (n >= 4) {
        __m256d acc = _mm256_loadu_pd(x);
        for (i = 4; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
        alignas(32) double tmp[4];
        _mm256_store_pd(tmp, acc);
        m = std::max(std::max(tmp[0], tmp[1]), std::max(tmp[2], tmp[3]));
    }
    for (; i < n; ++i) m = std::max(m, x[i]);
    return m;
}

__attribute__((target("avx2,fma"))) double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

// SoA scratch for the matvec batch: planes re_k | im_k of length n each.
thread_local std::vector<double> scratch;

__attribute__((target("avx2,fma"))) void cmatvec_norms2(const cx* a, int d, const cx* vecs,
                                                        std::size_t n, double* out) {
    const std::size_t stride = n;
    scratch.resize(2 * static_cast<std::size_t>(d) * stride + 2 * stride);
    double* planes = scratch.data();
    double* yre = planes + 2 * static_cast<std::size_t>(d) * stride;
    double* yim = yre + stride;
    for (std::size_t i = 0; i < n; ++i) {
        const cx* v = vecs + i * d;
        for (int k = 0; k < d; ++k) {
            planes[(2 * k) * stride + i] = v[k].real();
            planes[(2 * k + 1) * stride + i] = v[k].imag();
        }
    }
    std::memset(out, 0, n * sizeof(double));
    for (int r = 0; r < d; ++r) {
        std::memset(yre, 0, stride * sizeof(double));
        std::memset(yim, 0, stride * sizeof(double));
        for (int k = 0; k < d; ++k) {
            const double ar = a[static_cast<std::size_t>(r) * d + k].real();
            const double ai = a[static_cast<std::size_t>(r) * d + k].imag();
            const double* vr = planes + (2 * k) * stride;
            const double* vi = planes + (2 * k + 1) * stride;
            const __m256d var = _mm256_set1_pd(ar);
            const __m256d vai = _mm256_set1_pd(ai);
            std::size_t i = 0;
            for (; i + 4 <= n; i += 4) {
                __m256d xr = _mm256_loadu_pd(vr + i);
                __m256d xi = _mm256_loadu_pd(vi + i);
                __m256d r0 = _mm256_loadu_pd(yre + i);
                __m256d i0 = _mm256_loadu_pd(yim + i);
                r0 = _mm256_fmadd_pd(var, xr, r0);
                r0 = _mm256_fnmadd_pd(vai, xi, r0);
                i0 = _mm256_fmadd_pd(var, xi, i0);
                i0 = _mm256_fmadd_pd(vai, xr, i0);
                _mm256_storeu_pd(yre + i, r0);
                _mm256_storeu_pd(yim + i, i0);
            }
            for (; i < n; ++i) {
                yre[i] += ar * vr[i] - ai * vi[i];
                yim[i] += ar * vi[i] + ai * vr[i];
            }
        }
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4) {
            __m256d r0 = _mm256_loadu_pd(yre + i);
            __m256d i0 = _mm256_loadu_pd(yim + i);
            __m256d o = _mm256_loadu_pd(out + i);
            o = _mm256_fmadd_pd(r0, r0, o);
            o = _mm256_fmadd_pd(i0, i0, o);
            _mm256_storeu_pd(out + i, o);
        }
        for (; i < n; ++i) out[i] += yre[i] * yre[i] + yim[i] * yim[i];
    }
}

__attribute__((target("avx2,fma"))) void accum_pow(double* acc, const double* x2, std::size_t n,
                                                   double w, double p) {
    const __m256d vw = _mm256_set1_pd(w);
    std::size_t i = 0;
    if (p == 2.0) {
        for (; i + 4 <= n; i += 4) {
            __m256d a = _mm256_loadu_pd(acc + i);
            a = _mm256_fmadd_pd(vw, _mm256_loadu_pd(x2 + i), a);
            _mm256_storeu_pd(acc + i, a);
        }
        for (; i < n; ++i) acc[i] += w * x2[i];
    } else if (p == 1.0) {
        for (; i + 4 <= n; i += 4) {
            __m256d a = _mm256_loadu_pd(acc + i);
            a = _mm256_fmadd_pd(vw, _mm256_sqrt_pd(_mm256_loadu_pd(x2 + i)), a);
            _mm256_storeu_pd(acc + i, a);
        }
        for (; i < n; ++i) acc[i] += w * std::sqrt(x2[i]);
    } else if (p == 3.0) {
        for (; i + 4 <= n; i += 4) {
            __m256d x = _mm256_loadu_pd(x2 + i);
            __m256d a = _mm256_loadu_pd(acc + i);
            a = _mm256_fmadd_pd(vw, _mm256_mul_pd(x, _mm256_sqrt_pd(x)), a);
            _mm256_storeu_pd(acc + i, a);
        }
        for (; i < n; ++i) acc[i] += w * x2[i] * std::sqrt(x2[i]);
    } else if (p == 1.5) {
        for (; i + 4 <= n; i += 4) {
            __m256d r = _mm256_sqrt_pd(_mm256_loadu_pd(x2 + i));
            __m256d a = _mm256_loadu_pd(acc + i);
            a = _mm256_fmadd_pd(vw, _mm256_mul_pd(r, _mm256_sqrt_pd(r)), a);
            _mm256_storeu_pd(acc + i, a);
        }
        for (; i < n; ++i) {
            const double r = std::sqrt(x2[i]);
            acc[i] += w * r * std::sqrt(r);
        }
    } else {
        const double h = 0.5 * p;
        for (; i < n; ++i) acc[i] += w * std::pow(x2[i], h);
    }
}

} // namespace avx2

#endif // MWLAB_X86

// --------------------------------------------------------------- dispatch ----

namespace {

struct Backend {
    double (*sum_squares)(const double*, std::size_t);
    double (*sum_abs)(const double*, std::size_t);
    double (*max_value)(const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    void (*cmatvec_norms2)(const cx*, int, const cx*, std::size_t, double*);
    void (*accum_pow)(double*, const double*, std::size_t, double, double);
    const char* name;
};

constexpr Backend kScalar{scalar::sum_squares, scalar::sum_abs,    scalar::max_value,
                          scalar::dot,         scalar::cmatvec_norms2, scalar::accum_pow,
                          "scalar"};

#if MWLAB_X86
const Backend kAvx2{avx2::sum_squares, avx2::sum_abs,        avx2::max_value, avx2::dot,
                    avx2::cmatvec_norms2, avx2::accum_pow, "avx2"};
#endif

const Backend* pick_default() {
#if MWLAB_X86
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &kAvx2;
#endif
    return &kScalar;
}

const Backend* active = pick_default();

} // namespace

double sum_squares(const double* x, std::size_t n) { return active->sum_squares(x, n); }
double sum_abs(const double* x, std::size_t n) { return active->sum_abs(x, n); }
double max_value(const double* x, std::size_t n) { return active->max_value(x, n); }
double dot(const double* a, const double* b, std::size_t n) { return active->dot(a, b, n); }

void cmatvec_norms2(const cx* a, int d, const cx* vecs, std::size_t n, double* out) {
    active->cmatvec_norms2(a, d, vecs, n, out);
}

void accum_pow(double* acc, const double* x2, std::size_t n, double w, double p) {
    active->accum_pow(acc, x2, n, w, p);
}

double weighted_pow_sum(const double* x, const double* w, std::size_t n, double p) {
    return scalar::weighted_pow_sum(x, w, n, p);
}

const char* backend() { return active->name; }

bool set_backend(const char* name) {
    const std::string s = name;
    if (s == "scalar") {
        active = &kScalar;
        return true;
    }
#if MWLAB_X86
    if (s == "avx2" && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        active = &kAvx2;
        return true;
    }
#endif
    return false;
}

} // namespace mwlab::kernels
