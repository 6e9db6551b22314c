#include "doctest.h"

#include <string>
#include <vector>

#include "mwlab/kernels.hpp"
#include "mwlab/rng.hpp"

using namespace mwlab;
namespace k = mwlab::kernels;

// Every kernel must agree between the scalar reference and the runtime-selected
// backend on random data.
TEST_CASE("scalar and simd backends agree") {
    const std::string original = k::backend();
    INFO("default backend: " << original);

    Rng rng(99);
    for (size_t n : {0ul, 1ul, 3ul, 4ul, 5ul, 17ul, 64ul, 255ul, 1024ul}) {
        std::vector<double> x(n), y(n);
        for (size_t i = 0; i < n; ++i) {
            x[i] = rng.normal();
            y[i] = rng.normal();
        }
        std::vector<double> x2(n);
        for (size_t i = 0; i < n; ++i) x2[i] = x[i] * x[i];

        k::set_backend("scalar");
        const double s_sq = k::sum_squares(x.data(), n);
        const double s_abs = k::sum_abs(x.data(), n);
        const double s_max = k::max_value(x.data(), n);
        const double s_dot = k::dot(x.data(), y.data(), n);
        std::vector<double> s_acc(n, 0.25);
        for (double p : {1.0, 1.5, 2.0, 3.0, 2.7})
            k::accum_pow(s_acc.data(), x2.data(), n, 0.7, p);

        if (!k::set_backend(original.c_str())) continue;  // no simd on this host
        const double v_sq = k::sum_squares(x.data(), n);
        const double v_abs = k::sum_abs(x.data(), n);
        const double v_max = k::max_value(x.data(), n);
        const double v_dot = k::dot(x.data(), y.data(), n);
        std::vector<double> v_acc(n, 0.25);
        for (double p : {1.0, 1.5, 2.0, 3.0, 2.7})
            k::accum_pow(v_acc.data(), x2.data(), n, 0.7, p);

        CHECK(s_sq == doctest::Approx(v_sq).epsilon(1e-12));
        CHECK(s_abs == doctest::Approx(v_abs).epsilon(1e-12));
        CHECK(s_max == v_max);
        CHECK(s_dot == doctest::Approx(v_dot).epsilon(1e-12));
        for (size_t i = 0; i < n; ++i) CHECK(s_acc[i] == doctest::Approx(v_acc[i]).epsilon(1e-12));
    }
    k::set_backend(original.c_str());
}

TEST_CASE("cmatvec_norms2 matches the direct computation on both backends") {
    const std::string original = k::backend();
    Rng rng(123);
    for (int d : {1, 2, 3, 4}) {
        for (size_t n : {1ul, 2ul, 7ul, 33ul, 128ul}) {
            std::vector<std::complex<double>> a(d * d), vecs(n * d);
            for (auto& z : a) z = {rng.normal(), rng.normal()};
            for (auto& z : vecs) z = {rng.normal(), rng.normal()};

            std::vector<double> direct(n, 0.0);
            for (size_t i = 0; i < n; ++i) {
                for (int r = 0; r < d; ++r) {
                    std::complex<double> y = 0.0;
                    for (int c = 0; c < d; ++c) y += a[r * d + c] * vecs[i * d + c];
                    direct[i] += std::norm(y);
                }
            }
            for (const char* b : {"scalar", original.c_str()}) {
                if (!k::set_backend(b)) continue;
                std::vector<double> out(n);
                k::cmatvec_norms2(a.data(), d, vecs.data(), n, out.data());
                for (size_t i = 0; i < n; ++i)
                    CHECK(out[i] == doctest::Approx(direct[i]).epsilon(1e-12));
            }
        }
    }
    k::set_backend(original.c_str());
}
