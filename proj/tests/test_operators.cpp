#include "doctest.h"

#include <cmath>

#include "mwlab/operators.hpp"
#include "mwlab/rng.hpp"

using namespace mwlab;

namespace {

MatrixWeightField rand_weight(Rng& rng, const Grid& g, int d, double p) {
    AtomField f = make_field(g, ValueKind::matrix, d);
    for (std::int64_t a = 0; a < g.atom_count(); ++a) {
        Matrix b(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) b.at(i, j) = cx(rng.normal(), rng.normal());
        Matrix w = b * b.adjoint();
        for (int i = 0; i < d; ++i) w.at(i, i) += 0.4;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) f.at(a)[i * d + j] = w.at(i, j);
    }
    return make_weight(std::move(f), p);
}

AtomField rand_vec(Rng& rng, const Grid& g, int d) {
    AtomField f = make_field(g, ValueKind::vector, d);
    for (auto& z : f.data) z = {rng.normal(), rng.normal()};
    return f;
}

// brute-force dyadic maximal for d = 1 nonneg fields
ScalarField naive_dyadic_max(const ScalarField& f) {
    ScalarField out{f.grid, std::vector<double>(f.v.size(), 0.0)};
    const int n = static_cast<int>(f.v.size());
    for (int size = 1; size <= n; size *= 2)
        for (int s = 0; s + size <= n; s += size) {
            double sum = 0.0;
            for (int y = s; y < s + size; ++y) sum += f.v[y];
            const double avg = sum / size;
            for (int y = s; y < s + size; ++y) out.v[y] = std::max(out.v[y], avg);
        }
    return out;
}

} // namespace

TEST_CASE("pointwise maximal: basics and oracle") {
    Grid g = one_parameter(1, 1);
    MatrixWeightField w1 = identity_weight(g, 1, 2.0);
    AtomField f = make_field(g, ValueKind::vector, 1);
    f.at(0)[0] = 1.0;
    ScalarField m = maximal_pointwise(w1, f, CubeFamily::dyadic);
    CHECK(m.v[0] == doctest::Approx(1.0));
    CHECK(m.v[1] == doctest::Approx(0.5));

    // constant field with identity weight: |e| everywhere
    Grid g2 = one_parameter(1, 3);
    MatrixWeightField id = identity_weight(g2, 2, 2.0);
    AtomField c = make_field(g2, ValueKind::vector, 2);
    for (std::int64_t a = 0; a < 8; ++a) {
        c.at(a)[0] = cx(3, 0);
        c.at(a)[1] = cx(0, 4);
    }
    ScalarField mc = maximal_pointwise(id, c, CubeFamily::dyadic);
    for (double v : mc.v) CHECK(v == doctest::Approx(5.0));

    // d=1, W == 1: equals the classical dyadic maximal of |f|
    Rng rng(1);
    MatrixWeightField one = identity_weight(g2, 1, 2.0);
    AtomField rf = rand_vec(rng, g2, 1);
    ScalarField got = maximal_pointwise(one, rf, CubeFamily::dyadic);
    ScalarField mod{g2, {}};
    for (std::int64_t a = 0; a < 8; ++a) mod.v.push_back(std::abs(rf.at(a)[0]));
    ScalarField want = naive_dyadic_max(mod);
    for (size_t i = 0; i < got.v.size(); ++i) CHECK(got.v[i] == doctest::Approx(want.v[i]));

    // aligned family dominates the dyadic one
    ScalarField aligned = maximal_pointwise(one, rf, CubeFamily::aligned);
    for (size_t i = 0; i < got.v.size(); ++i) CHECK(aligned.v[i] >= got.v[i] - 1e-12);

    // monotone in |f| for d = 1
    AtomField rg = rand_vec(rng, g2, 1);
    for (std::int64_t a = 0; a < 8; ++a) rg.at(a)[0] = rf.at(a)[0] * (1.0 + rng.uniform());
    ScalarField got2 = maximal_pointwise(one, rg, CubeFamily::dyadic);
    for (size_t i = 0; i < got.v.size(); ++i) CHECK(got2.v[i] >= got.v[i] - 1e-12);
}

TEST_CASE("reducing maximal: identity and constant-weight reduction") {
    Grid g = one_parameter(1, 2);
    Rng rng(2);
    MatrixWeightField id = identity_weight(g, 2, 2.0);
    AtomField f = rand_vec(rng, g, 2);
    ScalarField a = maximal_pointwise(id, f, CubeFamily::dyadic);
    ScalarField b = maximal_reducing(id, f, CubeFamily::dyadic);
    for (size_t i = 0; i < a.v.size(); ++i) CHECK(a.v[i] == doctest::Approx(b.v[i]).epsilon(1e-10));

    // constant weight: M~ f equals the unweighted maximal of |W^{1/p} f|
    AtomField cf = make_field(g, ValueKind::matrix, 2);
    for (std::int64_t x = 0; x < 4; ++x) {
        cf.at(x)[0] = 2.0;
        cf.at(x)[1] = cx(0.3, 0.1);
        cf.at(x)[2] = cx(0.3, -0.1);
        cf.at(x)[3] = 1.0;
    }
    MatrixWeightField wc = make_weight(std::move(cf), 3.0);
    ScalarField red = maximal_reducing(wc, f, CubeFamily::dyadic);
    ScalarField modf = weighted_modulus(wc, f);
    ScalarField classical = maximal_unweighted(modf, CubeFamily::dyadic);
    for (size_t i = 0; i < red.v.size(); ++i)
        CHECK(red.v[i] == doctest::Approx(classical.v[i]).epsilon(1e-9));
}

TEST_CASE("strong dyadic maximal: the nine-rectangle example") {
    Grid g = biparameter(1, 1, 1, 1);
    MatrixWeightField one = identity_weight(g, 1, 2.0);
    AtomField f = make_field(g, ValueKind::vector, 1);
    f.at(0)[0] = 1.0;  // left x left
    ScalarField m = maximal_strong_dyadic(one, f);
    CHECK(m.v[0] == doctest::Approx(1.0));
    CHECK(m.v[1] == doctest::Approx(0.5));
    CHECK(m.v[2] == doctest::Approx(0.5));
    CHECK(m.v[3] == doctest::Approx(0.25));

    // tensor domination: for f = g (x) h, strong max <= product of factor maxima
    Grid gb = biparameter(1, 2, 1, 2);
    MatrixWeightField oneb = identity_weight(gb, 1, 2.0);
    Rng rng(3);
    AtomField t = make_field(gb, ValueKind::vector, 1);
    std::vector<double> u(4), v(4);
    for (auto& x : u) x = rng.uniform();
    for (auto& x : v) x = rng.uniform();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) t.at(i * 4 + j)[0] = u[i] * v[j];
    ScalarField strong = maximal_strong_dyadic(oneb, t);
    ScalarField mu = naive_dyadic_max({one_parameter(1, 2), u});
    ScalarField mv = naive_dyadic_max({one_parameter(1, 2), v});
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(strong.v[i * 4 + j] <= mu.v[i] * mv.v[j] + 1e-12);
}

TEST_CASE("convex maximal: equivalences") {
    Rng rng(4);
    Grid g = one_parameter(1, 2);
    // d = 1: equals the pointwise maximal exactly
    for (int t = 0; t < 5; ++t) {
        MatrixWeightField w = rand_weight(rng, g, 1, 2.0);
        AtomField f = rand_vec(rng, g, 1);
        ScalarField a = maximal_pointwise(w, f, CubeFamily::dyadic);
        ScalarField b = maximal_convex(w, f, CubeFamily::dyadic);
        for (size_t i = 0; i < a.v.size(); ++i)
            CHECK(b.v[i] == doctest::Approx(a.v[i]).epsilon(1e-12));
    }
    // identity weight on the unit-ball body field: exactly 1
    MatrixWeightField id = identity_weight(g, 2, 2.0);
    BodyField balls{g, 2, {}};
    for (int a = 0; a < 4; ++a) balls.bodies.push_back(ConvexBody::ellipsoid(PDMatrix::identity(2)));
    ScalarField mb = maximal_convex(id, balls, CubeFamily::dyadic);
    for (double v : mb.v) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

    // (1/d) M_W f <= |M^K_W f| <= M_W f
    for (int t = 0; t < 10; ++t) {
        const int d = 1 + static_cast<int>(rng.below(3));
        MatrixWeightField w = rand_weight(rng, g, d, 2.0);
        AtomField f = rand_vec(rng, g, d);
        ScalarField a = maximal_pointwise(w, f, CubeFamily::dyadic);
        ScalarField b = maximal_convex(w, f, CubeFamily::dyadic);
        for (size_t i = 0; i < a.v.size(); ++i) {
            CHECK(b.v[i] <= a.v[i] * (1 + 1e-12));
            CHECK(b.v[i] >= a.v[i] / d * (1 - 1e-12));
        }
    }
}

TEST_CASE("square function: examples and parseval link") {
    Grid g = biparameter(1, 2, 1, 2);
    MatrixWeightField id = identity_weight(g, 2, 2.0);
    AtomField c = make_field(g, ValueKind::vector, 2);
    for (std::int64_t a = 0; a < 16; ++a) c.at(a)[0] = 1.5;
    ScalarField s0 = square_function(id, c, SquareVariant::pointwise);
    for (double v : s0.v) CHECK(std::abs(v) < 1e-13);

    // single coefficient on the full rectangle (|R0| = 1)
    AtomField h = make_field(g, ValueKind::vector, 2);
    Spectrum sp = haar_coeffs(h);
    sp.cc2(0, 0, 0, 0)[1] = cx(0, 2);  // e = 2i e_2
    AtomField hb = haar_reconstruct(sp);
    ScalarField s1 = square_function(id, hb, SquareVariant::pointwise);
    for (double v : s1.v) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));

    // integral of S^2 equals the cancellative coefficient energy when V == I
    Rng rng(5);
    AtomField r = rand_vec(rng, g, 2);
    ScalarField s2 = square_function(id, r, SquareVariant::pointwise);
    double lhs = 0.0;
    for (double v : s2.v) lhs += v * v * g.atom_measure();
    Spectrum rs = haar_coeffs(r);
    double rhs = 0.0;
    for (const cx& z : rs.cc) rhs += std::norm(z);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));

    // reducing variant with identity weight agrees
    ScalarField s3 = square_function(id, r, SquareVariant::reducing);
    for (size_t i = 0; i < s2.v.size(); ++i)
        CHECK(s3.v[i] == doctest::Approx(s2.v[i]).epsilon(1e-10));

    // degenerate second factor gives the one-parameter square function
    Grid gd = biparameter(1, 2, 1, 0);
    MatrixWeightField idd = identity_weight(gd, 1, 2.0);
    AtomField f1 = rand_vec(rng, gd, 1);
    ScalarField sd = square_function(idd, f1, SquareVariant::pointwise);
    Spectrum f1s = haar_coeffs(f1);
    double energy = 0.0;
    for (const cx& z : f1s.cm) energy += std::norm(z);
    double lhs2 = 0.0;
    for (double v : sd.v) lhs2 += v * v * gd.atom_measure();
    CHECK(lhs2 == doctest::Approx(energy).epsilon(1e-10));
}

TEST_CASE("mixed maximal-square operator") {
    Grid g = biparameter(1, 2, 1, 2);
    MatrixWeightField id = identity_weight(g, 1, 2.0);
    AtomField c = make_field(g, ValueKind::vector, 1);
    for (auto& z : c.data) z = cx(0.7, -0.2);
    ScalarField z = mixed_ms(id, c);
    for (double v : z.v) CHECK(std::abs(v) < 1e-13);

    // single slice coefficient: the inner part is the modulus-of-average
    // maximal of that coefficient, placed on R2
    Rng rng(6);
    AtomField f = rand_vec(rng, g, 1);
    ScalarField m = mixed_ms(id, f);
    // brute force
    const CubeIndexer idx2(g.f2, 1);
    std::vector<double> acc(16, 0.0);
    for (std::int64_t q2 = 0; q2 < idx2.count(); ++q2) {
        const Cube r2 = idx2.cube(q2);
        AtomField sl = slice_coeffs(f, 2, r2, 0);
        for (int x1 = 0; x1 < 4; ++x1) {
            double inner = 0.0;
            for (const Cube& r1 : dyadic_cubes(g.f1)) {
                const FactorBox b = cube_box(g.f1, r1);
                if (x1 < b.lo[0] || x1 >= b.hi[0]) continue;
                cx avg = 0.0;
                for (int y = b.lo[0]; y < b.hi[0]; ++y) avg += sl.at(y)[0];
                avg /= static_cast<double>(b.hi[0] - b.lo[0]);
                inner = std::max(inner, std::abs(avg));
            }
            const FactorBox b2 = cube_box(g.f2, r2);
            for (int x2 = b2.lo[0]; x2 < b2.hi[0]; ++x2)
                acc[x1 * 4 + x2] += inner * inner / cube_measure(g.f2, r2);
        }
    }
    for (int a = 0; a < 16; ++a) CHECK(m.v[a] == doctest::Approx(std::sqrt(acc[a])).epsilon(1e-10));
}

TEST_CASE("omega majorant") {
    Grid g = biparameter(1, 1, 1, 1);
    MatrixWeightField id = identity_weight(g, 2, 2.0);
    AtomSet omega(4, 0);
    omega[0] = omega[1] = 1;  // left column rectangle {left} x [0,1)
    ScalarField n = omega_majorant(id, omega);
    CHECK(n.v[0] == doctest::Approx(1.0));
    CHECK(n.v[1] == doctest::Approx(1.0));
    CHECK(n.v[2] == 0.0);
    CHECK(n.v[3] == 0.0);

    AtomSet empty(4, 0);
    CHECK_THROWS_AS(omega_majorant(id, empty), ValidationError);

    // scalar constant weight cancels exactly on covered atoms
    AtomField cf = make_field(g, ValueKind::matrix, 1);
    for (int a = 0; a < 4; ++a) cf.at(a)[0] = 3.7;
    MatrixWeightField wc = make_weight(std::move(cf), 1.5);
    ScalarField nc = omega_majorant(wc, omega);
    CHECK(nc.v[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("haar multiplier: involution, flip, self-adjointness") {
    Grid g = one_parameter(1, 3);
    Rng rng(7);
    AtomField f = rand_vec(rng, g, 2);
    const CubeIndexer idx(g.f1, 2);

    MultiplierSigns zero;
    AtomField tz = haar_multiplier(zero, f);
    Spectrum sz = haar_coeffs(tz);
    for (const cx& z : sz.cc) CHECK(std::abs(z) < 1e-13);
    Spectrum orig = haar_coeffs(f);
    for (int c = 0; c < 2; ++c) CHECK(std::abs(sz.mean[c] - orig.mean[c]) < 1e-13);

    MultiplierSigns ones;
    for (std::int64_t q = 0; q < idx.count(); ++q) ones.set(q, 1);
    AtomField ti = haar_multiplier(ones, f);
    for (size_t i = 0; i < f.data.size(); ++i) CHECK(std::abs(ti.data[i] - f.data[i]) < 1e-12);

    MultiplierSigns flip;
    for (std::int64_t q = 0; q < idx.count(); ++q) flip.set(q, 1);
    flip.set(idx.index(Cube{1, {1, 0}}), -1);
    AtomField tf = haar_multiplier(flip, f);
    Spectrum sf = haar_coeffs(tf);
    for (std::int64_t q = 0; q < idx.count(); ++q) {
        const cx a = sf.cc1(q, 0)[0], b = orig.cc1(q, 0)[0];
        if (q == idx.index(Cube{1, {1, 0}}))
            CHECK(std::abs(a + b) < 1e-12);
        else
            CHECK(std::abs(a - b) < 1e-12);
    }

    // self-adjointness in L^2
    MultiplierSigns sigma;
    for (std::int64_t q = 0; q < idx.count(); ++q)
        sigma.set(q, static_cast<int>(rng.below(3)) - 1);
    AtomField ga = rand_vec(rng, g, 2);
    AtomField tsf = haar_multiplier(sigma, f);
    AtomField tsg = haar_multiplier(sigma, ga);
    cx lhs = 0.0, rhs = 0.0;
    for (std::int64_t a = 0; a < 8; ++a) {
        lhs += vec_dot(tsf.at(a), ga.at(a)) * g.atom_measure();
        rhs += vec_dot(f.at(a), tsg.at(a)) * g.atom_measure();
    }
    CHECK(std::abs(lhs - rhs) < 1e-12);

    CHECK_THROWS_AS(sigma.set(0, 2), ValidationError);
}
