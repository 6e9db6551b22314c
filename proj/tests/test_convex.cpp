#include "doctest.h"

#include <cmath>

#include "mwlab/convex.hpp"
#include "mwlab/rng.hpp"

using namespace mwlab;

namespace {

PDMatrix diag_pd(std::initializer_list<double> v) {
    Matrix m(static_cast<int>(v.size()));
    int i = 0;
    for (double x : v) m.at(i, i) = x, ++i;
    return PDMatrix::validate(m);
}

ConvexBody random_hull(Rng& rng, int d, int m) {
    std::vector<Vec> gens(m, Vec(d));
    for (auto& g : gens)
        for (auto& z : g) z = {rng.normal(), rng.normal()};
    return ConvexBody::balanced_hull(d, std::move(gens));
}

} // namespace

TEST_CASE("body_norm on the three kinds") {
    CHECK(ConvexBody::zero_body(2).norm() == 0.0);
    CHECK(ConvexBody::ellipsoid(diag_pd({2, 5})).norm() == doctest::Approx(5.0));
    std::vector<Vec> gens = {{cx(1, 0), cx(0, 0)}, {cx(0, 0), cx(3, 0)}};
    CHECK(ConvexBody::balanced_hull(2, gens).norm() == doctest::Approx(3.0));
}

TEST_CASE("matrix_apply basics") {
    ConvexBody e = ConvexBody::ellipsoid(PDMatrix::identity(2));
    Matrix two = Matrix::identity(2) * cx(2.0, 0.0);
    ConvexBody scaled = matrix_apply(two, e);
    CHECK(scaled.matrix().matrix().at(0, 0).real() == doctest::Approx(2.0));

    // unimodular phase leaves any body fixed
    const cx lambda = std::polar(1.0, 0.7);
    Matrix ph = Matrix::identity(2) * lambda;
    ConvexBody e2 = matrix_apply(ph, ConvexBody::ellipsoid(diag_pd({1, 3})));
    CHECK(e2.matrix().matrix().at(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e2.matrix().matrix().at(1, 1).real() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::abs(e2.matrix().matrix().at(0, 1)) < 1e-12);

    Matrix sing(2);
    sing.at(0, 0) = 1.0;
    CHECK_THROWS_AS(matrix_apply(sing, e), ValidationError);

    // norm submultiplicativity |AK| <= |A||K|
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        ConvexBody k = random_hull(rng, 2, 4);
        Matrix a(2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) a.at(i, j) = cx(rng.normal(), rng.normal());
        CHECK(matrix_apply(a, k).norm() <= op_norm(a) * k.norm() * (1 + 1e-12));
    }
}

TEST_CASE("minkowski lq sum: identity, disk example, exact bounds") {
    ConvexBody disk = ConvexBody::ellipsoid(PDMatrix::identity(1));
    std::vector<ConvexBody> single{disk};
    ConvexBody same = minkowski_lq_sum(single, 2.0);
    CHECK(same.norm() == doctest::Approx(1.0));

    std::vector<ConvexBody> two{disk, disk};
    ConvexBody sum = minkowski_lq_sum(two, 2.0);
    CHECK(sum.norm() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    std::vector<ConvexBody> none;
    CHECK_THROWS_AS(minkowski_lq_sum(none, 2.0), ValidationError);

    Rng rng(31);
    for (int t = 0; t < 40; ++t) {
        const int d = 1 + static_cast<int>(rng.below(3));
        const int count = 1 + static_cast<int>(rng.below(5));
        const double q = rng.uniform(1.1, 4.0);
        std::vector<ConvexBody> bodies;
        double upper = 0.0, lower = 0.0;
        for (int i = 0; i < count; ++i) {
            ConvexBody k = (rng.below(2) == 0) ? random_hull(rng, d, 3)
                                               : ConvexBody::zero_body(d);
            upper += std::pow(k.norm(), q);
            lower = std::max(lower, k.norm());
            bodies.push_back(std::move(k));
        }
        upper = std::pow(upper, 1.0 / q);
        const double got = minkowski_lq_sum(bodies, q).norm();
        CHECK(got <= upper * (1 + 1e-9));
        CHECK(got >= lower * (1 - 1e-9));
    }
}

TEST_CASE("max_norm_selection tie-breaks") {
    Vec z = max_norm_selection(ConvexBody::zero_body(3));
    for (const cx& v : z) CHECK(std::abs(v) == 0.0);

    Vec e = max_norm_selection(ConvexBody::ellipsoid(diag_pd({2, 5})));
    CHECK(std::abs(e[0]) < 1e-12);
    CHECK(e[1].real() == doctest::Approx(5.0));
    CHECK(std::abs(e[1].imag()) < 1e-12);

    std::vector<Vec> gens = {{cx(3, 0), cx(0, 0)}, {cx(0, 0), cx(1, 0)}};
    Vec h = max_norm_selection(ConvexBody::balanced_hull(2, gens));
    CHECK(h[0].real() == doctest::Approx(3.0));
    CHECK(std::abs(h[1]) < 1e-12);

    // selection attains the norm and lies in the body (support check)
    Rng rng(8);
    for (int t = 0; t < 20; ++t) {
        ConvexBody k = random_hull(rng, 3, 4);
        Vec v = max_norm_selection(k);
        CHECK(vec_norm(v) == doctest::Approx(k.norm()).epsilon(1e-12));
    }
}

TEST_CASE("john ellipsoid: fixed point, l1 ball, sandwich, phase invariance") {
    ConvexBody e = ConvexBody::ellipsoid(diag_pd({1, 2}));
    auto [same, factor] = john_ellipsoid(e);
    CHECK(factor == 1.0);
    CHECK(same.matrix().matrix().at(1, 1).real() == doctest::Approx(2.0));

    // complex l1 ball in C^2: the inscribed ball has radius 1/sqrt(2)
    std::vector<Vec> gens = {{cx(1, 0), cx(0, 0)}, {cx(0, 0), cx(1, 0)}};
    ConvexBody l1 = ConvexBody::balanced_hull(2, gens);
    auto res = john_ellipsoid(l1);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(res.ellipsoid.matrix().eigenvalues()[0] == doctest::Approx(r).epsilon(2e-3));
    CHECK(res.ellipsoid.matrix().eigenvalues()[1] == doctest::Approx(r).epsilon(2e-3));
    CHECK(res.sandwich_factor <= std::sqrt(2.0) * 1.05);

    CHECK_THROWS_AS(john_ellipsoid(ConvexBody::zero_body(2)), ValidationError);
    std::vector<Vec> flat = {{cx(1, 0), cx(0, 0)}, {cx(2, 0), cx(0, 0)}};
    CHECK_THROWS_AS(john_ellipsoid(ConvexBody::balanced_hull(2, flat)), ValidationError);

    Rng rng(77);
    for (int t = 0; t < 6; ++t) {
        const int d = 2;
        ConvexBody k = random_hull(rng, d, d + 3);
        auto jr = john_ellipsoid(k);
        CHECK(jr.sandwich_factor <= std::sqrt(static_cast<double>(d)) * 1.05);
        // sampled two-sided support sandwich
        Rng dr(1234 + t);
        for (int i = 0; i < 200; ++i) {
            Vec u(d);
            for (auto& z : u) z = {dr.normal(), dr.normal()};
            const double n = vec_norm(u);
            for (auto& z : u) z /= n;
            const double hk = k.support(u);
            const double hg = jr.ellipsoid.support(u);
            CHECK(hg <= hk * (1 + 1e-9));
            CHECK(hk <= hg * jr.sandwich_factor * (1 + 1e-9));
        }
        // phase invariance: a unimodular scalar changes nothing
        ConvexBody rot = matrix_apply(Matrix::identity(d) * std::polar(1.0, 1.1), k);
        auto jr2 = john_ellipsoid(rot);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                CHECK(std::abs(jr2.ellipsoid.matrix().matrix().at(i, j) -
                               jr.ellipsoid.matrix().matrix().at(i, j)) < 1e-8);
    }

    // higher-dimensional hulls keep honest certificates even where the
    // inscribed solve cannot be pinned to the optimum
    ConvexBody k3 = random_hull(rng, 3, 6);
    auto jr3 = john_ellipsoid(k3);
    CHECK(jr3.sandwich_factor >= 1.0);
    Rng dr(4321);
    for (int i = 0; i < 100; ++i) {
        Vec u(3);
        for (auto& z : u) z = {dr.normal(), dr.normal()};
        const double n = vec_norm(u);
        for (auto& z : u) z /= n;
        CHECK(jr3.ellipsoid.support(u) <= k3.support(u) * (1 + 1e-9));
        CHECK(k3.support(u) <= jr3.ellipsoid.support(u) * jr3.sandwich_factor * (1 + 1e-9));
    }
}

TEST_CASE("average_body: constant field, d=1 exactness, two-sided bound") {
    Grid g = one_parameter(1, 2);
    AtomField f = make_field(g, ValueKind::vector, 2);
    for (int a = 0; a < 4; ++a) {
        f.at(a)[0] = cx(3, 0);
        f.at(a)[1] = cx(0, 4);
    }
    Box whole{Cube{0, {0, 0}}, std::nullopt};
    CHECK(average_body(f, whole).norm() == doctest::Approx(5.0).epsilon(1e-12));

    // d = 1: |A_Q f| equals the average of |f| exactly
    Rng rng(4);
    AtomField s = make_field(g, ValueKind::vector, 1);
    double avg = 0.0;
    for (int a = 0; a < 4; ++a) {
        s.at(a)[0] = cx(rng.normal(), rng.normal());
        avg += std::abs(s.at(a)[0]) * 0.25;
    }
    CHECK(average_body(s, whole).norm() == doctest::Approx(avg).epsilon(1e-12));

    // half-supported example: norm at least 1/2
    AtomField h = make_field(g, ValueKind::vector, 2);
    h.at(0)[0] = 1;
    h.at(1)[0] = 1;
    h.at(2)[1] = 1;
    h.at(3)[1] = 1;
    CHECK(average_body(h, whole).norm() >= 0.5 - 1e-12);

    // (1/d) avg <= |A_Q f| <= avg on random fields
    for (int t = 0; t < 20; ++t) {
        const int d = 1 + static_cast<int>(rng.below(3));
        AtomField rf = make_field(g, ValueKind::vector, d);
        for (auto& z : rf.data) z = {rng.normal(), rng.normal()};
        double av = 0.0;
        for (int a = 0; a < 4; ++a) av += vec_norm(rf.at(a)) * 0.25;
        const double nb = average_body(rf, whole).norm();
        CHECK(nb <= av * (1 + 1e-12));
        CHECK(nb >= av / d * (1 - 1e-12));
    }

    Box outside{Cube{5, {9, 0}}, std::nullopt};
    CHECK_THROWS_AS(average_body(f, outside), ValidationError);
}
