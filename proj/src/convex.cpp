#include "mwlab/convex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "mwlab/rng.hpp"

namespace mwlab {

namespace {

void phase_normalize(Vec& v) {
    double n = 0.0;
    for (const cx& z : v) n = std::max(n, std::abs(z));
    for (const cx& z : v) {
        if (std::abs(z) > 1e-12 * n) {
            const cx ph = std::conj(z) / std::abs(z);
            for (cx& w : v) w *= ph;
            return;
        }
    }
}

// lexicographic comparison on coordinatewise moduli, small-tolerance ties
bool lex_less(const Vec& a, const Vec& b) {
    for (size_t k = 0; k < a.size(); ++k) {
        const double x = std::abs(a[k]), y = std::abs(b[k]);
        if (std::abs(x - y) > 1e-12 * std::max({x, y, 1.0})) return x < y;
    }
    return false;
}

} // namespace

ConvexBody ConvexBody::zero_body(int d) {
    ConvexBody k;
    k.kind_ = Kind::zero;
    k.d_ = d;
    return k;
}

ConvexBody ConvexBody::ellipsoid(PDMatrix m) {
    ConvexBody k;
    k.kind_ = Kind::ellipsoid;
    k.d_ = m.dim();
    k.mat_ = std::move(m);
    return k;
}

ConvexBody ConvexBody::balanced_hull(int d, std::vector<Vec> gens, int phase_count) {
    if (phase_count < 8 || (phase_count & (phase_count - 1)) != 0)
        fail("InvalidModel", "phase_count must be a power of two, at least 8");
    bool nonzero = false;
    for (const Vec& g : gens) {
        if (static_cast<int>(g.size()) != d) fail("InvalidModel", "generator dimension mismatch");
        if (vec_norm(g) > 0.0) nonzero = true;
    }
    if (gens.empty() || !nonzero) fail("InvalidModel", "balanced hull needs a nonzero generator");
    ConvexBody k;
    k.kind_ = Kind::hull;
    k.d_ = d;
    k.gens_ = std::move(gens);
    k.phase_count_ = phase_count;
    return k;
}

double ConvexBody::support(std::span<const cx> u) const {
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::ellipsoid: return vec_norm(mat_.apply(u));
        case Kind::hull: {
            double h = 0.0;
            for (const Vec& g : gens_) h = std::max(h, std::abs(vec_dot(g, u)));
            return h;
        }
    }
    return 0.0;
}

double ConvexBody::norm() const {
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::ellipsoid: return mat_.op_norm();
        case Kind::hull: {
            double m = 0.0;
            for (const Vec& g : gens_) m = std::max(m, vec_norm(g));
            return m;
        }
    }
    return 0.0;
}

Vec ConvexBody::support_point(std::span<const cx> u) const {
    switch (kind_) {
        case Kind::zero: return Vec(d_, cx{});
        case Kind::ellipsoid: {
            Vec y = mat_.apply(u);
            const double n = vec_norm(y);
            if (n == 0.0) return Vec(d_, cx{});
            for (cx& z : y) z /= n;
            return mat_.apply(y);
        }
        case Kind::hull: {
            double best = -1.0;
            cx bs = 0.0;
            const Vec* bg = nullptr;
            for (const Vec& g : gens_) {
                const cx s = vec_dot(g, u);
                if (std::abs(s) > best) {
                    best = std::abs(s);
                    bs = s;
                    bg = &g;
                }
            }
            if (!bg || best == 0.0) return Vec(d_, cx{});
            Vec v = *bg;
            const cx ph = std::conj(bs) / std::abs(bs);
            for (cx& z : v) z *= ph;
            return v;
        }
    }
    return Vec(d_, cx{});
}

ConvexBody matrix_apply(const Matrix& a, const ConvexBody& k) {
    switch (k.kind()) {
        case ConvexBody::Kind::zero: return ConvexBody::zero_body(k.dim());
        case ConvexBody::Kind::ellipsoid: {
            const Matrix b = a * k.matrix().matrix();
            const Matrix g = b * b.adjoint();
            EigenH e = eig_hermitian(g);
            if (e.lambda.front() <= 1e-14 * std::max(e.lambda.back(), 0.0) ||
                !(e.lambda.back() > 0.0))
                fail("SingularMatrixOnEllipsoid",
                     "singular matrix applied to an ellipsoid; convert to a hull first");
            const int d = k.dim();
            Matrix s(d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    cx acc = 0.0;
                    for (int l = 0; l < d; ++l)
                        acc += e.u.at(i, l) * std::sqrt(e.lambda[l]) * std::conj(e.u.at(j, l));
                    s.at(i, j) = acc;
                }
            return ConvexBody::ellipsoid(PDMatrix::validate(s));
        }
        case ConvexBody::Kind::hull: {
            std::vector<Vec> gens;
            gens.reserve(k.generators().size());
            for (const Vec& g : k.generators()) gens.push_back(a.apply(g));
            bool nonzero = false;
            for (const Vec& g : gens)
                if (vec_norm(g) > 0.0) nonzero = true;
            if (!nonzero) return ConvexBody::zero_body(k.dim());
            return ConvexBody::balanced_hull(k.dim(), std::move(gens), k.phase_count());
        }
    }
    return ConvexBody::zero_body(k.dim());
}

namespace {

ConvexBody lq_sum_impl(std::span<const ConvexBody> bodies, double q, int base_dirs) {
    if (bodies.empty()) fail("EmptyList", "Minkowski sum of an empty list");
    const int d = bodies.front().dim();
    for (const ConvexBody& k : bodies)
        if (k.dim() != d) fail("InvalidModel", "Minkowski sum over mixed dimensions");
    if (bodies.size() == 1) return ConvexBody(bodies.front());

    bool all_zero = true;
    for (const ConvexBody& k : bodies)
        if (k.kind() != ConvexBody::Kind::zero) all_zero = false;
    if (all_zero) return ConvexBody::zero_body(d);

    // candidate directions: coordinates, each body's own norm-attaining
    // direction, and a fixed quasi-uniform batch
    std::vector<Vec> dirs;
    for (int k = 0; k < d; ++k) {
        Vec e(d, cx{});
        e[k] = 1.0;
        dirs.push_back(std::move(e));
    }
    for (const ConvexBody& k : bodies) {
        if (k.kind() == ConvexBody::Kind::zero) continue;
        Vec v = max_norm_selection(k);
        const double n = vec_norm(v);
        if (n > 0.0) {
            for (cx& z : v) z /= n;
            dirs.push_back(std::move(v));
        }
    }
    Rng rng(0x6d6b6c71ull);
    for (int i = 0; i < base_dirs; ++i) {
        Vec u(d);
        double n2 = 0.0;
        for (int k = 0; k < d; ++k) {
            u[k] = cx(rng.normal(), rng.normal());
            n2 += std::norm(u[k]);
        }
        if (n2 < 1e-12) continue;
        for (cx& z : u) z /= std::sqrt(n2);
        dirs.push_back(std::move(u));
    }

    std::vector<Vec> gens;
    gens.reserve(dirs.size());
    std::vector<double> h(bodies.size());
    for (const Vec& u : dirs) {
        double hq = 0.0;
        for (size_t n = 0; n < bodies.size(); ++n) {
            h[n] = bodies[n].support(u);
            hq += (q == 1.0) ? 0.0 : std::pow(h[n], q);
        }
        const double total = (q == 1.0) ? 0.0 : std::pow(hq, 1.0 / q);
        Vec w(d, cx{});
        for (size_t n = 0; n < bodies.size(); ++n) {
            if (h[n] == 0.0) continue;
            const double a = (q == 1.0) ? 1.0 : std::pow(h[n] / total, q - 1.0);
            Vec v = bodies[n].support_point(u);
            for (int k = 0; k < d; ++k) w[k] += a * v[k];
        }
        if (vec_norm(w) > 0.0) gens.push_back(std::move(w));
    }
    if (gens.empty()) return ConvexBody::zero_body(d);
    if (gens.size() > 512) {
        std::stable_sort(gens.begin(), gens.end(),
                         [](const Vec& a, const Vec& b) { return vec_norm(a) > vec_norm(b); });
        gens.resize(512);
    }
    int pc = 64;
    for (const ConvexBody& k : bodies)
        if (k.kind() == ConvexBody::Kind::hull) pc = std::max(pc, k.phase_count());
    return ConvexBody::balanced_hull(d, std::move(gens), pc);
}

} // namespace

ConvexBody minkowski_lq_sum(std::span<const ConvexBody> bodies, double q) {
    if (!(q >= 1.0)) fail("InvalidModel", "Minkowski exponent must satisfy q >= 1");
    return lq_sum_impl(bodies, q, 128);
}

Vec max_norm_selection(const ConvexBody& k) {
    const int d = k.dim();
    switch (k.kind()) {
        case ConvexBody::Kind::zero: return Vec(d, cx{});
        case ConvexBody::Kind::ellipsoid: {
            const PDMatrix& m = k.matrix();
            const double lmax = m.op_norm();
            // orthonormal basis of the top eigenspace
            std::vector<int> cols;
            for (int i = 0; i < d; ++i)
                if (m.eigenvalues()[i] >= lmax * (1.0 - 1e-12)) cols.push_back(i);
            // lexicographic pick: project e_1, e_2, ... onto the eigenspace
            for (int j = 0; j < d; ++j) {
                Vec proj(d, cx{});
                double n2 = 0.0;
                for (int c : cols) {
                    // component of e_j along eigenvector c is conj(U[j][c])
                    const cx coef = std::conj(m.unitary().at(j, c));
                    for (int i = 0; i < d; ++i) proj[i] += coef * m.unitary().at(i, c);
                }
                n2 = vec_norm(proj);
                if (n2 > 1e-9) {
                    for (cx& z : proj) z *= lmax / n2;
                    phase_normalize(proj);
                    return proj;
                }
            }
            return Vec(d, cx{});
        }
        case ConvexBody::Kind::hull: {
            const double best = k.norm();
            const Vec* pick = nullptr;
            for (const Vec& g : k.generators()) {
                if (vec_norm(g) < best * (1.0 - 1e-12)) continue;
                if (!pick || lex_less(*pick, g)) pick = &g;
            }
            if (!pick) return Vec(d, cx{});
            Vec v = *pick;
            phase_normalize(v);
            return v;
        }
    }
    return Vec(d, cx{});
}

namespace {

// members f(y) * |atom| / |Q| of the averaging zonotope, optionally mapped
std::vector<Vec> zonotope_members(const AtomField& f, const Box& q, const Matrix* a) {
    if (f.kind != ValueKind::vector) fail("InvalidModel", "averaging needs a vector field");
    const double am = f.grid.atom_measure();
    const double qm = box_measure(f.grid, q);
    std::vector<Vec> members;
    for_each_atom(f.grid, q, [&](std::int64_t atom) {
        const auto v = f.at(atom);
        Vec c(v.begin(), v.end());
        if (a) c = a->apply(c);
        for (cx& z : c) z *= am / qm;
        members.push_back(std::move(c));
    });
    return members;
}

ConvexBody zonotope_body(std::vector<Vec> members, int d) {
    std::vector<ConvexBody> disks;
    disks.reserve(members.size());
    for (Vec& m : members) {
        if (vec_norm(m) == 0.0) continue;
        std::vector<Vec> one;
        one.push_back(std::move(m));
        disks.push_back(ConvexBody::balanced_hull(d, std::move(one)));
    }
    if (disks.empty()) return ConvexBody::zero_body(d);
    return lq_sum_impl(disks, 1.0, 64);
}

} // namespace

ConvexBody average_body(const AtomField& f, const Box& q) {
    return zonotope_body(zonotope_members(f, q, nullptr), f.d);
}

ConvexBody average_body_mapped(const AtomField& f, const Box& q, const Matrix& a) {
    return zonotope_body(zonotope_members(f, q, &a), f.d);
}

JohnEllipsoidResult john_ellipsoid(const ConvexBody& k_in, const JohnOptions* opts_in) {
    const int d = k_in.dim();
    if (k_in.kind() == ConvexBody::Kind::zero)
        fail("DegenerateBody", "the zero body has no John ellipsoid");
    if (k_in.kind() == ConvexBody::Kind::ellipsoid) return {ConvexBody(k_in), 1.0};

    // Generators are only determined up to a unimodular phase; fix a canonical
    // one, then snap to a power-of-two grid (2^-36 relative, far below every
    // geometric tolerance) so phase-rotated copies of a hull solve the
    // bit-identical problem.
    std::vector<Vec> canon = k_in.generators();
    for (Vec& g : canon) phase_normalize(g);
    double top = 0.0;
    for (const Vec& g : canon)
        for (const cx& z : g) top = std::max({top, std::abs(z.real()), std::abs(z.imag())});
    if (top > 0.0) {
        const double q = std::ldexp(std::exp2(std::ceil(std::log2(top))), -36);
        for (Vec& g : canon)
            for (cx& z : g)
                z = cx(std::nearbyint(z.real() / q) * q, std::nearbyint(z.imag() / q) * q);
    }
    const ConvexBody k = ConvexBody::balanced_hull(d, std::move(canon), k_in.phase_count());

    // rank of the generator span
    Matrix gram(d);
    for (const Vec& g : k.generators())
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) gram.at(i, j) += g[i] * std::conj(g[j]);
    EigenH eg = eig_hermitian(gram);
    if (eg.lambda.front() <= 1e-12 * std::max(eg.lambda.back(), 0.0) || !(eg.lambda.back() > 0.0))
        fail("DegenerateBody", "rank-deficient hull; project to its span first");

    JohnTarget target;
    target.d = d;
    target.phi = [](std::span<const cx> y) { return vec_norm(y); };
    target.phi_grad = [](std::span<const cx> y) {
        const double n = vec_norm(y);
        Vec g(y.begin(), y.end());
        for (cx& z : g) z /= n;
        return g;
    };
    target.phi_batch = [d](const cx* ys, std::size_t n, double* out) {
        for (std::size_t i = 0; i < n; ++i)
            out[i] = vec_norm({ys + i * d, static_cast<size_t>(d)});
    };
    // Hess(|y|) = (I - yhat yhat^T)/|y| in the real embedding
    target.phi_hess = [](std::span<const cx> y, const std::vector<Vec>& b, double* out) {
        const double n = vec_norm(y);
        const size_t nb = b.size();
        std::vector<double> by(nb);
        for (size_t k = 0; k < nb; ++k) by[k] = vec_dot(b[k], y).real() / n;
        for (size_t k = 0; k < nb; ++k)
            for (size_t l = k; l < nb; ++l) {
                const double v = (vec_dot(b[k], b[l]).real() - by[k] * by[l]) / n;
                out[k * nb + l] = v;
                out[l * nb + k] = v;
            }
    };
    const ConvexBody* kp = &k;
    target.dirscale = [kp](std::span<const cx> u) { return kp->support(u); };
    target.dirscale_grad = [kp, d](std::span<const cx> u) {
        double best = -1.0;
        cx bs = 0.0;
        const Vec* bg = nullptr;
        for (const Vec& g : kp->generators()) {
            const cx s = vec_dot(g, u);
            if (std::abs(s) > best) {
                best = std::abs(s);
                bs = s;
                bg = &g;
            }
        }
        Vec grad(d, cx{});
        if (bg && best > 0.0)
            for (int i = 0; i < d; ++i) grad[i] = std::conj(bs) * (*bg)[i] / best;
        return grad;
    };

    JohnOptions opts = opts_in ? *opts_in : JohnOptions{};
    if (!opts_in) {
        opts.base_dirs = 192 * d;
        opts.rounds = 4;
        opts.crossover = true;
        opts.cert_dirs = 4096;
        opts.polish_starts = 24;
    }
    for (const Vec& g : k.generators()) {
        const double n = vec_norm(g);
        if (n == 0.0) continue;
        Vec u = g;
        for (cx& z : u) z /= n;
        opts.adapted.push_back(std::move(u));
    }
    // Sentinel directions: unit complements of (d-1)-subsets of generators.
    // The support function is locally smallest there, which is where the
    // inclusion constraint peaks hide.
    if (d >= 2) {
        std::vector<const Vec*> gs;
        for (const Vec& g : k.generators())
            if (vec_norm(g) > 0.0) gs.push_back(&g);
        std::stable_sort(gs.begin(), gs.end(),
                         [](const Vec* a, const Vec* b) { return vec_norm(*a) > vec_norm(*b); });
        if (gs.size() > 24) gs.resize(24);
        std::vector<int> pick(d - 1);
        std::function<void(int, int)> rec = [&](int start, int depth) {
            if (depth == d - 1) {
                // orthonormalize the subset, then complete with a complement
                std::vector<Vec> basis;
                for (int idx : pick) {
                    Vec v = *gs[idx];
                    for (const Vec& b : basis) {
                        const cx ip = vec_dot(v, b);
                        for (int i = 0; i < d; ++i) v[i] -= ip * b[i];
                    }
                    const double nv = vec_norm(v);
                    if (nv < 1e-10) return;
                    for (cx& z : v) z /= nv;
                    basis.push_back(std::move(v));
                }
                for (int seed_coord = 0; seed_coord < d; ++seed_coord) {
                    Vec w(d, cx{});
                    w[seed_coord] = 1.0;
                    for (const Vec& b : basis) {
                        const cx ip = vec_dot(w, b);
                        for (int i = 0; i < d; ++i) w[i] -= ip * b[i];
                    }
                    const double nw = vec_norm(w);
                    if (nw > 1e-8) {
                        for (cx& z : w) z /= nw;
                        opts.adapted.push_back(std::move(w));
                        break;
                    }
                }
                return;
            }
            for (int i = start; i < static_cast<int>(gs.size()); ++i) {
                pick[depth] = i;
                rec(i + 1, depth + 1);
            }
        };
        if (static_cast<int>(gs.size()) >= d - 1 && d > 1) rec(0, 0);
    }
    JohnResult res = john_solve(target, opts);
    // retry with a deeper search when the certificate comes out close to the
    // sqrt(d) John bound; keep the attempt with the smallest measured covering
    const double budget = std::sqrt(static_cast<double>(d)) * 1.04;
    for (int attempt = 1; attempt <= 2 && res.covering > budget; ++attempt) {
        JohnOptions deeper = opts;
        deeper.seed = opts.seed + 0x9e3779b9ull * attempt;
        deeper.base_dirs = opts.base_dirs * (1 + attempt);
        deeper.rounds = opts.rounds + 2 * attempt;
        deeper.polish_starts = opts.polish_starts * (1 + attempt);
        JohnResult again = john_solve(target, deeper);
        if (again.covering < res.covering) res = std::move(again);
    }
    return {ConvexBody::ellipsoid(std::move(res.m)), res.covering};
}

} // namespace mwlab
