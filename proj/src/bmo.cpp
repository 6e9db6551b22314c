#include "mwlab/bmo.hpp"

#include <algorithm>
#include <cmath>

#include "mwlab/rng.hpp"

namespace mwlab {

namespace {

std::array<int, 6> rect_key(const Box& b) {
    const Cube c2 = b.c2 ? *b.c2 : Cube{};
    return {b.c1.level, b.c1.pos[0], b.c1.pos[1], c2.level, c2.pos[0], c2.pos[1]};
}

void check_weights(const SymbolSpectrum& b, const MatrixWeightField& u,
                   const MatrixWeightField& v) {
    if (!(u.grid() == b.grid) || !(v.grid() == b.grid))
        fail("GridMismatch", "weights and symbol live on different grids");
    if (u.p != v.p) fail("InvalidModel", "the two weights must share the exponent p");
    if (u.dim() != b.d || v.dim() != b.d)
        fail("InvalidModel", "weight dimension does not match the symbol");
}

} // namespace

std::vector<Box> support_rectangles(const SymbolSpectrum& b) {
    std::vector<Box> out;
    std::vector<std::array<int, 6>> seen;
    for (const SymbolSpectrum::Entry& e : b.entries) {
        const Box rect{e.r1, e.r2};
        const auto key = rect_key(rect);
        if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
            seen.push_back(key);
            out.push_back(rect);
        }
    }
    return out;
}

AtomSet rect_union(const Grid& g, std::span<const Box> rects) {
    AtomSet s(g.atom_count(), 0);
    for (const Box& r : rects)
        for_each_atom(g, r, [&](std::int64_t a) { s[a] = 1; });
    return s;
}

double atomset_measure(const Grid& g, const AtomSet& s) {
    std::int64_t count = 0;
    for (std::uint8_t b : s) count += b;
    return count * g.atom_measure();
}

OmegaFamily exhaustive_family(const SymbolSpectrum& b) {
    const std::vector<Box> rects = support_rectangles(b);
    if (rects.size() > 10)
        fail("SupportTooLargeForExhaustive",
             "exhaustive Omega families need at most 10 support rectangles");
    OmegaFamily fam;
    fam.exhaustive = true;
    const std::uint32_t n = static_cast<std::uint32_t>(rects.size());
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<Box> part;
        for (std::uint32_t i = 0; i < n; ++i)
            if (mask & (1u << i)) part.push_back(rects[i]);
        fam.members.push_back(rect_union(b.grid, part));
    }
    return fam;
}

OmegaFamily sampled_family(const SymbolSpectrum& b, std::uint64_t seed, int unions) {
    const std::vector<Box> rects = support_rectangles(b);
    OmegaFamily fam;
    for (const Box& r : rects) fam.members.push_back(rect_union(b.grid, {&r, 1}));
    Rng rng(seed);
    for (int t = 0; t < unions && rects.size() > 1; ++t) {
        std::vector<Box> part;
        for (const Box& r : rects)
            if (rng.below(2)) part.push_back(r);
        if (part.empty()) part.push_back(rects[rng.below(rects.size())]);
        fam.members.push_back(rect_union(b.grid, part));
    }
    return fam;
}

double bmo_prod_norm(const SymbolSpectrum& b, const MatrixWeightField& u,
                     const MatrixWeightField& v, const OmegaFamily& family,
                     ReducingCache* ucache, ReducingCache* vcache) {
    check_weights(b, u, v);
    if (family.members.empty()) fail("EmptyFamily", "the BMO supremum needs candidate sets");
    if (b.entries.empty()) return 0.0;
    const Grid& g = b.grid;

    ReducingCache ulocal(u, u.p), vlocal(v, v.p);
    ReducingCache& uc = ucache ? *ucache : ulocal;
    ReducingCache& vc = vcache ? *vcache : vlocal;

    // per-entry twisted coefficient norms |V_R B U_R^{-1}|^2
    struct Term {
        std::vector<std::int64_t> atoms;
        double norm2 = 0.0;
    };
    std::vector<Term> terms;
    terms.reserve(b.entries.size());
    for (const SymbolSpectrum::Entry& e : b.entries) {
        const Box rect{e.r1, e.r2};
        Term t;
        t.atoms = atoms_of(g, rect);
        const Matrix twisted = vc.at(rect).matrix.matrix() *
                               (e.value * uc.at(rect).matrix.inverse().matrix());
        const double n = op_norm(twisted);
        t.norm2 = n * n;
        terms.push_back(std::move(t));
    }

    double best = 0.0;
    for (const AtomSet& omega : family.members) {
        const double measure = atomset_measure(g, omega);
        if (measure <= 0.0) continue;
        double sum = 0.0;
        for (const Term& t : terms) {
            bool inside = true;
            for (std::int64_t a : t.atoms) inside = inside && omega[a];
            if (inside) sum += t.norm2;
        }
        best = std::max(best, std::sqrt(sum / measure));
    }
    return best;
}

ScalarField h1_integrand(const SymbolSpectrum& phi, const MatrixWeightField& u,
                         const MatrixWeightField& v, ReducingCache* ucache) {
    check_weights(phi, u, v);
    const Grid& g = phi.grid;
    ReducingCache ulocal(u, u.p);
    ReducingCache& uc = ucache ? *ucache : ulocal;
    const int d = phi.d;

    std::vector<Matrix> vinv;
    vinv.reserve(g.atom_count());
    for (const PDMatrix& m : v.atoms) vinv.push_back(m.power(-1.0 / v.p).matrix());

    ScalarField out{g, std::vector<double>(g.atom_count(), 0.0)};
    for (const SymbolSpectrum::Entry& e : phi.entries) {
        const Box rect{e.r1, e.r2};
        const double measure = box_measure(g, rect);
        const Matrix right = e.value * uc.at(rect).matrix.matrix();
        for_each_atom(g, rect, [&](std::int64_t a) {
            const double n = op_norm(vinv[a] * right);
            out.v[a] += n * n / measure;
        });
    }
    (void)d;
    for (double& x : out.v) x = std::sqrt(x);
    return out;
}

double h1_norm(const SymbolSpectrum& phi, const MatrixWeightField& u, const MatrixWeightField& v,
               ReducingCache* ucache) {
    const ScalarField f = h1_integrand(phi, u, v, ucache);
    return lp_norm(f, 1.0);
}

cx duality_pairing(const SymbolSpectrum& b, const SymbolSpectrum& phi) {
    if (!(b.grid == phi.grid) || b.d != phi.d)
        fail("GridMismatch", "pairing needs symbols on the same grid and dimension");
    cx total = 0.0;
    for (const SymbolSpectrum::Entry& be : b.entries)
        for (const SymbolSpectrum::Entry& pe : phi.entries) {
            if (!(be.r1 == pe.r1) || !(be.r2 == pe.r2) || be.e1 != pe.e1 || be.e2 != pe.e2)
                continue;
            const Matrix prod = be.value.adjoint() * pe.value;
            for (int i = 0; i < b.d; ++i) total += prod.at(i, i);
        }
    return total;
}

ShadowDecomposition shadow_decomposition(const SymbolSpectrum& phi, const MatrixWeightField& u,
                                         const MatrixWeightField& v, double p) {
    if (u.p != p || v.p != p) fail("InvalidModel", "exponent context mismatch");
    const Grid& g = phi.grid;
    ShadowDecomposition out;
    if (phi.entries.empty()) return out;

    const ScalarField f = h1_integrand(phi, u, v);
    double fmin = 1e300, fmax = 0.0;
    for (double x : f.v)
        if (x > 0.0) {
            fmin = std::min(fmin, x);
            fmax = std::max(fmax, x);
        }
    if (fmax == 0.0) return out;
    const int kmin = static_cast<int>(std::floor(std::log2(fmin))) - 1;
    const int kmax = static_cast<int>(std::ceil(std::log2(fmax)));

    const std::vector<Box> rects = support_rectangles(phi);
    auto omega_at = [&](int k) {
        AtomSet s(g.atom_count(), 0);
        const double thr = std::ldexp(1.0, k);
        for (size_t a = 0; a < f.v.size(); ++a) s[a] = f.v[a] > thr ? 1 : 0;
        return s;
    };
    auto count_inside = [&](const Box& r, const AtomSet& s) {
        std::int64_t cnt = 0, total = 0;
        for_each_atom(g, r, [&](std::int64_t a) {
            ++total;
            cnt += s[a];
        });
        return std::pair<std::int64_t, std::int64_t>{cnt, total};
    };

    AtomSet next = omega_at(kmax + 1);
    std::vector<AtomSet> omegas(kmax - kmin + 2);
    for (int k = kmin; k <= kmax + 1; ++k) omegas[k - kmin] = omega_at(k);
    for (int k = kmin; k <= kmax; ++k) {
        ShadowLevel lvl;
        lvl.k = k;
        lvl.omega = omegas[k - kmin];
        const AtomSet& upper = omegas[k - kmin + 1];
        for (const Box& r : rects) {
            const auto [cu, total] = count_inside(r, upper);
            const auto [cl, total2] = count_inside(r, lvl.omega);
            (void)total2;
            if (2 * cu <= total && total < 2 * cl) lvl.rects.push_back(r);
        }
        // omega tilde: strong dyadic maximal of the indicator above 1/2
        ScalarField ind{g, std::vector<double>(g.atom_count(), 0.0)};
        for (size_t a = 0; a < lvl.omega.size(); ++a) ind.v[a] = lvl.omega[a] ? 1.0 : 0.0;
        const ScalarField m = maximal_unweighted(ind, CubeFamily::dyadic);
        lvl.omega_tilde.assign(g.atom_count(), 0);
        for (size_t a = 0; a < lvl.omega_tilde.size(); ++a)
            lvl.omega_tilde[a] = m.v[a] > 0.5 ? 1 : 0;
        if (!lvl.rects.empty() || std::count(lvl.omega.begin(), lvl.omega.end(), 1) > 0)
            out.levels.push_back(std::move(lvl));
    }
    return out;
}

} // namespace mwlab
