#include "mwlab/paraproducts.hpp"

#include <algorithm>
#include <cmath>

namespace mwlab {

void SymbolSpectrum::add(const Cube& r1, Sig e1, const Cube& r2, Sig e2, Matrix v) {
    if (v.dim() != d) fail("InvalidModel", "symbol entry dimension mismatch");
    if (r1.level < 0 || r1.level >= grid.f1.depth || r2.level < 0 || r2.level >= grid.f2.depth)
        fail("GridMismatch", "symbol rectangle outside the coefficient grid");
    entries.push_back(Entry{r1, r2, e1, e2, std::move(v)});
}

SymbolSpectrum SymbolSpectrum::adjoint() const {
    SymbolSpectrum out;
    out.grid = grid;
    out.d = d;
    out.entries.reserve(entries.size());
    for (const Entry& e : entries)
        out.entries.push_back(Entry{e.r1, e.r2, e.e1, e.e2, e.value.adjoint()});
    return out;
}

SymbolSpectrum symbol_of(const AtomField& b) {
    if (!b.grid.bi) fail("GridMismatch", "symbols live on product grids");
    if (b.kind != ValueKind::matrix) fail("InvalidModel", "symbols are matrix valued");
    const Spectrum s = haar_coeffs(b);
    SymbolSpectrum out;
    out.grid = b.grid;
    out.d = b.d;
    const int d = b.d;
    for (std::int64_t q1 = 0; q1 < s.idx1.count(); ++q1)
        for (size_t s1 = 0; s1 < s.sigs1.size(); ++s1)
            for (std::int64_t q2 = 0; q2 < s.idx2.count(); ++q2)
                for (size_t s2 = 0; s2 < s.sigs2.size(); ++s2) {
                    const auto c = s.cc2(q1, s1, q2, s2);
                    bool nonzero = false;
                    for (const cx& z : c)
                        if (std::abs(z) > 0.0) nonzero = true;
                    if (!nonzero) continue;
                    Matrix m(d);
                    for (int i = 0; i < d; ++i)
                        for (int j = 0; j < d; ++j) m.at(i, j) = c[i * d + j];
                    out.entries.push_back(SymbolSpectrum::Entry{
                        s.idx1.cube(q1), s.idx2.cube(q2), s.sigs1[s1], s.sigs2[s2], std::move(m)});
                }
    return out;
}

namespace {

// signature arithmetic: componentwise xor against the all-ones tuple
Sig xor1(Sig a, Sig b, int dim) {
    const Sig full = static_cast<Sig>((1 << dim) - 1);
    return static_cast<Sig>(full ^ a ^ b);
}

struct FactorData {
    const Factor* f;
    std::vector<int> atoms_of_cube(const Cube& q) const {
        std::vector<int> out;
        const FactorBox b = cube_box(*f, q);
        if (f->dim == 1) {
            for (int x = b.lo[0]; x < b.hi[0]; ++x) out.push_back(x);
        } else {
            for (int x0 = b.lo[0]; x0 < b.hi[0]; ++x0)
                for (int x1 = b.lo[1]; x1 < b.hi[1]; ++x1)
                    out.push_back((x0 << f->depth) | x1);
        }
        return out;
    }
};

void check_input(const SymbolSpectrum& b, const AtomField& f) {
    if (!(b.grid == f.grid)) fail("GridMismatch", "symbol and input live on different grids");
    if (f.kind != ValueKind::vector || f.d != b.d)
        fail("GridMismatch", "paraproducts act on vector fields matching the symbol dimension");
}

// <f>_R over a rectangle
Vec box_average_vec(const AtomField& f, const Box& r) {
    Vec acc(f.comp(), cx{});
    std::int64_t count = 0;
    for_each_atom(f.grid, r, [&](std::int64_t a) {
        const auto v = f.at(a);
        for (int c = 0; c < f.comp(); ++c) acc[c] += v[c];
        ++count;
    });
    for (cx& z : acc) z /= static_cast<double>(count);
    return acc;
}

// <f_{R2}^{e2,2}>_{R1} and friends
Vec slice_average(const AtomField& f, int slot, const Cube& coefficient_cube, Sig eps,
                  const Cube& avg_cube) {
    const AtomField sl = slice_coeffs(f, slot, coefficient_cube, eps);
    return box_average_vec(sl, Box{avg_cube, std::nullopt});
}

// full bi-parameter coefficient f_R^{(e1,e2)}
Vec full_coeff(const Spectrum& s, const Cube& r1, Sig e1, const Cube& r2, Sig e2) {
    const auto& sig1 = s.sigs1;
    const auto& sig2 = s.sigs2;
    size_t i1 = sig1.size(), i2 = sig2.size();
    for (size_t i = 0; i < sig1.size(); ++i)
        if (sig1[i] == e1) i1 = i;
    for (size_t i = 0; i < sig2.size(); ++i)
        if (sig2[i] == e2) i2 = i;
    const auto c = s.cc2(s.idx1.index(r1), i1, s.idx2.index(r2), i2);
    return Vec(c.begin(), c.end());
}

} // namespace

ParaResult paraproduct(ParaKind kind, const SymbolSpectrum& b, const AtomField& f) {
    check_input(b, f);
    const Grid& g = b.grid;
    const int d = b.d;
    const std::int64_t a2n = g.atoms2();
    ParaResult out;
    out.field = make_field(g, ValueKind::vector, d);

    const std::vector<Sig> sigs1 = signatures(g.f1.dim);
    const std::vector<Sig> sigs2 = signatures(g.f2.dim);
    const bool gamma_needs1 = (kind == ParaKind::gamma || kind == ParaKind::g01 ||
                               kind == ParaKind::g01s);
    const bool gamma_needs2 = (kind == ParaKind::gamma || kind == ParaKind::g10 ||
                               kind == ParaKind::g10s);
    if ((gamma_needs1 && sigs1.size() < 2) || (gamma_needs2 && sigs2.size() < 2)) {
        out.empty_signature_warning = true;
        return out;
    }

    FactorData fd1{&g.f1}, fd2{&g.f2};
    std::optional<Spectrum> fs;  // computed only for the kinds that use it
    auto need_spectrum = [&]() -> const Spectrum& {
        if (!fs) fs = haar_coeffs(f);
        return *fs;
    };

    auto deposit_tensor = [&](const Cube& r1, Sig e1, const Cube& r2, Sig e2, const Vec& val) {
        // add val * h_{R1}^{e1}(x1) h_{R2}^{e2}(x2)
        for (int x1 : fd1.atoms_of_cube(r1)) {
            const double h1 = haar_value(g.f1, r1, e1, x1);
            for (int x2 : fd2.atoms_of_cube(r2)) {
                const double h = h1 * haar_value(g.f2, r2, e2, x2);
                cx* dst = out.field.data.data() + (static_cast<std::int64_t>(x1) * a2n + x2) * d;
                for (int c = 0; c < d; ++c) dst[c] += h * val[c];
            }
        }
    };
    auto deposit_ind1_haar2 = [&](const Cube& r1, const Cube& r2, Sig e2, const Vec& val) {
        // add val * 1_{R1}(x1)/|R1| * h_{R2}^{e2}(x2)
        const double inv = 1.0 / cube_measure(g.f1, r1);
        for (int x1 : fd1.atoms_of_cube(r1))
            for (int x2 : fd2.atoms_of_cube(r2)) {
                const double h = inv * haar_value(g.f2, r2, e2, x2);
                cx* dst = out.field.data.data() + (static_cast<std::int64_t>(x1) * a2n + x2) * d;
                for (int c = 0; c < d; ++c) dst[c] += h * val[c];
            }
    };
    auto deposit_haar1_ind2 = [&](const Cube& r1, Sig e1, const Cube& r2, const Vec& val) {
        const double inv = 1.0 / cube_measure(g.f2, r2);
        for (int x1 : fd1.atoms_of_cube(r1)) {
            const double h1 = haar_value(g.f1, r1, e1, x1) * inv;
            for (int x2 : fd2.atoms_of_cube(r2)) {
                cx* dst = out.field.data.data() + (static_cast<std::int64_t>(x1) * a2n + x2) * d;
                for (int c = 0; c < d; ++c) dst[c] += h1 * val[c];
            }
        }
    };
    auto deposit_ind = [&](const Cube& r1, const Cube& r2, const Vec& val) {
        const double inv = 1.0 / (cube_measure(g.f1, r1) * cube_measure(g.f2, r2));
        for (int x1 : fd1.atoms_of_cube(r1))
            for (int x2 : fd2.atoms_of_cube(r2)) {
                cx* dst = out.field.data.data() + (static_cast<std::int64_t>(x1) * a2n + x2) * d;
                for (int c = 0; c < d; ++c) dst[c] += inv * val[c];
            }
    };

    for (const SymbolSpectrum::Entry& e : b.entries) {
        const Box rect{e.r1, e.r2};
        const double rm = box_measure(g, rect);
        switch (kind) {
            case ParaKind::p11: {
                const Vec v = e.value.apply(box_average_vec(f, rect));
                deposit_tensor(e.r1, e.e1, e.r2, e.e2, v);
                break;
            }
            case ParaKind::p00: {
                const Vec coef = full_coeff(need_spectrum(), e.r1, e.e1, e.r2, e.e2);
                Vec v = e.value.apply(coef);
                for (cx& z : v) z /= rm;
                for_each_atom(g, rect, [&](std::int64_t a) {
                    cx* dst = out.field.data.data() + a * d;
                    for (int c = 0; c < d; ++c) dst[c] += v[c];
                });
                break;
            }
            case ParaKind::gamma: {
                const double inv = 1.0 / std::sqrt(rm);
                for (Sig d1 : sigs1) {
                    if (d1 == e.e1) continue;
                    for (Sig d2 : sigs2) {
                        if (d2 == e.e2) continue;
                        const Vec coef = full_coeff(need_spectrum(), e.r1, d1, e.r2, d2);
                        Vec v = e.value.apply(coef);
                        for (cx& z : v) z *= inv;
                        deposit_tensor(e.r1, xor1(e.e1, d1, g.f1.dim), e.r2,
                                       xor1(e.e2, d2, g.f2.dim), v);
                    }
                }
                break;
            }
            case ParaKind::p10: {
                const Vec v = e.value.apply(slice_average(f, 2, e.r2, e.e2, e.r1));
                deposit_haar1_ind2(e.r1, e.e1, e.r2, v);
                break;
            }
            case ParaKind::p01: {
                const Vec v = e.value.apply(slice_average(f, 1, e.r1, e.e1, e.r2));
                deposit_ind1_haar2(e.r1, e.r2, e.e2, v);
                break;
            }
            case ParaKind::g10: {
                const double inv = 1.0 / std::sqrt(cube_measure(g.f2, e.r2));
                for (Sig d2 : sigs2) {
                    if (d2 == e.e2) continue;
                    Vec v = e.value.apply(slice_average(f, 2, e.r2, d2, e.r1));
                    for (cx& z : v) z *= inv;
                    deposit_tensor(e.r1, e.e1, e.r2, xor1(e.e2, d2, g.f2.dim), v);
                }
                break;
            }
            case ParaKind::g10s: {
                const double inv = 1.0 / std::sqrt(cube_measure(g.f2, e.r2));
                for (Sig d2 : sigs2) {
                    if (d2 == e.e2) continue;
                    const Vec coef = full_coeff(need_spectrum(), e.r1, e.e1, e.r2, d2);
                    Vec v = e.value.apply(coef);
                    for (cx& z : v) z *= inv;
                    deposit_ind1_haar2(e.r1, e.r2, xor1(e.e2, d2, g.f2.dim), v);
                }
                break;
            }
            case ParaKind::g01: {
                const double inv = 1.0 / std::sqrt(cube_measure(g.f1, e.r1));
                for (Sig d1 : sigs1) {
                    if (d1 == e.e1) continue;
                    Vec v = e.value.apply(slice_average(f, 1, e.r1, d1, e.r2));
                    for (cx& z : v) z *= inv;
                    deposit_tensor(e.r1, xor1(e.e1, d1, g.f1.dim), e.r2, e.e2, v);
                }
                break;
            }
            case ParaKind::g01s: {
                const double inv = 1.0 / std::sqrt(cube_measure(g.f1, e.r1));
                for (Sig d1 : sigs1) {
                    if (d1 == e.e1) continue;
                    const Vec coef = full_coeff(need_spectrum(), e.r1, d1, e.r2, e.e2);
                    Vec v = e.value.apply(coef);
                    for (cx& z : v) z *= inv;
                    deposit_haar1_ind2(e.r1, xor1(e.e1, d1, g.f1.dim), e.r2, v);
                }
                break;
            }
        }
    }
    return out;
}

ParaResult symmetrized_paraproduct(const SymbolSpectrum& b, const AtomField& f) {
    ParaResult out = paraproduct(ParaKind::p11, b, f);
    for (ParaKind k : {ParaKind::p10, ParaKind::p01, ParaKind::p00}) {
        ParaResult part = paraproduct(k, b, f);
        for (size_t i = 0; i < out.field.data.size(); ++i)
            out.field.data[i] += part.field.data[i];
        out.empty_signature_warning = out.empty_signature_warning || part.empty_signature_warning;
    }
    return out;
}

namespace {

AtomField pointwise_multiply(const AtomField& b, const AtomField& f) {
    const int d = f.d;
    AtomField out = make_field(f.grid, ValueKind::vector, d);
    for (std::int64_t a = 0; a < f.grid.atom_count(); ++a) {
        const auto bm = b.at(a);
        const auto fv = f.at(a);
        auto dst = out.at(a);
        for (int i = 0; i < d; ++i) {
            cx s = 0.0;
            for (int j = 0; j < d; ++j) s += bm[i * d + j] * fv[j];
            dst[i] = s;
        }
    }
    return out;
}

AtomField subtract(const AtomField& a, const AtomField& b) {
    AtomField out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

} // namespace

BicommutatorResult bicommutator(const MultiplierSigns& sigma1, const MultiplierSigns& sigma2,
                                const AtomField& b, const AtomField& f) {
    if (!(b.grid == f.grid)) fail("GridMismatch", "symbol and input live on different grids");
    if (b.kind != ValueKind::matrix || f.kind != ValueKind::vector || b.d != f.d)
        fail("InvalidModel", "the bicommutator takes a matrix field and a vector field");

    const SymbolSpectrum sym = symbol_of(b);
    auto t1 = [&](const AtomField& x) { return haar_multiplier(sigma1, x, 1); };
    auto t2 = [&](const AtomField& x) { return haar_multiplier(sigma2, x, 2); };

    auto double_comm = [&](auto&& op) {
        // T1 T2 op f - T1 op T2 f - T2 op T1 f + op T2 T1 f
        AtomField a = t1(t2(op(f)));
        AtomField bb = t1(op(t2(f)));
        AtomField c = t2(op(t1(f)));
        AtomField dd = op(t2(t1(f)));
        AtomField out = subtract(subtract(a, bb), subtract(c, dd));
        return out;
    };

    BicommutatorResult res;
    res.multiplication_side = double_comm([&](const AtomField& x) { return pointwise_multiply(b, x); });
    res.paraproduct_side =
        double_comm([&](const AtomField& x) { return symmetrized_paraproduct(sym, x).field; });
    return res;
}

} // namespace mwlab
