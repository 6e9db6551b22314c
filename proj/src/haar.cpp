#include "mwlab/haar.hpp"

#include <cmath>

#include "mwlab/kernels.hpp"

namespace mwlab {

namespace {

// Cell-sum pyramid over one factor. data has `inner` contiguous values per
// factor-1 atom slot; sums are mass integrals (value * atom measure).
// Returns sums indexed by the full cell indexer (levels 0..depth).
std::vector<cx> cell_sums(const Factor& f, const cx* data, std::int64_t inner) {
    const CubeIndexer all(f, f.depth);
    std::vector<cx> s(static_cast<size_t>(all.count()) * inner, cx{});
    const double am = f.atom_measure();
    const std::int64_t atoms = f.atom_count();
    const std::int64_t atom_off = all.count() - atoms;
    for (std::int64_t a = 0; a < atoms; ++a)
        for (std::int64_t c = 0; c < inner; ++c)
            s[(atom_off + a) * inner + c] = data[a * inner + c] * am;
    for (int l = f.depth - 1; l >= 0; --l) {
        const std::vector<Cube> cells = dyadic_cubes(f, l);
        for (const Cube& q : cells) {
            if (q.level != l) continue;
            const std::int64_t qi = all.index(q);
            for (int child = 0; child < (1 << f.dim); ++child) {
                Cube ch;
                ch.level = l + 1;
                ch.pos[0] = 2 * q.pos[0] + (f.dim == 1 ? child : (child >> 1));
                ch.pos[1] = (f.dim == 1) ? 0 : 2 * q.pos[1] + (child & 1);
                const std::int64_t ci = all.index(ch);
                for (std::int64_t c = 0; c < inner; ++c) s[qi * inner + c] += s[ci * inner + c];
            }
        }
    }
    return s;
}

// Coefficient of h_Q^sig from the child sums: sum over children of
// sign(child, sig) * S_child / sqrt(|Q|).
void cube_coeff(const Factor& f, const CubeIndexer& all, const std::vector<cx>& sums,
                const Cube& q, Sig sig, std::int64_t inner, cx* out) {
    const double inv_sqrt = std::sqrt(std::ldexp(1.0, q.level * f.dim));
    for (std::int64_t c = 0; c < inner; ++c) out[c] = cx{};
    for (int child = 0; child < (1 << f.dim); ++child) {
        Cube ch;
        ch.level = q.level + 1;
        const int b0 = (f.dim == 1) ? child : (child >> 1);
        const int b1 = child & 1;
        ch.pos[0] = 2 * q.pos[0] + b0;
        ch.pos[1] = (f.dim == 1) ? 0 : 2 * q.pos[1] + b1;
        double sgn = 1.0;
        if (!(sig & 1)) sgn *= b0 ? 1.0 : -1.0;
        if (f.dim == 2 && !(sig & 2)) sgn *= b1 ? 1.0 : -1.0;
        const std::int64_t ci = all.index(ch);
        for (std::int64_t c = 0; c < inner; ++c) out[c] += sgn * sums[ci * inner + c];
    }
    for (std::int64_t c = 0; c < inner; ++c) out[c] *= inv_sqrt;
}

} // namespace

Spectrum haar_coeffs(const AtomField& f, const Grid& g) {
    if (!(f.grid == g)) fail("GridMismatch", "field not defined on the given grid");
    return haar_coeffs(f);
}

Spectrum haar_coeffs(const AtomField& f) {
    const Grid& g = f.grid;
    Spectrum s;
    s.grid = g;
    s.kind = f.kind;
    s.d = f.d;
    s.sigs1 = signatures(g.f1.dim);
    s.idx1 = CubeIndexer(g.f1, std::max(g.f1.depth - 1, -1));
    const int comp = s.comp();

    if (!g.bi) {
        const CubeIndexer all(g.f1, g.f1.depth);
        const std::vector<cx> sums = cell_sums(g.f1, f.data.data(), comp);
        s.mean.assign(comp, cx{});
        for (int c = 0; c < comp; ++c) s.mean[c] = sums[c];  // level-0 root
        s.cc.assign(static_cast<size_t>(s.blocks1()) * comp, cx{});
        for (std::int64_t qi = 0; qi < s.idx1.count(); ++qi) {
            const Cube q = s.idx1.cube(qi);
            for (size_t si = 0; si < s.sigs1.size(); ++si)
                cube_coeff(g.f1, all, sums, q, s.sigs1[si], comp, s.cc1(qi, si).data());
        }
        return s;
    }

    s.sigs2 = signatures(g.f2.dim);
    s.idx2 = CubeIndexer(g.f2, std::max(g.f2.depth - 1, -1));
    const std::int64_t a1 = g.f1.atom_count();
    const std::int64_t a2 = g.f2.atom_count();

    // First transform along factor 2 for every factor-1 atom row.
    const CubeIndexer all2(g.f2, g.f2.depth);
    const std::int64_t nb2 = s.blocks2();
    std::vector<cx> partial(static_cast<size_t>(a1) * nb2 * comp);  // [a1][block2][comp]
    std::vector<cx> row_mean(static_cast<size_t>(a1) * comp);
    for (std::int64_t i = 0; i < a1; ++i) {
        const std::vector<cx> sums = cell_sums(g.f2, f.data.data() + i * a2 * comp, comp);
        for (int c = 0; c < comp; ++c) row_mean[i * comp + c] = sums[c];
        for (std::int64_t qi = 0; qi < s.idx2.count(); ++qi) {
            const Cube q = s.idx2.cube(qi);
            for (size_t si = 0; si < s.sigs2.size(); ++si) {
                const std::int64_t b = qi * static_cast<std::int64_t>(s.sigs2.size()) + si;
                cube_coeff(g.f2, all2, sums, q, s.sigs2[si], comp,
                           partial.data() + (i * nb2 + b) * comp);
            }
        }
    }

    // Then transform along factor 1: the row means give mean and cm blocks,
    // the factor-2 coefficient rows give mc and cc blocks.
    const CubeIndexer all1(g.f1, g.f1.depth);
    {
        const std::vector<cx> sums = cell_sums(g.f1, row_mean.data(), comp);
        s.mean.assign(comp, cx{});
        for (int c = 0; c < comp; ++c) s.mean[c] = sums[c];
        s.cm.assign(static_cast<size_t>(s.blocks1()) * comp, cx{});
        for (std::int64_t qi = 0; qi < s.idx1.count(); ++qi) {
            const Cube q = s.idx1.cube(qi);
            for (size_t si = 0; si < s.sigs1.size(); ++si)
                cube_coeff(g.f1, all1, sums, q, s.sigs1[si], comp,
                           s.cm.data() + (qi * s.sigs1.size() + si) * comp);
        }
    }
    {
        const std::vector<cx> sums = cell_sums(g.f1, partial.data(), nb2 * comp);
        s.mc.assign(static_cast<size_t>(nb2) * comp, cx{});
        for (std::int64_t b = 0; b < nb2; ++b)
            for (int c = 0; c < comp; ++c) s.mc[b * comp + c] = sums[b * comp + c];
        s.cc.assign(static_cast<size_t>(s.blocks1()) * nb2 * comp, cx{});
        std::vector<cx> buf(static_cast<size_t>(nb2) * comp);
        for (std::int64_t qi = 0; qi < s.idx1.count(); ++qi) {
            const Cube q = s.idx1.cube(qi);
            for (size_t si = 0; si < s.sigs1.size(); ++si) {
                cube_coeff(g.f1, all1, sums, q, s.sigs1[si], nb2 * comp, buf.data());
                std::copy(buf.begin(), buf.end(),
                          s.cc.begin() + (qi * s.sigs1.size() + si) * nb2 * comp);
            }
        }
    }
    return s;
}

AtomField haar_reconstruct(const Spectrum& s) {
    const Grid& g = s.grid;
    const int comp = s.comp();
    const std::int64_t expect1 = s.blocks1() * comp;
    if (s.mean.size() != static_cast<size_t>(comp))
        fail("IncompleteSpectrum", "mean block has wrong size");
    if (!g.bi && s.cc.size() != static_cast<size_t>(expect1))
        fail("IncompleteSpectrum", "coefficient block has wrong size");
    if (g.bi && (s.cm.size() != static_cast<size_t>(expect1) ||
                 s.mc.size() != static_cast<size_t>(s.blocks2() * comp) ||
                 s.cc.size() != static_cast<size_t>(s.blocks1() * s.blocks2() * comp)))
        fail("IncompleteSpectrum", "bi-parameter blocks have wrong sizes");

    AtomField f = make_field(g, s.kind, s.d);
    const std::int64_t a2n = g.atoms2();
    for (std::int64_t a = 0; a < g.atom_count(); ++a)
        for (int c = 0; c < comp; ++c) f.data[a * comp + c] = s.mean[c];

    if (!g.bi) {
        for (std::int64_t qi = 0; qi < s.idx1.count(); ++qi) {
            const Cube q = s.idx1.cube(qi);
            for (size_t si = 0; si < s.sigs1.size(); ++si) {
                const auto coef = s.cc1(qi, si);
                for_each_atom(g, Box{q, std::nullopt}, [&](std::int64_t a) {
                    const double h = haar_value(g.f1, q, s.sigs1[si], static_cast<int>(a));
                    for (int c = 0; c < comp; ++c) f.data[a * comp + c] += h * coef[c];
                });
            }
        }
        return f;
    }

    const std::int64_t a1n = g.f1.atom_count();
    // cm block: h_{R1}^{e1}(x1) constant in x2
    for (std::int64_t qi = 0; qi < s.idx1.count(); ++qi) {
        const Cube q = s.idx1.cube(qi);
        for (size_t si = 0; si < s.sigs1.size(); ++si) {
            const cx* coef = s.cm.data() + (qi * s.sigs1.size() + si) * comp;
            for (std::int64_t i = 0; i < a1n; ++i) {
                const double h = haar_value(g.f1, q, s.sigs1[si], static_cast<int>(i));
                if (h == 0.0) continue;
                for (std::int64_t j = 0; j < a2n; ++j)
                    for (int c = 0; c < comp; ++c)
                        f.data[(i * a2n + j) * comp + c] += h * coef[c];
            }
        }
    }
    // mc block
    for (std::int64_t qi = 0; qi < s.idx2.count(); ++qi) {
        const Cube q = s.idx2.cube(qi);
        for (size_t si = 0; si < s.sigs2.size(); ++si) {
            const cx* coef = s.mc.data() + (qi * s.sigs2.size() + si) * comp;
            for (std::int64_t j = 0; j < a2n; ++j) {
                const double h = haar_value(g.f2, q, s.sigs2[si], static_cast<int>(j));
                if (h == 0.0) continue;
                for (std::int64_t i = 0; i < a1n; ++i)
                    for (int c = 0; c < comp; ++c)
                        f.data[(i * a2n + j) * comp + c] += h * coef[c];
            }
        }
    }
    // cc block
    for (std::int64_t q1 = 0; q1 < s.idx1.count(); ++q1) {
        const Cube c1 = s.idx1.cube(q1);
        for (size_t s1 = 0; s1 < s.sigs1.size(); ++s1) {
            std::vector<std::pair<std::int64_t, double>> h1;
            for (std::int64_t i = 0; i < a1n; ++i) {
                const double h = haar_value(g.f1, c1, s.sigs1[s1], static_cast<int>(i));
                if (h != 0.0) h1.emplace_back(i, h);
            }
            for (std::int64_t q2 = 0; q2 < s.idx2.count(); ++q2) {
                const Cube c2 = s.idx2.cube(q2);
                for (size_t s2 = 0; s2 < s.sigs2.size(); ++s2) {
                    const auto coef = s.cc2(q1, s1, q2, s2);
                    bool nonzero = false;
                    for (int c = 0; c < comp; ++c)
                        if (coef[c] != cx{}) { nonzero = true; break; }
                    if (!nonzero) continue;
                    for (std::int64_t j = 0; j < a2n; ++j) {
                        const double h2 = haar_value(g.f2, c2, s.sigs2[s2], static_cast<int>(j));
                        if (h2 == 0.0) continue;
                        for (const auto& [i, hv] : h1) {
                            const double h = hv * h2;
                            for (int c = 0; c < comp; ++c)
                                f.data[(i * a2n + j) * comp + c] += h * coef[c];
                        }
                    }
                }
            }
        }
    }
    return f;
}

AtomField slice_coeffs(const AtomField& f, int slot, const Cube& p, Sig eps) {
    const Grid& g = f.grid;
    if (!g.bi) fail("GridMismatch", "slice coefficients need a bi-parameter grid");
    const Factor& fac = (slot == 1) ? g.f1 : g.f2;
    if (p.level < 0 || p.level >= fac.depth) fail("GridMismatch", "cube outside the factor grid");
    for (int ax = 0; ax < fac.dim; ++ax)
        if (p.pos[ax] < 0 || p.pos[ax] >= (1 << p.level))
            fail("GridMismatch", "cube outside the factor grid");
    const Factor& other = (slot == 1) ? g.f2 : g.f1;
    AtomField out = make_field(one_parameter(other.dim, other.depth), f.kind, f.d);
    const int comp = f.comp();
    const std::int64_t a2n = g.f2.atom_count();
    const double am = fac.atom_measure();
    const std::int64_t in_fac = fac.atom_count();
    for (std::int64_t ai = 0; ai < in_fac; ++ai) {
        const double h = haar_value(fac, p, eps, static_cast<int>(ai)) * am;
        if (h == 0.0) continue;
        const std::int64_t outn = other.atom_count();
        for (std::int64_t b = 0; b < outn; ++b) {
            const std::int64_t atom = (slot == 1) ? (ai * a2n + b) : (b * a2n + ai);
            for (int c = 0; c < comp; ++c) out.data[b * comp + c] += h * f.data[atom * comp + c];
        }
    }
    return out;
}

double field_norm2(const AtomField& f) {
    const double am = f.grid.atom_measure();
    double s = 0.0;
    const double* raw = reinterpret_cast<const double*>(f.data.data());
    s = kernels::sum_squares(raw, f.data.size() * 2);
    return s * am;
}

} // namespace mwlab
