#include "mwlab/operators.hpp"

#include <algorithm>
#include <cmath>

#include "mwlab/kernels.hpp"
#include "mwlab/rng.hpp"

namespace mwlab {

namespace {

// factor boxes of the requested family, each with its atom list
struct FamilyBoxes {
    std::vector<FactorBox> boxes;
    std::vector<std::vector<int>> atoms;
};

std::vector<int> factor_box_atoms(const Factor& f, const FactorBox& fb) {
    std::vector<int> out;
    if (f.dim == 1) {
        for (int x = fb.lo[0]; x < fb.hi[0]; ++x) out.push_back(x);
    } else {
        for (int x0 = fb.lo[0]; x0 < fb.hi[0]; ++x0)
            for (int x1 = fb.lo[1]; x1 < fb.hi[1]; ++x1) out.push_back((x0 << f.depth) | x1);
    }
    return out;
}

FamilyBoxes family_boxes(const Factor& f, CubeFamily family) {
    FamilyBoxes out;
    if (family == CubeFamily::dyadic) {
        for (const Cube& q : dyadic_cubes(f)) out.boxes.push_back(cube_box(f, q));
    } else {
        out.boxes = aligned_cubes(f);
    }
    out.atoms.reserve(out.boxes.size());
    for (const FactorBox& b : out.boxes) out.atoms.push_back(factor_box_atoms(f, b));
    return out;
}

std::vector<Matrix> atom_powers(const MatrixWeightField& w, double s) {
    std::vector<Matrix> out;
    out.reserve(w.atoms.size());
    for (const PDMatrix& m : w.atoms) out.push_back(m.power(s).matrix());
    return out;
}

void check_shared_grid(const MatrixWeightField& w, const AtomField& f) {
    if (!(w.grid() == f.grid)) fail("GridMismatch", "weight and input live on different grids");
    if (f.kind == ValueKind::vector && f.d != w.dim())
        fail("GridMismatch", "vector dimension does not match the weight");
}

// all rectangles of a (possibly bi-parameter) grid in the given family,
// as atom lists plus the Box when the family is dyadic
struct GridBoxes {
    std::vector<std::vector<std::int64_t>> atoms;
    std::vector<Box> dyadic_boxes;  // parallel to atoms when family == dyadic
};

GridBoxes grid_boxes(const Grid& g, CubeFamily family) {
    GridBoxes out;
    if (!g.bi) {
        if (family == CubeFamily::dyadic) {
            for (const Cube& q : dyadic_cubes(g.f1)) {
                out.dyadic_boxes.push_back(Box{q, std::nullopt});
                std::vector<std::int64_t> atoms;
                for (int a : factor_box_atoms(g.f1, cube_box(g.f1, q))) atoms.push_back(a);
                out.atoms.push_back(std::move(atoms));
            }
        } else {
            for (const FactorBox& fb : aligned_cubes(g.f1)) {
                std::vector<std::int64_t> atoms;
                for (int a : factor_box_atoms(g.f1, fb)) atoms.push_back(a);
                out.atoms.push_back(std::move(atoms));
            }
        }
        return out;
    }
    const std::int64_t a2n = g.atoms2();
    auto push = [&](const std::vector<int>& a1, const std::vector<int>& a2) {
        std::vector<std::int64_t> atoms;
        atoms.reserve(a1.size() * a2.size());
        for (int x1 : a1)
            for (int x2 : a2) atoms.push_back(static_cast<std::int64_t>(x1) * a2n + x2);
        out.atoms.push_back(std::move(atoms));
    };
    if (family == CubeFamily::dyadic) {
        for (const Cube& q1 : dyadic_cubes(g.f1)) {
            const std::vector<int> a1 = factor_box_atoms(g.f1, cube_box(g.f1, q1));
            for (const Cube& q2 : dyadic_cubes(g.f2)) {
                out.dyadic_boxes.push_back(Box{q1, q2});
                push(a1, factor_box_atoms(g.f2, cube_box(g.f2, q2)));
            }
        }
    } else {
        for (const FactorBox& b1 : aligned_cubes(g.f1)) {
            const std::vector<int> a1 = factor_box_atoms(g.f1, b1);
            for (const FactorBox& b2 : aligned_cubes(g.f2))
                push(a1, factor_box_atoms(g.f2, b2));
        }
    }
    return out;
}

} // namespace

ScalarField maximal_pointwise(const MatrixWeightField& w, const AtomField& f, CubeFamily family) {
    check_shared_grid(w, f);
    const Grid& g = w.grid();
    const GridBoxes boxes = grid_boxes(g, family);
    const std::int64_t n = g.atom_count();
    const int d = w.dim();
    const std::vector<Matrix> roots = atom_powers(w, 1.0 / w.p);

    ScalarField out{g, std::vector<double>(n, 0.0)};
    std::vector<double> norms2(n), norms(n);
    for (std::int64_t x = 0; x < n; ++x) {
        kernels::cmatvec_norms2(roots[x].data(), d, f.data.data(), n, norms2.data());
        for (std::int64_t y = 0; y < n; ++y) norms[y] = std::sqrt(norms2[y]);
        double best = 0.0;
        for (size_t b = 0; b < boxes.atoms.size(); ++b) {
            const auto& atoms = boxes.atoms[b];
            bool owns = false;
            double sum = 0.0;
            for (std::int64_t y : atoms) {
                sum += norms[y];
                owns = owns || (y == x);
            }
            if (owns) best = std::max(best, sum / static_cast<double>(atoms.size()));
        }
        out.v[x] = best;
    }
    return out;
}

ScalarField maximal_reducing(const MatrixWeightField& w, const AtomField& f, CubeFamily family,
                             ReducingCache* cache) {
    check_shared_grid(w, f);
    if (family != CubeFamily::dyadic)
        fail("InvalidModel", "reducing operators are grid-aligned dyadic only");
    const Grid& g = w.grid();
    const GridBoxes boxes = grid_boxes(g, family);
    const std::int64_t n = g.atom_count();
    const int d = w.dim();
    ReducingCache local(w, w.p);
    ReducingCache& rc = cache ? *cache : local;

    ScalarField out{g, std::vector<double>(n, 0.0)};
    std::vector<double> norms2(n);
    for (size_t b = 0; b < boxes.atoms.size(); ++b) {
        const ReducingOperator& op = rc.at(boxes.dyadic_boxes[b]);
        const auto& atoms = boxes.atoms[b];
        std::vector<cx> vals(atoms.size() * d);
        for (size_t i = 0; i < atoms.size(); ++i)
            std::copy_n(f.at(atoms[i]).begin(), d, vals.begin() + i * d);
        kernels::cmatvec_norms2(op.matrix.matrix().data(), d, vals.data(), atoms.size(),
                                norms2.data());
        double sum = 0.0;
        for (size_t i = 0; i < atoms.size(); ++i) sum += std::sqrt(norms2[i]);
        const double avg = sum / static_cast<double>(atoms.size());
        for (std::int64_t y : atoms) out.v[y] = std::max(out.v[y], avg);
    }
    return out;
}

ScalarField maximal_strong_dyadic(const MatrixWeightField& w, const AtomField& f) {
    if (!w.grid().bi) fail("GridMismatch", "the strong maximal needs a product grid");
    return maximal_pointwise(w, f, CubeFamily::dyadic);
}

ScalarField maximal_unweighted(const ScalarField& f, CubeFamily family) {
    const GridBoxes boxes = grid_boxes(f.grid, family);
    ScalarField out{f.grid, std::vector<double>(f.v.size(), 0.0)};
    for (const auto& atoms : boxes.atoms) {
        double sum = 0.0;
        for (std::int64_t y : atoms) sum += f.v[y];
        const double avg = sum / static_cast<double>(atoms.size());
        for (std::int64_t y : atoms) out.v[y] = std::max(out.v[y], avg);
    }
    return out;
}

namespace {

// norm of the averaging zonotope with members vals[i] (already divided by the
// box size), certified from candidate directions: coordinates, member
// directions and a fixed quasi-uniform batch
double zonotope_norm(std::span<const Vec> members, int d) {
    if (members.empty()) return 0.0;
    if (d == 1) {
        double s = 0.0;
        for (const Vec& m : members) s += std::abs(m[0]);
        return s;
    }
    static thread_local std::vector<Vec> base;
    static thread_local int base_d = -1;
    if (base_d != d) {
        base.clear();
        base_d = d;
        Rng rng(0x7a6f6eull + d);
        for (int i = 0; i < 48; ++i) {
            Vec u(d);
            double n2 = 0.0;
            for (auto& z : u) {
                z = {rng.normal(), rng.normal()};
                n2 += std::norm(z);
            }
            for (auto& z : u) z /= std::sqrt(n2);
            base.push_back(std::move(u));
        }
    }
    double best = 0.0;
    auto eval = [&](std::span<const cx> u) {
        // attaining member sum w = sum_i phase_i * v_i; |w| >= h(u)
        Vec wsum(d, cx{});
        for (const Vec& v : members) {
            const cx s = vec_dot(v, u);
            const double a = std::abs(s);
            if (a < 1e-300) continue;
            const cx ph = std::conj(s) / a;
            for (int k = 0; k < d; ++k) wsum[k] += ph * v[k];
        }
        best = std::max(best, vec_norm(wsum));
    };
    for (int k = 0; k < d; ++k) {
        Vec e(d, cx{});
        e[k] = 1.0;
        eval(e);
    }
    for (const Vec& v : members) {
        const double nv = vec_norm(v);
        if (nv == 0.0) continue;
        Vec u = v;
        for (auto& z : u) z /= nv;
        eval(u);
    }
    for (const Vec& u : base) eval(u);
    return best;
}

} // namespace

ScalarField maximal_convex(const MatrixWeightField& w, const AtomField& f, CubeFamily family) {
    check_shared_grid(w, f);
    const Grid& g = w.grid();
    const GridBoxes boxes = grid_boxes(g, family);
    const std::int64_t n = g.atom_count();
    const int d = w.dim();
    const std::vector<Matrix> roots = atom_powers(w, 1.0 / w.p);
    const double am = g.atom_measure();

    ScalarField out{g, std::vector<double>(n, 0.0)};
    for (std::int64_t x = 0; x < n; ++x) {
        // members A f(y) per atom; scaled per box below
        std::vector<Vec> mapped(n);
        for (std::int64_t y = 0; y < n; ++y) mapped[y] = roots[x].apply(f.at(y));
        double best = 0.0;
        for (size_t b = 0; b < boxes.atoms.size(); ++b) {
            const auto& atoms = boxes.atoms[b];
            bool owns = false;
            for (std::int64_t y : atoms) owns = owns || (y == x);
            if (!owns) continue;
            const double scale = am / (am * static_cast<double>(atoms.size()));
            std::vector<Vec> members;
            members.reserve(atoms.size());
            for (std::int64_t y : atoms) {
                Vec v = mapped[y];
                for (auto& z : v) z *= scale;
                members.push_back(std::move(v));
            }
            best = std::max(best, zonotope_norm(members, d));
        }
        out.v[x] = best;
    }
    return out;
}

ScalarField maximal_convex(const MatrixWeightField& w, const BodyField& f, CubeFamily family) {
    if (!(w.grid() == f.grid)) fail("GridMismatch", "weight and bodies live on different grids");
    const Grid& g = w.grid();
    const GridBoxes boxes = grid_boxes(g, family);
    const std::int64_t n = g.atom_count();
    const int d = w.dim();
    const std::vector<Matrix> roots = atom_powers(w, 1.0 / w.p);

    ScalarField out{g, std::vector<double>(n, 0.0)};
    Rng rng(0x626f6479ull);
    std::vector<Vec> base;
    for (int i = 0; i < 48 + 4 * d; ++i) {
        Vec u(d);
        double n2 = 0.0;
        for (auto& z : u) {
            z = {rng.normal(), rng.normal()};
            n2 += std::norm(z);
        }
        for (auto& z : u) z /= std::sqrt(n2);
        base.push_back(std::move(u));
    }
    for (int k = 0; k < d; ++k) {
        Vec e(d, cx{});
        e[k] = 1.0;
        base.push_back(std::move(e));
    }
    for (std::int64_t x = 0; x < n; ++x) {
        const Matrix& a = roots[x];
        double best = 0.0;
        for (size_t b = 0; b < boxes.atoms.size(); ++b) {
            const auto& atoms = boxes.atoms[b];
            bool owns = false;
            for (std::int64_t y : atoms) owns = owns || (y == x);
            if (!owns) continue;
            // h_{A_Q(A F)}(u) = avg_y h_{F(y)}(A u); attained members certify
            double boxbest = 0.0;
            for (const Vec& u : base) {
                const Vec au = a.apply(u);
                Vec wsum(d, cx{});
                for (std::int64_t y : atoms) {
                    Vec v = f.bodies[y].support_point(au);
                    v = a.apply(v);
                    const cx s = vec_dot(v, u);
                    const double mag = std::abs(s);
                    const cx ph = (mag < 1e-300) ? cx(1, 0) : std::conj(s) / mag;
                    for (int k = 0; k < d; ++k) wsum[k] += ph * v[k];
                }
                for (auto& z : wsum) z /= static_cast<double>(atoms.size());
                boxbest = std::max(boxbest, vec_norm(wsum));
            }
            best = std::max(best, boxbest);
        }
        out.v[x] = best;
    }
    return out;
}

ScalarField square_function(const MatrixWeightField& v, const AtomField& g, SquareVariant variant,
                            ReducingCache* cache) {
    check_shared_grid(v, g);
    const Grid& gr = v.grid();
    if (!gr.bi) fail("GridMismatch", "square functions use the bi-parameter module path");
    const Spectrum s = haar_coeffs(g);
    const std::int64_t n = gr.atom_count();
    const int d = v.dim();
    ScalarField out{gr, std::vector<double>(n, 0.0)};

    std::vector<Matrix> invroots;
    if (variant == SquareVariant::pointwise) invroots = atom_powers(v, -1.0 / v.p);
    ReducingCache local(v, v.p);
    ReducingCache& rc = cache ? *cache : local;

    auto add_terms = [&](const Box& rect, std::span<const cx> coef) {
        bool nonzero = false;
        for (const cx& z : coef)
            if (z != cx{}) nonzero = true;
        if (!nonzero) return;
        const double measure = box_measure(gr, rect);
        if (variant == SquareVariant::reducing) {
            const Vec val = rc.at(rect).matrix.apply(coef);
            const double t = std::pow(vec_norm(val), 2) / measure;
            for_each_atom(gr, rect, [&](std::int64_t a) { out.v[a] += t; });
        } else {
            for_each_atom(gr, rect, [&](std::int64_t a) {
                const Vec val = invroots[a].apply(coef);
                out.v[a] += std::pow(vec_norm(val), 2) / measure;
            });
        }
    };

    for (std::int64_t q1 = 0; q1 < s.idx1.count(); ++q1)
        for (size_t s1 = 0; s1 < s.sigs1.size(); ++s1)
            for (std::int64_t q2 = 0; q2 < s.idx2.count(); ++q2)
                for (size_t s2 = 0; s2 < s.sigs2.size(); ++s2)
                    add_terms(Box{s.idx1.cube(q1), s.idx2.cube(q2)}, s.cc2(q1, s1, q2, s2));
    // degenerate factors reduce to the one-parameter square function
    if (gr.f2.depth == 0) {
        for (std::int64_t q1 = 0; q1 < s.idx1.count(); ++q1)
            for (size_t s1 = 0; s1 < s.sigs1.size(); ++s1)
                add_terms(Box{s.idx1.cube(q1), Cube{0, {0, 0}}},
                          {s.cm.data() + (q1 * s.sigs1.size() + s1) * s.comp(),
                           static_cast<size_t>(s.comp())});
    }
    if (gr.f1.depth == 0) {
        for (std::int64_t q2 = 0; q2 < s.idx2.count(); ++q2)
            for (size_t s2 = 0; s2 < s.sigs2.size(); ++s2)
                add_terms(Box{Cube{0, {0, 0}}, s.idx2.cube(q2)},
                          {s.mc.data() + (q2 * s.sigs2.size() + s2) * s.comp(),
                           static_cast<size_t>(s.comp())});
    }
    for (double& x : out.v) x = std::sqrt(x);
    return out;
}

ScalarField mixed_ms(const MatrixWeightField& u, const AtomField& f, ReducingCache* cache) {
    check_shared_grid(u, f);
    const Grid& g = u.grid();
    if (!g.bi) fail("GridMismatch", "the mixed operator needs a product grid");
    const int comp = f.comp();
    const std::int64_t a1n = g.f1.atom_count();
    const std::int64_t a2n = g.atoms2();
    ReducingCache local(u, u.p);
    ReducingCache& rc = cache ? *cache : local;

    ScalarField out{g, std::vector<double>(g.atom_count(), 0.0)};
    const CubeIndexer idx2(g.f2, std::max(g.f2.depth - 1, -1));
    const std::vector<Cube> cubes1 = dyadic_cubes(g.f1);

    for (std::int64_t q2 = 0; q2 < idx2.count(); ++q2) {
        const Cube r2 = idx2.cube(q2);
        for (Sig e2 : signatures(g.f2.dim)) {
            const AtomField slice = slice_coeffs(f, 2, r2, e2);
            // inner sup over R1 owning x1 of |U_{R1 x R2} <slice>_{R1}|
            std::vector<double> inner(a1n, 0.0);
            for (const Cube& r1 : cubes1) {
                const std::vector<int> atoms1 =
                    factor_box_atoms(g.f1, cube_box(g.f1, r1));
                Vec avg(comp, cx{});
                for (int x1 : atoms1)
                    for (int c = 0; c < comp; ++c) avg[c] += slice.at(x1)[c];
                for (cx& z : avg) z /= static_cast<double>(atoms1.size());
                const ReducingOperator& op = rc.at(Box{r1, r2});
                double val;
                if (f.kind == ValueKind::vector) {
                    val = vec_norm(op.matrix.apply(avg));
                } else {
                    val = std::abs(avg[0]) * op.matrix.op_norm();
                }
                for (int x1 : atoms1) inner[x1] = std::max(inner[x1], val);
            }
            const double measure2 = cube_measure(g.f2, r2);
            const std::vector<int> atoms2 = factor_box_atoms(g.f2, cube_box(g.f2, r2));
            for (std::int64_t x1 = 0; x1 < a1n; ++x1) {
                if (inner[x1] == 0.0) continue;
                const double t = inner[x1] * inner[x1] / measure2;
                for (int x2 : atoms2) out.v[x1 * a2n + x2] += t;
            }
        }
    }
    for (double& x : out.v) x = std::sqrt(x);
    return out;
}

ScalarField omega_majorant(const MatrixWeightField& v, const AtomSet& omega,
                           ReducingCache* cache) {
    const Grid& g = v.grid();
    if (omega.size() != static_cast<size_t>(g.atom_count()))
        fail("GridMismatch", "atom set size does not match the grid");
    bool any = false;
    for (std::uint8_t b : omega) any = any || b;
    if (!any) fail("EmptyOmega", "the majorant needs a nonempty atom set");

    const GridBoxes boxes = grid_boxes(g, CubeFamily::dyadic);
    ReducingCache local(v, v.p);
    ReducingCache& rc = cache ? *cache : local;
    const std::vector<Matrix> invroots = atom_powers(v, -1.0 / v.p);

    ScalarField out{g, std::vector<double>(g.atom_count(), 0.0)};
    for (size_t b = 0; b < boxes.atoms.size(); ++b) {
        const auto& atoms = boxes.atoms[b];
        bool inside = true;
        for (std::int64_t a : atoms) inside = inside && omega[a];
        if (!inside) continue;
        const ReducingOperator& op = rc.at(boxes.dyadic_boxes[b]);
        for (std::int64_t a : atoms) {
            const double val = op_norm(invroots[a] * op.matrix.matrix());
            out.v[a] = std::max(out.v[a], val);
        }
    }
    return out;
}

void MultiplierSigns::set(std::int64_t cube_index, int v) {
    if (v < -1 || v > 1) fail("InvalidModel", "multiplier signs live in {-1,0,1}");
    values[cube_index] = v;
}

AtomField haar_multiplier(const MultiplierSigns& sigma, const AtomField& f, int slot) {
    const Grid& g = f.grid;
    if (slot == 0 && g.bi) fail("GridMismatch", "slot 0 applies to one-parameter fields");
    if (slot != 0 && !g.bi) fail("GridMismatch", "slots 1/2 apply to bi-parameter fields");
    Spectrum s = haar_coeffs(f);
    const int comp = s.comp();
    if (slot == 0) {
        for (std::int64_t q = 0; q < s.idx1.count(); ++q) {
            const double sg = sigma.at(q);
            for (size_t si = 0; si < s.sigs1.size(); ++si)
                for (cx& z : s.cc1(q, si)) z *= sg;
        }
        return haar_reconstruct(s);
    }
    if (slot == 1) {
        for (std::int64_t q1 = 0; q1 < s.idx1.count(); ++q1) {
            const double sg = sigma.at(q1);
            for (size_t s1 = 0; s1 < s.sigs1.size(); ++s1) {
                for (std::int64_t q2 = 0; q2 < s.idx2.count(); ++q2)
                    for (size_t s2 = 0; s2 < s.sigs2.size(); ++s2)
                        for (cx& z : s.cc2(q1, s1, q2, s2)) z *= sg;
                cx* cm = s.cm.data() + (q1 * s.sigs1.size() + s1) * comp;
                for (int c = 0; c < comp; ++c) cm[c] *= sg;
            }
        }
    } else {
        for (std::int64_t q2 = 0; q2 < s.idx2.count(); ++q2) {
            const double sg = sigma.at(q2);
            for (size_t s2 = 0; s2 < s.sigs2.size(); ++s2) {
                for (std::int64_t q1 = 0; q1 < s.idx1.count(); ++q1)
                    for (size_t s1 = 0; s1 < s.sigs1.size(); ++s1)
                        for (cx& z : s.cc2(q1, s1, q2, s2)) z *= sg;
                cx* mc = s.mc.data() + (q2 * s.sigs2.size() + s2) * comp;
                for (int c = 0; c < comp; ++c) mc[c] *= sg;
            }
        }
    }
    return haar_reconstruct(s);
}

double lp_norm(const ScalarField& f, double p) {
    const double am = f.grid.atom_measure();
    std::vector<double> w(f.v.size(), am);
    return std::pow(kernels::weighted_pow_sum(f.v.data(), w.data(), f.v.size(), p), 1.0 / p);
}

ScalarField weighted_modulus(const MatrixWeightField& w, const AtomField& f) {
    check_shared_grid(w, f);
    const std::int64_t n = w.grid().atom_count();
    ScalarField out{w.grid(), std::vector<double>(n, 0.0)};
    for (std::int64_t a = 0; a < n; ++a)
        out.v[a] = vec_norm(w.atoms[a].power(1.0 / w.p).apply(f.at(a)));
    return out;
}

double lp_weighted_norm(const MatrixWeightField& w, const AtomField& f) {
    return lp_norm(weighted_modulus(w, f), w.p);
}

} // namespace mwlab
