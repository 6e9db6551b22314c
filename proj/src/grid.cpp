#include "mwlab/grid.hpp"

#include <cmath>

namespace mwlab {

FactorBox cube_box(const Factor& f, const Cube& q) {
    FactorBox b;
    const int side = 1 << (f.depth - q.level);
    for (int ax = 0; ax < f.dim && ax < 2; ++ax) {
        b.lo[ax] = q.pos[ax] * side;
        b.hi[ax] = b.lo[ax] + side;
    }
    return b;
}

double box_measure(const Factor& f, const FactorBox& b) {
    double m = 1.0;
    for (int ax = 0; ax < f.dim; ++ax)
        m *= static_cast<double>(b.hi[ax] - b.lo[ax]) * std::ldexp(1.0, -f.depth);
    return m;
}

bool box_contains_atom(const Factor& f, const FactorBox& b, int atom) {
    if (f.dim == 1) return atom >= b.lo[0] && atom < b.hi[0];
    const int a1 = atom & (f.axis_atoms() - 1);
    const int a0 = atom >> f.depth;
    return a0 >= b.lo[0] && a0 < b.hi[0] && a1 >= b.lo[1] && a1 < b.hi[1];
}

bool box_contains(const FactorBox& outer, const FactorBox& inner, int dim) {
    for (int ax = 0; ax < dim; ++ax)
        if (inner.lo[ax] < outer.lo[ax] || inner.hi[ax] > outer.hi[ax]) return false;
    return true;
}

double box_measure(const Grid& g, const Box& b) {
    double m = cube_measure(g.f1, b.c1);
    if (g.bi) m *= cube_measure(g.f2, b.c2 ? *b.c2 : Cube{});
    return m;
}

static void check_box(const Grid& g, const Box& b) {
    if (b.c1.level < 0 || b.c1.level > g.f1.depth)
        fail("CubeOutsideGrid", "cube level outside grid");
    for (int ax = 0; ax < g.f1.dim; ++ax)
        if (b.c1.pos[ax] < 0 || b.c1.pos[ax] >= (1 << b.c1.level))
            fail("CubeOutsideGrid", "cube position outside grid");
    if (g.bi) {
        const Cube c2 = b.c2 ? *b.c2 : Cube{};
        if (c2.level < 0 || c2.level > g.f2.depth)
            fail("CubeOutsideGrid", "rectangle level outside grid");
        for (int ax = 0; ax < g.f2.dim; ++ax)
            if (c2.pos[ax] < 0 || c2.pos[ax] >= (1 << c2.level))
                fail("CubeOutsideGrid", "rectangle position outside grid");
    }
}

void for_each_atom(const Grid& g, const Box& b, const std::function<void(std::int64_t)>& fn) {
    check_box(g, b);
    const FactorBox b1 = cube_box(g.f1, b.c1);
    const std::int64_t a2n = g.atoms2();
    auto factor_atoms = [](const Factor& f, const FactorBox& fb, std::vector<int>& out) {
        out.clear();
        if (f.dim == 1) {
            for (int x = fb.lo[0]; x < fb.hi[0]; ++x) out.push_back(x);
        } else {
            for (int x0 = fb.lo[0]; x0 < fb.hi[0]; ++x0)
                for (int x1 = fb.lo[1]; x1 < fb.hi[1]; ++x1)
                    out.push_back((x0 << f.depth) | x1);
        }
    };
    std::vector<int> atoms1;
    factor_atoms(g.f1, b1, atoms1);
    if (!g.bi) {
        for (int a : atoms1) fn(a);
        return;
    }
    std::vector<int> atoms2;
    factor_atoms(g.f2, cube_box(g.f2, b.c2 ? *b.c2 : Cube{}), atoms2);
    for (int a1 : atoms1)
        for (int a2 : atoms2) fn(static_cast<std::int64_t>(a1) * a2n + a2);
}

std::vector<std::int64_t> atoms_of(const Grid& g, const Box& b) {
    std::vector<std::int64_t> out;
    for_each_atom(g, b, [&](std::int64_t a) { out.push_back(a); });
    return out;
}

bool box_contains_atom(const Grid& g, const Box& b, std::int64_t atom) {
    const std::int64_t a2n = g.atoms2();
    const int a1 = static_cast<int>(atom / a2n);
    if (!box_contains_atom(g.f1, cube_box(g.f1, b.c1), a1)) return false;
    if (!g.bi) return true;
    const int a2 = static_cast<int>(atom % a2n);
    return box_contains_atom(g.f2, cube_box(g.f2, b.c2 ? *b.c2 : Cube{}), a2);
}

std::vector<Cube> dyadic_cubes(const Factor& f, int max_level) {
    std::vector<Cube> out;
    for (int l = 0; l <= max_level; ++l) {
        const int side = 1 << l;
        if (f.dim == 1) {
            for (int x = 0; x < side; ++x) out.push_back(Cube{l, {x, 0}});
        } else {
            for (int x0 = 0; x0 < side; ++x0)
                for (int x1 = 0; x1 < side; ++x1) out.push_back(Cube{l, {x0, x1}});
        }
    }
    return out;
}

std::vector<FactorBox> aligned_cubes(const Factor& f) {
    std::vector<FactorBox> out;
    const int a = f.axis_atoms();
    for (int side = 1; side <= a; ++side) {
        if (f.dim == 1) {
            for (int x = 0; x + side <= a; ++x) out.push_back(FactorBox{{x, 0}, {x + side, 1}});
        } else {
            for (int x0 = 0; x0 + side <= a; ++x0)
                for (int x1 = 0; x1 + side <= a; ++x1)
                    out.push_back(FactorBox{{x0, x1}, {x0 + side, x1 + side}});
        }
    }
    return out;
}

CubeIndexer::CubeIndexer(const Factor& f, int max_level) : dim_(f.dim), max_level_(max_level) {
    offsets_.resize(max_level + 2, 0);
    for (int l = 0; l <= max_level; ++l)
        offsets_[l + 1] = offsets_[l] + (std::int64_t{1} << (l * dim_));
    total_ = offsets_[max_level + 1];
}

std::int64_t CubeIndexer::index(const Cube& q) const {
    if (dim_ == 1) return offsets_[q.level] + q.pos[0];
    return offsets_[q.level] + (static_cast<std::int64_t>(q.pos[0]) << q.level) + q.pos[1];
}

Cube CubeIndexer::cube(std::int64_t idx) const {
    int l = 0;
    while (idx >= offsets_[l + 1]) ++l;
    const std::int64_t rel = idx - offsets_[l];
    if (dim_ == 1) return Cube{l, {static_cast<int>(rel), 0}};
    return Cube{l, {static_cast<int>(rel >> l), static_cast<int>(rel & ((1 << l) - 1))}};
}

std::vector<Sig> signatures(int dim) {
    std::vector<Sig> out;
    const int full = (1 << dim) - 1;
    for (int m = 0; m < (1 << dim); ++m)
        if (m != full) out.push_back(static_cast<Sig>(m));
    return out;
}

double haar_value(const Factor& f, const Cube& q, Sig sig, int atom) {
    const double scale = std::ldexp(1.0, q.level * f.dim);  // 1/|Q|
    double v = std::sqrt(scale);
    for (int ax = 0; ax < f.dim; ++ax) {
        const int coord = (f.dim == 1) ? atom : (ax == 0 ? (atom >> f.depth) : (atom & (f.axis_atoms() - 1)));
        const int rel = coord - q.pos[ax] * (1 << (f.depth - q.level));
        if (rel < 0 || rel >= (1 << (f.depth - q.level))) return 0.0;
        if (!(sig & (1 << ax))) {
            const int child = rel >> (f.depth - q.level - 1);
            v *= child ? 1.0 : -1.0;
        }
    }
    return v;
}

AtomField make_field(const Grid& g, ValueKind kind, int d) {
    AtomField f;
    f.grid = g;
    f.kind = kind;
    f.d = d;
    f.data.assign(static_cast<size_t>(g.atom_count()) * f.comp(), cx{});
    return f;
}

} // namespace mwlab
