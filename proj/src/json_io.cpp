#include "mwlab/json_io.hpp"

#include <fstream>

namespace mwlab {

namespace {

json cx_to_json(const cx& z) { return json::array({z.real(), z.imag()}); }

cx cx_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) fail("InvalidModel", "complex values are [re, im] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

json matrix_to_json(const Matrix& m) {
    json out = json::array();
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) out.push_back(cx_to_json(m.at(i, j)));
    return out;
}

Matrix matrix_from_json(const json& j, int d) {
    if (!j.is_array() || j.size() != static_cast<size_t>(d) * d)
        fail("InvalidModel", "matrix payload must hold d*d [re, im] pairs");
    Matrix m(d);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) m.at(i, k) = cx_from_json(j[i * d + k]);
    return m;
}

} // namespace

json grid_to_json(const Grid& g) {
    json j{{"n", g.f1.dim}, {"depth", g.f1.depth}};
    if (g.bi) {
        j["m"] = g.f2.dim;
        j["depth2"] = g.f2.depth;
    }
    return j;
}

Grid grid_from_json(const json& j) {
    if (!j.contains("n") || !j.contains("depth"))
        fail("InvalidModel", "grid JSON needs n and depth");
    const int n = j["n"].get<int>();
    const int depth = j["depth"].get<int>();
    if (n < 1 || n > 2) fail("InvalidModel", "factor dimension must be 1 or 2");
    if (depth < 1 || depth > 12) fail("InvalidModel", "depth must lie in 1..12");
    if (j.contains("m") || j.contains("depth2")) {
        if (!j.contains("m") || !j.contains("depth2"))
            fail("InvalidModel", "bi-parameter grids need both m and depth2");
        const int m = j["m"].get<int>();
        const int depth2 = j["depth2"].get<int>();
        if (m < 1 || m > 2) fail("InvalidModel", "factor dimension must be 1 or 2");
        if (depth2 < 0 || depth2 > 12) fail("InvalidModel", "depth2 must lie in 0..12");
        return biparameter(n, depth, m, depth2);
    }
    return one_parameter(n, depth);
}

json field_to_json(const AtomField& f) {
    json atoms = json::array();
    const int comp = f.comp();
    for (std::int64_t a = 0; a < f.grid.atom_count(); ++a) {
        if (f.kind == ValueKind::scalar) {
            atoms.push_back(cx_to_json(f.at(a)[0]));
        } else {
            json v = json::array();
            for (int c = 0; c < comp; ++c) v.push_back(cx_to_json(f.at(a)[c]));
            atoms.push_back(std::move(v));
        }
    }
    const char* kind = f.kind == ValueKind::scalar   ? "scalar"
                       : f.kind == ValueKind::vector ? "vector"
                                                     : "matrix";
    return json{{"grid", grid_to_json(f.grid)}, {"d", f.d}, {"kind", kind}, {"atoms", atoms}};
}

AtomField field_from_json(const json& j) {
    for (const char* key : {"grid", "d", "kind", "atoms"})
        if (!j.contains(key)) fail("InvalidModel", std::string("field JSON needs ") + key);
    const Grid g = grid_from_json(j["grid"]);
    const int d = j["d"].get<int>();
    if (d < 1 || d > 16) fail("InvalidModel", "d must lie in 1..16");
    const std::string kind = j["kind"].get<std::string>();
    ValueKind vk;
    if (kind == "scalar")
        vk = ValueKind::scalar;
    else if (kind == "vector")
        vk = ValueKind::vector;
    else if (kind == "matrix")
        vk = ValueKind::matrix;
    else
        fail("InvalidModel", "kind must be scalar, vector or matrix");
    AtomField f = make_field(g, vk, d);
    const json& atoms = j["atoms"];
    if (!atoms.is_array() || atoms.size() != static_cast<size_t>(g.atom_count()))
        fail("InvalidModel", "atoms array size does not match the grid");
    const int comp = f.comp();
    for (std::int64_t a = 0; a < g.atom_count(); ++a) {
        const json& v = atoms[a];
        if (vk == ValueKind::scalar) {
            f.at(a)[0] = cx_from_json(v);
        } else {
            if (!v.is_array() || v.size() != static_cast<size_t>(comp))
                fail("InvalidModel", "atom value has the wrong number of components");
            for (int c = 0; c < comp; ++c) f.at(a)[c] = cx_from_json(v[c]);
        }
    }
    return f;
}

json weight_to_json(const MatrixWeightField& w) {
    json j = field_to_json(w.field);
    j["p"] = w.p;
    return j;
}

MatrixWeightField weight_from_json(const json& j) {
    if (!j.contains("p")) fail("InvalidModel", "weight JSON needs the exponent p");
    return make_weight(field_from_json(j), j["p"].get<double>());
}

json body_to_json(const ConvexBody& k) {
    switch (k.kind()) {
        case ConvexBody::Kind::zero: return json{{"kind", "zero"}, {"d", k.dim()}};
        case ConvexBody::Kind::ellipsoid:
            return json{{"kind", "ellipsoid"},
                        {"d", k.dim()},
                        {"matrix", matrix_to_json(k.matrix().matrix())}};
        case ConvexBody::Kind::hull: {
            json gens = json::array();
            for (const Vec& g : k.generators()) {
                json v = json::array();
                for (const cx& z : g) v.push_back(cx_to_json(z));
                gens.push_back(std::move(v));
            }
            return json{{"kind", "hull"},
                        {"d", k.dim()},
                        {"generators", gens},
                        {"phase_count", k.phase_count()}};
        }
    }
    return {};
}

ConvexBody body_from_json(const json& j) {
    for (const char* key : {"kind", "d"})
        if (!j.contains(key)) fail("InvalidModel", std::string("body JSON needs ") + key);
    const std::string kind = j["kind"].get<std::string>();
    const int d = j["d"].get<int>();
    if (d < 1 || d > 16) fail("InvalidModel", "d must lie in 1..16");
    if (kind == "zero") return ConvexBody::zero_body(d);
    if (kind == "ellipsoid") {
        if (!j.contains("matrix")) fail("InvalidModel", "ellipsoid bodies need a matrix");
        return ConvexBody::ellipsoid(PDMatrix::validate(matrix_from_json(j["matrix"], d)));
    }
    if (kind == "hull") {
        if (!j.contains("generators")) fail("InvalidModel", "hull bodies need generators");
        std::vector<Vec> gens;
        for (const json& gj : j["generators"]) {
            if (!gj.is_array() || gj.size() != static_cast<size_t>(d))
                fail("InvalidModel", "generator has the wrong dimension");
            Vec g(d);
            for (int i = 0; i < d; ++i) g[i] = cx_from_json(gj[i]);
            gens.push_back(std::move(g));
        }
        const int pc = j.contains("phase_count") ? j["phase_count"].get<int>() : 64;
        return ConvexBody::balanced_hull(d, std::move(gens), pc);
    }
    fail("InvalidModel", "body kind must be zero, ellipsoid or hull");
}

json symbol_to_json(const SymbolSpectrum& b) {
    json entries = json::array();
    for (const SymbolSpectrum::Entry& e : b.entries) {
        json eps = json::array();
        for (int ax = 0; ax < b.grid.f1.dim; ++ax) eps.push_back((e.e1 >> ax) & 1);
        for (int ax = 0; ax < b.grid.f2.dim; ++ax) eps.push_back((e.e2 >> ax) & 1);
        const std::int64_t i1 = (b.grid.f1.dim == 1)
                                    ? e.r1.pos[0]
                                    : ((static_cast<std::int64_t>(e.r1.pos[0]) << e.r1.level) +
                                       e.r1.pos[1]);
        const std::int64_t i2 = (b.grid.f2.dim == 1)
                                    ? e.r2.pos[0]
                                    : ((static_cast<std::int64_t>(e.r2.pos[0]) << e.r2.level) +
                                       e.r2.pos[1]);
        entries.push_back(json{{"R", json::array({e.r1.level, i1, e.r2.level, i2})},
                               {"eps", eps},
                               {"matrix", matrix_to_json(e.value)}});
    }
    return json{{"grid", grid_to_json(b.grid)}, {"d", b.d}, {"entries", entries}};
}

SymbolSpectrum symbol_from_json(const json& j, const Grid* grid, int d) {
    SymbolSpectrum b;
    const json* entries = nullptr;
    if (j.is_array()) {
        if (!grid || d <= 0)
            fail("InvalidModel", "a bare symbol list needs grid context from the weights");
        b.grid = *grid;
        b.d = d;
        entries = &j;
    } else {
        for (const char* key : {"grid", "d", "entries"})
            if (!j.contains(key)) fail("InvalidModel", std::string("symbol JSON needs ") + key);
        b.grid = grid_from_json(j["grid"]);
        b.d = j["d"].get<int>();
        entries = &j["entries"];
    }
    if (!b.grid.bi) fail("InvalidModel", "symbols live on bi-parameter grids");
    auto decode_cube = [](const Factor& f, int level, std::int64_t pos) {
        Cube q;
        q.level = level;
        if (level < 0 || level >= f.depth) fail("InvalidModel", "symbol rectangle level outside grid");
        if (f.dim == 1) {
            q.pos[0] = static_cast<int>(pos);
        } else {
            q.pos[0] = static_cast<int>(pos >> level);
            q.pos[1] = static_cast<int>(pos & ((1 << level) - 1));
        }
        for (int ax = 0; ax < f.dim; ++ax)
            if (q.pos[ax] < 0 || q.pos[ax] >= (1 << level))
                fail("InvalidModel", "symbol rectangle position outside grid");
        return q;
    };
    for (const json& ej : *entries) {
        for (const char* key : {"R", "eps", "matrix"})
            if (!ej.contains(key)) fail("InvalidModel", std::string("symbol entry needs ") + key);
        const json& r = ej["R"];
        if (!r.is_array() || r.size() != 4)
            fail("InvalidModel", "symbol rectangles are [lvl, i, lvl2, j]");
        const Cube r1 = decode_cube(b.grid.f1, r[0].get<int>(), r[1].get<std::int64_t>());
        const Cube r2 = decode_cube(b.grid.f2, r[2].get<int>(), r[3].get<std::int64_t>());
        const json& eps = ej["eps"];
        const int total = b.grid.f1.dim + b.grid.f2.dim;
        if (!eps.is_array() || eps.size() != static_cast<size_t>(total))
            fail("InvalidModel", "signature length must be n + m");
        Sig e1 = 0, e2 = 0;
        for (int ax = 0; ax < b.grid.f1.dim; ++ax)
            if (eps[ax].get<int>()) e1 |= (1 << ax);
        for (int ax = 0; ax < b.grid.f2.dim; ++ax)
            if (eps[b.grid.f1.dim + ax].get<int>()) e2 |= (1 << ax);
        if (e1 == (1 << b.grid.f1.dim) - 1 || e2 == (1 << b.grid.f2.dim) - 1)
            fail("InvalidModel", "all-ones signatures are not cancellative");
        b.add(r1, e1, r2, e2, matrix_from_json(ej["matrix"], b.d));
    }
    return b;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("InvalidModel", "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail("InvalidModel", std::string("JSON parse error in ") + path + ": " + e.what());
    }
    return j;
}

void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) fail("InvalidModel", "cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace mwlab
