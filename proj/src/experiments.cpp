#include "mwlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace mwlab {

void validate(const ExperimentConfig& c) {
    if (!(c.p > 1.0) || !std::isfinite(c.p) || !(c.q > 1.0) || !std::isfinite(c.q))
        fail("InvalidModel", "exponents p, q must lie in (1, inf)");
    if (c.trials < 1) fail("InvalidModel", "trials must be >= 1");
    if (c.d < 1 || c.d > 8) fail("InvalidModel", "d must lie in 1..8");
    if (c.n < 1 || c.n > 2 || c.m < 1 || c.m > 2) fail("InvalidModel", "factor dims are 1 or 2");
    if (c.depth < 1 || c.depth > 8 || c.depth2 < 0 || c.depth2 > 8)
        fail("InvalidModel", "depths must lie in 1..8 (depth2 may be 0)");
    if (c.sequence_len < 1 || c.sequence_len > 16)
        fail("InvalidModel", "sequence length K must lie in 1..16");
    if (c.support < 1 || c.support > 10)
        fail("InvalidModel", "symbol support must lie in 1..10 (exhaustive families)");
    if (c.weight_model != "scalar_power" && c.weight_model != "rotated_diag" &&
        c.weight_model != "two_block")
        fail("InvalidModel", "weight_model must be scalar_power, rotated_diag or two_block");
    if (c.weight_model == "scalar_power" && c.d != 1)
        fail("InvalidModel", "scalar_power is a d = 1 model");
    if (!(c.cap >= 1.0)) fail("InvalidModel", "cap must be >= 1");
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("p")) c.p = j["p"].get<double>();
    if (j.contains("q")) c.q = j["q"].get<double>();
    if (j.contains("d")) c.d = j["d"].get<int>();
    if (j.contains("n")) c.n = j["n"].get<int>();
    if (j.contains("m")) c.m = j["m"].get<int>();
    if (j.contains("depth")) c.depth = j["depth"].get<int>();
    if (j.contains("depth2")) c.depth2 = j["depth2"].get<int>();
    if (j.contains("trials")) c.trials = j["trials"].get<int>();
    if (j.contains("K")) c.sequence_len = j["K"].get<int>();
    if (j.contains("support")) c.support = j["support"].get<int>();
    if (j.contains("cap")) c.cap = j["cap"].get<double>();
    if (j.contains("weight_model")) c.weight_model = j["weight_model"].get<std::string>();
    if (j.contains("family")) {
        const std::string f = j["family"].get<std::string>();
        if (f == "dyadic")
            c.family = CubeFamily::dyadic;
        else if (f == "aligned")
            c.family = CubeFamily::aligned;
        else
            fail("InvalidModel", "family must be dyadic or aligned");
    }
    if (j.contains("out")) c.out = j["out"].get<std::string>();
    validate(c);
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    return json{{"seed", c.seed},
                {"p", c.p},
                {"q", c.q},
                {"d", c.d},
                {"n", c.n},
                {"m", c.m},
                {"depth", c.depth},
                {"depth2", c.depth2},
                {"trials", c.trials},
                {"K", c.sequence_len},
                {"support", c.support},
                {"cap", c.cap},
                {"weight_model", c.weight_model},
                {"family", c.family == CubeFamily::dyadic ? "dyadic" : "aligned"},
                {"out", c.out}};
}

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

Matrix small_unitary(double theta, double phi, int d, int plane) {
    Matrix u = Matrix::identity(d);
    if (d == 1) return u;
    const int a = plane % (d - 1), b = a + 1;
    u.at(a, a) = std::cos(theta);
    u.at(b, b) = std::cos(theta);
    u.at(a, b) = -std::polar(std::sin(theta), -phi);
    u.at(b, a) = std::polar(std::sin(theta), phi);
    return u;
}

// weight from per-atom log-eigenvalues and rotation angles, scaled by s
MatrixWeightField assemble_rotated(const Grid& g, int d, double p, double s,
                                   const std::vector<std::vector<double>>& loglam,
                                   const std::vector<std::vector<double>>& angles) {
    AtomField f = make_field(g, ValueKind::matrix, d);
    const std::int64_t n = g.atom_count();
    for (std::int64_t a = 0; a < n; ++a) {
        Matrix u = Matrix::identity(d);
        for (int plane = 0; plane + 1 < d; ++plane)
            u = u * small_unitary(s * angles[a][2 * plane], angles[a][2 * plane + 1], d, plane);
        Matrix w(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                cx acc = 0.0;
                for (int k = 0; k < d; ++k)
                    acc += u.at(i, k) * std::exp(s * loglam[a][k]) * std::conj(u.at(j, k));
                w.at(i, j) = acc;
            }
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                const cx v = 0.5 * (w.at(i, j) + std::conj(w.at(j, i)));
                w.at(i, j) = v;
                w.at(j, i) = std::conj(v);
            }
        for (int i = 0; i < d; ++i) w.at(i, i) = cx(w.at(i, i).real(), 0.0);
        std::copy_n(w.data(), d * d, f.at(a).begin());
    }
    return make_weight(std::move(f), p);
}

double characteristic_of(const MatrixWeightField& w, const ExperimentConfig& c) {
    return ap_characteristic(w, c.family, w.grid().bi ? ParamMode::bi : ParamMode::one);
}

} // namespace

MatrixWeightField gen_weight(const ExperimentConfig& c, std::uint64_t seed) {
    validate(c);
    const Grid g = c.grid();
    if (c.cap <= 1.0) return identity_weight(g, c.d, c.p);
    Rng rng(mix(seed, 0xabcdull));
    const double target = std::exp(rng.uniform(0.0, std::log(c.cap)));

    if (c.weight_model == "scalar_power") {
        // discretized |x - x0|^alpha along the first axis, clipped
        const double alpha_max = std::min(c.p - 1.0, 3.0) * 0.9;
        const double alpha = rng.uniform(-0.9, alpha_max);
        const double x0 = (std::floor(rng.uniform(0.0, g.f1.axis_atoms())) + 0.37) /
                          g.f1.axis_atoms();
        auto build = [&](double s) {
            AtomField f = make_field(g, ValueKind::scalar, 1);
            f.kind = ValueKind::matrix;
            const std::int64_t a2n = g.atoms2();
            for (std::int64_t a = 0; a < g.atom_count(); ++a) {
                const std::int64_t a1 = a / a2n;
                const double center = (static_cast<double>(a1 % g.f1.axis_atoms()) + 0.5) /
                                      g.f1.axis_atoms();
                const double v = std::pow(std::abs(center - x0), s * alpha);
                f.at(a)[0] = std::clamp(v, 1e-4, 1e4);
            }
            return make_weight(std::move(f), c.p);
        };
        double lo = 0.0, hi = 1.0;
        MatrixWeightField w = build(1.0);
        if (characteristic_of(w, c) <= target) return w;
        for (int it = 0; it < 24; ++it) {
            const double mid = 0.5 * (lo + hi);
            w = build(mid);
            (characteristic_of(w, c) <= target ? lo : hi) = mid;
        }
        return build(lo);
    }

    if (c.weight_model == "two_block") {
        // piecewise-constant halves along the first axis
        auto build = [&](double s) {
            Rng r2(mix(seed, 0x7711ull));
            Matrix blocks[2];
            for (Matrix& blk : blocks) {
                Matrix u = Matrix::identity(c.d);
                for (int plane = 0; plane + 1 < c.d; ++plane)
                    u = u * small_unitary(r2.uniform(0.0, 3.14159), r2.uniform(0.0, 6.28318),
                                          c.d, plane);
                blk = Matrix(c.d);
                for (int i = 0; i < c.d; ++i) {
                    const double lam = std::exp(s * r2.uniform(-1.5, 1.5));
                    for (int a = 0; a < c.d; ++a)
                        for (int b = 0; b < c.d; ++b)
                            blk.at(a, b) += u.at(a, i) * lam * std::conj(u.at(b, i));
                }
            }
            AtomField f = make_field(g, ValueKind::matrix, c.d);
            const std::int64_t a2n = g.atoms2();
            const int half = g.f1.axis_atoms() / 2;
            for (std::int64_t a = 0; a < g.atom_count(); ++a) {
                const std::int64_t a1 = a / a2n;
                const int axis0 = static_cast<int>((g.f1.dim == 1)
                                                       ? (a1 % g.f1.axis_atoms())
                                                       : (a1 >> g.f1.depth));
                const Matrix& blk = blocks[axis0 < half ? 0 : 1];
                std::copy_n(blk.data(), c.d * c.d, f.at(a).begin());
            }
            return make_weight(std::move(f), c.p);
        };
        double lo = 0.0, hi = 1.0;
        MatrixWeightField w = build(1.0);
        if (characteristic_of(w, c) <= target) return w;
        for (int it = 0; it < 24; ++it) {
            const double mid = 0.5 * (lo + hi);
            w = build(mid);
            (characteristic_of(w, c) <= target ? lo : hi) = mid;
        }
        return build(lo);
    }

    // rotated_diag: smooth log-eigenvalue and angle walks over atoms
    const std::int64_t n = g.atom_count();
    std::vector<std::vector<double>> loglam(n, std::vector<double>(c.d, 0.0));
    std::vector<std::vector<double>> angles(n, std::vector<double>(std::max(2 * (c.d - 1), 1), 0.0));
    std::vector<double> lcur(c.d, 0.0), acur(std::max(2 * (c.d - 1), 1), 0.0);
    for (int k = 0; k < c.d; ++k) lcur[k] = rng.normal() * 0.5;
    for (std::int64_t a = 0; a < n; ++a) {
        for (int k = 0; k < c.d; ++k) {
            lcur[k] = std::clamp(lcur[k] + 0.45 * rng.normal(), -2.2, 2.2);
            loglam[a][k] = lcur[k];
        }
        for (size_t k = 0; k < acur.size(); ++k) {
            acur[k] += 0.3 * rng.normal();
            angles[a][k] = acur[k];
        }
    }
    MatrixWeightField w = assemble_rotated(g, c.d, c.p, 1.0, loglam, angles);
    if (characteristic_of(w, c) <= target) return w;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 24; ++it) {
        const double mid = 0.5 * (lo + hi);
        w = assemble_rotated(g, c.d, c.p, mid, loglam, angles);
        (characteristic_of(w, c) <= target ? lo : hi) = mid;
    }
    return assemble_rotated(g, c.d, c.p, lo, loglam, angles);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string ExperimentReport::csv() const {
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string out = "\"";
        for (char ch : s) {
            if (ch == '"') out += '"';
            out += ch;
        }
        out += '"';
        return out;
    };
    std::string out;
    for (size_t i = 0; i < columns.size(); ++i) {
        if (i) out += ',';
        out += quote(columns[i]);
    }
    out += "\r\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += quote(row[i]);
        }
        out += "\r\n";
    }
    return out;
}

void ExperimentReport::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail("InvalidModel", "cannot write " + path);
    f << csv();
}

AtomField random_vector_field(Rng& rng, const Grid& g, int d) {
    AtomField f = make_field(g, ValueKind::vector, d);
    for (auto& z : f.data) z = {rng.normal(), rng.normal()};
    return f;
}

SymbolSpectrum random_sparse_symbol(Rng& rng, const Grid& g, int d, int support) {
    SymbolSpectrum b;
    b.grid = g;
    b.d = d;
    const CubeIndexer i1(g.f1, g.f1.depth - 1), i2(g.f2, g.f2.depth - 1);
    const std::vector<Sig> s1 = signatures(g.f1.dim), s2 = signatures(g.f2.dim);
    for (int t = 0; t < support; ++t) {
        Matrix m(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m.at(i, j) = cx(rng.normal(), rng.normal());
        b.add(i1.cube(rng.below(i1.count())), s1[rng.below(s1.size())],
              i2.cube(rng.below(i2.count())), s2[rng.below(s2.size())], std::move(m));
    }
    return b;
}

ExperimentReport run_fs_experiment(const ExperimentConfig& c) {
    validate(c);
    const Grid g = c.grid();
    ExperimentReport rep;
    rep.columns = {"trial",          "d",
                   "p",              "q",
                   "K",              "ap",
                   "rhs",            "lhs_pointwise",
                   "lhs_reducing",   "ratio_pointwise",
                   "ratio_reducing", "norm_ratio_pointwise",
                   "norm_ratio_reducing"};
    const double expo = std::max(1.0 / (c.q - 1.0), 1.0 / (c.p - 1.0));

    for (int t = 0; t < c.trials; ++t) {
        const std::uint64_t ts = mix(c.seed, t);
        MatrixWeightField w = gen_weight(c, ts);
        Rng rng(mix(ts, 0xf00dull));
        std::vector<AtomField> fs;
        for (int k = 0; k < c.sequence_len; ++k) fs.push_back(random_vector_field(rng, g, c.d));

        const std::int64_t atoms = g.atom_count();
        std::vector<double> acc_lhs_p(atoms, 0.0), acc_lhs_r(atoms, 0.0), acc_rhs(atoms, 0.0);
        ReducingCache cache(w, c.p);
        for (const AtomField& f : fs) {
            const ScalarField mp = maximal_pointwise(w, f, c.family);
            const ScalarField mr = maximal_reducing(w, f, CubeFamily::dyadic, &cache);
            const ScalarField md = weighted_modulus(w, f);
            for (std::int64_t a = 0; a < atoms; ++a) {
                acc_lhs_p[a] += std::pow(mp.v[a], c.q);
                acc_lhs_r[a] += std::pow(mr.v[a], c.q);
                acc_rhs[a] += std::pow(md.v[a], c.q);
            }
        }
        auto lp_of = [&](const std::vector<double>& acc) {
            double s = 0.0;
            for (std::int64_t a = 0; a < atoms; ++a)
                s += std::pow(std::pow(acc[a], 1.0 / c.q), c.p) * g.atom_measure();
            return std::pow(s, 1.0 / c.p);
        };
        const double rhs = lp_of(acc_rhs);
        const double lhs_p = lp_of(acc_lhs_p);
        const double lhs_r = lp_of(acc_lhs_r);
        const double ap = characteristic_of(w, c);
        const double rp = rhs > 0 ? lhs_p / rhs : 0.0;
        const double rr = rhs > 0 ? lhs_r / rhs : 0.0;
        const double norm = std::pow(ap, expo);
        rep.rows.push_back({std::to_string(t), std::to_string(c.d), format_double(c.p),
                            format_double(c.q), std::to_string(c.sequence_len), format_double(ap),
                            format_double(rhs), format_double(lhs_p), format_double(lhs_r),
                            format_double(rp), format_double(rr), format_double(rp / norm),
                            format_double(rr / norm)});
    }
    if (!c.out.empty()) rep.save(c.out);
    return rep;
}

ExperimentReport run_duality_experiment(const ExperimentConfig& c) {
    validate(c);
    const Grid g = c.grid();
    if (!g.bi) fail("InvalidModel", "duality experiments need a bi-parameter grid (depth2 > 0)");
    ExperimentReport rep;
    rep.columns = {"trial", "d",   "p",        "support_b", "support_phi",
                   "ap_v",  "abs_pairing", "bmo",  "h1",        "normalized"};
    for (int t = 0; t < c.trials; ++t) {
        const std::uint64_t ts = mix(c.seed, 0x1000 + t);
        MatrixWeightField u = gen_weight(c, mix(ts, 1));
        MatrixWeightField v = gen_weight(c, mix(ts, 2));
        Rng rng(mix(ts, 3));
        SymbolSpectrum b = random_sparse_symbol(rng, g, c.d, c.support);
        SymbolSpectrum phi = random_sparse_symbol(rng, g, c.d, c.support);

        ReducingCache ucache(u, c.p), vcache(v, c.p);
        const OmegaFamily fam = exhaustive_family(b);
        const double bmo = bmo_prod_norm(b, u, v, fam, &ucache, &vcache);
        const double h1 = h1_norm(phi, u, v, &ucache);
        const double pairing = std::abs(duality_pairing(b, phi));
        const double apv = characteristic_of(v, c);
        const double denom = std::pow(apv, 2.0 / c.p) * bmo * h1;
        rep.rows.push_back({std::to_string(t), std::to_string(c.d), format_double(c.p),
                            std::to_string(b.entries.size()), std::to_string(phi.entries.size()),
                            format_double(apv), format_double(pairing), format_double(bmo),
                            format_double(h1), format_double(denom > 0 ? pairing / denom : 0.0)});
    }
    if (!c.out.empty()) rep.save(c.out);
    return rep;
}

ExperimentReport run_paraproduct_experiment(const ExperimentConfig& c) {
    validate(c);
    const Grid g = c.grid();
    if (!g.bi) fail("InvalidModel", "paraproduct experiments need a bi-parameter grid");
    ExperimentReport rep;
    rep.columns = {"trial", "kind", "status", "bmo", "input_norm", "output_norm", "ratio"};
    const std::vector<std::pair<ParaKind, const char*>> kinds = {
        {ParaKind::p11, "11"},   {ParaKind::p00, "00"},   {ParaKind::gamma, "gamma"},
        {ParaKind::p10, "10"},   {ParaKind::p01, "01"},   {ParaKind::g10, "g10"},
        {ParaKind::g10s, "g10s"}, {ParaKind::g01, "g01"}, {ParaKind::g01s, "g01s"}};
    for (int t = 0; t < c.trials; ++t) {
        const std::uint64_t ts = mix(c.seed, 0x2000 + t);
        MatrixWeightField u = gen_weight(c, mix(ts, 1));
        MatrixWeightField v = gen_weight(c, mix(ts, 2));
        Rng rng(mix(ts, 3));
        SymbolSpectrum b = random_sparse_symbol(rng, g, c.d, c.support);
        AtomField f = random_vector_field(rng, g, c.d);

        ReducingCache ucache(u, c.p), vcache(v, c.p);
        const OmegaFamily fam = exhaustive_family(b);
        const double bmo = bmo_prod_norm(b, u, v, fam, &ucache, &vcache);
        const double fn = lp_weighted_norm(u, f);
        for (const auto& [kind, name] : kinds) {
            ParaResult r = paraproduct(kind, b, f);
            if (r.empty_signature_warning) {
                rep.rows.push_back({std::to_string(t), name, "skipped_empty_signature", "0", "0",
                                    "0", "0"});
                continue;
            }
            const double on = lp_weighted_norm(v, r.field);
            const double denom = bmo * fn;
            rep.rows.push_back({std::to_string(t), name, "ok", format_double(bmo),
                                format_double(fn), format_double(on),
                                format_double(denom > 0 ? on / denom : 0.0)});
        }
    }
    if (!c.out.empty()) rep.save(c.out);
    return rep;
}

} // namespace mwlab
