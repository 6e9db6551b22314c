// mwlab: CLI for the matrix-weighted dyadic harmonic analysis lab.
// Exit codes: 0 success, 2 validation error, 3 certification failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mwlab/experiments.hpp"
#include "mwlab/json_io.hpp"

using namespace mwlab;

namespace {

// pull a default from --config when the flag was not given on the command line
struct ConfigLayer {
    json cfg = json::object();

    void load(const std::string& path) {
        if (!path.empty()) cfg = load_json_file(path);
    }
    void fill(const CLI::Option* opt, std::string& value, const char* key) const {
        if (opt->count() == 0 && cfg.contains(key)) value = cfg[key].get<std::string>();
    }
    void fill(const CLI::Option* opt, double& value, const char* key) const {
        if (opt->count() == 0 && cfg.contains(key)) value = cfg[key].get<double>();
    }
};

Cube parse_cube(const std::string& s, const Factor& f) {
    Cube q;
    const size_t colon = s.find(':');
    if (colon == std::string::npos) fail("InvalidModel", "cube syntax is level:pos[,pos2]");
    q.level = std::stoi(s.substr(0, colon));
    const std::string rest = s.substr(colon + 1);
    const size_t comma = rest.find(',');
    q.pos[0] = std::stoi(rest.substr(0, comma));
    if (comma != std::string::npos) {
        if (f.dim != 2) fail("InvalidModel", "a second position needs a two-axis factor");
        q.pos[1] = std::stoi(rest.substr(comma + 1));
    } else if (f.dim == 2) {
        fail("InvalidModel", "two-axis factors need level:pos0,pos1");
    }
    if (q.level < 0 || q.level > f.depth) fail("CubeOutsideGrid", "cube level outside grid");
    for (int ax = 0; ax < f.dim; ++ax)
        if (q.pos[ax] < 0 || q.pos[ax] >= (1 << q.level))
            fail("CubeOutsideGrid", "cube position outside grid");
    return q;
}

json spectrum_to_json(const Spectrum& s) {
    auto dump = [](const std::vector<cx>& v) {
        json out = json::array();
        for (const cx& z : v) out.push_back(json::array({z.real(), z.imag()}));
        return out;
    };
    const char* kind = s.kind == ValueKind::scalar   ? "scalar"
                       : s.kind == ValueKind::vector ? "vector"
                                                     : "matrix";
    return json{{"grid", grid_to_json(s.grid)}, {"kind", kind},        {"d", s.d},
                {"mean", dump(s.mean)},         {"cc", dump(s.cc)},    {"cm", dump(s.cm)},
                {"mc", dump(s.mc)}};
}

int run(int argc, char** argv) {
    CLI::App app{"matrix-weighted dyadic harmonic analysis lab"};
    app.require_subcommand(1);

    // ------------------------------------------------------- experiments ----
    std::string cfg_path, out_path;
    std::optional<std::uint64_t> seed_override;
    auto add_experiment = [&](const char* name, const char* what) {
        CLI::App* sub = app.add_subcommand(name, what);
        sub->add_option("--config", cfg_path, "experiment config JSON");
        sub->add_option("--seed", seed_override, "override the config seed");
        sub->add_option("--out", out_path, "CSV report path");
        return sub;
    };
    CLI::App* fs = add_experiment("fs", "vector-valued maximal experiments");
    CLI::App* duality = add_experiment("duality",
                                       "H1-BMO duality: experiments, or a direct pairing when "
                                       "--symbol/--phi are given");
    CLI::App* para = add_experiment("para", "paraproduct bound experiments");
    std::string pk_kind, pk_symbol, pk_input, pk_out;
    std::vector<std::string> pk_weights;
    para->add_option("--kind", pk_kind, "11|00|gamma|10|01|g10|g10s|g01|g01s (direct mode)");
    para->add_option("--symbol", pk_symbol, "symbol JSON file (direct mode)");
    para->add_option("--input", pk_input, "input field JSON file (direct mode)");
    para->add_option("--weights", pk_weights, "U.json V.json (adds norms)")->expected(2);
    para->add_option("--field-out", pk_out, "write the output field JSON here");
    std::string du_b, du_phi;
    std::vector<std::string> du_weights;
    duality->add_option("--symbol", du_b, "symbol JSON file (direct mode)");
    duality->add_option("--phi", du_phi, "second symbol JSON file (direct mode)");
    duality->add_option("--weights", du_weights, "U.json V.json (direct mode)")->expected(2);

    auto run_experiment = [&](const CLI::App* sub) {
        ExperimentConfig c;
        if (!cfg_path.empty()) c = config_from_json(load_json_file(cfg_path));
        if (seed_override) c.seed = *seed_override;
        if (!out_path.empty()) c.out = out_path;
        if (sub == duality || sub == para) {
            if (c.depth2 == 0) c.depth2 = c.depth;
        }
        ExperimentReport rep;
        if (sub == fs)
            rep = run_fs_experiment(c);
        else if (sub == duality)
            rep = run_duality_experiment(c);
        else
            rep = run_paraproduct_experiment(c);
        if (c.out.empty()) std::fputs(rep.csv().c_str(), stdout);
        return 0;
    };

    // ---------------------------------------------------------- ap ----
    CLI::App* ap = app.add_subcommand("ap", "A_p characteristic of a weight");
    std::string ap_weight, ap_family = "dyadic", ap_parameter, ap_cfg;
    double ap_p = 0.0;
    ap->add_option("--config", ap_cfg, "config JSON with defaults");
    auto* ap_w = ap->add_option("--weight", ap_weight, "weight JSON file");
    auto* ap_po = ap->add_option("--p", ap_p, "exponent override");
    auto* ap_f = ap->add_option("--family", ap_family, "dyadic|aligned");
    auto* ap_m = ap->add_option("--parameter", ap_parameter, "one|bi (default from grid)");

    // ------------------------------------------------------- reduce ----
    CLI::App* reduce = app.add_subcommand("reduce", "reducing operator over a cube");
    std::string rd_weight, rd_cube, rd_cube2, rd_method = "auto", rd_cfg, rd_out;
    double rd_p = 0.0;
    reduce->add_option("--config", rd_cfg, "config JSON with defaults");
    auto* rd_w = reduce->add_option("--weight", rd_weight, "weight JSON file");
    auto* rd_c = reduce->add_option("--cube", rd_cube, "factor-1 cube level:pos[,pos2]");
    auto* rd_c2 = reduce->add_option("--cube2", rd_cube2, "factor-2 cube (bi-parameter)");
    auto* rd_po = reduce->add_option("--p", rd_p, "exponent override");
    auto* rd_m = reduce->add_option("--method", rd_method, "auto|p2|john");
    reduce->add_option("--out", rd_out, "write the operator JSON here");

    // ------------------------------------------------------ maximal ----
    CLI::App* maximal = app.add_subcommand("maximal", "maximal operators");
    std::string mx_variant = "pointwise", mx_weight, mx_input, mx_family = "dyadic", mx_cfg, mx_out;
    maximal->add_option("--config", mx_cfg, "config JSON with defaults");
    auto* mx_v = maximal->add_option("--variant", mx_variant, "pointwise|reducing|strong|convex");
    auto* mx_w = maximal->add_option("--weight", mx_weight, "weight JSON file");
    auto* mx_i = maximal->add_option("--input", mx_input, "input field JSON file");
    auto* mx_f = maximal->add_option("--family", mx_family, "dyadic|aligned");
    maximal->add_option("--out", mx_out, "write the output field JSON here");

    // --------------------------------------------------------- haar ----
    CLI::App* haar = app.add_subcommand("haar", "Haar transform of a field");
    std::string hr_input, hr_cfg, hr_out;
    haar->add_option("--config", hr_cfg, "config JSON with defaults");
    auto* hr_i = haar->add_option("--input", hr_input, "input field JSON file");
    haar->add_option("--out", hr_out, "write the spectrum JSON here");

    // --------------------------------------------------------- john ----
    CLI::App* john = app.add_subcommand("john", "John ellipsoid of a convex body");
    std::string jn_body, jn_cfg, jn_out;
    john->add_option("--config", jn_cfg, "config JSON with defaults");
    auto* jn_b = john->add_option("--body", jn_body, "body JSON file");
    john->add_option("--out", jn_out, "write the result JSON here");

    // ---------------------------------------------------------- bmo ----
    CLI::App* bmo = app.add_subcommand("bmo", "two-matrix product BMO norm of a symbol");
    std::string bm_symbol, bm_u, bm_v, bm_omega = "exhaustive", bm_cfg;
    std::vector<std::string> bm_weights;
    bmo->add_option("--config", bm_cfg, "config JSON with defaults");
    auto* bm_s = bmo->add_option("--symbol", bm_symbol, "symbol JSON file");
    auto* bm_w = bmo->add_option("--weights", bm_weights, "U.json V.json")->expected(2);
    auto* bm_o = bmo->add_option("--omega", bm_omega, "exhaustive|sampled");

    // ----------------------------------------------------------- h1 ----
    CLI::App* h1 = app.add_subcommand("h1", "two-matrix H1 norm of a symbol");
    std::string h1_phi, h1_cfg;
    std::vector<std::string> h1_weights;
    h1->add_option("--config", h1_cfg, "config JSON with defaults");
    auto* h1_s = h1->add_option("--phi", h1_phi, "symbol JSON file");
    auto* h1_w = h1->add_option("--weights", h1_weights, "U.json V.json")->expected(2);

    CLI11_PARSE(app, argc, argv);

    if (fs->parsed()) return run_experiment(fs);
    if (duality->parsed()) {
        if (du_b.empty() && du_phi.empty()) return run_experiment(duality);
        if (du_b.empty() || du_phi.empty())
            fail("InvalidModel", "direct duality mode needs both --symbol and --phi");
        json out;
        if (du_weights.size() == 2) {
            MatrixWeightField u = weight_from_json(load_json_file(du_weights[0]));
            MatrixWeightField v = weight_from_json(load_json_file(du_weights[1]));
            const Grid g = u.grid();
            SymbolSpectrum b = symbol_from_json(load_json_file(du_b), &g, u.dim());
            SymbolSpectrum phi = symbol_from_json(load_json_file(du_phi), &g, u.dim());
            const cx val = duality_pairing(b, phi);
            out = json{{"pairing", json::array({val.real(), val.imag()})},
                       {"bmo", bmo_prod_norm(b, u, v, exhaustive_family(b))},
                       {"h1", h1_norm(phi, u, v)},
                       {"ap_v", ap_characteristic(v, CubeFamily::dyadic,
                                                  g.bi ? ParamMode::bi : ParamMode::one)}};
        } else {
            SymbolSpectrum b = symbol_from_json(load_json_file(du_b));
            SymbolSpectrum phi = symbol_from_json(load_json_file(du_phi));
            const cx val = duality_pairing(b, phi);
            out = json{{"pairing", json::array({val.real(), val.imag()})}};
        }
        std::printf("%s\n", out.dump(2).c_str());
        return 0;
    }
    if (para->parsed()) {
        if (pk_kind.empty()) return run_experiment(para);
        if (pk_symbol.empty() || pk_input.empty())
            fail("InvalidModel", "direct paraproduct mode needs --symbol and --input");
        ParaKind kind;
        if (pk_kind == "11") kind = ParaKind::p11;
        else if (pk_kind == "00") kind = ParaKind::p00;
        else if (pk_kind == "gamma") kind = ParaKind::gamma;
        else if (pk_kind == "10") kind = ParaKind::p10;
        else if (pk_kind == "01") kind = ParaKind::p01;
        else if (pk_kind == "g10") kind = ParaKind::g10;
        else if (pk_kind == "g10s") kind = ParaKind::g10s;
        else if (pk_kind == "g01") kind = ParaKind::g01;
        else if (pk_kind == "g01s") kind = ParaKind::g01s;
        else fail("InvalidModel", "unknown paraproduct kind " + pk_kind);
        AtomField f = field_from_json(load_json_file(pk_input));
        SymbolSpectrum b = symbol_from_json(load_json_file(pk_symbol), &f.grid, f.d);
        const ParaResult r = paraproduct(kind, b, f);
        json out{{"kind", pk_kind},
                 {"empty_signature_warning", r.empty_signature_warning}};
        if (pk_weights.size() == 2) {
            MatrixWeightField u = weight_from_json(load_json_file(pk_weights[0]));
            MatrixWeightField v = weight_from_json(load_json_file(pk_weights[1]));
            const double bmo = bmo_prod_norm(b, u, v, support_rectangles(b).size() <= 10
                                                          ? exhaustive_family(b)
                                                          : sampled_family(b, 0x5eedull));
            const double fn = lp_weighted_norm(u, f);
            const double on = lp_weighted_norm(v, r.field);
            out["bmo"] = bmo;
            out["input_norm"] = fn;
            out["output_norm"] = on;
            out["ratio"] = (bmo * fn > 0) ? on / (bmo * fn) : 0.0;
        }
        if (!pk_out.empty()) save_json_file(pk_out, field_to_json(r.field));
        else out["field"] = field_to_json(r.field);
        std::printf("%s\n", out.dump(2).c_str());
        return 0;
    }

    if (ap->parsed()) {
        ConfigLayer layer;
        layer.load(ap_cfg);
        layer.fill(ap_w, ap_weight, "weight");
        layer.fill(ap_po, ap_p, "p");
        layer.fill(ap_f, ap_family, "family");
        layer.fill(ap_m, ap_parameter, "parameter");
        if (ap_weight.empty()) fail("InvalidModel", "ap needs --weight");
        MatrixWeightField w = weight_from_json(load_json_file(ap_weight));
        if (ap_p > 0.0 && ap_p != w.p) w = make_weight(std::move(w.field), ap_p);
        CubeFamily fam = ap_family == "aligned" ? CubeFamily::aligned : CubeFamily::dyadic;
        if (ap_family != "aligned" && ap_family != "dyadic")
            fail("InvalidModel", "family must be dyadic or aligned");
        ParamMode mode = w.grid().bi ? ParamMode::bi : ParamMode::one;
        if (ap_parameter == "one")
            mode = ParamMode::one;
        else if (ap_parameter == "bi")
            mode = ParamMode::bi;
        else if (!ap_parameter.empty())
            fail("InvalidModel", "parameter must be one or bi");
        const double val = ap_characteristic(w, fam, mode);
        std::printf("%s\n", json{{"ap", val},
                                 {"p", w.p},
                                 {"family", ap_family},
                                 {"parameter", mode == ParamMode::bi ? "bi" : "one"}}
                                .dump(2)
                                .c_str());
        return 0;
    }

    if (reduce->parsed()) {
        ConfigLayer layer;
        layer.load(rd_cfg);
        layer.fill(rd_w, rd_weight, "weight");
        layer.fill(rd_c, rd_cube, "cube");
        layer.fill(rd_c2, rd_cube2, "cube2");
        layer.fill(rd_po, rd_p, "p");
        layer.fill(rd_m, rd_method, "method");
        if (rd_weight.empty() || rd_cube.empty())
            fail("InvalidModel", "reduce needs --weight and --cube");
        MatrixWeightField w = weight_from_json(load_json_file(rd_weight));
        const double p = rd_p > 0.0 ? rd_p : w.p;
        Box box{parse_cube(rd_cube, w.grid().f1), std::nullopt};
        if (w.grid().bi) {
            if (rd_cube2.empty()) fail("InvalidModel", "bi-parameter grids need --cube2");
            box.c2 = parse_cube(rd_cube2, w.grid().f2);
        }
        ReducingOptions opts;
        if (rd_method == "p2")
            opts.method = ReducingMethod::closed_form_p2;
        else if (rd_method == "john")
            opts.method = ReducingMethod::john;
        else if (rd_method != "auto")
            fail("InvalidModel", "method must be auto, p2 or john");
        const ReducingOperator op = reducing_operator(w, box, p, opts);
        json mj = json::array();
        for (int i = 0; i < w.dim(); ++i)
            for (int j = 0; j < w.dim(); ++j)
                mj.push_back(json::array({op.matrix.matrix().at(i, j).real(),
                                          op.matrix.matrix().at(i, j).imag()}));
        const json out{{"matrix", mj},
                       {"p", p},
                       {"method", op.method == ReducingMethod::closed_form_p2 ? "closed_form_p2"
                                                                              : "john"},
                       {"certified_slack", op.certified_slack}};
        if (!rd_out.empty())
            save_json_file(rd_out, out);
        else
            std::printf("%s\n", out.dump(2).c_str());
        return 0;
    }

    if (maximal->parsed()) {
        ConfigLayer layer;
        layer.load(mx_cfg);
        layer.fill(mx_v, mx_variant, "variant");
        layer.fill(mx_w, mx_weight, "weight");
        layer.fill(mx_i, mx_input, "input");
        layer.fill(mx_f, mx_family, "family");
        if (mx_weight.empty() || mx_input.empty())
            fail("InvalidModel", "maximal needs --weight and --input");
        MatrixWeightField w = weight_from_json(load_json_file(mx_weight));
        AtomField f = field_from_json(load_json_file(mx_input));
        CubeFamily fam = mx_family == "aligned" ? CubeFamily::aligned : CubeFamily::dyadic;
        ScalarField out;
        if (mx_variant == "pointwise")
            out = maximal_pointwise(w, f, fam);
        else if (mx_variant == "reducing")
            out = maximal_reducing(w, f, fam);
        else if (mx_variant == "strong")
            out = maximal_strong_dyadic(w, f);
        else if (mx_variant == "convex")
            out = maximal_convex(w, f, fam);
        else
            fail("InvalidModel", "variant must be pointwise, reducing, strong or convex");
        AtomField of = make_field(out.grid, ValueKind::scalar, 1);
        for (size_t i = 0; i < out.v.size(); ++i) of.data[i] = out.v[i];
        const json j = field_to_json(of);
        if (!mx_out.empty())
            save_json_file(mx_out, j);
        else
            std::printf("%s\n", j.dump(2).c_str());
        return 0;
    }

    if (haar->parsed()) {
        ConfigLayer layer;
        layer.load(hr_cfg);
        layer.fill(hr_i, hr_input, "input");
        if (hr_input.empty()) fail("InvalidModel", "haar needs --input");
        AtomField f = field_from_json(load_json_file(hr_input));
        const json j = spectrum_to_json(haar_coeffs(f));
        if (!hr_out.empty())
            save_json_file(hr_out, j);
        else
            std::printf("%s\n", j.dump(2).c_str());
        return 0;
    }

    if (john->parsed()) {
        ConfigLayer layer;
        layer.load(jn_cfg);
        layer.fill(jn_b, jn_body, "body");
        if (jn_body.empty()) fail("InvalidModel", "john needs --body");
        ConvexBody k = body_from_json(load_json_file(jn_body));
        auto [ell, factor] = john_ellipsoid(k);
        const json j{{"ellipsoid", body_to_json(ell)}, {"sandwich_factor", factor}};
        if (!jn_out.empty())
            save_json_file(jn_out, j);
        else
            std::printf("%s\n", j.dump(2).c_str());
        return 0;
    }

    if (bmo->parsed()) {
        ConfigLayer layer;
        layer.load(bm_cfg);
        layer.fill(bm_s, bm_symbol, "symbol");
        layer.fill(bm_o, bm_omega, "omega");
        (void)bm_w;
        if (bm_symbol.empty() || bm_weights.size() != 2)
            fail("InvalidModel", "bmo needs --symbol and --weights U.json V.json");
        MatrixWeightField u = weight_from_json(load_json_file(bm_weights[0]));
        MatrixWeightField v = weight_from_json(load_json_file(bm_weights[1]));
        const Grid g = u.grid();
        SymbolSpectrum b = symbol_from_json(load_json_file(bm_symbol), &g, u.dim());
        OmegaFamily fam = bm_omega == "sampled" ? sampled_family(b, 0x5eedull)
                                                : exhaustive_family(b);
        const double val = bmo_prod_norm(b, u, v, fam);
        std::printf("%s\n", json{{"bmo", val},
                                 {"omega", bm_omega},
                                 {"exhaustive", fam.exhaustive},
                                 {"support", support_rectangles(b).size()}}
                                .dump(2)
                                .c_str());
        return 0;
    }

    if (h1->parsed()) {
        ConfigLayer layer;
        layer.load(h1_cfg);
        layer.fill(h1_s, h1_phi, "phi");
        (void)h1_w;
        if (h1_phi.empty() || h1_weights.size() != 2)
            fail("InvalidModel", "h1 needs --phi and --weights U.json V.json");
        MatrixWeightField u = weight_from_json(load_json_file(h1_weights[0]));
        MatrixWeightField v = weight_from_json(load_json_file(h1_weights[1]));
        const Grid g = u.grid();
        SymbolSpectrum phi = symbol_from_json(load_json_file(h1_phi), &g, u.dim());
        std::printf("%s\n", json{{"h1", h1_norm(phi, u, v)}}.dump(2).c_str());
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CertificationError& e) {
        std::fprintf(stderr, "certification failure: %s\n", e.what());
        return 3;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
