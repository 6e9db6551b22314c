#ifndef MWLAB_WEIGHTS_HPP
#define MWLAB_WEIGHTS_HPP

#include <map>
#include <memory>

#include "mwlab/grid.hpp"
#include "mwlab/john.hpp"

namespace mwlab {

// Matrix weight: a positive-definite matrix per atom plus its exponent context.
struct MatrixWeightField {
    AtomField field;  // kind == matrix
    double p = 2.0;
    std::vector<PDMatrix> atoms;  // validated per-atom values

    int dim() const { return field.d; }
    const Grid& grid() const { return field.grid; }
};

// Validates every atom (Hermitian positive definite) and 1 < p < infinity.
MatrixWeightField make_weight(AtomField f, double p);
MatrixWeightField identity_weight(const Grid& g, int d, double p);

// W' = W^{-1/(p-1)} with exponent context p' = p/(p-1).
MatrixWeightField dual_weight(const MatrixWeightField& w);

enum class CubeFamily { dyadic, aligned };
enum class ParamMode { one, bi };

// The A_p double-average over one box, evaluated exactly from atoms. This is
// also the C_E constant of the inverse-versus-prime lemma.
double box_characteristic(const MatrixWeightField& w, const Box& e);

// sup of box_characteristic over the whole family.
double ap_characteristic(const MatrixWeightField& w, CubeFamily family, ParamMode mode);

enum class ReducingMethod { auto_select, closed_form_p2, john };

struct ReducingOperator {
    PDMatrix matrix;
    Box box;
    double p = 2.0;
    ReducingMethod method = ReducingMethod::closed_form_p2;
    double certified_slack = 0.0;  // measured covering / sqrt(d) - 1, clamped at 0
};

struct ReducingOptions {
    ReducingMethod method = ReducingMethod::auto_select;
    double max_slack = 0.05;  // SandwichCertificationFailed beyond sqrt(d)(1+max_slack)
    const Matrix* warm = nullptr;
    int base_dirs = 96;
    int cert_dirs = 1024;
};

// Positive-definite matrix sandwiching e -> (avg_E |W^{1/p} e|^p)^{1/p} within
// sqrt(d)(1 + slack). p = 2 and d = 1 admit exact closed forms; the general
// case takes the John ellipsoid of the unit ball of that norm.
ReducingOperator reducing_operator(const MatrixWeightField& w, const Box& e, double p,
                                   const ReducingOptions& opts = {});

// avg_E of W (matrix mean over the box).
PDMatrix box_average(const MatrixWeightField& w, const Box& e);

// (avg_E |W^{1/p} e|^p)^{1/p} for a single direction.
double rho_norm(const MatrixWeightField& w, const Box& e, double p, std::span<const cx> dir);

// precomputed W_a^{1/p} roots for repeated rho evaluations over one box
struct RhoEvaluator {
    std::vector<Matrix> roots;
    double p = 2.0;
    double operator()(std::span<const cx> dir) const;
};
RhoEvaluator make_rho_evaluator(const MatrixWeightField& w, const Box& e, double p);

// Memoizes reducing operators over boxes of a fixed weight and exponent, with
// per-atom W^{1/p} powers shared across solves.
class ReducingCache {
public:
    ReducingCache(const MatrixWeightField& w, double p, ReducingOptions opts = {});
    const ReducingOperator& at(const Box& e);
    const MatrixWeightField& weight() const { return w_; }
    double exponent() const { return p_; }

private:
    const MatrixWeightField& w_;
    double p_;
    ReducingOptions opts_;
    std::map<std::array<int, 8>, std::unique_ptr<ReducingOperator>> memo_;
};

// Inner-then-outer versus direct reducing operator over a grid rectangle E x F.
struct IteratedReducing {
    PDMatrix inner_then_outer;
    PDMatrix direct;
};
IteratedReducing iterated_reducing(const MatrixWeightField& w, const Cube& e, const Cube& f,
                                   double p);

// Restriction of a bi-parameter weight to one coordinate atom.
MatrixWeightField slice_weight(const MatrixWeightField& w, int slot, std::int64_t coord_atom);

} // namespace mwlab

#endif
