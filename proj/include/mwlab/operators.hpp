#ifndef MWLAB_OPERATORS_HPP
#define MWLAB_OPERATORS_HPP

#include <map>

#include "mwlab/convex.hpp"
#include "mwlab/haar.hpp"
#include "mwlab/weights.hpp"

namespace mwlab {

// All suprema below are exact finite maxima over the truncated grid families.

// M_W f(x) = max_{Q in family, Q owns x} avg_Q |W(x)^{1/p} f(y)|
ScalarField maximal_pointwise(const MatrixWeightField& w, const AtomField& f, CubeFamily family);

// reducing-operator variant: avg_Q |W_Q f(y)| with certified W_Q
ScalarField maximal_reducing(const MatrixWeightField& w, const AtomField& f, CubeFamily family,
                             ReducingCache* cache = nullptr);

// strong bi-parameter dyadic maximal: sup over grid rectangles
ScalarField maximal_strong_dyadic(const MatrixWeightField& w, const AtomField& f);

// unweighted dyadic maximal of a nonnegative scalar field (family = dyadic
// cubes / rectangles of the grid)
ScalarField maximal_unweighted(const ScalarField& f, CubeFamily family);

// convex-body maximal: |M_W^K F|(x) = max_Q |A_Q(W(x)^{1/p} F)|
ScalarField maximal_convex(const MatrixWeightField& w, const AtomField& f, CubeFamily family);
ScalarField maximal_convex(const MatrixWeightField& w, const BodyField& f, CubeFamily family);

enum class SquareVariant { pointwise, reducing };

// bi-parameter square function from cancellative Haar coefficients; degenerate
// factors (depth 0) reduce it to the one-parameter square function
ScalarField square_function(const MatrixWeightField& v, const AtomField& g, SquareVariant variant,
                            ReducingCache* cache = nullptr);

// [M~ S~]: inner maximal over R1 of |U_{R1 x R2} <f_{R2}^{e2,2}>_{R1}|, outer
// l^2 aggregation over (R2, e2)
ScalarField mixed_ms(const MatrixWeightField& u, const AtomField& f, ReducingCache* cache = nullptr);

using AtomSet = std::vector<std::uint8_t>;  // one flag per atom

// N_Omega(x) = sup over grid rectangles R inside Omega of |V(x)^{-1/p} V_R| 1_R(x)
ScalarField omega_majorant(const MatrixWeightField& v, const AtomSet& omega,
                           ReducingCache* cache = nullptr);

// signs in {-1, 0, 1} over the coefficient cubes of one factor
struct MultiplierSigns {
    std::map<std::int64_t, int> values;  // keyed by coefficient CubeIndexer index

    int at(std::int64_t cube_index) const {
        auto it = values.find(cube_index);
        return it == values.end() ? 0 : it->second;
    }
    void set(std::int64_t cube_index, int v);
};

// Haar multiplier; slot 0 acts on one-parameter fields, slots 1/2 act on the
// chosen factor of a bi-parameter field. Mean/residual blocks pass through.
AtomField haar_multiplier(const MultiplierSigns& sigma, const AtomField& f, int slot = 0);

// exact L^p norms on the truncated model
double lp_norm(const ScalarField& f, double p);
double lp_weighted_norm(const MatrixWeightField& w, const AtomField& f);
// pointwise |W(x)^{1/p} f(x)|
ScalarField weighted_modulus(const MatrixWeightField& w, const AtomField& f);

} // namespace mwlab

#endif
