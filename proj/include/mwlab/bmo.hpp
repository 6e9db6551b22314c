#ifndef MWLAB_BMO_HPP
#define MWLAB_BMO_HPP

#include "mwlab/operators.hpp"
#include "mwlab/paraproducts.hpp"

namespace mwlab {

std::vector<Box> support_rectangles(const SymbolSpectrum& b);
AtomSet rect_union(const Grid& g, std::span<const Box> rects);
double atomset_measure(const Grid& g, const AtomSet& s);

// Families of candidate sets Omega for the product BMO supremum. The
// exhaustive family (all unions of support rectangles) attains the true sup
// over measurable sets: any Omega can be replaced by the union of the support
// rectangles it contains without decreasing the objective.
struct OmegaFamily {
    std::vector<AtomSet> members;
    bool exhaustive = false;
};
OmegaFamily exhaustive_family(const SymbolSpectrum& b);  // support <= 10 rectangles
OmegaFamily sampled_family(const SymbolSpectrum& b, std::uint64_t seed, int unions = 512);

double bmo_prod_norm(const SymbolSpectrum& b, const MatrixWeightField& u,
                     const MatrixWeightField& v, const OmegaFamily& family,
                     ReducingCache* ucache = nullptr, ReducingCache* vcache = nullptr);

// integrand of the H^1 norm (the square-function-style field F)
ScalarField h1_integrand(const SymbolSpectrum& phi, const MatrixWeightField& u,
                         const MatrixWeightField& v, ReducingCache* ucache = nullptr);
double h1_norm(const SymbolSpectrum& phi, const MatrixWeightField& u, const MatrixWeightField& v,
               ReducingCache* ucache = nullptr);

// trace pairing sum tr((B_R^eps)^* Phi_R^eps) over the common support
cx duality_pairing(const SymbolSpectrum& b, const SymbolSpectrum& phi);

struct ShadowLevel {
    int k = 0;
    AtomSet omega;        // { F > 2^k }
    std::vector<Box> rects;  // the class B_k
    AtomSet omega_tilde;  // { M_D 1_omega > 1/2 }
};
struct ShadowDecomposition {
    std::vector<ShadowLevel> levels;
};
ShadowDecomposition shadow_decomposition(const SymbolSpectrum& phi, const MatrixWeightField& u,
                                         const MatrixWeightField& v, double p);

} // namespace mwlab

#endif
