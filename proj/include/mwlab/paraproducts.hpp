#ifndef MWLAB_PARAPRODUCTS_HPP
#define MWLAB_PARAPRODUCTS_HPP

#include "mwlab/haar.hpp"
#include "mwlab/operators.hpp"
#include "mwlab/weights.hpp"

namespace mwlab {

// Finitely supported map (rectangle, bi-parameter signature) -> matrix.
struct SymbolSpectrum {
    Grid grid;  // bi-parameter
    int d = 1;

    struct Entry {
        Cube r1, r2;
        Sig e1 = 0, e2 = 0;
        Matrix value;
    };
    std::vector<Entry> entries;

    void add(const Cube& r1, Sig e1, const Cube& r2, Sig e2, Matrix v);
    SymbolSpectrum adjoint() const;  // entrywise conjugate transpose
};

// cancellative bi-parameter Haar coefficients of a matrix field
SymbolSpectrum symbol_of(const AtomField& b);

enum class ParaKind { p11, p00, gamma, p10, p01, g10, g10s, g01, g01s };

struct ParaResult {
    AtomField field;
    // set when a Gamma kind was requested on a factor whose signature set is a
    // singleton: the sum is empty and the result identically zero
    bool empty_signature_warning = false;
};

ParaResult paraproduct(ParaKind kind, const SymbolSpectrum& b, const AtomField& f);

// Pi(11) + Pi(10) + Pi(01) + Pi(00)
ParaResult symmetrized_paraproduct(const SymbolSpectrum& b, const AtomField& f);

// [T1,[T2, multiplication-by-B]] and the same bicommutator with the
// symmetrized paraproduct in place of the multiplication
struct BicommutatorResult {
    AtomField multiplication_side;
    AtomField paraproduct_side;
};
BicommutatorResult bicommutator(const MultiplierSigns& sigma1, const MultiplierSigns& sigma2,
                                const AtomField& b, const AtomField& f);

} // namespace mwlab

#endif
