#ifndef MWLAB_HAAR_HPP
#define MWLAB_HAAR_HPP

#include "mwlab/grid.hpp"

namespace mwlab {

// Haar coefficients of an atom field, with the residual blocks needed for an
// exact inverse on the truncated grid:
//   one-parameter: mean + cancellative coefficients (cubes at levels < depth);
//   bi-parameter:  mean (x) mean, canc (x) mean (`cm`), mean (x) canc (`mc`)
//                  and the tensor block `cc`.
struct Spectrum {
    Grid grid;
    ValueKind kind = ValueKind::scalar;
    int d = 1;

    std::vector<Sig> sigs1, sigs2;
    CubeIndexer idx1, idx2;  // coefficient cubes, levels 0..depth-1

    std::vector<cx> mean;
    std::vector<cx> cc;
    std::vector<cx> cm;
    std::vector<cx> mc;

    int comp() const {
        switch (kind) {
            case ValueKind::scalar: return 1;
            case ValueKind::vector: return d;
            case ValueKind::matrix: return d * d;
        }
        return 1;
    }
    std::int64_t blocks1() const { return idx1.count() * static_cast<std::int64_t>(sigs1.size()); }
    std::int64_t blocks2() const { return idx2.count() * static_cast<std::int64_t>(sigs2.size()); }

    std::span<cx> cc1(std::int64_t cube, int sig) {
        const std::int64_t b = cube * static_cast<std::int64_t>(sigs1.size()) + sig;
        return {cc.data() + b * comp(), static_cast<size_t>(comp())};
    }
    std::span<const cx> cc1(std::int64_t cube, int sig) const {
        const std::int64_t b = cube * static_cast<std::int64_t>(sigs1.size()) + sig;
        return {cc.data() + b * comp(), static_cast<size_t>(comp())};
    }
    std::span<cx> cc2(std::int64_t c1, int s1, std::int64_t c2, int s2) {
        const std::int64_t b =
            (c1 * static_cast<std::int64_t>(sigs1.size()) + s1) * blocks2() +
            c2 * static_cast<std::int64_t>(sigs2.size()) + s2;
        return {cc.data() + b * comp(), static_cast<size_t>(comp())};
    }
    std::span<const cx> cc2(std::int64_t c1, int s1, std::int64_t c2, int s2) const {
        const std::int64_t b =
            (c1 * static_cast<std::int64_t>(sigs1.size()) + s1) * blocks2() +
            c2 * static_cast<std::int64_t>(sigs2.size()) + s2;
        return {cc.data() + b * comp(), static_cast<size_t>(comp())};
    }
};

Spectrum haar_coeffs(const AtomField& f);
Spectrum haar_coeffs(const AtomField& f, const Grid& g);  // checks GridMismatch
AtomField haar_reconstruct(const Spectrum& s);

// Partial Haar coefficient of a bi-parameter field: a field on the other factor.
AtomField slice_coeffs(const AtomField& f, int slot, const Cube& p, Sig eps);

// L^2 norm squared of a field (exact atom sum).
double field_norm2(const AtomField& f);

} // namespace mwlab

#endif
