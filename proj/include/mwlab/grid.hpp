#ifndef MWLAB_GRID_HPP
#define MWLAB_GRID_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mwlab/errors.hpp"
#include "mwlab/hermitian.hpp"

namespace mwlab {

// One factor of the (possibly bi-parameter) model: the unit cube [0,1)^dim
// split dyadically to `depth` levels. Atoms are the level-`depth` cells.
struct Factor {
    int dim = 1;    // 1 or 2
    int depth = 1;  // >= 0; 0 means a single atom (degenerate factor)

    int axis_atoms() const { return 1 << depth; }
    std::int64_t atom_count() const { return std::int64_t{1} << (depth * dim); }
    double atom_measure() const { return std::ldexp(1.0, -depth * dim); }
    bool operator==(const Factor&) const = default;
};

// Dyadic cell of a factor: level plus per-axis position.
struct Cube {
    int level = 0;
    std::array<int, 2> pos{0, 0};
    bool operator==(const Cube&) const = default;
};

inline double cube_measure(const Factor& f, const Cube& q) {
    return std::ldexp(1.0, -q.level * f.dim);
}

// Axis-aligned box of whole atoms inside a factor (atom-index ranges per axis).
struct FactorBox {
    std::array<int, 2> lo{0, 0};
    std::array<int, 2> hi{1, 1};
    bool operator==(const FactorBox&) const = default;
};

FactorBox cube_box(const Factor& f, const Cube& q);
double box_measure(const Factor& f, const FactorBox& b);
bool box_contains_atom(const Factor& f, const FactorBox& b, int atom);
bool box_contains(const FactorBox& outer, const FactorBox& inner, int dim);

struct Grid {
    Factor f1;
    Factor f2;
    bool bi = false;

    std::int64_t atom_count() const { return f1.atom_count() * (bi ? f2.atom_count() : 1); }
    double atom_measure() const { return f1.atom_measure() * (bi ? f2.atom_measure() : 1.0); }
    std::int64_t atoms2() const { return bi ? f2.atom_count() : 1; }
    bool operator==(const Grid&) const = default;
};

inline Grid one_parameter(int dim, int depth) { return Grid{Factor{dim, depth}, Factor{}, false}; }
inline Grid biparameter(int n, int depth1, int m, int depth2) {
    return Grid{Factor{n, depth1}, Factor{m, depth2}, true};
}

// Cube in factor 1 plus (in the bi-parameter case) cube in factor 2.
struct Box {
    Cube c1;
    std::optional<Cube> c2;
};

double box_measure(const Grid& g, const Box& b);
void for_each_atom(const Grid& g, const Box& b, const std::function<void(std::int64_t)>& fn);
std::vector<std::int64_t> atoms_of(const Grid& g, const Box& b);
bool box_contains_atom(const Grid& g, const Box& b, std::int64_t atom);

// --------------------------------------------------------------- families ----

// All dyadic cells of a factor, levels 0..max_level (row-major within level).
std::vector<Cube> dyadic_cubes(const Factor& f, int max_level);
inline std::vector<Cube> dyadic_cubes(const Factor& f) { return dyadic_cubes(f, f.depth); }

// All atom-aligned cubes (equal side length along every axis).
std::vector<FactorBox> aligned_cubes(const Factor& f);

// Contiguous indexing for dyadic cells at levels 0..max_level.
class CubeIndexer {
public:
    CubeIndexer() = default;
    CubeIndexer(const Factor& f, int max_level);
    std::int64_t index(const Cube& q) const;
    std::int64_t count() const { return total_; }
    Cube cube(std::int64_t idx) const;

private:
    int dim_ = 1;
    int max_level_ = 0;
    std::vector<std::int64_t> offsets_;
    std::int64_t total_ = 0;
};

// -------------------------------------------------------------- signatures ----

// Haar signature over a factor: bit i set means the i-th axis carries the
// noncancellative factor. The all-ones mask is excluded.
using Sig = std::uint8_t;

std::vector<Sig> signatures(int dim);

// Values of the L^2-normalized Haar function h_Q^sig on the atoms of the
// factor; nonzero only inside Q. Left child carries the minus sign.
double haar_value(const Factor& f, const Cube& q, Sig sig, int atom);

// ------------------------------------------------------------------ fields ----

enum class ValueKind { scalar, vector, matrix };

struct AtomField {
    Grid grid;
    ValueKind kind = ValueKind::scalar;
    int d = 1;
    std::vector<cx> data;  // atom-major, comp() entries per atom

    int comp() const {
        switch (kind) {
            case ValueKind::scalar: return 1;
            case ValueKind::vector: return d;
            case ValueKind::matrix: return d * d;
        }
        return 1;
    }
    std::span<cx> at(std::int64_t atom) {
        return {data.data() + atom * comp(), static_cast<size_t>(comp())};
    }
    std::span<const cx> at(std::int64_t atom) const {
        return {data.data() + atom * comp(), static_cast<size_t>(comp())};
    }
};

AtomField make_field(const Grid& g, ValueKind kind, int d);

struct ScalarField {
    Grid grid;
    std::vector<double> v;
};

} // namespace mwlab

#endif
