#ifndef MWLAB_CONVEX_HPP
#define MWLAB_CONVEX_HPP

#include <span>
#include <vector>

#include "mwlab/grid.hpp"
#include "mwlab/hermitian.hpp"
#include "mwlab/john.hpp"

namespace mwlab {

// Balanced (complex-symmetric) closed convex subset of C^d: the zero body, an
// ellipsoid M * unit-ball with M Hermitian positive definite, or the balanced
// convex hull of finitely many generators.
class ConvexBody {
public:
    enum class Kind { zero, ellipsoid, hull };

    static ConvexBody zero_body(int d);
    static ConvexBody ellipsoid(PDMatrix m);
    static ConvexBody balanced_hull(int d, std::vector<Vec> gens, int phase_count = 64);

    Kind kind() const { return kind_; }
    int dim() const { return d_; }
    const PDMatrix& matrix() const { return mat_; }
    const std::vector<Vec>& generators() const { return gens_; }
    int phase_count() const { return phase_count_; }

    // h_K(u) = sup { |<w,u>| : w in K }
    double support(std::span<const cx> u) const;
    // |K| = sup { |w| : w in K }
    double norm() const;
    // a member v attaining support(u) with <v,u> real nonnegative
    Vec support_point(std::span<const cx> u) const;

private:
    Kind kind_ = Kind::zero;
    int d_ = 1;
    PDMatrix mat_;
    std::vector<Vec> gens_;
    int phase_count_ = 64;
};

ConvexBody matrix_apply(const Matrix& a, const ConvexBody& k);

// l^q Minkowski sum over a finite list; q = 1 is the plain Minkowski sum.
// Returned as a balanced hull over deterministically chosen extreme members.
ConvexBody minkowski_lq_sum(std::span<const ConvexBody> bodies, double q);

// Member of maximal norm with the documented deterministic tie-break.
Vec max_norm_selection(const ConvexBody& k);

struct BodyField {
    Grid grid;
    int d = 1;
    std::vector<ConvexBody> bodies;
};

// Averaging operator A_Q applied to the balanced-segment lift of a vector
// field: the zonotope of { f(y) |atom| / |Q| : y in Q }.
ConvexBody average_body(const AtomField& f, const Box& q);
// Same but with the members premultiplied by a matrix (used by the maximal op).
ConvexBody average_body_mapped(const AtomField& f, const Box& q, const Matrix& a);

struct JohnEllipsoidResult {
    ConvexBody ellipsoid;
    double sandwich_factor;
};

// Maximum-volume inscribed ellipsoid with sampled certification.
JohnEllipsoidResult john_ellipsoid(const ConvexBody& k, const JohnOptions* opts = nullptr);

} // namespace mwlab

#endif
