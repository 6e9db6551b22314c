#ifndef MWLAB_JOHN_HPP
#define MWLAB_JOHN_HPP

#include <functional>

#include "mwlab/hermitian.hpp"

namespace mwlab {

// Target set K for the maximum-volume inscribed ellipsoid, described by a
// norm phi and a per-direction scale r: the inclusion M*ball subset K is the
// semi-infinite constraint phi(M u) <= r(u) on the unit sphere.
//   norm-ball mode: phi = the ball's norm, r == 1;
//   hull mode:      phi = Euclidean norm, r = support function of the hull.
struct JohnTarget {
    int d = 1;
    std::function<double(std::span<const cx>)> phi;
    // real gradient g of phi at y, in the pairing dphi = Re sum_k du_k conj(g_k)
    std::function<Vec(std::span<const cx>)> phi_grad;
    std::function<double(std::span<const cx>)> dirscale;
    std::function<Vec(std::span<const cx>)> dirscale_grad;  // of r (not log r); null if r == 1
    // optional batched phi over n vectors of length d (used by the hot loops)
    std::function<void(const cx*, std::size_t, double*)> phi_batch;
    // bilinear forms of the real Hessian of phi at y against a span of
    // directions: out[k*nb+l] = b_k^T Hess(phi)(y) b_l. Enables exact Newton.
    std::function<void(std::span<const cx> y, const std::vector<Vec>& b, double* out)> phi_hess;
};

struct JohnOptions {
    int base_dirs = 96;
    int rounds = 3;
    int stages = 24;
    int iters = 60;
    int polish_starts = 16;
    int cert_dirs = 1024;
    double mu0 = 0.5;
    double mu_factor = 0.3;
    std::uint64_t seed = 0x6a6f686eull;
    const Matrix* warm = nullptr;
    std::vector<Vec> adapted;
    // after the barrier, refine on the identified contact set by a KKT Newton
    // solve (machine-precision optimum for targets with finitely many contacts)
    bool crossover = false;
};

struct JohnResult {
    PDMatrix m;          // E = m * closed unit ball
    double covering;     // measured factor with K inside covering * E
    double inclusion;    // residual max constraint after the final shrink
};

JohnResult john_solve(const JohnTarget& target, const JohnOptions& opts = {});

} // namespace mwlab

#endif
