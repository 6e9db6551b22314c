#include "mwlab/john.hpp"

#include <cstdio>
#include <cstdlib>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mwlab/rng.hpp"

namespace mwlab {

namespace {

Vec random_dir(Rng& rng, int d) {
    Vec u(d);
    double n2 = 0.0;
    do {
        n2 = 0.0;
        for (int k = 0; k < d; ++k) {
            u[k] = cx(rng.normal(), rng.normal());
            n2 += std::norm(u[k]);
        }
    } while (n2 < 1e-12);
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& z : u) z *= inv;
    return u;
}

// Orthonormal basis of Hermitian d x d matrices under Re tr(XY).
std::vector<Matrix> hermitian_basis(int d) {
    std::vector<Matrix> basis;
    const double r = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < d; ++i) {
        Matrix b(d);
        b.at(i, i) = 1.0;
        basis.push_back(std::move(b));
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            Matrix b(d);
            b.at(i, j) = r;
            b.at(j, i) = r;
            basis.push_back(b);
            Matrix c(d);
            c.at(i, j) = cx(0, r);
            c.at(j, i) = cx(0, -r);
            basis.push_back(std::move(c));
        }
    return basis;
}

bool cholesky_solve(std::vector<double> a, const std::vector<double>& b, std::vector<double>& x) {
    const int n = static_cast<int>(b.size());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[static_cast<size_t>(i) * n + j];
            for (int k = 0; k < j; ++k)
                s -= a[static_cast<size_t>(i) * n + k] * a[static_cast<size_t>(j) * n + k];
            if (i == j) {
                if (s <= 0.0) return false;
                a[static_cast<size_t>(i) * n + i] = std::sqrt(s);
            } else {
                a[static_cast<size_t>(i) * n + j] = s / a[static_cast<size_t>(j) * n + j];
            }
        }
    }
    x = b;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < i; ++k) x[i] -= a[static_cast<size_t>(i) * n + k] * x[k];
        x[i] /= a[static_cast<size_t>(i) * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        for (int k = i + 1; k < n; ++k) x[i] -= a[static_cast<size_t>(k) * n + i] * x[k];
        x[i] /= a[static_cast<size_t>(i) * n + i];
    }
    return true;
}

class Solver {
public:
    Solver(const JohnTarget& t, const JohnOptions& o)
        : t_(t), o_(o), d_(t.d), basis_(hermitian_basis(t.d)), r_(static_cast<int>(basis_.size())) {}

    JohnResult run() {
        build_pool();
        Matrix m = (d_ == 1) ? exact_1d() : outer_loop();
        return finish(std::move(m));
    }

private:
    const JohnTarget& t_;
    const JohnOptions& o_;
    int d_;
    std::vector<Matrix> basis_;
    int r_;

    std::vector<Vec> dirs_;
    std::vector<double> rs_;
    std::vector<cx> yflat_;
    std::vector<double> phi_;

    // ------------------------------------------------------------- pool ----

    void add_dir(Vec u) {
        const double n = vec_norm(u);
        if (n < 1e-14) return;
        for (auto& z : u) z /= n;
        for (const Vec& v : dirs_)
            if (std::abs(std::abs(vec_dot(u, v)) - 1.0) < 1e-13) return;
        rs_.push_back(t_.dirscale(u));
        dirs_.push_back(std::move(u));
    }

    void build_pool() {
        for (int k = 0; k < d_; ++k) {
            Vec e(d_, cx{});
            e[k] = 1.0;
            add_dir(std::move(e));
        }
        for (const Vec& u : o_.adapted) add_dir(u);
        Rng rng(o_.seed);
        for (int i = 0; i < o_.base_dirs; ++i) add_dir(random_dir(rng, d_));
    }

    void eval_pool(const Matrix& m) {
        const size_t n = dirs_.size();
        yflat_.resize(n * d_);
        phi_.resize(n);
        for (size_t i = 0; i < n; ++i) {
            const Vec& u = dirs_[i];
            cx* y = yflat_.data() + i * d_;
            for (int row = 0; row < d_; ++row) {
                cx s = 0.0;
                for (int k = 0; k < d_; ++k) s += m.at(row, k) * u[k];
                y[row] = s;
            }
        }
        if (t_.phi_batch) {
            t_.phi_batch(yflat_.data(), n, phi_.data());
        } else {
            for (size_t i = 0; i < n; ++i)
                phi_[i] = t_.phi({yflat_.data() + i * d_, static_cast<size_t>(d_)});
        }
    }

    double pool_max_ratio(const Matrix& m) {
        eval_pool(m);
        double s = 0.0;
        for (size_t i = 0; i < dirs_.size(); ++i) s = std::max(s, phi_[i] / rs_[i]);
        return s;
    }

    // ---------------------------------------------------- barrier newton ----

    double fval(const Matrix& m, double mu) {
        EigenH e = eig_hermitian(m);
        if (e.lambda.front() <= 0.0) return -1e300;
        double ld = 0.0;
        for (double l : e.lambda) ld += std::log(l);
        eval_pool(m);
        double s = 0.0;
        for (size_t i = 0; i < dirs_.size(); ++i) {
            const double slack = rs_[i] - phi_[i];
            if (slack <= 0.0) return -1e300;
            s += std::log(slack / rs_[i]);
        }
        return ld + mu * s;
    }

    Matrix inverse_of(const Matrix& m) const {
        EigenH e = eig_hermitian(m);
        Matrix inv(d_);
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j) {
                cx s = 0.0;
                for (int k = 0; k < d_; ++k)
                    s += e.u.at(i, k) * (1.0 / e.lambda[k]) * std::conj(e.u.at(j, k));
                inv.at(i, j) = s;
            }
        return inv;
    }

    // gradient and Hessian of F(M) = logdet M + mu sum log((r_i - phi_i)/r_i)
    // in the hermitian basis; assumes m is strictly feasible (eval_pool fresh)
    void fgrad_fhess(const Matrix& m, double mu, std::vector<double>& g,
                     std::vector<double>* hess) {
        const Matrix minv = inverse_of(m);
        g.assign(r_, 0.0);
        for (int k = 0; k < r_; ++k) {
            cx tr = 0.0;
            for (int i = 0; i < d_; ++i)
                for (int j = 0; j < d_; ++j) tr += minv.at(i, j) * basis_[k].at(j, i);
            g[k] = tr.real();
        }
        if (hess) {
            hess->assign(static_cast<size_t>(r_) * r_, 0.0);
            // d2 logdet = -Re tr(Minv B_k Minv B_l)
            for (int k = 0; k < r_; ++k) {
                const Matrix mk = minv * basis_[k];
                for (int l = k; l < r_; ++l) {
                    const Matrix ml = minv * basis_[l];
                    cx tr = 0.0;
                    for (int i = 0; i < d_; ++i)
                        for (int j = 0; j < d_; ++j) tr += mk.at(i, j) * ml.at(j, i);
                    (*hess)[static_cast<size_t>(k) * r_ + l] -= tr.real();
                    if (l != k) (*hess)[static_cast<size_t>(l) * r_ + k] -= tr.real();
                }
            }
        }
        std::vector<Vec> bu(r_);
        std::vector<double> cg(r_), chess(static_cast<size_t>(r_) * r_);
        for (size_t i = 0; i < dirs_.size(); ++i) {
            const double slack = rs_[i] - phi_[i];
            const std::span<const cx> y{yflat_.data() + i * d_, static_cast<size_t>(d_)};
            const Vec gy = t_.phi_grad(y);
            for (int k = 0; k < r_; ++k) bu[k] = basis_[k].apply(dirs_[i]);
            for (int k = 0; k < r_; ++k) cg[k] = vec_dot(bu[k], gy).real();
            const double w = mu / slack;
            for (int k = 0; k < r_; ++k) g[k] -= w * cg[k];
            if (hess) {
                // -mu [ Hess(phi)/slack + grad grad^T / slack^2 ]
                if (t_.phi_hess) {
                    t_.phi_hess(y, bu, chess.data());
                    for (int k = 0; k < r_; ++k)
                        for (int l = 0; l < r_; ++l)
                            (*hess)[static_cast<size_t>(k) * r_ + l] -=
                                w * chess[static_cast<size_t>(k) * r_ + l];
                }
                const double w2 = mu / (slack * slack);
                for (int k = 0; k < r_; ++k)
                    for (int l = 0; l < r_; ++l)
                        (*hess)[static_cast<size_t>(k) * r_ + l] -= w2 * cg[k] * cg[l];
            }
        }
    }

    Matrix add_step(const Matrix& m, const std::vector<double>& delta, double t) const {
        Matrix m2 = m;
        for (int k = 0; k < r_; ++k)
            for (int i = 0; i < d_; ++i)
                for (int j = 0; j < d_; ++j) m2.at(i, j) += t * delta[k] * basis_[k].at(i, j);
        for (int i = 0; i < d_; ++i)
            for (int j = i; j < d_; ++j) {
                const cx v = 0.5 * (m2.at(i, j) + std::conj(m2.at(j, i)));
                m2.at(i, j) = v;
                m2.at(j, i) = std::conj(v);
            }
        return m2;
    }

    Matrix barrier(Matrix m, double mu0, double mu_min) {
        std::vector<double> g, hess, delta;
        for (double mu = mu0; mu > mu_min; mu *= o_.mu_factor) {
            bool have_hess = false;
            for (int it = 0; it < o_.iters; ++it) {
                double f0 = fval(m, mu);
                while (f0 <= -1e299) {
                    m = m * cx(0.7, 0.0);
                    f0 = fval(m, mu);
                    have_hess = false;
                }
                // the Hessian is refreshed once per stage (or after a failed
                // step); gradients stay fresh every iteration
                const bool fresh = !have_hess;
                fgrad_fhess(m, mu, g, have_hess ? nullptr : &hess);
                have_hess = true;
                double gn = 0.0;
                for (double x : g) gn += x * x;
                gn = std::sqrt(gn);

                std::vector<double> a(hess.size());
                for (int k = 0; k < r_; ++k)
                    for (int l = 0; l < r_; ++l)
                        a[static_cast<size_t>(k) * r_ + l] =
                            -0.5 * (hess[static_cast<size_t>(k) * r_ + l] +
                                    hess[static_cast<size_t>(l) * r_ + k]);
                double ridge = 0.0;
                bool ok = cholesky_solve(a, g, delta);
                while (!ok && ridge < 1e6) {
                    ridge = (ridge == 0.0) ? 1e-10 : ridge * 100.0;
                    std::vector<double> ar = a;
                    for (int k = 0; k < r_; ++k) ar[static_cast<size_t>(k) * r_ + k] += ridge;
                    ok = cholesky_solve(ar, g, delta);
                }
                if (!ok) break;
                double dec = 0.0;
                for (int k = 0; k < r_; ++k) dec += delta[k] * g[k];
                if (!(dec > 0.0)) break;
                if (dec < 1e-13 * std::max(1.0, std::abs(f0))) break;

                double t = 1.0;
                bool improved = false;
                for (int bt = 0; bt < 70; ++bt) {
                    Matrix m2 = add_step(m, delta, t);
                    const double f2 = fval(m2, mu);
                    if (f2 > f0) {
                        m = std::move(m2);
                        improved = true;
                        break;
                    }
                    t *= 0.5;
                }
                if (!improved) {
                    if (fresh) break;
                    have_hess = false;  // stale curvature: refresh and retry
                    --it;
                    continue;
                }
            }
        }
        return m;
    }

    // --------------------------------------------------------- crossover ----

    static bool lu_solve(std::vector<double> a, std::vector<double>& b) {
        const int n = static_cast<int>(b.size());
        std::vector<int> piv(n);
        for (int i = 0; i < n; ++i) piv[i] = i;
        for (int c = 0; c < n; ++c) {
            int pr = c;
            for (int i = c + 1; i < n; ++i)
                if (std::abs(a[static_cast<size_t>(i) * n + c]) >
                    std::abs(a[static_cast<size_t>(pr) * n + c]))
                    pr = i;
            if (std::abs(a[static_cast<size_t>(pr) * n + c]) < 1e-300) return false;
            if (pr != c) {
                for (int j = 0; j < n; ++j)
                    std::swap(a[static_cast<size_t>(c) * n + j], a[static_cast<size_t>(pr) * n + j]);
                std::swap(b[c], b[pr]);
            }
            for (int i = c + 1; i < n; ++i) {
                const double f = a[static_cast<size_t>(i) * n + c] / a[static_cast<size_t>(c) * n + c];
                a[static_cast<size_t>(i) * n + c] = 0.0;
                for (int j = c + 1; j < n; ++j)
                    a[static_cast<size_t>(i) * n + j] -= f * a[static_cast<size_t>(c) * n + j];
                b[i] -= f * b[c];
            }
        }
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) b[i] -= a[static_cast<size_t>(i) * n + j] * b[j];
            b[i] /= a[static_cast<size_t>(i) * n + i];
        }
        return true;
    }

    // Newton on the KKT system of: maximize logdet M subject to equality on
    // the identified contact directions. Returns true and updates m on success.
    bool crossover(Matrix& m) {
        eval_pool(m);
        std::vector<size_t> order(dirs_.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return phi_[a] / rs_[a] > phi_[b] / rs_[b];
        });
        // candidate contacts, tightest slack first, distinct directions only
        std::vector<size_t> cand;
        for (size_t i : order) {
            if (static_cast<int>(cand.size()) >= 2 * r_) break;
            if (1.0 - phi_[i] / rs_[i] >= 1e-2) continue;
            bool dup = false;
            for (size_t j : cand)
                if (std::abs(std::abs(vec_dot(dirs_[i], dirs_[j])) - 1.0) < 1e-5) dup = true;
            if (!dup) cand.push_back(i);
        }
        if (cand.empty()) return false;
        size_t k0 = 0;
        while (k0 < cand.size() && 1.0 - phi_[cand[k0]] / rs_[cand[k0]] < 1e-7) ++k0;
        if (k0 == 0) k0 = std::min<size_t>(cand.size(), static_cast<size_t>(r_));

        const double det_before = [&] {
            EigenH e = eig_hermitian(m);
            double s = 0.0;
            for (double l : e.lambda) s += std::log(l);
            return s;
        }();

        std::vector<size_t> act(cand.begin(), cand.begin() + k0);
        Matrix cur = m;
        Matrix best_feasible;
        double best_w = 1e300;
        for (int pass = 0; pass < 28; ++pass) {
            Matrix mm = cur;
            std::vector<double> lam;
            const bool converged = kkt_newton(mm, act, lam);
            if (getenv("MWLAB_JOHN_DEBUG"))
                fprintf(stderr, "  pass=%d k=%zu conv=%d\n", pass, act.size(), (int)converged);
            if (!converged) {
                bool grew = false;
                for (size_t c = 0; c < cand.size() && !grew; ++c) {
                    if (std::find(act.begin(), act.end(), cand[c]) != act.end()) continue;
                    if (static_cast<int>(act.size()) >= r_) break;
                    act.push_back(cand[c]);
                    grew = true;
                }
                if (!grew) return false;
                continue;
            }
            double lmax = 0.0;
            for (double l : lam) lmax = std::max(lmax, std::abs(l));
            std::vector<size_t> keep;
            for (size_t j = 0; j < act.size(); ++j)
                if (lam[j] > -1e-6 * (1.0 + lmax)) keep.push_back(act[j]);
            if (keep.empty()) return false;
            if (keep.size() != act.size()) {
                act = std::move(keep);
                cur = mm;
                continue;
            }
            // feasibility sweep; add the worst violated direction as a contact
            double worst = pool_max_ratio(mm);
            size_t worst_pool = 0;
            for (size_t i = 0; i < dirs_.size(); ++i)
                if (phi_[i] / rs_[i] > phi_[worst_pool] / rs_[worst_pool]) worst_pool = i;
            Vec worst_dir = dirs_[worst_pool];
            std::vector<Vec> sweep_starts;
            for (size_t i : top_constraints(8)) sweep_starts.push_back(dirs_[i]);
            for (const Vec& u : o_.adapted) sweep_starts.push_back(u);
            for (const Vec& s : sweep_starts) {
                Vec found;
                const double v = polish(mm, s, false, &found);
                if (v > worst) {
                    worst = v;
                    worst_dir = std::move(found);
                }
            }
            if (getenv("MWLAB_JOHN_DEBUG"))
                fprintf(stderr, "  pass=%d worst-1=%.2e\n", pass, worst - 1.0);
            if (worst <= 1.0 + 5e-8 && worst < best_w) {
                best_w = worst;
                best_feasible = mm;
            }
            if (worst <= 1.0 + 1e-12 || (pass >= 26 && worst <= 1.0 + 5e-8)) {
                // re-locate each contact against the converged shape and
                // re-solve; fall back to the already-accepted point if this
                // drifts instead of tightening
                Matrix backup = mm;
                std::vector<size_t> act_backup = act;
                double wbest = worst;
                for (int refresh = 0; refresh < 6; ++refresh) {
                    for (size_t j = 0; j < act.size(); ++j) {
                        Vec better;
                        polish(mm, dirs_[act[j]], false, &better);
                        rs_.push_back(t_.dirscale(better));
                        dirs_.push_back(std::move(better));
                        act[j] = dirs_.size() - 1;
                    }
                    std::vector<double> lam2;
                    Matrix trial = mm;
                    if (!kkt_newton(trial, act, lam2)) break;
                    double w2 = pool_max_ratio(trial);
                    for (size_t i : top_constraints(8))
                        w2 = std::max(w2, polish(trial, dirs_[i], false, nullptr));
                    for (const Vec& u : o_.adapted) w2 = std::max(w2, polish(trial, u, false, nullptr));
                    if (w2 <= wbest * (1.0 + 1e-12) || w2 <= 1.0 + 1e-12) {
                        mm = std::move(trial);
                        backup = mm;
                        act_backup = act;
                        wbest = std::min(wbest, w2);
                        if (w2 <= 1.0 + 1e-12) break;
                    } else {
                        act = act_backup;
                        break;
                    }
                }
                mm = backup;
                if (wbest > 1.0) mm = mm * cx(1.0 / wbest, 0.0);
                EigenH e = eig_hermitian(mm);
                double det_after = 0.0;
                for (double l : e.lambda) det_after += std::log(l);
                (void)det_after;
                (void)det_before;
                m = std::move(mm);
                return true;
            }
            // if the violated direction is a drifted copy of a current
            // contact, replace that contact; otherwise add it
            size_t close = act.size();
            for (size_t j = 0; j < act.size(); ++j)
                if (std::abs(std::abs(vec_dot(worst_dir, dirs_[act[j]])) - 1.0) < 1e-4)
                    close = j;
            rs_.push_back(t_.dirscale(worst_dir));
            dirs_.push_back(std::move(worst_dir));
            const size_t newidx = dirs_.size() - 1;
            if (close < act.size()) {
                act[close] = newidx;
            } else {
                act.push_back(newidx);
                if (static_cast<int>(act.size()) > r_) {
                    size_t weakest = 0;
                    for (size_t j = 1; j + 1 < act.size(); ++j)
                        if (lam[j] < lam[weakest]) weakest = j;
                    act.erase(act.begin() + weakest);
                }
            }
            cur = mm;
        }
        if (best_w < 1e300) {
            Matrix mm = best_feasible;
            if (best_w > 1.0) mm = mm * cx(1.0 / best_w, 0.0);
            m = std::move(mm);
            return true;
        }
        return false;
    }

    // damped Newton on the KKT system with a fixed active set; returns true
    // when the residual reaches its numerical floor
    bool kkt_newton(Matrix& mm, const std::vector<size_t>& act, std::vector<double>& lam) {
        const int k = static_cast<int>(act.size());
        const int n = r_ + k;
        lam.assign(k, 0.0);

        auto assemble = [&](const Matrix& mat, std::vector<double>& f, std::vector<double>& jac) {
            eval_pool(mat);
            std::vector<double> gld, hld;
            fgrad_fhess_logdet(mat, gld, hld);
            std::vector<std::vector<double>> cg(k, std::vector<double>(r_));
            std::vector<std::vector<double>> ch(k);
            std::vector<Vec> bu(r_);
            f.assign(n, 0.0);
            jac.assign(static_cast<size_t>(n) * n, 0.0);
            for (int j = 0; j < k; ++j) {
                const size_t i = act[j];
                const std::span<const cx> y{yflat_.data() + i * d_, static_cast<size_t>(d_)};
                const Vec gy = t_.phi_grad(y);
                for (int q = 0; q < r_; ++q) bu[q] = basis_[q].apply(dirs_[i]);
                for (int q = 0; q < r_; ++q) cg[j][q] = vec_dot(bu[q], gy).real();
                ch[j].assign(static_cast<size_t>(r_) * r_, 0.0);
                if (t_.phi_hess) t_.phi_hess(y, bu, ch[j].data());
            }
            for (int q = 0; q < r_; ++q) {
                f[q] = gld[q];
                for (int j = 0; j < k; ++j) f[q] -= lam[j] * cg[j][q];
            }
            for (int j = 0; j < k; ++j) f[r_ + j] = phi_[act[j]] - rs_[act[j]];
            for (int q = 0; q < r_; ++q)
                for (int s = 0; s < r_; ++s) {
                    double v = hld[static_cast<size_t>(q) * r_ + s];
                    for (int j = 0; j < k; ++j) v -= lam[j] * ch[j][static_cast<size_t>(q) * r_ + s];
                    jac[static_cast<size_t>(q) * n + s] = v;
                }
            for (int j = 0; j < k; ++j)
                for (int q = 0; q < r_; ++q) {
                    jac[static_cast<size_t>(q) * n + r_ + j] = -cg[j][q];
                    jac[static_cast<size_t>(r_ + j) * n + q] = cg[j][q];
                }
        };

        // least-squares multipliers from stationarity
        {
            std::vector<double> f, jac;
            assemble(mm, f, jac);
            std::vector<double> gld, hld;
            fgrad_fhess_logdet(mm, gld, hld);
            std::vector<double> gtg(static_cast<size_t>(k) * k, 0.0), rhs(k, 0.0);
            for (int a = 0; a < k; ++a) {
                for (int b = 0; b < k; ++b) {
                    double s = 0.0;
                    for (int q = 0; q < r_; ++q)
                        s += jac[static_cast<size_t>(r_ + a) * n + q] *
                             jac[static_cast<size_t>(r_ + b) * n + q];
                    gtg[static_cast<size_t>(a) * k + b] = s + (a == b ? 1e-12 : 0.0);
                }
                double s = 0.0;
                for (int q = 0; q < r_; ++q) s += jac[static_cast<size_t>(r_ + a) * n + q] * gld[q];
                rhs[a] = s;
            }
            if (!cholesky_solve(gtg, rhs, lam)) lam.assign(k, 0.0);
        }

        double ftol = 0.0;
        {
            std::vector<double> gld, hld;
            fgrad_fhess_logdet(mm, gld, hld);
            double gn = 0.0;
            for (double x : gld) gn = std::max(gn, std::abs(x));
            ftol = 1e-11 * std::max(1.0, gn);
        }
        for (int it = 0; it < 60; ++it) {
            std::vector<double> f, jac;
            assemble(mm, f, jac);
            double fn = 0.0;
            for (double x : f) fn += x * x;
            fn = std::sqrt(fn);
            if (fn < ftol) return true;
            std::vector<double> rhs(f);
            for (double& x : rhs) x = -x;
            if (!lu_solve(jac, rhs)) return false;
            double alpha = 1.0;
            bool moved = false;
            for (int bt = 0; bt < 40; ++bt) {
                Matrix m2 = mm;
                for (int q = 0; q < r_; ++q)
                    for (int i = 0; i < d_; ++i)
                        for (int j2 = 0; j2 < d_; ++j2)
                            m2.at(i, j2) += alpha * rhs[q] * basis_[q].at(i, j2);
                EigenH e = eig_hermitian(m2);
                if (e.lambda.front() > 0.0) {
                    std::vector<double> lam2(k);
                    for (int j = 0; j < k; ++j) lam2[j] = lam[j] + alpha * rhs[r_ + j];
                    const Matrix save = mm;
                    const std::vector<double> lsave = lam;
                    mm = m2;
                    lam = lam2;
                    std::vector<double> f2, jac2;
                    assemble(mm, f2, jac2);
                    double fn2 = 0.0;
                    for (double x : f2) fn2 += x * x;
                    fn2 = std::sqrt(fn2);
                    if (fn2 < fn * (1.0 - 1e-4 * alpha) || fn2 < ftol) {
                        moved = true;
                        break;
                    }
                    mm = save;
                    lam = lsave;
                }
                alpha *= 0.5;
            }
            if (!moved) {
                if (getenv("MWLAB_JOHN_DEBUG")) {
                    std::vector<double> fx, jx;
                    assemble(mm, fx, jx);
                    double fnx = 0.0;
                    for (double x : fx) fnx += x * x;
                    fprintf(stderr, "   kkt stall it=%d fn=%.3e ftol=%.3e\n", it, std::sqrt(fnx), ftol);
                }
                return false;
            }
        }
        std::vector<double> f, jac;
        assemble(mm, f, jac);
        double fn = 0.0;
        for (double x : f) fn += x * x;
        if (getenv("MWLAB_JOHN_DEBUG"))
            fprintf(stderr, "   kkt end fn=%.3e ftol=%.3e\n", std::sqrt(fn), ftol);
        return std::sqrt(fn) < ftol;
    }

    void fgrad_fhess_logdet(const Matrix& m, std::vector<double>& g, std::vector<double>& h) {
        const Matrix minv = inverse_of(m);
        g.assign(r_, 0.0);
        for (int k = 0; k < r_; ++k) {
            cx tr = 0.0;
            for (int i = 0; i < d_; ++i)
                for (int j = 0; j < d_; ++j) tr += minv.at(i, j) * basis_[k].at(j, i);
            g[k] = tr.real();
        }
        h.assign(static_cast<size_t>(r_) * r_, 0.0);
        for (int k = 0; k < r_; ++k) {
            const Matrix mk = minv * basis_[k];
            for (int l = k; l < r_; ++l) {
                const Matrix ml = minv * basis_[l];
                cx tr = 0.0;
                for (int i = 0; i < d_; ++i)
                    for (int j = 0; j < d_; ++j) tr += mk.at(i, j) * ml.at(j, i);
                h[static_cast<size_t>(k) * r_ + l] -= tr.real();
                if (l != k) h[static_cast<size_t>(l) * r_ + k] -= tr.real();
            }
        }
    }

    // ------------------------------------------------------------ polish ----

    double ratio_value(const Matrix& m, const Vec& u, bool covering) const {
        const double ph = t_.phi(m.apply(u));
        const double r = t_.dirscale(u);
        return covering ? r / ph : ph / r;
    }

    double polish(const Matrix& m, Vec u, bool covering, Vec* out_dir) const {
        double n = vec_norm(u);
        for (auto& z : u) z /= n;
        double base = ratio_value(m, u, covering);
        for (int it = 0; it < 60; ++it) {
            Vec y = m.apply(u);
            const double ph = t_.phi(y);
            const double r = t_.dirscale(u);
            Vec gy = t_.phi_grad(y);
            Vec g = m.apply(gy);
            for (auto& z : g) z /= ph;
            if (t_.dirscale_grad) {
                Vec gr = t_.dirscale_grad(u);
                for (int k = 0; k < d_; ++k) g[k] -= gr[k] / r;
            }
            if (covering)
                for (auto& z : g) z = -z;
            const cx ip = vec_dot(g, u);
            for (int k = 0; k < d_; ++k) g[k] -= ip.real() * u[k];
            if (vec_norm(g) < 1e-14) break;
            double t = 0.5;
            bool improved = false;
            while (t > 1e-12) {
                Vec u2(d_);
                for (int k = 0; k < d_; ++k) u2[k] = u[k] + t * g[k];
                const double nn = vec_norm(u2);
                for (auto& z : u2) z /= nn;
                const double v = ratio_value(m, u2, covering);
                if (v > base * (1.0 + 1e-16)) {
                    u = std::move(u2);
                    base = v;
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if (!improved) break;
        }
        if (out_dir) *out_dir = std::move(u);
        return base;
    }

    std::vector<size_t> top_constraints(int k) {
        std::vector<size_t> order(dirs_.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return phi_[a] / rs_[a] > phi_[b] / rs_[b]; });
        if (static_cast<int>(order.size()) > k) order.resize(k);
        return order;
    }

    // ------------------------------------------------------------- loops ----

    Matrix exact_1d() {
        const Vec e{cx(1.0, 0.0)};
        const double c = t_.phi(e) / t_.dirscale(e);
        Matrix m(1);
        m.at(0, 0) = 1.0 / c;
        return m;
    }

    Matrix outer_loop() {
        Matrix m = Matrix::identity(d_);
        const double c0 = pool_max_ratio(m);
        if (o_.warm && o_.warm->dim() == d_) {
            const double cw = pool_max_ratio(*o_.warm);
            m = *o_.warm * cx(0.9 / cw, 0.0);
        } else {
            m = m * cx(0.9 / c0, 0.0);
        }
        double mu0 = o_.mu0;
        const double mu_min = o_.mu0 * std::pow(o_.mu_factor, o_.stages);
        Rng rng(o_.seed ^ 0x5bd1e995ull);
        for (int round = 0; round < o_.rounds; ++round) {
            m = barrier(std::move(m), mu0, mu_min);
            eval_pool(m);
            double worst = 0.0;
            std::vector<Vec> starts;
            for (size_t i : top_constraints(o_.polish_starts)) starts.push_back(dirs_[i]);
            for (int i = 0; i < o_.polish_starts; ++i) starts.push_back(random_dir(rng, d_));
            const size_t before = dirs_.size();
            for (const Vec& s : starts) {
                Vec found;
                const double v = polish(m, s, false, &found);
                worst = std::max(worst, v);
                if (v > 1.0 + 1e-12) add_dir(std::move(found));
            }
            if (dirs_.size() == before && worst <= 1.0 + 1e-10 && round > 0) break;
            mu0 = o_.mu0 * std::pow(o_.mu_factor, o_.stages / 2);
        }
        if (o_.crossover) {
            const bool ok = crossover(m);
            if (getenv("MWLAB_JOHN_DEBUG")) fprintf(stderr, "xover ok=%d\n", (int)ok);
        }
        return m;
    }

    JohnResult finish(Matrix m) {
        Rng rng(o_.seed ^ 0x9e3779b9ull);
        for (int pass = 0; pass < 4; ++pass) {
            double smax = pool_max_ratio(m);
            std::vector<Vec> starts;
            for (size_t i : top_constraints(o_.polish_starts)) starts.push_back(dirs_[i]);
            if (pass == 0)
                for (const Vec& u : o_.adapted) starts.push_back(u);
            const int fresh = (pass == 0) ? o_.cert_dirs : 2 * o_.polish_starts;
            for (int i = 0; i < fresh; ++i) {
                Vec u = random_dir(rng, d_);
                const double c = ratio_value(m, u, false);
                if (c > 0.97 * smax && starts.size() < 4 * static_cast<size_t>(o_.polish_starts))
                    starts.push_back(std::move(u));
                smax = std::max(smax, c);
            }
            for (const Vec& s : starts) smax = std::max(smax, polish(m, s, false, nullptr));
            if (smax <= 1.0 + 1e-13 && pass > 0) break;
            m = m * cx(1.0 / smax, 0.0);
        }
        for (int i = 0; i < d_; ++i)
            for (int j = i; j < d_; ++j) {
                const cx v = 0.5 * (m.at(i, j) + std::conj(m.at(j, i)));
                m.at(i, j) = v;
                m.at(j, i) = std::conj(v);
            }
        JohnResult res;
        res.m = PDMatrix::validate(m);

        double incl = pool_max_ratio(m);
        double cov = 0.0;
        for (size_t i = 0; i < dirs_.size(); ++i) cov = std::max(cov, rs_[i] / phi_[i]);
        Rng rng2(o_.seed ^ 0xc2b2ae35ull);
        std::vector<Vec> cstarts;
        for (int i = 0; i < o_.cert_dirs; ++i) {
            Vec u = random_dir(rng2, d_);
            incl = std::max(incl, ratio_value(m, u, false));
            const double c = ratio_value(m, u, true);
            if (c > 0.97 * cov && cstarts.size() < 4 * static_cast<size_t>(o_.polish_starts))
                cstarts.push_back(std::move(u));
            cov = std::max(cov, c);
        }
        for (size_t i = 0; i < dirs_.size() && cstarts.size() < 6 * static_cast<size_t>(o_.polish_starts); ++i)
            if (rs_[i] / phi_[i] > 0.97 * cov) cstarts.push_back(dirs_[i]);
        for (const Vec& u : cstarts) cov = std::max(cov, polish(m, u, true, nullptr));
        res.covering = cov;
        res.inclusion = incl;
        return res;
    }
};

} // namespace

JohnResult john_solve(const JohnTarget& target, const JohnOptions& opts) {
    Solver s(target, opts);
    return s.run();
}

} // namespace mwlab
