#include "ggm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ggm/errors.hpp"

namespace ggm {

Support Support::full(int p) {
    Support s;
    s.p_ = p;
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) s.off_.insert({i, j});
    return s;
}

Support Support::diagonal_only(int p) {
    Support s;
    s.p_ = p;
    return s;
}

Support Support::from_edges(int p, const EdgeSet& edges) {
    Support s;
    s.p_ = p;
    for (const auto& e : edges.pairs()) {
        if (e.first < 0 || e.second >= p) throw InvalidParameter("edge index out of range");
        s.off_.insert(e);
    }
    return s;
}

double objective_value(const SymMatrix& sigma_hat, const SymMatrix& theta, double lambda) {
    const int p = theta.dim();
    double tr = 0.0, l1off = 0.0;
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            tr += theta(i, j) * sigma_hat(i, j);
            if (i != j) l1off += std::abs(theta(i, j));
        }
    }
    return tr - log_det(theta) + lambda * l1off;
}

namespace {

inline double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

inline double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

// Block coordinate descent over columns of W. The support pointer is null
// for the unrestricted problem.
class GlassoRun {
  public:
    GlassoRun(const SymMatrix& sigma, const Support* support, const SolverConfig& cfg)
        : p_(sigma.dim()), sigma_(sigma), support_(support), cfg_(cfg) {
        for (int i = 0; i < p_; ++i) {
            if (!(sigma(i, i) > 0.0)) {
                throw NonPositiveDiagonal("sigma_hat diagonal entry " + std::to_string(i) +
                                          " is not strictly positive");
            }
        }
        if (cfg.lambda < 0) throw InvalidParameter("lambda must be >= 0");
        if (!(cfg.tol > 0)) throw InvalidParameter("tol must be > 0");
    }

    SolveResult run() {
        if (cfg_.lambda == 0.0 && support_ == nullptr) return mle();
        init_w();
        b_.assign(static_cast<size_t>(p_) * p_, 0.0);

        SolveResult res;
        double inner_eff = cfg_.inner_tol;
        int sweeps_since_progress = 0;
        double best_rb = std::numeric_limits<double>::infinity();

        for (int sweep = 0; sweep < cfg_.max_outer_sweeps; ++sweep) {
            for (int j = 0; j < p_; ++j) update_column(j, inner_eff);
            res.sweeps = sweep + 1;

            record_sweep_state(res);
            const double rb = beta_residual();
            if (rb < 0.5 * best_rb) {
                best_rb = std::min(best_rb, rb);
                sweeps_since_progress = 0;
            } else {
                ++sweeps_since_progress;
            }

            if (rb <= cfg_.tol) {
                if (finalize_if_converged(res)) return res;
                inner_eff = std::max(inner_eff * 1e-2, 1e-15);
            } else if (sweeps_since_progress >= 20) {
                // inner tolerance is limiting outer progress
                inner_eff = std::max(inner_eff * 1e-2, 1e-15);
                sweeps_since_progress = 0;
            }
        }
        finalize(res);
        res.converged = res.kkt_residual <= cfg_.tol;
        return res;
    }

  private:
    double w(int i, int j) const { return w_[static_cast<size_t>(i) * p_ + j]; }
    bool allowed(int i, int j) const { return support_ == nullptr || support_->contains(i, j); }

    SolveResult mle() {
        SolveResult res;
        res.theta_hat = inverse_spd(sigma_);  // throws NotPositiveDefinite when singular
        res.w_hat = sigma_;
        res.z_hat = SymMatrix(p_);
        res.sweeps = 0;
        res.kkt_residual = 0.0;
        res.converged = true;
        res.objective_per_sweep.push_back(objective_value(sigma_, res.theta_hat, 0.0));
        return res;
    }

    void init_w() {
        w_.assign(static_cast<size_t>(p_) * p_, 0.0);
        if (!cfg_.diagonal_init) {
            double max_off = 0.0;
            for (int i = 0; i < p_; ++i)
                for (int j = i + 1; j < p_; ++j) max_off = std::max(max_off, std::abs(sigma_(i, j)));
            // shrink toward the diagonal until the start is both PD and
            // within the lambda box
            double t = (max_off > 0 && cfg_.lambda < max_off) ? cfg_.lambda / max_off : 1.0;
            if (cfg_.lambda == 0.0) t = 0.5;  // restricted MLE: any PD start works
            for (int i = 0; i < p_; ++i)
                for (int j = 0; j < p_; ++j)
                    w_[static_cast<size_t>(i) * p_ + j] =
                        (i == j) ? sigma_(i, i) : (1.0 - t) * sigma_(i, j);
            if (spd_ok()) return;
        }
        // fall back to the always-PD diagonal start
        std::fill(w_.begin(), w_.end(), 0.0);
        for (int i = 0; i < p_; ++i) w_[static_cast<size_t>(i) * p_ + i] = sigma_(i, i);
    }

    bool spd_ok() const {
        try {
            cholesky(SymMatrix::symmetrize(p_, w_));
            return true;
        } catch (const NotPositiveDefinite&) {
            return false;
        }
    }

    // One l1-penalized quadratic in the off-column coordinates, cyclic
    // coordinate descent with active-set passes.
    void update_column(int j, double inner_eff) {
        u_.assign(p_, 0.0);
        for (int l = 0; l < p_; ++l) {
            if (l == j) continue;
            const double bl = b_[static_cast<size_t>(l) * p_ + j];
            if (bl == 0.0) continue;
            const double* wl = w_.data() + static_cast<size_t>(l) * p_;
            for (int k = 0; k < p_; ++k) u_[k] += bl * wl[k];
        }

        const double lam = cfg_.lambda;
        const int max_passes = 50000;
        bool full_pass = true;
        for (int pass = 0; pass < max_passes; ++pass) {
            double worst = 0.0;
            for (int k = 0; k < p_; ++k) {
                if (k == j) continue;
                double& bk = b_[static_cast<size_t>(k) * p_ + j];
                if (!full_pass && bk == 0.0) continue;
                if (!allowed(k, j)) continue;
                const double wkk = w(k, k);
                const double g = sigma_(k, j) - u_[k] + wkk * bk;
                const double bn = soft_threshold(g, lam) / wkk;
                const double d = bn - bk;
                if (d != 0.0) {
                    worst = std::max(worst, std::abs(d) * wkk);
                    const double* wk = w_.data() + static_cast<size_t>(k) * p_;
                    for (int l = 0; l < p_; ++l) u_[l] += d * wk[l];
                    bk = bn;
                }
            }
            if (worst <= inner_eff) {
                if (full_pass) break;
                full_pass = true;  // verify the inactive coordinates
            } else {
                full_pass = false;
            }
        }

        // w12 = W11 beta; u holds it including the (unused) j slot
        for (int k = 0; k < p_; ++k) {
            if (k == j) continue;
            w_[static_cast<size_t>(k) * p_ + j] = u_[k];
            w_[static_cast<size_t>(j) * p_ + k] = u_[k];
        }
    }

    // Optimality residual measured through the lasso coefficients, whose
    // zeros are exact. Cheap, evaluated every sweep.
    double beta_residual() const {
        const double lam = cfg_.lambda;
        double r = 0.0;
        for (int j = 0; j < p_; ++j) {
            for (int k = 0; k < p_; ++k) {
                if (k == j || !allowed(k, j)) continue;
                const double dev = w(k, j) - sigma_(k, j);
                const double bk = b_[static_cast<size_t>(k) * p_ + j];
                if (bk != 0.0) {
                    r = std::max(r, std::abs(dev + lam * sgn(bk)));
                } else {
                    r = std::max(r, std::abs(dev) - lam);
                }
            }
        }
        return r;
    }

    void record_sweep_state(SolveResult& res) {
        double viol = 0.0;
        for (int i = 0; i < p_; ++i) {
            for (int j = i + 1; j < p_; ++j) {
                if (!allowed(i, j)) continue;
                viol = std::max(viol, std::abs(w(i, j) - sigma_(i, j)) - cfg_.lambda);
            }
        }
        res.max_box_violation = std::max(res.max_box_violation, viol);

        try {
            const SymMatrix wsym = SymMatrix::symmetrize(p_, w_);
            const auto chol = cholesky(wsym);
            const SymMatrix theta = inverse_spd(chol);
            double tr = 0.0, l1off = 0.0;
            for (int i = 0; i < p_; ++i) {
                for (int j = 0; j < p_; ++j) {
                    tr += theta(i, j) * sigma_(i, j);
                    if (i != j) l1off += std::abs(theta(i, j));
                }
            }
            const double obj = tr + 2.0 * chol.half_log_det() + cfg_.lambda * l1off;
            if (!res.objective_per_sweep.empty()) {
                res.max_objective_increase = std::max(
                    res.max_objective_increase, obj - res.objective_per_sweep.back());
            }
            res.objective_per_sweep.push_back(obj);
        } catch (const NotPositiveDefinite&) {
            // transient loss of positive definiteness in the working matrix;
            // keep sweeping, the convergence check below re-validates
        }
    }

    // Builds theta/z from the current W and evaluates the reported residual.
    // Returns true (and fills the result) when it meets the tolerance.
    bool finalize_if_converged(SolveResult& res) {
        SolveResult cand = res;
        finalize(cand);
        if (cand.kkt_residual <= cfg_.tol && support_dust_ok(cand)) {
            cand.converged = true;
            res = cand;
            return true;
        }
        return false;
    }

    bool support_dust_ok(const SolveResult& cand) const {
        if (support_ == nullptr) return true;
        // entries outside the support are hard-zeroed; make sure that is a
        // round-off-level edit so w_hat * theta_hat stays near identity
        return dust_ * norm_linf_op(cand.w_hat) <= 1e-8;
    }

    void finalize(SolveResult& res) {
        const SymMatrix wsym = SymMatrix::symmetrize(p_, w_);
        SymMatrix theta = inverse_spd(wsym);
        dust_ = 0.0;
        if (support_ != nullptr) {
            for (int i = 0; i < p_; ++i) {
                for (int j = i + 1; j < p_; ++j) {
                    if (!support_->contains(i, j)) {
                        dust_ = std::max(dust_, std::abs(theta(i, j)));
                        theta.set(i, j, 0.0);
                    }
                }
            }
        }
        SymMatrix z(p_);
        const double lam = cfg_.lambda;
        double resid = 0.0;
        for (int i = 0; i < p_; ++i) {
            resid = std::max(resid, std::abs(sigma_(i, i) - wsym(i, i)));
            for (int j = i + 1; j < p_; ++j) {
                if (!allowed(i, j)) continue;
                double zij;
                if (std::abs(theta(i, j)) > kZeroThreshold) {
                    zij = sgn(theta(i, j));
                } else if (lam > 0) {
                    zij = std::clamp((wsym(i, j) - sigma_(i, j)) / lam, -1.0, 1.0);
                } else {
                    zij = 0.0;
                }
                z.set(i, j, zij);
                resid = std::max(resid, std::abs(sigma_(i, j) - wsym(i, j) + lam * zij));
            }
        }
        res.theta_hat = theta;
        res.w_hat = wsym;
        res.z_hat = z;
        res.kkt_residual = resid;
    }

    const int p_;
    const SymMatrix& sigma_;
    const Support* support_;
    const SolverConfig& cfg_;
    std::vector<double> w_, b_, u_;
    double dust_ = 0.0;
};

}  // namespace

SolveResult solve(const SymMatrix& sigma_hat, const SolverConfig& config) {
    return GlassoRun(sigma_hat, nullptr, config).run();
}

SolveResult solve_restricted(const SymMatrix& sigma_hat, const Support& support,
                             const SolverConfig& config) {
    if (support.dim() != sigma_hat.dim()) {
        throw DimensionMismatch("support dimension does not match sigma_hat");
    }
    return GlassoRun(sigma_hat, &support, config).run();
}

KktReport check_kkt(const SymMatrix& sigma_hat, const SymMatrix& theta_hat, double lambda,
                    double zero_threshold) {
    if (lambda <= 0) throw InvalidParameter("check_kkt needs lambda > 0");
    if (sigma_hat.dim() != theta_hat.dim()) throw DimensionMismatch("dimension mismatch");
    const SymMatrix w = inverse_spd(theta_hat);
    const int p = theta_hat.dim();
    KktReport rep;
    for (int i = 0; i < p; ++i) {
        rep.max_diag_residual = std::max(rep.max_diag_residual, std::abs(sigma_hat(i, i) - w(i, i)));
        for (int j = i + 1; j < p; ++j) {
            const double z_recon = (w(i, j) - sigma_hat(i, j)) / lambda;
            if (std::abs(theta_hat(i, j)) > zero_threshold) {
                const double s = sgn(theta_hat(i, j));
                rep.max_sign_deviation = std::max(rep.max_sign_deviation, std::abs(z_recon - s));
                if (sgn(z_recon) != s) rep.sign_violations++;
                rep.max_stationarity_violation =
                    std::max(rep.max_stationarity_violation,
                             std::abs(sigma_hat(i, j) - w(i, j) + lambda * s));
            } else {
                rep.max_subgradient_excess =
                    std::max(rep.max_subgradient_excess, std::abs(z_recon) - 1.0);
                rep.max_stationarity_violation = std::max(
                    rep.max_stationarity_violation, lambda * std::max(0.0, std::abs(z_recon) - 1.0));
            }
        }
    }
    rep.max_subgradient_excess = std::max(rep.max_subgradient_excess, 0.0);
    rep.max_stationarity_violation =
        std::max(rep.max_stationarity_violation, rep.max_diag_residual);
    return rep;
}

}  // namespace ggm
