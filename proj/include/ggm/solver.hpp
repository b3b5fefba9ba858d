#pragma once

#include <set>
#include <utility>
#include <vector>

#include "ggm/linalg.hpp"
#include "ggm/models.hpp"

namespace ggm {

/// Index-pair support for the restricted problem: always contains every
/// diagonal pair and is closed under transposition.
class Support {
  public:
    // Full support (no restriction) on p nodes.
    static Support full(int p);
    // Diagonal pairs only.
    static Support diagonal_only(int p);
    // Diagonal plus the given off-diagonal pairs (symmetrized).
    static Support from_edges(int p, const EdgeSet& edges);

    bool contains(int i, int j) const { return i == j || off_.count(canon(i, j)) > 0; }
    int dim() const { return p_; }
    const std::set<IndexPair>& off_diagonal_pairs() const { return off_; }
    // p + s with s the number of ordered off-diagonal pairs.
    int size() const { return p_ + 2 * static_cast<int>(off_.size()); }

  private:
    static IndexPair canon(int i, int j) { return {std::min(i, j), std::max(i, j)}; }
    int p_ = 0;
    std::set<IndexPair> off_;
};

struct SolverConfig {
    double lambda = 0.1;        // off-diagonal l1 weight, >= 0
    double tol = 1e-7;          // KKT residual tolerance
    int max_outer_sweeps = 500;
    double inner_tol = 1e-9;    // lasso coordinate-update tolerance
    bool diagonal_init = false; // start from diag(sigma_hat) instead of the
                                // shrunk covariance (used by uniqueness probes)
};

struct SolveResult {
    SymMatrix theta_hat{1};  // concentration estimate, PD
    SymMatrix w_hat{1};      // its inverse (the solver's working covariance)
    SymMatrix z_hat{1};      // subgradient: zero diagonal, |z_ij| <= 1
    int sweeps = 0;
    double kkt_residual = 0.0;  // norm_elem_max(sigma_hat - w_hat + lambda*z_hat)
    bool converged = false;

    // per-sweep primal objective trace(Theta Sigma) - log det Theta + lambda * off-l1
    std::vector<double> objective_per_sweep;
    double max_objective_increase = 0.0;  // largest rise between consecutive sweeps
    // worst off-diagonal box violation (|W - Sigma| - lambda)+ seen at any sweep
    double max_box_violation = 0.0;
};

// Solves min_{Theta > 0} trace(Theta Sigma) - log det Theta + lambda * sum_{i != j} |Theta_ij|
// by block coordinate descent over columns of W = Theta^{-1}, each column an
// l1-penalized quadratic solved by cyclic coordinate descent with active-set
// shortcuts. lambda == 0 requires positive-definite input (plain MLE).
SolveResult solve(const SymMatrix& sigma_hat, const SolverConfig& config);

// Same program restricted to Theta supported on `support`; entries outside
// the support are exactly zero in the returned theta_hat, and the KKT system
// is enforced over the support coordinates only.
SolveResult solve_restricted(const SymMatrix& sigma_hat, const Support& support,
                             const SolverConfig& config);

struct KktReport {
    // max over all entries of |sigma - theta^{-1} + lambda z| with z built
    // from theta's support (sign on nonzeros, clamped reconstruction on
    // zeros, zero diagonal)
    double max_stationarity_violation = 0.0;
    // max over zero-classified off-diagonals of (|z_recon| - 1)+
    double max_subgradient_excess = 0.0;
    // nonzero-classified off-diagonals whose reconstructed subgradient sign
    // contradicts the entry sign
    int sign_violations = 0;
    double max_sign_deviation = 0.0;  // max |z_recon - sign(theta_ij)| over nonzeros
    double max_diag_residual = 0.0;   // max_i |sigma_ii - (theta^{-1})_ii|
};

// Evaluates the optimality system sigma - theta^{-1} + lambda z = 0 for an
// arbitrary PD candidate. zero_threshold classifies theta entries as
// structural zeros (they come out of an inversion, never exact).
KktReport check_kkt(const SymMatrix& sigma_hat, const SymMatrix& theta_hat, double lambda,
                    double zero_threshold = kZeroThreshold);

// The penalized negative log-likelihood the solver minimizes.
double objective_value(const SymMatrix& sigma_hat, const SymMatrix& theta, double lambda);

}  // namespace ggm
