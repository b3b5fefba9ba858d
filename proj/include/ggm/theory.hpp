#pragma once

#include <vector>

#include "ggm/linalg.hpp"
#include "ggm/models.hpp"
#include "ggm/solver.hpp"

namespace ggm {

/// Tail behavior of the sample covariance deviations. Two closed-form
/// families: exponential-type (sub-Gaussian data) and polynomial-type
/// (moment-bounded data). Deviations delta are controlled for
/// delta in (0, 1/v_star], with v_star == 0 meaning no ceiling.
struct TailModel {
    enum class Kind { subgaussian, polynomial };
    Kind kind = Kind::subgaussian;
    double sigma = 1.0;   // sub-Gaussian parameter (subgaussian)
    int m = 1;            // moment order (polynomial, 4m-th moments bounded)
    double k_m = 1.0;     // moment bound (polynomial)
    double max_var = 1.0; // max_i Sigma*_ii

    double c_star = 0.0;  // rate constant of the tail function
    double v_star = 0.0;  // reciprocal deviation ceiling

    static TailModel subgaussian(double sigma, double max_var);
    static TailModel polynomial(int m, double k_m, double max_var);
    static TailModel subgaussian_for(const ModelSpec& model, double sigma = 1.0);

    // f(n, delta): the tail function itself.
    double tail_function(double n, double delta) const;
};

// delta_bar_f(r; n): the deviation level that the tail function controls at
// inverse-probability r for sample size n.
double tail_delta_inverse(const TailModel& tail, double n, double r);

// n_bar_f(r; delta): the sample size at which deviations of size delta are
// controlled at inverse-probability r.
double tail_n_inverse(const TailModel& tail, double delta, double r);

// lambda_n = (8/alpha) delta_bar_f(n, p^tau).
double lambda_theory(double alpha, const TailModel& tail, double n, int p, double tau);

/// The conditioning constants and the incoherence margin of a model.
struct Diagnostics {
    double k_sigma = 0.0;    // |||Sigma*|||_inf
    double k_gamma = 0.0;    // |||(Gamma*_SS)^{-1}|||_inf
    double alpha = 0.0;      // 1 - |||Gamma*_ScS (Gamma*_SS)^{-1}|||_inf, may be <= 0
    double theta_min = 0.0;  // +inf when the model has no edges
    int degree_d = 0;
    int sparsity_s = 0;
    double max_var = 0.0;       // max_i Sigma*_ii
    double complexity_k = 0.0;  // NaN when alpha <= 0

    bool incoherence_ok() const { return alpha > 0.0; }
};

struct GammaBlocks {
    // Ordered pairs (j,k) in row-major order; S holds the augmented support
    // (diagonal plus both orders of each edge), Sc the complement.
    std::vector<IndexPair> s_pairs;
    std::vector<IndexPair> sc_pairs;
    std::vector<double> gamma_ss;   // |S| x |S|, row-major
    std::vector<double> gamma_scs;  // |Sc| x |S|, row-major
};

// Entries Gamma*_{(j,k),(l,m)} = Sigma*_jl Sigma*_km of the log-det Hessian,
// restricted to the (S,S) and (Sc,S) blocks. The p^2 x p^2 matrix is never
// materialized.
GammaBlocks gamma_blocks(const SymMatrix& sigma_star, const Support& support);

Diagnostics diagnostics(const ModelSpec& model);

// Sample size thresholds from the elementwise and model-selection
// guarantees. Both throw IncoherenceFails when alpha <= 0.
double threshold_ellinf(const Diagnostics& diag, const TailModel& tail, int p, double tau);
double threshold_model_selection(const Diagnostics& diag, const TailModel& tail, int p,
                                 double tau);

struct PredictedBounds {
    double ellinf = 0.0;
    double frobenius = 0.0;
    double spectral = 0.0;
    double cov_ellinf = 0.0;
    double cov_spectral = 0.0;
};

PredictedBounds predicted_bounds(const Diagnostics& diag, const TailModel& tail, double n, int p,
                                 double tau);

// R(Delta) = (Theta* + Delta)^{-1} - Theta*^{-1} + Theta*^{-1} Delta Theta*^{-1},
// the second-order remainder of the log-det gradient.
SymMatrix remainder(const SymMatrix& theta_star, const SymMatrix& delta);

/// Outcome of the primal-dual witness construction plus the numeric
/// hypothesis checks of the certificate lemmas.
struct WitnessReport {
    bool strict_dual_feasible = false;
    double max_abs_z_sc = 0.0;      // max |Z~_ij| over the non-support
    SolveResult restricted_result;  // solution of the support-restricted program
    double ell_inf_error = 0.0;     // ||Theta~ - Theta*||_max
    bool sign_consistent = false;   // signed edge set of Theta~ equals the truth
    double w_inf = 0.0;             // ||sigma_hat - Sigma*||_max
    double lemma4_lhs = 0.0;        // max{||W||_max, ||R(Delta)||_max}
    double lemma4_rhs = 0.0;        // alpha lambda / 8
    double lemma6_radius = 0.0;     // 2 K_Gamma (||W||_max + lambda)
    bool lemma6_precondition_ok = false;
    bool lemma7_ok = false;         // theta_min >= 4 K_Gamma (||W||_max + lambda)
    Diagnostics diag;
};

// Steps: (a) solve the support-restricted program, (b,c) assemble the dual
// matrix from the subgradient on S and the stationarity residue on Sc,
// (d) test max |Z~_Sc| < 1. Certificate hypothesis checks come along.
WitnessReport witness_construct(const ModelSpec& model, const SymMatrix& sigma_hat, double lambda,
                                const SolverConfig& config);

struct NoiseEventCheck {
    double w_inf = 0.0;
    double delta_bar = 0.0;
    bool event_holds = false;
};

// Whether the realized noise ||sigma_hat - Sigma*||_max stays within
// delta_bar_f(n, p^tau).
NoiseEventCheck noise_event_check(const ModelSpec& model, const SymMatrix& sigma_hat,
                                  const TailModel& tail, double n, int p, double tau);

}  // namespace ggm
