#include "ggm/theory.hpp"

#include <cmath>
#include <limits>

#include "ggm/errors.hpp"
#include "ggm/sampling.hpp"

namespace ggm {

TailModel TailModel::subgaussian(double sigma, double max_var) {
    if (!(sigma > 0) || !(max_var > 0)) throw InvalidParameter("need sigma > 0 and max_var > 0");
    TailModel t;
    t.kind = Kind::subgaussian;
    t.sigma = sigma;
    t.max_var = max_var;
    const double a = 1.0 + 4.0 * sigma * sigma;
    t.c_star = 1.0 / (128.0 * a * a * max_var * max_var);
    t.v_star = 1.0 / (8.0 * a * max_var);
    return t;
}

TailModel TailModel::polynomial(int m, double k_m, double max_var) {
    if (m < 1 || !(k_m > 0) || !(max_var > 0)) {
        throw InvalidParameter("need m >= 1, k_m > 0 and max_var > 0");
    }
    TailModel t;
    t.kind = Kind::polynomial;
    t.m = m;
    t.k_m = k_m;
    t.max_var = max_var;
    t.c_star = 1.0 / (std::pow(m, 2 * m + 1) * std::pow(2.0, 2 * m) *
                      std::pow(max_var, 2 * m) * (k_m + 1.0));
    t.v_star = 0.0;  // bound holds for every delta
    return t;
}

TailModel TailModel::subgaussian_for(const ModelSpec& model, double sigma) {
    double max_var = 0.0;
    for (int i = 0; i < model.p; ++i) max_var = std::max(max_var, model.sigma_star(i, i));
    return subgaussian(sigma, max_var);
}

double TailModel::tail_function(double n, double delta) const {
    if (kind == Kind::subgaussian) return 0.25 * std::exp(c_star * n * delta * delta);
    return c_star * std::pow(n, m) * std::pow(delta, 2 * m);
}

double tail_delta_inverse(const TailModel& tail, double n, double r) {
    if (!(n >= 1)) throw InvalidParameter("n must be >= 1");
    if (tail.kind == TailModel::Kind::subgaussian) {
        if (!(r > 0.25)) throw InvalidParameter("subgaussian inverse needs r > 1/4");
        return std::sqrt(std::log(4.0 * r) / (tail.c_star * n));
    }
    if (!(r > 0)) throw InvalidParameter("polynomial inverse needs r > 0");
    return std::pow(r / tail.c_star, 1.0 / (2.0 * tail.m)) / std::sqrt(n);
}

double tail_n_inverse(const TailModel& tail, double delta, double r) {
    if (!(delta > 0)) throw InvalidParameter("delta must be > 0");
    if (tail.kind == TailModel::Kind::subgaussian) {
        if (!(r > 0.25)) throw InvalidParameter("subgaussian inverse needs r > 1/4");
        return std::log(4.0 * r) / (tail.c_star * delta * delta);
    }
    if (!(r > 0)) throw InvalidParameter("polynomial inverse needs r > 0");
    return std::pow(r / tail.c_star, 1.0 / tail.m) / (delta * delta);
}

double lambda_theory(double alpha, const TailModel& tail, double n, int p, double tau) {
    if (!(alpha > 0) || alpha > 1) throw InvalidParameter("alpha must be in (0, 1]");
    if (!(tau > 2)) throw InvalidParameter("tau must be > 2");
    return (8.0 / alpha) * tail_delta_inverse(tail, n, std::pow(p, tau));
}

GammaBlocks gamma_blocks(const SymMatrix& sigma_star, const Support& support) {
    const int p = sigma_star.dim();
    if (support.dim() != p) throw DimensionMismatch("support dimension mismatch");
    GammaBlocks out;
    for (int j = 0; j < p; ++j) {
        for (int k = 0; k < p; ++k) {
            if (support.contains(j, k)) {
                out.s_pairs.push_back({j, k});
            } else {
                out.sc_pairs.push_back({j, k});
            }
        }
    }
    const size_t ns = out.s_pairs.size(), nc = out.sc_pairs.size();
    out.gamma_ss.resize(ns * ns);
    out.gamma_scs.resize(nc * ns);
    for (size_t a = 0; a < ns; ++a) {
        const auto [j, k] = out.s_pairs[a];
        for (size_t b = 0; b < ns; ++b) {
            const auto [l, m] = out.s_pairs[b];
            out.gamma_ss[a * ns + b] = sigma_star(j, l) * sigma_star(k, m);
        }
    }
    for (size_t a = 0; a < nc; ++a) {
        const auto [j, k] = out.sc_pairs[a];
        for (size_t b = 0; b < ns; ++b) {
            const auto [l, m] = out.s_pairs[b];
            out.gamma_scs[a * ns + b] = sigma_star(j, l) * sigma_star(k, m);
        }
    }
    return out;
}

namespace {

double max_sigma_diag(const ModelSpec& model) {
    double v = 0.0;
    for (int i = 0; i < model.p; ++i) v = std::max(v, model.sigma_star(i, i));
    return v;
}

}  // namespace

Diagnostics diagnostics(const ModelSpec& model) {
    Diagnostics d;
    d.k_sigma = norm_linf_op(model.sigma_star);
    d.theta_min = model.theta_min;
    d.degree_d = model.degree_d;
    d.sparsity_s = model.sparsity_s;
    d.max_var = max_sigma_diag(model);

    const Support support = Support::from_edges(model.p, model.edges);
    const GammaBlocks blocks = gamma_blocks(model.sigma_star, support);
    const int ns = static_cast<int>(blocks.s_pairs.size());

    // invert Gamma_SS through its Cholesky factor (Gamma* is PD, so is the
    // principal block)
    SymMatrix gss = SymMatrix::symmetrize(ns, blocks.gamma_ss);
    SymMatrix gss_inv{1};
    try {
        gss_inv = inverse_spd(gss);
    } catch (const NotPositiveDefinite& e) {
        throw SingularGammaSS(std::string("Gamma_SS is numerically singular: ") + e.what());
    }
    d.k_gamma = norm_linf_op(gss_inv);

    // |||Gamma_ScS Gamma_SS^{-1}|||_inf: max absolute row sum of the product
    const size_t nc = blocks.sc_pairs.size();
    double worst_row = 0.0;
    for (size_t a = 0; a < nc; ++a) {
        double row_sum = 0.0;
        for (int b = 0; b < ns; ++b) {
            double v = 0.0;
            for (int c = 0; c < ns; ++c) {
                v += blocks.gamma_scs[a * ns + c] * gss_inv(c, b);
            }
            row_sum += std::abs(v);
        }
        worst_row = std::max(worst_row, row_sum);
    }
    d.alpha = 1.0 - worst_row;

    if (d.alpha > 0) {
        const double inv_theta_term =
            std::isfinite(d.theta_min) ? d.k_gamma / (d.degree_d * d.theta_min) : 0.0;
        d.complexity_k =
            (1.0 + 8.0 / d.alpha) * d.max_var *
            std::max({d.k_sigma * d.k_gamma,
                      std::pow(d.k_sigma, 3) * d.k_gamma * d.k_gamma, inv_theta_term});
    } else {
        d.complexity_k = std::numeric_limits<double>::quiet_NaN();
    }
    return d;
}

namespace {

double shared_threshold(const Diagnostics& diag, const TailModel& tail, int p, double tau,
                        double extra_term) {
    if (!diag.incoherence_ok()) {
        throw IncoherenceFails("incoherence margin alpha = " + std::to_string(diag.alpha) +
                               " is not positive");
    }
    const double c = 1.0 + 8.0 / diag.alpha;
    const double curvature =
        6.0 * c * diag.degree_d *
        std::max(diag.k_sigma * diag.k_gamma,
                 std::pow(diag.k_sigma, 3) * diag.k_gamma * diag.k_gamma);
    const double denom = std::max({tail.v_star, curvature, extra_term});
    return tail_n_inverse(tail, 1.0 / denom, std::pow(p, tau));
}

}  // namespace

double threshold_ellinf(const Diagnostics& diag, const TailModel& tail, int p, double tau) {
    return shared_threshold(diag, tail, p, tau, 0.0);
}

double threshold_model_selection(const Diagnostics& diag, const TailModel& tail, int p,
                                 double tau) {
    if (!diag.incoherence_ok()) {
        throw IncoherenceFails("incoherence margin alpha = " + std::to_string(diag.alpha) +
                               " is not positive");
    }
    const double extra = std::isfinite(diag.theta_min)
                             ? 2.0 * diag.k_gamma * (1.0 + 8.0 / diag.alpha) / diag.theta_min
                             : 0.0;
    return shared_threshold(diag, tail, p, tau, extra);
}

PredictedBounds predicted_bounds(const Diagnostics& diag, const TailModel& tail, double n, int p,
                                 double tau) {
    if (!diag.incoherence_ok()) {
        throw IncoherenceFails("incoherence margin alpha = " + std::to_string(diag.alpha) +
                               " is not positive");
    }
    const double c = 1.0 + 8.0 / diag.alpha;
    const double delta_bar = tail_delta_inverse(tail, n, std::pow(p, tau));
    PredictedBounds b;
    b.ellinf = 2.0 * c * diag.k_gamma * delta_bar;
    const double root_sp = std::sqrt(static_cast<double>(diag.sparsity_s + p));
    b.frobenius = b.ellinf * root_sp;
    b.spectral = b.ellinf * std::min(root_sp, static_cast<double>(diag.degree_d));
    const double c3 = 2.0 * diag.k_sigma * diag.k_sigma * diag.k_gamma * c;
    const double c4 = 6.0 * std::pow(diag.k_sigma, 3) * diag.k_gamma * diag.k_gamma * c * c;
    b.cov_ellinf = c3 * delta_bar + c4 * diag.degree_d * delta_bar * delta_bar;
    b.cov_spectral = c3 * diag.degree_d * delta_bar +
                     c4 * diag.degree_d * diag.degree_d * delta_bar * delta_bar;
    return b;
}

SymMatrix remainder(const SymMatrix& theta_star, const SymMatrix& delta) {
    if (theta_star.dim() != delta.dim()) throw DimensionMismatch("remainder dimension mismatch");
    const SymMatrix sigma = inverse_spd(theta_star);
    const SymMatrix perturbed_inv = inverse_spd(theta_star + delta);
    // Sigma Delta Sigma
    const auto sd = matmul(sigma, delta);
    const int p = theta_star.dim();
    SymMatrix correction(p);
    for (int i = 0; i < p; ++i) {
        for (int j = i; j < p; ++j) {
            double v = 0.0;
            for (int k = 0; k < p; ++k) v += sd[static_cast<size_t>(i) * p + k] * sigma(k, j);
            correction.set(i, j, v);
        }
    }
    return perturbed_inv - sigma + correction;
}

WitnessReport witness_construct(const ModelSpec& model, const SymMatrix& sigma_hat, double lambda,
                                const SolverConfig& config) {
    if (sigma_hat.dim() != model.p) throw DimensionMismatch("witness dimension mismatch");
    if (!(lambda > 0)) throw InvalidParameter("witness needs lambda > 0");

    WitnessReport rep;
    rep.diag = diagnostics(model);

    SolverConfig cfg = config;
    cfg.lambda = lambda;
    const Support support = Support::from_edges(model.p, model.edges);
    rep.restricted_result = solve_restricted(sigma_hat, support, cfg);
    const SymMatrix& theta_tilde = rep.restricted_result.theta_hat;

    // dual entries on the non-support from the stationarity residue
    const SymMatrix theta_tilde_inv = inverse_spd(theta_tilde);
    const int p = model.p;
    rep.max_abs_z_sc = 0.0;
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            if (support.contains(i, j)) continue;
            const double z = (theta_tilde_inv(i, j) - sigma_hat(i, j)) / lambda;
            rep.max_abs_z_sc = std::max(rep.max_abs_z_sc, std::abs(z));
        }
    }
    rep.strict_dual_feasible = rep.max_abs_z_sc < 1.0;

    rep.ell_inf_error = norm_elem_max(theta_tilde - model.theta_star);
    rep.sign_consistent = signed_edge_set(theta_tilde, kZeroThreshold) ==
                          signed_edge_set(model.theta_star, kZeroThreshold);

    const SymMatrix w = noise_matrix(sigma_hat, model);
    rep.w_inf = norm_elem_max(w);
    const SymMatrix delta = theta_tilde - model.theta_star;
    const double r_inf = norm_elem_max(remainder(model.theta_star, delta));
    rep.lemma4_lhs = std::max(rep.w_inf, r_inf);
    rep.lemma4_rhs = rep.diag.alpha > 0 ? rep.diag.alpha * lambda / 8.0 : 0.0;

    rep.lemma6_radius = 2.0 * rep.diag.k_gamma * (rep.w_inf + lambda);
    const double cap = std::min(
        1.0 / (3.0 * rep.diag.k_sigma * rep.diag.degree_d),
        1.0 / (3.0 * std::pow(rep.diag.k_sigma, 3) * rep.diag.k_gamma * rep.diag.degree_d));
    rep.lemma6_precondition_ok = rep.lemma6_radius <= cap;
    rep.lemma7_ok = std::isfinite(rep.diag.theta_min)
                        ? rep.diag.theta_min >= 4.0 * rep.diag.k_gamma * (rep.w_inf + lambda)
                        : false;
    return rep;
}

NoiseEventCheck noise_event_check(const ModelSpec& model, const SymMatrix& sigma_hat,
                                  const TailModel& tail, double n, int p, double tau) {
    NoiseEventCheck out;
    out.w_inf = norm_elem_max(noise_matrix(sigma_hat, model));
    out.delta_bar = tail_delta_inverse(tail, n, std::pow(p, tau));
    out.event_holds = out.w_inf <= out.delta_bar;
    return out;
}

}  // namespace ggm
