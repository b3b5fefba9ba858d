#include <doctest.h>

#include <cmath>
#include <functional>

#include "ggm/errors.hpp"
#include "ggm/models.hpp"
#include "ggm/sampling.hpp"
#include "ggm/theory.hpp"

using namespace ggm;

namespace {

// Explicit p^2 x p^2 Kronecker oracle, restricted to the requested rows and
// columns -- only usable for tiny p.
std::vector<double> kron_rows_cols(const SymMatrix& sigma, const std::vector<IndexPair>& rows,
                                   const std::vector<IndexPair>& cols) {
    std::vector<double> out;
    out.reserve(rows.size() * cols.size());
    for (const auto& [j, k] : rows) {
        for (const auto& [l, m] : cols) {
            out.push_back(sigma(j, l) * sigma(k, m));
        }
    }
    return out;
}

double bisect_alpha_root(const std::function<double(double)>& alpha_of, double lo, double hi) {
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (alpha_of(mid) > 0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("gamma blocks: identity covariance") {
    const ModelSpec m = build_chain(3, 0.5);
    const Support support = Support::from_edges(3, m.edges);
    const GammaBlocks blocks = gamma_blocks(SymMatrix::identity(3), support);
    const size_t ns = blocks.s_pairs.size();
    REQUIRE(ns == 3 + 4);
    for (size_t a = 0; a < ns; ++a)
        for (size_t b = 0; b < ns; ++b) CHECK(blocks.gamma_ss[a * ns + b] == (a == b ? 1.0 : 0.0));
    for (double v : blocks.gamma_scs) CHECK(v == 0.0);
}

TEST_CASE("gamma blocks: p=2 product formula by hand") {
    SymMatrix sigma(2, {1.0, 0.3, 0.3, 1.0});
    const Support support = Support::full(2);
    const GammaBlocks blocks = gamma_blocks(sigma, support);
    const auto& pairs = blocks.s_pairs;
    REQUIRE(pairs.size() == 4);
    auto idx = [&](int j, int k) {
        for (size_t a = 0; a < pairs.size(); ++a) {
            if (pairs[a] == IndexPair{j, k}) return a;
        }
        REQUIRE(false);
        return size_t{0};
    };
    // Gamma_{(0,1),(0,1)} = Sigma_00 Sigma_11 = 1
    CHECK(blocks.gamma_ss[idx(0, 1) * 4 + idx(0, 1)] == 1.0);
    // Gamma_{(0,1),(1,0)} = Sigma_01 Sigma_10 = 0.09
    CHECK(blocks.gamma_ss[idx(0, 1) * 4 + idx(1, 0)] == doctest::Approx(0.09));
    // Gamma_{(0,0),(1,1)} = Sigma_01^2
    CHECK(blocks.gamma_ss[idx(0, 0) * 4 + idx(1, 1)] == doctest::Approx(0.09));
}

TEST_CASE("gamma blocks match the explicit Kronecker product at p = 3") {
    const ModelSpec m = build_chain(3, 0.4);
    const Support support = Support::from_edges(3, m.edges);
    const GammaBlocks blocks = gamma_blocks(m.sigma_star, support);
    const auto ss = kron_rows_cols(m.sigma_star, blocks.s_pairs, blocks.s_pairs);
    const auto scs = kron_rows_cols(m.sigma_star, blocks.sc_pairs, blocks.s_pairs);
    REQUIRE(ss.size() == blocks.gamma_ss.size());
    REQUIRE(scs.size() == blocks.gamma_scs.size());
    for (size_t i = 0; i < ss.size(); ++i) CHECK(blocks.gamma_ss[i] == ss[i]);
    for (size_t i = 0; i < scs.size(); ++i) CHECK(blocks.gamma_scs[i] == scs[i]);
}

TEST_CASE("diagnostics of the identity model") {
    const Diagnostics d = diagnostics(build_custom(SymMatrix::identity(5)));
    CHECK(d.k_sigma == doctest::Approx(1.0));
    CHECK(d.k_gamma == doctest::Approx(1.0));
    CHECK(d.alpha == doctest::Approx(1.0));
    CHECK(d.degree_d == 1);
    CHECK(d.sparsity_s == 0);
}

TEST_CASE("diamond incoherence closed form and root") {
    for (double rho : {0.05, 0.1, 0.15, 0.2}) {
        const Diagnostics d = diagnostics(build_diamond(rho));
        CHECK(1.0 - d.alpha == doctest::Approx(4.0 * rho * (rho + 1.0)).epsilon(1e-6));
    }
    const double root = bisect_alpha_root(
        [](double rho) { return diagnostics(build_diamond(rho)).alpha; }, 0.1, 0.3);
    // analytic root of 4 rho (rho + 1) = 1
    CHECK(root == doctest::Approx((std::sqrt(2.0) - 1.0) / 2.0).epsilon(1e-6));
}

TEST_CASE("star incoherence closed form and root") {
    for (double rho : {0.1, 0.2, 0.3, 0.4}) {
        const Diagnostics d = diagnostics(build_star(4, 3, rho));
        CHECK(1.0 - d.alpha == doctest::Approx(rho * (rho + 2.0)).epsilon(1e-6));
    }
    const double root = bisect_alpha_root(
        [](double rho) { return diagnostics(build_star(4, 3, rho)).alpha; }, 0.3, 0.5);
    CHECK(root == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-4));
}

TEST_CASE("incoherence failure is reported as data") {
    const Diagnostics d = diagnostics(build_diamond(0.3));
    CHECK(d.alpha < 0.0);
    CHECK_FALSE(d.incoherence_ok());
    CHECK(std::isnan(d.complexity_k));
    const TailModel tail = TailModel::subgaussian(1.0, 1.0);
    CHECK_THROWS_AS(threshold_ellinf(d, tail, 4, 3.0), IncoherenceFails);
    CHECK_THROWS_AS(predicted_bounds(d, tail, 100, 4, 3.0), IncoherenceFails);
}

TEST_CASE("subgaussian tail inverses") {
    const TailModel tail = TailModel::subgaussian(1.0, 1.0);
    const double c_star = 1.0 / 3200.0;  // 128 (1+4)^2
    CHECK(tail.c_star == doctest::Approx(c_star).epsilon(1e-12));
    CHECK(tail.v_star == doctest::Approx(1.0 / 40.0).epsilon(1e-12));

    const double n = 500, r = std::pow(64.0, 3.0);
    CHECK(tail_delta_inverse(tail, n, r) ==
          doctest::Approx(std::sqrt((3 * std::log(64.0) + std::log(4.0)) * 3200.0 / n))
              .epsilon(1e-12));
    CHECK(tail_n_inverse(tail, 0.5, r) ==
          doctest::Approx(std::log(4.0 * r) * 3200.0 / 0.25).epsilon(1e-12));

    // doubling n divides the deviation level by sqrt(2)
    CHECK(tail_delta_inverse(tail, 2 * n, r) ==
          doctest::Approx(tail_delta_inverse(tail, n, r) / std::sqrt(2.0)).epsilon(1e-12));

    CHECK_THROWS_AS(tail_delta_inverse(tail, 100, 0.2), InvalidParameter);
}

TEST_CASE("polynomial tail inverses") {
    const TailModel tail = TailModel::polynomial(2, 3.0, 1.0);
    const double r = 100.0, n = 400.0;
    // delta scales as n^{-1/2} r^{1/(2m)}
    CHECK(tail_delta_inverse(tail, n, r) ==
          doctest::Approx(std::pow(r / tail.c_star, 0.25) / std::sqrt(n)).epsilon(1e-12));
    CHECK(tail_n_inverse(tail, 0.3, r) ==
          doctest::Approx(std::pow(r / tail.c_star, 0.5) / 0.09).epsilon(1e-12));
    CHECK(tail.v_star == 0.0);
}

TEST_CASE("tail inverse monotone consistency") {
    for (const TailModel& tail :
         {TailModel::subgaussian(1.0, 1.3), TailModel::polynomial(3, 2.0, 1.1)}) {
        for (double delta : {0.05, 0.2, 0.7}) {
            for (double r : {10.0, 1e3, 1e6}) {
                const double n = tail_n_inverse(tail, delta, r);
                CHECK(tail_delta_inverse(tail, n, r) <= delta * (1 + 1e-9));
                CHECK(tail_delta_inverse(tail, n * 1.5, r) < delta);
            }
        }
    }
}

TEST_CASE("theory lambda scales as 1/alpha and composes the tail inverse") {
    const TailModel tail = TailModel::subgaussian(1.0, 1.0);
    const double l_half = lambda_theory(0.5, tail, 1000, 32, 3.0);
    const double l_one = lambda_theory(1.0, tail, 1000, 32, 3.0);
    CHECK(l_half == doctest::Approx(2.0 * l_one).epsilon(1e-12));
    CHECK(l_one ==
          doctest::Approx(8.0 * tail_delta_inverse(tail, 1000, std::pow(32.0, 3.0))).epsilon(1e-12));
    CHECK_THROWS_AS(lambda_theory(0.0, tail, 1000, 32, 3.0), InvalidParameter);
    CHECK_THROWS_AS(lambda_theory(0.5, tail, 1000, 32, 2.0), InvalidParameter);
}

TEST_CASE("sample-size threshold: identity model by direct substitution") {
    const Diagnostics d = diagnostics(build_custom(SymMatrix::identity(10)));
    const TailModel tail = TailModel::subgaussian(1.0, 1.0);
    const double tau = 3.0;
    // independent evaluation: delta = 1 / max{v*, 6 (1+8) * 1 * 1}, r = p^tau
    const double delta = 1.0 / std::max(tail.v_star, 6.0 * 9.0);
    const double expected = std::log(4.0 * std::pow(10.0, tau)) * 3200.0 / (delta * delta);
    CHECK(threshold_ellinf(d, tail, 10, tau) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("thresholds are monotone in the degree") {
    const TailModel tail = TailModel::subgaussian(1.0, 1.0);
    Diagnostics d;
    d.k_sigma = 1.4;
    d.k_gamma = 1.8;
    d.alpha = 0.5;
    d.theta_min = 0.2;
    d.sparsity_s = 10;
    double prev = 0.0;
    for (int degree : {1, 2, 4, 8}) {
        d.degree_d = degree;
        const double t = threshold_ellinf(d, tail, 16, 3.0);
        CHECK(t > prev);
        prev = t;
    }
}

TEST_CASE("model-selection threshold reduces to the ellinf threshold for large theta_min") {
    const TailModel tail = TailModel::subgaussian(1.0, 1.0);
    Diagnostics d;
    d.k_sigma = 1.2;
    d.k_gamma = 1.5;
    d.alpha = 0.6;
    d.degree_d = 3;
    d.sparsity_s = 12;

    d.theta_min = 1e9;
    CHECK(threshold_model_selection(d, tail, 32, 3.0) ==
          doctest::Approx(threshold_ellinf(d, tail, 32, 3.0)).epsilon(1e-12));

    // when the theta_min term dominates, halving theta_min quadruples n
    d.theta_min = 1e-4;
    const double t1 = threshold_model_selection(d, tail, 32, 3.0);
    d.theta_min = 0.5e-4;
    const double t2 = threshold_model_selection(d, tail, 32, 3.0);
    CHECK(t2 == doctest::Approx(4.0 * t1).epsilon(1e-9));
}

TEST_CASE("star family model-selection threshold follows the (d^2 + 1/theta_min^2) shape") {
    const double tau = 3.0;
    const int p = 64;
    double ratio_min = 1e300, ratio_max = 0.0;
    for (int d_spokes : {8, 16, 32}) {
        const ModelSpec m = build_star(p, d_spokes, 2.5 / d_spokes);
        const Diagnostics d = diagnostics(m);
        const TailModel tail = TailModel::subgaussian_for(m);
        const double n_req = threshold_model_selection(d, tail, p, tau);
        const double shape = (static_cast<double>(d.degree_d) * d.degree_d +
                              1.0 / (d.theta_min * d.theta_min)) *
                             (tau * std::log(p) + std::log(4.0));
        const double ratio = n_req / shape;
        ratio_min = std::min(ratio_min, ratio);
        ratio_max = std::max(ratio_max, ratio);
    }
    CHECK(ratio_max / ratio_min < 10.0);
}

TEST_CASE("predicted bounds: identity model by direct substitution") {
    const Diagnostics d = diagnostics(build_custom(SymMatrix::identity(5)));
    const TailModel tail = TailModel::subgaussian(1.0, 1.0);
    const double n = 100, tau = 3.0;
    const PredictedBounds b = predicted_bounds(d, tail, n, 5, tau);
    const double delta_bar = std::sqrt(std::log(4.0 * std::pow(5.0, tau)) * 3200.0 / n);
    CHECK(b.ellinf == doctest::Approx(2.0 * 9.0 * delta_bar).epsilon(1e-12));
    CHECK(b.frobenius == doctest::Approx(b.ellinf * std::sqrt(5.0)).epsilon(1e-12));
    CHECK(b.spectral == doctest::Approx(b.ellinf * 1.0).epsilon(1e-12));  // min(sqrt 5, d=1)
    CHECK(b.cov_ellinf ==
          doctest::Approx(2.0 * 9.0 * delta_bar + 6.0 * 81.0 * delta_bar * delta_bar)
              .epsilon(1e-12));
    CHECK(b.cov_spectral == doctest::Approx(b.cov_ellinf).epsilon(1e-12));  // d = 1
    CHECK(b.spectral <= b.frobenius);
}

TEST_CASE("quadrupling n at least halves every predicted bound") {
    const Diagnostics d = diagnostics(build_chain(16, 0.25));
    const TailModel tail = TailModel::subgaussian(1.0, 1.0);
    const PredictedBounds b1 = predicted_bounds(d, tail, 500, 16, 3.0);
    const PredictedBounds b4 = predicted_bounds(d, tail, 2000, 16, 3.0);
    CHECK(b4.ellinf == doctest::Approx(b1.ellinf / 2).epsilon(1e-12));
    CHECK(b4.frobenius == doctest::Approx(b1.frobenius / 2).epsilon(1e-12));
    CHECK(b4.spectral == doctest::Approx(b1.spectral / 2).epsilon(1e-12));
    CHECK(b4.cov_ellinf <= b1.cov_ellinf / 2 + 1e-12);
    CHECK(b4.cov_ellinf >= b1.cov_ellinf / 4 - 1e-12);
    CHECK(b4.cov_spectral <= b1.cov_spectral / 2 + 1e-12);
}

TEST_CASE("remainder: zero perturbation and scalar algebra") {
    const ModelSpec m = build_chain(5, 0.3);
    const SymMatrix zero(5);
    CHECK(norm_elem_max(remainder(m.theta_star, zero)) < 1e-12);

    // p = 1: R = 1/(t+d) - 1/t + d/t^2 = d^2 / (t^2 (t+d))
    const double t = 2.0, dd = 0.3;
    SymMatrix theta(1, {t});
    SymMatrix delta(1, {dd});
    const double expected = dd * dd / (t * t * (t + dd));
    CHECK(remainder(theta, delta)(0, 0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(remainder(theta, delta)(0, 0) > 0.0);
}

TEST_CASE("remainder obeys the quadratic bound on supported perturbations") {
    const ModelSpec m = build_grid(3, 0.12);
    const Diagnostics diag = diagnostics(m);
    const double cap = 1.0 / (3.0 * diag.k_sigma * diag.degree_d);
    Rng rng(Seed{909});
    for (int rep = 0; rep < 100; ++rep) {
        SymMatrix delta(m.p);
        for (int i = 0; i < m.p; ++i) delta.set(i, i, rng.next_gaussian());
        for (const auto& [i, j] : m.edges.pairs()) delta.set(i, j, rng.next_gaussian());
        const double scale = (0.1 + 0.9 * rng.next_uniform()) * cap / norm_elem_max(delta);
        delta = delta.scaled(scale);
        const double r_inf = norm_elem_max(remainder(m.theta_star, delta));
        const double bound = 1.5 * diag.degree_d * std::pow(norm_elem_max(delta), 2) *
                             std::pow(diag.k_sigma, 3);
        CHECK(r_inf <= bound * (1 + 1e-9));
    }
}

TEST_CASE("witness at the population covariance certifies the chain model") {
    const ModelSpec m = build_chain(16, 0.2);
    SolverConfig cfg;
    const double lambda = 1e-3;
    const WitnessReport rep = witness_construct(m, m.sigma_star, lambda, cfg);
    CHECK(rep.restricted_result.converged);
    CHECK(rep.strict_dual_feasible);
    CHECK(rep.w_inf == 0.0);
    CHECK(rep.ell_inf_error <= rep.lemma6_radius);
    CHECK(rep.lemma6_precondition_ok);
}

TEST_CASE("witness equals the full solve under strict dual feasibility") {
    const ModelSpec m = build_chain(12, 0.25);
    const Dataset data = sample_gaussian(m, 2000, Seed{4242}.substream("witness-eq"));
    const SymMatrix sigma_hat = sample_covariance(data);
    SolverConfig cfg;
    const double lambda = 0.1;
    const WitnessReport rep = witness_construct(m, sigma_hat, lambda, cfg);
    REQUIRE(rep.strict_dual_feasible);
    SolverConfig full_cfg = cfg;
    full_cfg.lambda = lambda;
    const SolveResult full = solve(sigma_hat, full_cfg);
    REQUIRE(full.converged);
    CHECK(norm_elem_max(rep.restricted_result.theta_hat - full.theta_hat) <= 10 * cfg.tol);
    // Theorem 1(b) containment: no false edges in the full estimate
    for (const auto& [pair, sign] : signed_edge_set(full.theta_hat, kZeroThreshold)) {
        CHECK(m.edges.contains(pair.first, pair.second));
    }
}

TEST_CASE("huge lambda: dual feasible but edges lost") {
    const ModelSpec m = build_chain(8, 0.3);
    const Dataset data = sample_gaussian(m, 400, Seed{777}.substream("huge-lambda"));
    const SymMatrix sigma_hat = sample_covariance(data);
    const WitnessReport rep = witness_construct(m, sigma_hat, 50.0, SolverConfig{});
    CHECK(rep.strict_dual_feasible);
    CHECK(rep.max_abs_z_sc < 0.1);
    CHECK_FALSE(rep.sign_consistent);
}

TEST_CASE("witness on an incoherence-violating diamond still reports diagnostics") {
    const ModelSpec m = build_diamond(0.3);
    const Dataset data = sample_gaussian(m, 500, Seed{888}.substream("diamond-witness"));
    const SymMatrix sigma_hat = sample_covariance(data);
    const WitnessReport rep = witness_construct(m, sigma_hat, 0.05, SolverConfig{});
    CHECK(rep.diag.alpha < 0.0);
    CHECK(rep.lemma4_rhs == 0.0);
}

TEST_CASE("noise event check") {
    const ModelSpec m = build_chain(6, 0.3);
    const TailModel tail = TailModel::subgaussian_for(m);
    const NoiseEventCheck at_truth = noise_event_check(m, m.sigma_star, tail, 100, m.p, 3.0);
    CHECK(at_truth.w_inf == 0.0);
    CHECK(at_truth.event_holds);

    const Dataset data = sample_gaussian(m, 100, Seed{99}.substream("noise-event"));
    const SymMatrix sigma_hat = sample_covariance(data);
    const NoiseEventCheck sampled = noise_event_check(m, sigma_hat, tail, 100, m.p, 3.0);
    CHECK(sampled.w_inf ==
          doctest::Approx(norm_elem_max(noise_matrix(sigma_hat, m))).epsilon(1e-15));
    CHECK(sampled.delta_bar ==
          doctest::Approx(tail_delta_inverse(tail, 100, std::pow(6.0, 3.0))).epsilon(1e-15));
}
