#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ggm/errors.hpp"
#include "ggm/harness.hpp"
#include "ggm/models.hpp"

using namespace ggm;

namespace {

bool rows_equal(const TrialOutcome& a, const TrialOutcome& b) {
    auto feq = [](double x, double y) {
        if (std::isnan(x) && std::isnan(y)) return true;
        return x == y;
    };
    return a.p == b.p && a.d == b.d && a.n == b.n && a.trial == b.trial &&
           feq(a.lambda_used, b.lambda_used) && a.success == b.success &&
           feq(a.ell_inf_err, b.ell_inf_err) && feq(a.frob_err, b.frob_err) &&
           feq(a.spectral_err, b.spectral_err) && feq(a.cov_ell_inf_err, b.cov_ell_inf_err) &&
           feq(a.cov_spectral_err, b.cov_spectral_err) && a.witness_ok == b.witness_ok &&
           a.converged == b.converged && feq(a.strength, b.strength) &&
           feq(a.complexity_k, b.complexity_k);
}

ExperimentConfig small_chain_config() {
    ExperimentConfig cfg;
    cfg.family = "chain";
    cfg.p_list = {16};
    cfg.strength = 0.2;
    cfg.n_grid = {5, 600};
    cfg.trials = 10;
    cfg.lambda_rule = LambdaRule::parse("practical:1");
    cfg.seed = Seed{20240501};
    return cfg;
}

}  // namespace

TEST_CASE("success predicate") {
    const ModelSpec m = build_chain(6, 0.3);
    CHECK(success_predicate(m.theta_star, m, kZeroThreshold));

    SymMatrix extra = m.theta_star;
    extra.set(0, 3, 0.05);
    CHECK_FALSE(success_predicate(extra, m, kZeroThreshold));

    SymMatrix flipped = m.theta_star;
    flipped.set(0, 1, -m.theta_star(0, 1));
    CHECK_FALSE(success_predicate(flipped, m, kZeroThreshold));

    SymMatrix missing = m.theta_star;
    missing.set(0, 1, 0.0);
    CHECK_FALSE(success_predicate(missing, m, kZeroThreshold));
}

TEST_CASE("lambda rule parsing") {
    const LambdaRule t = LambdaRule::parse("theory:3.5");
    CHECK(t.kind == LambdaRule::Kind::theory);
    CHECK(t.value == 3.5);
    const LambdaRule pr = LambdaRule::parse("practical:0.5");
    CHECK(pr.kind == LambdaRule::Kind::practical);
    CHECK(pr.value == 0.5);
    const LambdaRule f = LambdaRule::parse("fixed:0.02");
    CHECK(f.kind == LambdaRule::Kind::fixed);
    CHECK(f.value == 0.02);
    CHECK(LambdaRule::parse("practical").value == 1.0);
    CHECK_THROWS_AS(LambdaRule::parse("magic:1"), InvalidParameter);
    CHECK(LambdaRule::parse(pr.str()).value == pr.value);
}

TEST_CASE("tiny n fails, large n succeeds on the chain") {
    const ResultTable table = run_model_selection(small_chain_config());
    double tiny_rate = 0.0, large_rate = 0.0;
    for (const auto& r : table.rows) {
        if (r.n == 5) tiny_rate += r.success;
        if (r.n == 600) large_rate += r.success;
    }
    tiny_rate /= 10;
    large_rate /= 10;
    CHECK(tiny_rate <= 0.1);
    CHECK(large_rate >= 0.9);
}

TEST_CASE("identical config and seed reproduce the table; threads do not matter") {
    ExperimentConfig cfg = small_chain_config();
    cfg.n_grid = {40, 80};
    cfg.trials = 6;
    const ResultTable a = run_model_selection(cfg);
    const ResultTable b = run_model_selection(cfg);
    REQUIRE(a.rows.size() == b.rows.size());
    for (size_t i = 0; i < a.rows.size(); ++i) CHECK(rows_equal(a.rows[i], b.rows[i]));

    cfg.threads = 4;
    const ResultTable c = run_model_selection(cfg);
    REQUIRE(a.rows.size() == c.rows.size());
    for (size_t i = 0; i < a.rows.size(); ++i) CHECK(rows_equal(a.rows[i], c.rows[i]));
}

TEST_CASE("aggregates equal recomputation from rows") {
    ExperimentConfig cfg = small_chain_config();
    cfg.n_grid = {30, 60};
    cfg.trials = 8;
    const ResultTable table = run_model_selection(cfg);
    const auto aggs = aggregate(table);
    REQUIRE(aggs.size() == 2);
    for (const auto& a : aggs) {
        double successes = 0.0, sum_ell = 0.0;
        int count = 0;
        for (const auto& r : table.rows) {
            if (r.n != a.n) continue;
            ++count;
            successes += r.success ? 1 : 0;
            sum_ell += r.ell_inf_err;
        }
        CHECK(count == a.trials);
        CHECK(a.success_rate == successes / count);
        CHECK(a.mean_ell_inf == doctest::Approx(sum_ell / count).epsilon(1e-15));
    }
}

TEST_CASE("emit and parse round trip; empty table gives a header-only file") {
    ExperimentConfig cfg = small_chain_config();
    cfg.n_grid = {50};
    cfg.trials = 5;
    cfg.run_witness = true;
    cfg.lambda_rule = LambdaRule::parse("fixed:0.15");
    const ResultTable table = run_model_selection(cfg);

    const auto dir = std::filesystem::temp_directory_path() / "ggm_emit_test";
    std::filesystem::remove_all(dir);
    emit(table, "csv", dir.string());
    CHECK(std::filesystem::exists(dir / "rows.csv"));
    CHECK(std::filesystem::exists(dir / "aggregates.csv"));
    CHECK(std::filesystem::exists(dir / "config-echo.json"));

    const ResultTable parsed = parse_rows_csv((dir / "rows.csv").string());
    REQUIRE(parsed.rows.size() == table.rows.size());
    CHECK(parsed.family == "chain");
    for (size_t i = 0; i < parsed.rows.size(); ++i) CHECK(rows_equal(parsed.rows[i], table.rows[i]));

    emit(table, "json", dir.string());
    CHECK(std::filesystem::exists(dir / "results.json"));

    ResultTable empty;
    empty.family = "chain";
    empty.config_echo_json = cfg.to_json();
    emit(empty, "csv", dir.string());
    std::ifstream rows(dir / "rows.csv");
    std::string line;
    int lines = 0;
    while (std::getline(rows, line)) {
        if (!line.empty()) ++lines;
    }
    CHECK(lines == 1);  // header only
    std::filesystem::remove_all(dir);
}

TEST_CASE("n50 interpolation") {
    CHECK(n50_crossing({{10, 0.0}, {20, 0.25}, {30, 0.75}, {40, 1.0}}) ==
          doctest::Approx(25.0));
    CHECK(n50_crossing({{10, 0.6}, {20, 0.9}}) == 10.0);
    CHECK(std::isnan(n50_crossing({{10, 0.0}, {20, 0.4}})));
}

TEST_CASE("isotonic fit is monotone and mass preserving") {
    const std::vector<double> y = {0.0, 0.2, 0.1, 0.5, 0.4, 0.9, 1.0};
    const std::vector<double> w(y.size(), 1.0);
    const auto fit = isotonic_fit(y, w);
    REQUIRE(fit.size() == y.size());
    for (size_t i = 1; i < fit.size(); ++i) CHECK(fit[i] >= fit[i - 1]);
    double sy = 0, sf = 0;
    for (size_t i = 0; i < y.size(); ++i) {
        sy += y[i];
        sf += fit[i];
    }
    CHECK(sf == doctest::Approx(sy).epsilon(1e-12));
}

TEST_CASE("success curves are monotone in n up to binomial noise") {
    ExperimentConfig cfg = small_chain_config();
    cfg.n_grid = {20, 60, 120, 240, 480};
    cfg.trials = 20;
    cfg.threads = 4;
    const ResultTable table = run_model_selection(cfg);
    std::vector<std::pair<int, double>> curve;
    for (const auto& a : aggregate(table)) curve.push_back({a.n, a.success_rate});
    std::sort(curve.begin(), curve.end());
    std::vector<double> rates, weights;
    for (const auto& [n, r] : curve) {
        rates.push_back(r);
        weights.push_back(cfg.trials);
    }
    const auto fit = isotonic_fit(rates, weights);
    for (size_t i = 0; i < rates.size(); ++i) {
        const double se = std::sqrt(std::max(fit[i] * (1 - fit[i]), 0.25 / cfg.trials) / cfg.trials);
        CHECK(std::abs(fit[i] - rates[i]) <= 3 * se + 1e-12);
    }
}

TEST_CASE("degree sweep shifts curves right in raw n") {
    ExperimentConfig cfg;
    cfg.family = "star";
    cfg.p_list = {32};
    cfg.hub_degrees = {2, 8};
    cfg.strength_scaled_by_degree = true;
    cfg.n_grid = {100, 200, 400, 800, 1600, 3200};
    cfg.trials = 10;
    cfg.threads = 4;
    cfg.lambda_rule = LambdaRule::parse("practical:1");
    cfg.seed = Seed{77};
    const ResultTable table = run_degree_sweep(cfg);

    std::map<int, std::vector<std::pair<int, double>>> curves;
    for (const auto& a : aggregate(table)) curves[a.d].push_back({a.n, a.success_rate});
    REQUIRE(curves.size() == 2);
    const double n50_small = n50_crossing(curves.begin()->second);
    const double n50_large = n50_crossing(curves.rbegin()->second);
    CHECK(n50_small < n50_large);
}

TEST_CASE("witness rows imply no false edges") {
    ExperimentConfig cfg = small_chain_config();
    cfg.p_list = {12};
    cfg.n_grid = {400};
    cfg.trials = 8;
    cfg.run_witness = true;
    const ResultTable table = run_model_selection(cfg);
    int witness_hits = 0;
    for (const auto& r : table.rows) {
        CHECK(r.witness_ok >= 0);
        witness_hits += r.witness_ok == 1;
    }
    CHECK(witness_hits > 0);
}

TEST_CASE("complexity sweep joins the model constant") {
    ExperimentConfig cfg;
    cfg.family = "chain";
    cfg.p_list = {16};
    cfg.strength_list = {0.1, 0.3};
    cfg.n_grid = {50};
    cfg.trials = 3;
    cfg.lambda_rule = LambdaRule::parse("practical:1");
    const ResultTable table = run_complexity_sweep(cfg);
    std::map<double, double> k_by_strength;
    for (const auto& r : table.rows) {
        CHECK(std::isfinite(r.complexity_k));
        k_by_strength[r.strength] = r.complexity_k;
    }
    REQUIRE(k_by_strength.size() == 2);
    CHECK(k_by_strength.at(0.1) < k_by_strength.at(0.3));
}
