#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ggm/models.hpp"
#include "ggm/sampling.hpp"
#include "ggm/solver.hpp"

namespace ggm {

struct LambdaRule {
    enum class Kind { theory, practical, fixed };
    Kind kind = Kind::practical;
    // tau for theory, the sqrt(log p / n) multiplier for practical, the
    // value itself for fixed
    double value = 1.0;

    static LambdaRule parse(const std::string& text);  // "theory:3" | "practical:1" | "fixed:0.1"
    std::string str() const;
};

struct ExperimentConfig {
    std::string family = "chain";  // chain | grid | star | diamond | custom
    std::vector<int> p_list;
    std::vector<int> hub_degrees;       // star hub degrees; empty means ceil(0.1 p)
    double strength = 0.2;              // rho (chain/star/diamond) or omega (grid)
    std::vector<double> strength_list;  // overrides strength when non-empty (complexity sweeps)
    bool strength_scaled_by_degree = false;  // star: edge covariance = edge_cov_scale / d
    double edge_cov_scale = 2.5;
    std::vector<int> n_grid;
    int trials = 50;
    LambdaRule lambda_rule;
    double tau = 3.0;
    Seed seed{12345};
    SolverConfig solver;
    bool run_witness = false;
    int threads = 1;
    double zero_threshold = kZeroThreshold;
    std::string label = "experiment";
    std::optional<ModelSpec> custom_model;

    std::string to_json() const;
};

struct TrialOutcome {
    int p = 0;
    int d = 0;  // max row cardinality of the model (diagonal counted)
    int n = 0;
    int trial = 0;
    double strength = 0.0;
    double lambda_used = 0.0;
    bool success = false;  // exact signed-edge-set recovery
    double ell_inf_err = 0.0;
    double frob_err = 0.0;
    double spectral_err = 0.0;
    double cov_ell_inf_err = 0.0;
    double cov_spectral_err = 0.0;
    int witness_ok = -1;  // -1 absent, else 0/1
    bool converged = false;
    double complexity_k = 0.0;  // NaN when incoherence fails
};

struct ResultTable {
    std::string family;
    std::vector<TrialOutcome> rows;
    std::string config_echo_json;
};

struct AggregateRow {
    std::string family;
    double strength = 0.0;
    int p = 0;
    int d = 0;
    int n = 0;
    int trials = 0;
    double success_rate = 0.0;
    double mean_ell_inf = 0.0;
    double median_ell_inf = 0.0;
    double mean_frob = 0.0;
    double mean_spectral = 0.0;
    double mean_cov_inf = 0.0;
    double mean_cov_spec = 0.0;
    double complexity_k = 0.0;
};

// Recomputes aggregates from rows; nothing is cached so they can never drift.
std::vector<AggregateRow> aggregate(const ResultTable& table);

// Exact signed-edge-set recovery: edge positions and signs of theta_hat
// match the model's.
bool success_predicate(const SymMatrix& theta_hat, const ModelSpec& model, double zero_threshold);

// Probability-of-recovery experiment over the (p, n, trial) cross product.
ResultTable run_model_selection(const ExperimentConfig& cfg);

// Elementwise-error decay experiment (star with d = ceil(0.1 p) unless hub
// degrees are given).
ResultTable run_ellinf_rate(const ExperimentConfig& cfg);

// Star family, hub degree swept at fixed p.
ResultTable run_degree_sweep(const ExperimentConfig& cfg);

// Chain family, strength swept to vary the model-complexity constant; rows
// carry the per-model complexity value.
ResultTable run_complexity_sweep(const ExperimentConfig& cfg);

// rows CSV + aggregates CSV (format "csv") or a single JSON document
// (format "json") under dir; file names rows.csv / aggregates.csv /
// results.json / config-echo.json.
void emit(const ResultTable& table, const std::string& format, const std::string& dir);

ResultTable parse_rows_csv(const std::string& path);

// Sample size at which the success curve crosses 1/2, linearly interpolated
// between bracketing grid points; NaN when the curve never crosses.
double n50_crossing(const std::vector<std::pair<int, double>>& success_by_n);

// Pool-adjacent-violators fit of a nondecreasing sequence (weights = counts).
std::vector<double> isotonic_fit(const std::vector<double>& y, const std::vector<double>& w);

}  // namespace ggm
