#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ggm/errors.hpp"
#include "ggm/harness.hpp"
#include "ggm/matrix_io.hpp"
#include "ggm/models.hpp"
#include "ggm/sampling.hpp"
#include "ggm/solver.hpp"
#include "ggm/theory.hpp"

namespace {

using namespace ggm;

struct ModelArgs {
    std::string model_file;
    std::string family;
    int p = 0;
    double rho = 0.2;
    double omega = 0.1;
    int hub_d = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--model", model_file, "model spec JSON file");
        cmd->add_option("--family", family, "chain|grid|star|diamond");
        cmd->add_option("--p", p, "dimension (grid: must be a perfect square)");
        cmd->add_option("--rho", rho, "edge covariance (chain/star/diamond)");
        cmd->add_option("--omega", omega, "edge concentration (grid)");
        cmd->add_option("--hub-d", hub_d, "star hub degree (default ceil(0.1 p))");
    }

    ModelSpec build() const {
        if (!model_file.empty()) return model_from_json_file(model_file);
        if (family == "chain") return build_chain(p, rho);
        if (family == "grid") {
            const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(p))));
            if (side * side != p) throw InvalidParameter("grid p must be a perfect square");
            return build_grid(side, omega);
        }
        if (family == "star") {
            const int d = hub_d > 0 ? hub_d : static_cast<int>(std::ceil(0.1 * p));
            return build_star(p, d, rho);
        }
        if (family == "diamond") return build_diamond(rho);
        throw InvalidParameter("give --model or --family with its parameters");
    }
};

TailModel parse_tail(const std::string& text, const ModelSpec& model) {
    // "subgaussian:<sigma>" or "polynomial:<m>:<K_m>"
    double max_var = 0.0;
    for (int i = 0; i < model.p; ++i) max_var = std::max(max_var, model.sigma_star(i, i));
    if (text.rfind("subgaussian", 0) == 0) {
        double sigma = 1.0;
        if (const auto colon = text.find(':'); colon != std::string::npos) {
            sigma = std::stod(text.substr(colon + 1));
        }
        return TailModel::subgaussian(sigma, max_var);
    }
    if (text.rfind("polynomial", 0) == 0) {
        const auto c1 = text.find(':');
        if (c1 == std::string::npos) throw InvalidParameter("polynomial tail needs :m:K_m");
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string::npos) throw InvalidParameter("polynomial tail needs :m:K_m");
        return TailModel::polynomial(std::stoi(text.substr(c1 + 1, c2 - c1 - 1)),
                                     std::stod(text.substr(c2 + 1)), max_var);
    }
    throw InvalidParameter("tail must be subgaussian[:sigma] or polynomial:m:K_m");
}

std::vector<int> parse_int_list(const std::vector<std::string>& items) {
    // accepts repeated values and start:stop:step ranges
    std::vector<int> out;
    for (const auto& item : items) {
        const auto c1 = item.find(':');
        if (c1 == std::string::npos) {
            out.push_back(std::stoi(item));
            continue;
        }
        const auto c2 = item.find(':', c1 + 1);
        if (c2 == std::string::npos) throw InvalidParameter("range needs start:stop:step");
        const int start = std::stoi(item.substr(0, c1));
        const int stop = std::stoi(item.substr(c1 + 1, c2 - c1 - 1));
        const int step = std::stoi(item.substr(c2 + 1));
        if (step <= 0) throw InvalidParameter("range step must be positive");
        for (int v = start; v <= stop; v += step) out.push_back(v);
    }
    return out;
}

nlohmann::json witness_report_json(const WitnessReport& rep) {
    nlohmann::json j;
    j["strict_dual_feasible"] = rep.strict_dual_feasible;
    j["max_abs_z_sc"] = rep.max_abs_z_sc;
    j["ell_inf_error"] = rep.ell_inf_error;
    j["sign_consistent"] = rep.sign_consistent;
    j["w_inf"] = rep.w_inf;
    j["lemma4_lhs"] = rep.lemma4_lhs;
    j["lemma4_rhs"] = rep.lemma4_rhs;
    j["lemma6_radius"] = rep.lemma6_radius;
    j["lemma6_precondition_ok"] = rep.lemma6_precondition_ok;
    j["lemma7_ok"] = rep.lemma7_ok;
    j["restricted"] = {{"sweeps", rep.restricted_result.sweeps},
                       {"kkt_residual", rep.restricted_result.kkt_residual},
                       {"converged", rep.restricted_result.converged}};
    j["alpha"] = rep.diag.alpha;
    j["k_sigma"] = rep.diag.k_sigma;
    j["k_gamma"] = rep.diag.k_gamma;
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text << std::endl;
        return;
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text << '\n';
}

int run(int argc, char** argv) {
    CLI::App app{"sparse inverse covariance estimation: solver, theory diagnostics, experiments"};
    app.require_subcommand(1);

    // ---- solve ----
    auto* solve_cmd = app.add_subcommand("solve", "estimate a concentration matrix from a covariance CSV");
    std::string in_path, out_path, dual_out, report_path;
    SolverConfig sc;
    solve_cmd->add_option("--input", in_path, "covariance CSV")->required();
    solve_cmd->add_option("--lambda", sc.lambda, "off-diagonal l1 weight")->required();
    solve_cmd->add_option("--tol", sc.tol, "KKT tolerance");
    solve_cmd->add_option("--max-sweeps", sc.max_outer_sweeps, "outer sweep cap");
    solve_cmd->add_option("--out", out_path, "estimate CSV")->required();
    solve_cmd->add_option("--dual-out", dual_out, "subgradient CSV");
    solve_cmd->add_option("--report", report_path, "JSON run report");

    // ---- diagnose ----
    auto* diag_cmd = app.add_subcommand("diagnose", "incoherence and sample-size diagnostics for a model");
    ModelArgs diag_model;
    diag_model.attach(diag_cmd);
    std::string tail_text = "subgaussian:1";
    double tau = 3.0;
    int diag_n = 0;
    std::string diag_out;
    diag_cmd->add_option("--tail", tail_text, "subgaussian[:sigma] | polynomial:m:K_m");
    diag_cmd->add_option("--tau", tau, "probability exponent (> 2)");
    diag_cmd->add_option("--n", diag_n, "sample size for predicted error bounds");
    diag_cmd->add_option("--out", diag_out, "output JSON ('-' for stdout)");

    // ---- witness ----
    auto* wit_cmd = app.add_subcommand("witness", "primal-dual witness certificate on sampled data");
    ModelArgs wit_model;
    wit_model.attach(wit_cmd);
    int wit_n = 0;
    std::string wit_lambda = "theory";
    uint64_t wit_seed = 12345;
    double wit_tau = 3.0;
    std::string wit_out;
    wit_cmd->add_option("--n", wit_n, "sample size")->required();
    wit_cmd->add_option("--lambda", wit_lambda, "numeric value or 'theory'");
    wit_cmd->add_option("--tau", wit_tau, "tau for the theory lambda");
    wit_cmd->add_option("--seed", wit_seed, "root seed");
    wit_cmd->add_option("--out", wit_out, "output JSON ('-' for stdout)");

    // ---- simulate / rates ----
    auto add_experiment_options = [&](CLI::App* cmd, ExperimentConfig& cfg,
                                      std::vector<std::string>& p_items,
                                      std::vector<std::string>& n_items, std::string& lambda_text,
                                      std::string& out_dir, std::string& format) {
        cmd->add_option("--family", cfg.family, "chain|grid|star|diamond")->required();
        cmd->add_option("--p", p_items, "dimensions (values or start:stop:step)")->required();
        cmd->add_option("--rho", cfg.strength, "edge covariance (chain/star/diamond)");
        cmd->add_option("--omega", cfg.strength, "edge concentration (grid)");
        cmd->add_option("--rho-list", cfg.strength_list, "strength sweep (complexity experiments)");
        cmd->add_option("--hub-d", cfg.hub_degrees, "star hub degrees");
        cmd->add_flag("--edge-cov-over-d", cfg.strength_scaled_by_degree,
                      "star edge covariance = 2.5/d");
        cmd->add_option("--n", n_items, "sample sizes (values or start:stop:step)")->required();
        cmd->add_option("--trials", cfg.trials, "Monte Carlo trials per point");
        cmd->add_option("--lambda", lambda_text, "theory:tau | practical:c | fixed:v");
        cmd->add_option("--tau", cfg.tau, "tau for witness/theory rules");
        cmd->add_option("--seed", cfg.seed.root, "root seed");
        cmd->add_option("--threads", cfg.threads, "worker threads");
        cmd->add_flag("--witness", cfg.run_witness, "run the witness certificate per trial");
        cmd->add_option("--out", out_dir, "output directory")->required();
        cmd->add_option("--format", format, "csv|json");
    };

    auto* sim_cmd = app.add_subcommand("simulate", "signed-edge-set recovery experiment");
    ExperimentConfig sim_cfg;
    std::vector<std::string> sim_p, sim_n;
    std::string sim_lambda = "practical:1", sim_out, sim_format = "csv";
    add_experiment_options(sim_cmd, sim_cfg, sim_p, sim_n, sim_lambda, sim_out, sim_format);

    auto* rates_cmd = app.add_subcommand("rates", "elementwise error decay experiment");
    ExperimentConfig rates_cfg;
    std::vector<std::string> rates_p, rates_n;
    std::string rates_lambda = "practical:1", rates_out, rates_format = "csv";
    add_experiment_options(rates_cmd, rates_cfg, rates_p, rates_n, rates_lambda, rates_out,
                           rates_format);

    // ---- model ----
    auto* model_cmd = app.add_subcommand("model", "write a model spec and its matrices");
    ModelArgs model_args;
    model_args.attach(model_cmd);
    std::string model_json_out, sigma_out, theta_out;
    model_cmd->add_option("--json", model_json_out, "model JSON path ('-' for stdout)");
    model_cmd->add_option("--sigma-out", sigma_out, "covariance CSV path");
    model_cmd->add_option("--theta-out", theta_out, "concentration CSV path");

    // ---- sample ----
    auto* sample_cmd = app.add_subcommand("sample", "draw Gaussian observations from a model");
    ModelArgs sample_model;
    sample_model.attach(sample_cmd);
    int sample_n = 100;
    uint64_t sample_seed = 12345;
    std::string sample_out, cov_out;
    bool center = false;
    sample_cmd->add_option("--n", sample_n, "sample size")->required();
    sample_cmd->add_option("--seed", sample_seed, "root seed");
    sample_cmd->add_option("--out", sample_out, "dataset CSV");
    sample_cmd->add_option("--cov-out", cov_out, "sample covariance CSV");
    sample_cmd->add_flag("--center", center,
                         "subtract the empirical mean (off the zero-mean sampling model)");

    // ---- tailcheck ----
    auto* tail_cmd = app.add_subcommand("tailcheck", "empirical covariance deviation rates vs the analytic bound");
    ModelArgs tail_model_args;
    tail_model_args.attach(tail_cmd);
    int tc_n = 100, tc_trials = 200;
    uint64_t tc_seed = 12345;
    std::vector<double> tc_deltas;
    std::string tc_out;
    tail_cmd->add_option("--n", tc_n, "sample size")->required();
    tail_cmd->add_option("--trials", tc_trials, "Monte Carlo trials");
    tail_cmd->add_option("--delta", tc_deltas, "deviation levels")->required();
    tail_cmd->add_option("--seed", tc_seed, "root seed");
    tail_cmd->add_option("--out", tc_out, "output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    if (solve_cmd->parsed()) {
        const SymMatrix sigma = read_matrix_csv(in_path);
        const SolveResult res = solve(sigma, sc);
        write_matrix_csv(res.theta_hat, out_path);
        if (!dual_out.empty()) write_matrix_csv(res.z_hat, dual_out);
        if (!report_path.empty()) {
            nlohmann::json j;
            j["lambda"] = sc.lambda;
            j["sweeps"] = res.sweeps;
            j["kkt_residual"] = res.kkt_residual;
            j["converged"] = res.converged;
            j["objective"] = res.objective_per_sweep.empty() ? 0.0 : res.objective_per_sweep.back();
            write_text(report_path, j.dump(2));
        }
        if (!res.converged) {
            std::cerr << "warning: not converged (kkt residual " << res.kkt_residual << ")\n";
            return 2;
        }
        return 0;
    }

    if (diag_cmd->parsed()) {
        const ModelSpec model = diag_model.build();
        const Diagnostics d = diagnostics(model);
        const TailModel tail = parse_tail(tail_text, model);
        nlohmann::json j;
        j["p"] = model.p;
        j["family"] = model.family;
        j["d"] = model.degree_d;
        j["s"] = model.sparsity_s;
        j["theta_min"] = std::isfinite(d.theta_min) ? nlohmann::json(d.theta_min)
                                                    : nlohmann::json(nullptr);
        j["k_sigma"] = d.k_sigma;
        j["k_gamma"] = d.k_gamma;
        j["alpha"] = d.alpha;
        j["incoherence_ok"] = d.incoherence_ok();
        if (d.incoherence_ok()) {
            j["complexity_k"] = d.complexity_k;
            j["threshold_ellinf"] = threshold_ellinf(d, tail, model.p, tau);
            j["threshold_model_selection"] = threshold_model_selection(d, tail, model.p, tau);
            if (diag_n > 0) {
                j["lambda_theory"] = lambda_theory(d.alpha, tail, diag_n, model.p, tau);
                const PredictedBounds b = predicted_bounds(d, tail, diag_n, model.p, tau);
                j["predicted"] = {{"ellinf", b.ellinf},
                                  {"frobenius", b.frobenius},
                                  {"spectral", b.spectral},
                                  {"cov_ellinf", b.cov_ellinf},
                                  {"cov_spectral", b.cov_spectral}};
            }
        }
        write_text(diag_out, j.dump(2));
        return 0;
    }

    if (wit_cmd->parsed()) {
        const ModelSpec model = wit_model.build();
        const Dataset data = sample_gaussian(model, wit_n, Seed{wit_seed}.substream("witness"));
        const SymMatrix sigma_hat = sample_covariance(data);
        double lambda;
        if (wit_lambda == "theory") {
            const Diagnostics d = diagnostics(model);
            lambda = lambda_theory(d.alpha, TailModel::subgaussian_for(model), wit_n, model.p,
                                   wit_tau);
        } else {
            lambda = std::stod(wit_lambda);
        }
        const WitnessReport rep = witness_construct(model, sigma_hat, lambda, SolverConfig{});
        nlohmann::json j = witness_report_json(rep);
        j["n"] = wit_n;
        j["lambda"] = lambda;
        write_text(wit_out, j.dump(2));
        return 0;
    }

    auto run_experiment = [&](CLI::App* cmd, ExperimentConfig& cfg,
                              const std::vector<std::string>& p_items,
                              const std::vector<std::string>& n_items,
                              const std::string& lambda_text, const std::string& out_dir,
                              const std::string& format, bool rate_experiment) {
        cfg.p_list = parse_int_list(p_items);
        cfg.n_grid = parse_int_list(n_items);
        cfg.lambda_rule = LambdaRule::parse(lambda_text);
        cfg.label = rate_experiment ? "rates" : "simulate";
        ResultTable table;
        if (cfg.family == "star" && cfg.hub_degrees.size() > 1) {
            table = run_degree_sweep(cfg);
        } else if (!cfg.strength_list.empty()) {
            table = run_complexity_sweep(cfg);
        } else if (rate_experiment) {
            table = run_ellinf_rate(cfg);
        } else {
            table = run_model_selection(cfg);
        }
        emit(table, format, out_dir);
        std::cout << "wrote " << table.rows.size() << " rows to " << out_dir << std::endl;
    };

    if (sim_cmd->parsed()) {
        run_experiment(sim_cmd, sim_cfg, sim_p, sim_n, sim_lambda, sim_out, sim_format, false);
        return 0;
    }
    if (rates_cmd->parsed()) {
        run_experiment(rates_cmd, rates_cfg, rates_p, rates_n, rates_lambda, rates_out,
                       rates_format, true);
        return 0;
    }

    if (model_cmd->parsed()) {
        const ModelSpec model = model_args.build();
        if (!model_json_out.empty()) write_text(model_json_out, model_to_json(model));
        if (!sigma_out.empty()) write_matrix_csv(model.sigma_star, sigma_out);
        if (!theta_out.empty()) write_matrix_csv(model.theta_star, theta_out);
        return 0;
    }

    if (sample_cmd->parsed()) {
        const ModelSpec model = sample_model.build();
        const Dataset data = sample_gaussian(model, sample_n, Seed{sample_seed}.substream("sample"));
        if (!sample_out.empty()) write_dataset_csv(data, sample_out);
        if (!cov_out.empty()) {
            write_matrix_csv(center ? sample_covariance_centered(data) : sample_covariance(data),
                             cov_out);
        }
        return 0;
    }

    if (tail_cmd->parsed()) {
        const ModelSpec model = tail_model_args.build();
        const auto table =
            empirical_tail_check(model, tc_n, tc_deltas, tc_trials, Seed{tc_seed}.substream("tail"));
        write_tail_check_csv(table, tc_out);
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}
