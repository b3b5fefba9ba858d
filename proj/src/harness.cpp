#include "ggm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ggm/errors.hpp"
#include "ggm/matrix_io.hpp"
#include "ggm/theory.hpp"

namespace ggm {

LambdaRule LambdaRule::parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    LambdaRule rule;
    if (kind == "theory") {
        rule.kind = Kind::theory;
        rule.value = 3.0;
    } else if (kind == "practical") {
        rule.kind = Kind::practical;
        rule.value = 1.0;
    } else if (kind == "fixed") {
        rule.kind = Kind::fixed;
        rule.value = 0.1;
    } else {
        throw InvalidParameter("lambda rule must be theory[:tau] | practical[:c] | fixed[:v]");
    }
    if (colon != std::string::npos) {
        try {
            rule.value = std::stod(text.substr(colon + 1));
        } catch (const std::exception&) {
            throw InvalidParameter("bad lambda rule value in '" + text + "'");
        }
    }
    return rule;
}

std::string LambdaRule::str() const {
    switch (kind) {
        case Kind::theory:
            return "theory:" + format_double(value);
        case Kind::practical:
            return "practical:" + format_double(value);
        default:
            return "fixed:" + format_double(value);
    }
}

std::string ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["family"] = family;
    j["p_list"] = p_list;
    j["hub_degrees"] = hub_degrees;
    j["strength"] = strength;
    j["strength_list"] = strength_list;
    j["strength_scaled_by_degree"] = strength_scaled_by_degree;
    j["edge_cov_scale"] = edge_cov_scale;
    j["n_grid"] = n_grid;
    j["trials"] = trials;
    j["lambda_rule"] = lambda_rule.str();
    j["tau"] = tau;
    j["seed"] = seed.root;
    j["solver"] = {{"tol", solver.tol},
                   {"max_outer_sweeps", solver.max_outer_sweeps},
                   {"inner_tol", solver.inner_tol}};
    j["run_witness"] = run_witness;
    j["threads"] = threads;
    j["zero_threshold"] = zero_threshold;
    j["label"] = label;
    return j.dump(2);
}

bool success_predicate(const SymMatrix& theta_hat, const ModelSpec& model, double zero_threshold) {
    if (theta_hat.dim() != model.p) throw DimensionMismatch("success_predicate dimension mismatch");
    return signed_edge_set(theta_hat, zero_threshold) ==
           signed_edge_set(model.theta_star, zero_threshold);
}

namespace {

struct ModelInstance {
    ModelSpec model;
    double strength = 0.0;
    double alpha = 0.0;         // NaN if diagnostics unavailable
    double complexity_k = 0.0;  // NaN when incoherence fails
    double max_var = 1.0;
};

ModelInstance make_instance(const ExperimentConfig& cfg, int p, int hub_d, double strength) {
    ModelInstance inst;
    inst.strength = strength;
    if (cfg.family == "chain") {
        inst.model = build_chain(p, strength);
    } else if (cfg.family == "grid") {
        const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(p))));
        if (side * side != p) throw InvalidParameter("grid p must be a perfect square");
        inst.model = build_grid(side, strength);
    } else if (cfg.family == "star") {
        double rho = strength;
        if (cfg.strength_scaled_by_degree) rho = cfg.edge_cov_scale / hub_d;
        inst.strength = rho;
        inst.model = build_star(p, hub_d, rho);
    } else if (cfg.family == "diamond") {
        inst.model = build_diamond(strength);
    } else if (cfg.family == "custom") {
        if (!cfg.custom_model) throw InvalidParameter("custom family needs a model");
        inst.model = *cfg.custom_model;
    } else {
        throw InvalidParameter("unknown family: " + cfg.family);
    }
    const Diagnostics diag = diagnostics(inst.model);
    inst.alpha = diag.alpha;
    inst.complexity_k = diag.complexity_k;
    inst.max_var = diag.max_var;
    return inst;
}

double lambda_for(const ExperimentConfig& cfg, const ModelInstance& inst, int n) {
    switch (cfg.lambda_rule.kind) {
        case LambdaRule::Kind::theory: {
            if (!(inst.alpha > 0)) {
                throw IncoherenceFails("theory lambda rule needs alpha > 0");
            }
            const TailModel tail = TailModel::subgaussian(1.0, inst.max_var);
            return lambda_theory(inst.alpha, tail, n, inst.model.p, cfg.lambda_rule.value);
        }
        case LambdaRule::Kind::practical:
            return cfg.lambda_rule.value * std::sqrt(std::log(inst.model.p) / n);
        default:
            return cfg.lambda_rule.value;
    }
}

struct Task {
    int model_index = 0;
    int n = 0;
    int trial = 0;
};

ResultTable run_tasks(const ExperimentConfig& cfg, const std::vector<ModelInstance>& instances,
                      bool join_complexity) {
    std::vector<Task> tasks;
    for (int mi = 0; mi < static_cast<int>(instances.size()); ++mi) {
        for (int n : cfg.n_grid) {
            for (int t = 0; t < cfg.trials; ++t) tasks.push_back({mi, n, t});
        }
    }

    ResultTable table;
    table.family = cfg.family;
    table.config_echo_json = cfg.to_json();
    table.rows.assign(tasks.size(), TrialOutcome{});

    auto worker_body = [&](const Task& task, TrialOutcome& out) {
        const ModelInstance& inst = instances[task.model_index];
        const ModelSpec& model = inst.model;
        out.p = model.p;
        out.d = model.degree_d;
        out.n = task.n;
        out.trial = task.trial;
        out.strength = inst.strength;
        out.complexity_k =
            join_complexity ? inst.complexity_k : std::numeric_limits<double>::quiet_NaN();

        const Seed sub = cfg.seed.substream(cfg.label)
                             .substream(static_cast<uint64_t>(model.p))
                             .substream(static_cast<uint64_t>(model.degree_d))
                             .substream(std::bit_cast<uint64_t>(inst.strength))
                             .substream(static_cast<uint64_t>(task.n))
                             .substream(static_cast<uint64_t>(task.trial));
        const Dataset data = sample_gaussian(model, task.n, sub);
        const SymMatrix sigma_hat = sample_covariance(data);

        SolverConfig sc = cfg.solver;
        sc.lambda = lambda_for(cfg, inst, task.n);
        out.lambda_used = sc.lambda;

        const SolveResult res = solve(sigma_hat, sc);
        out.converged = res.converged;
        out.success = success_predicate(res.theta_hat, model, cfg.zero_threshold);
        const SymMatrix dtheta = res.theta_hat - model.theta_star;
        out.ell_inf_err = norm_elem_max(dtheta);
        out.frob_err = norm_frobenius(dtheta);
        out.spectral_err = norm_spectral(dtheta);
        const SymMatrix dcov = res.w_hat - model.sigma_star;
        out.cov_ell_inf_err = norm_elem_max(dcov);
        out.cov_spectral_err = norm_spectral(dcov);

        if (cfg.run_witness) {
            const WitnessReport w = witness_construct(model, sigma_hat, sc.lambda, sc);
            out.witness_ok = w.strict_dual_feasible ? 1 : 0;
        }
    };

    const int threads = std::max(1, cfg.threads);
    if (threads == 1) {
        for (size_t i = 0; i < tasks.size(); ++i) worker_body(tasks[i], table.rows[i]);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const size_t i = next.fetch_add(1);
                    if (i >= tasks.size()) return;
                    worker_body(tasks[i], table.rows[i]);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return table;
}

std::vector<double> strengths_of(const ExperimentConfig& cfg) {
    if (!cfg.strength_list.empty()) return cfg.strength_list;
    return {cfg.strength};
}

int default_hub_degree(int p) { return static_cast<int>(std::ceil(0.1 * p)); }

}  // namespace

ResultTable run_model_selection(const ExperimentConfig& cfg) {
    if (cfg.p_list.empty() || cfg.n_grid.empty() || cfg.trials < 1) {
        throw InvalidParameter("p_list and n_grid must be non-empty and trials >= 1");
    }
    std::vector<ModelInstance> instances;
    for (int p : cfg.p_list) {
        for (double s : strengths_of(cfg)) {
            const int hub = cfg.hub_degrees.empty() ? default_hub_degree(p) : cfg.hub_degrees[0];
            instances.push_back(make_instance(cfg, p, hub, s));
        }
    }
    return run_tasks(cfg, instances, false);
}

ResultTable run_ellinf_rate(const ExperimentConfig& cfg) { return run_model_selection(cfg); }

ResultTable run_degree_sweep(const ExperimentConfig& cfg) {
    if (cfg.family != "star") throw InvalidParameter("degree sweep is a star-family experiment");
    if (cfg.p_list.empty() || cfg.hub_degrees.empty()) {
        throw InvalidParameter("degree sweep needs p_list and hub_degrees");
    }
    std::vector<ModelInstance> instances;
    for (int p : cfg.p_list) {
        for (int d : cfg.hub_degrees) {
            instances.push_back(make_instance(cfg, p, d, cfg.strength));
        }
    }
    return run_tasks(cfg, instances, false);
}

ResultTable run_complexity_sweep(const ExperimentConfig& cfg) {
    if (cfg.p_list.empty() || cfg.strength_list.empty()) {
        throw InvalidParameter("complexity sweep needs p_list and strength_list");
    }
    std::vector<ModelInstance> instances;
    for (int p : cfg.p_list) {
        for (double s : cfg.strength_list) {
            const int hub = cfg.hub_degrees.empty() ? default_hub_degree(p) : cfg.hub_degrees[0];
            instances.push_back(make_instance(cfg, p, hub, s));
        }
    }
    return run_tasks(cfg, instances, true);
}

std::vector<AggregateRow> aggregate(const ResultTable& table) {
    using Key = std::tuple<double, int, int, int>;
    std::map<Key, std::vector<const TrialOutcome*>> groups;
    for (const auto& row : table.rows) {
        groups[{row.strength, row.p, row.d, row.n}].push_back(&row);
    }
    std::vector<AggregateRow> out;
    for (const auto& [key, rows] : groups) {
        AggregateRow a;
        a.family = table.family;
        a.strength = std::get<0>(key);
        a.p = std::get<1>(key);
        a.d = std::get<2>(key);
        a.n = std::get<3>(key);
        a.trials = static_cast<int>(rows.size());
        std::vector<double> ell;
        for (const auto* r : rows) {
            a.success_rate += r->success ? 1.0 : 0.0;
            a.mean_ell_inf += r->ell_inf_err;
            a.mean_frob += r->frob_err;
            a.mean_spectral += r->spectral_err;
            a.mean_cov_inf += r->cov_ell_inf_err;
            a.mean_cov_spec += r->cov_spectral_err;
            ell.push_back(r->ell_inf_err);
        }
        const double m = static_cast<double>(a.trials);
        a.success_rate /= m;
        a.mean_ell_inf /= m;
        a.mean_frob /= m;
        a.mean_spectral /= m;
        a.mean_cov_inf /= m;
        a.mean_cov_spec /= m;
        std::sort(ell.begin(), ell.end());
        a.median_ell_inf = (ell.size() % 2 == 1)
                               ? ell[ell.size() / 2]
                               : 0.5 * (ell[ell.size() / 2 - 1] + ell[ell.size() / 2]);
        a.complexity_k = rows.front()->complexity_k;
        out.push_back(a);
    }
    return out;
}

namespace {

const char* kRowsHeader =
    "family,p,d,n,trial,lambda,success,ell_inf,frob,spectral,cov_inf,cov_spec,witness_ok,"
    "converged,strength,complexity_k";

std::string row_to_csv(const std::string& family, const TrialOutcome& r) {
    std::ostringstream os;
    os << family << ',' << r.p << ',' << r.d << ',' << r.n << ',' << r.trial << ','
       << format_double(r.lambda_used) << ',' << (r.success ? 1 : 0) << ','
       << format_double(r.ell_inf_err) << ',' << format_double(r.frob_err) << ','
       << format_double(r.spectral_err) << ',' << format_double(r.cov_ell_inf_err) << ','
       << format_double(r.cov_spectral_err) << ',';
    if (r.witness_ok >= 0) os << r.witness_ok;
    os << ',' << (r.converged ? 1 : 0) << ',' << format_double(r.strength) << ','
       << format_double(r.complexity_k);
    return os.str();
}

}  // namespace

void emit(const ResultTable& table, const std::string& format, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const auto base = std::filesystem::path(dir);
    {
        std::ofstream echo(base / "config-echo.json");
        if (!echo) throw IoError("cannot write config echo in " + dir);
        echo << table.config_echo_json << '\n';
    }
    if (format == "csv") {
        std::ofstream rows(base / "rows.csv");
        if (!rows) throw IoError("cannot write rows.csv in " + dir);
        rows << kRowsHeader << '\n';
        for (const auto& r : table.rows) rows << row_to_csv(table.family, r) << '\n';

        std::ofstream agg(base / "aggregates.csv");
        if (!agg) throw IoError("cannot write aggregates.csv in " + dir);
        agg << "family,strength,p,d,n,trials,success_rate,mean_ell_inf,median_ell_inf,mean_frob,"
               "mean_spectral,mean_cov_inf,mean_cov_spec,complexity_k\n";
        for (const auto& a : aggregate(table)) {
            agg << a.family << ',' << format_double(a.strength) << ',' << a.p << ',' << a.d << ','
                << a.n << ',' << a.trials << ',' << format_double(a.success_rate) << ','
                << format_double(a.mean_ell_inf) << ',' << format_double(a.median_ell_inf) << ','
                << format_double(a.mean_frob) << ',' << format_double(a.mean_spectral) << ','
                << format_double(a.mean_cov_inf) << ',' << format_double(a.mean_cov_spec) << ','
                << format_double(a.complexity_k) << '\n';
        }
    } else if (format == "json") {
        nlohmann::json j;
        j["config"] = nlohmann::json::parse(table.config_echo_json);
        auto rows = nlohmann::json::array();
        for (const auto& r : table.rows) {
            nlohmann::json jr;
            jr["family"] = table.family;
            jr["p"] = r.p;
            jr["d"] = r.d;
            jr["n"] = r.n;
            jr["trial"] = r.trial;
            jr["lambda"] = r.lambda_used;
            jr["success"] = r.success;
            jr["ell_inf"] = r.ell_inf_err;
            jr["frob"] = r.frob_err;
            jr["spectral"] = r.spectral_err;
            jr["cov_inf"] = r.cov_ell_inf_err;
            jr["cov_spec"] = r.cov_spectral_err;
            if (r.witness_ok >= 0) jr["witness_ok"] = (r.witness_ok == 1);
            jr["converged"] = r.converged;
            jr["strength"] = r.strength;
            if (std::isfinite(r.complexity_k)) jr["complexity_k"] = r.complexity_k;
            rows.push_back(jr);
        }
        j["rows"] = rows;
        auto aggs = nlohmann::json::array();
        for (const auto& a : aggregate(table)) {
            aggs.push_back({{"family", a.family},
                            {"strength", a.strength},
                            {"p", a.p},
                            {"d", a.d},
                            {"n", a.n},
                            {"trials", a.trials},
                            {"success_rate", a.success_rate},
                            {"mean_ell_inf", a.mean_ell_inf},
                            {"median_ell_inf", a.median_ell_inf},
                            {"mean_frob", a.mean_frob},
                            {"mean_spectral", a.mean_spectral},
                            {"mean_cov_inf", a.mean_cov_inf},
                            {"mean_cov_spec", a.mean_cov_spec}});
        }
        j["aggregates"] = aggs;
        std::ofstream out(base / "results.json");
        if (!out) throw IoError("cannot write results.json in " + dir);
        out << j.dump(2) << '\n';
    } else {
        throw InvalidParameter("emit format must be csv or json");
    }
}

ResultTable parse_rows_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    ResultTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("family,", 0) == 0) continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        // trailing empty cell is dropped by getline; witness column may be empty
        while (cells.size() < 16) cells.push_back("");
        TrialOutcome r;
        table.family = cells[0];
        r.p = std::stoi(cells[1]);
        r.d = std::stoi(cells[2]);
        r.n = std::stoi(cells[3]);
        r.trial = std::stoi(cells[4]);
        r.lambda_used = std::stod(cells[5]);
        r.success = cells[6] == "1";
        r.ell_inf_err = std::stod(cells[7]);
        r.frob_err = std::stod(cells[8]);
        r.spectral_err = std::stod(cells[9]);
        r.cov_ell_inf_err = std::stod(cells[10]);
        r.cov_spectral_err = std::stod(cells[11]);
        r.witness_ok = cells[12].empty() ? -1 : std::stoi(cells[12]);
        r.converged = cells[13] == "1";
        r.strength = cells[14].empty() ? 0.0 : std::stod(cells[14]);
        r.complexity_k =
            cells[15].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cells[15]);
        table.rows.push_back(r);
    }
    return table;
}

double n50_crossing(const std::vector<std::pair<int, double>>& success_by_n) {
    auto pts = success_by_n;
    std::sort(pts.begin(), pts.end());
    if (pts.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (pts.front().second >= 0.5) return pts.front().first;
    for (size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].second >= 0.5) {
            const auto [n0, r0] = pts[i - 1];
            const auto [n1, r1] = pts[i];
            return n0 + (0.5 - r0) / (r1 - r0) * (n1 - n0);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> isotonic_fit(const std::vector<double>& y, const std::vector<double>& w) {
    if (y.size() != w.size()) throw DimensionMismatch("isotonic_fit size mismatch");
    std::vector<double> level, weight;
    std::vector<int> count;
    for (size_t i = 0; i < y.size(); ++i) {
        level.push_back(y[i]);
        weight.push_back(w[i]);
        count.push_back(1);
        while (level.size() > 1 && level[level.size() - 2] > level.back()) {
            const double wsum = weight[weight.size() - 2] + weight.back();
            const double merged =
                (level[level.size() - 2] * weight[weight.size() - 2] + level.back() * weight.back()) /
                wsum;
            level.pop_back();
            weight.pop_back();
            const int c = count.back();
            count.pop_back();
            level.back() = merged;
            weight.back() = wsum;
            count.back() += c;
        }
    }
    std::vector<double> fit;
    for (size_t b = 0; b < level.size(); ++b) {
        for (int c = 0; c < count[b]; ++c) fit.push_back(level[b]);
    }
    return fit;
}

}  // namespace ggm
