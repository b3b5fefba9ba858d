#include "ggm/models.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ggm/errors.hpp"

namespace ggm {

void EdgeSet::insert(int i, int j) {
    if (i == j) throw InvalidParameter("self-loop in edge set");
    pairs_.insert({std::min(i, j), std::max(i, j)});
}

bool EdgeSet::contains(int i, int j) const {
    return pairs_.count({std::min(i, j), std::max(i, j)}) > 0;
}

std::map<IndexPair, int> signed_edge_set(const SymMatrix& theta, double zero_threshold) {
    if (zero_threshold < 0) throw InvalidParameter("zero_threshold must be >= 0");
    std::map<IndexPair, int> out;
    const int p = theta.dim();
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            const double v = theta(i, j);
            if (std::abs(v) > zero_threshold) out[{i, j}] = v > 0 ? 1 : -1;
        }
    }
    return out;
}

namespace {

// Derives edge set, degree, sparsity and theta_min from the concentration
// matrix, then validates the (Sigma*, Theta*) pair.
ModelSpec finish_model(ModelSpec m) {
    const auto signed_edges = signed_edge_set(m.theta_star, kZeroThreshold);
    for (const auto& [pair, sign] : signed_edges) m.edges.insert(pair.first, pair.second);
    m.sparsity_s = 2 * static_cast<int>(m.edges.size());

    std::vector<int> row_card(m.p, 1);  // diagonal always counted
    double tmin = std::numeric_limits<double>::infinity();
    for (const auto& [pair, sign] : signed_edges) {
        row_card[pair.first]++;
        row_card[pair.second]++;
        tmin = std::min(tmin, std::abs(m.theta_star(pair.first, pair.second)));
    }
    m.degree_d = 1;
    for (int c : row_card) m.degree_d = std::max(m.degree_d, c);
    m.theta_min = tmin;

    if (residual_from_identity(m.theta_star, m.sigma_star) > 1e-8) {
        throw InvalidParameter("theta_star * sigma_star deviates from identity");
    }
    return m;
}

}  // namespace

ModelSpec build_chain(int p, double rho) {
    if (p < 2) throw InvalidParameter("chain needs p >= 2");
    if (std::abs(rho) >= 1.0) throw InvalidParameter("chain needs |rho| < 1");
    ModelSpec m;
    m.p = p;
    m.family = "chain";
    m.params = {{"rho", rho}};
    SymMatrix sigma(p);
    for (int i = 0; i < p; ++i) {
        sigma.set(i, i, 1.0);
        for (int j = i + 1; j < p; ++j) sigma.set(i, j, std::pow(rho, j - i));
    }
    m.sigma_star = sigma;
    m.theta_star = inverse_spd(sigma);
    return finish_model(std::move(m));
}

ModelSpec build_star(int p, int d_spokes, double rho) {
    if (p < 2) throw InvalidParameter("star needs p >= 2");
    if (d_spokes < 1 || d_spokes > p - 1) throw InvalidParameter("star needs 1 <= d_spokes <= p-1");
    ModelSpec m;
    m.p = p;
    m.family = "star";
    m.params = {{"rho", rho}, {"d_spokes", static_cast<double>(d_spokes)}};
    SymMatrix sigma = SymMatrix::identity(p);
    for (int j = 1; j <= d_spokes; ++j) sigma.set(0, j, rho);
    for (int i = 1; i <= d_spokes; ++i) {
        for (int j = i + 1; j <= d_spokes; ++j) sigma.set(i, j, rho * rho);
    }
    try {
        m.theta_star = inverse_spd(sigma);
    } catch (const NotPositiveDefinite&) {
        throw InvalidParameter("star covariance is not positive definite for rho=" +
                               std::to_string(rho));
    }
    m.sigma_star = sigma;
    return finish_model(std::move(m));
}

ModelSpec build_grid(int side, double omega) {
    if (side < 2) throw InvalidParameter("grid needs side >= 2");
    const int p = side * side;
    ModelSpec m;
    m.p = p;
    m.family = "grid";
    m.params = {{"omega", omega}, {"side", static_cast<double>(side)}};
    SymMatrix theta = SymMatrix::identity(p);
    auto node = [side](int r, int c) { return r * side + c; };
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            if (c + 1 < side) theta.set(node(r, c), node(r, c + 1), omega);
            if (r + 1 < side) theta.set(node(r, c), node(r + 1, c), omega);
        }
    }
    try {
        m.sigma_star = inverse_spd(theta);
    } catch (const NotPositiveDefinite&) {
        throw InvalidParameter("grid concentration is not positive definite for omega=" +
                               std::to_string(omega));
    }
    m.theta_star = theta;
    return finish_model(std::move(m));
}

ModelSpec build_diamond(double rho) {
    if (std::abs(rho) > 1.0 / std::sqrt(2.0)) {
        throw InvalidParameter("diamond needs |rho| <= 1/sqrt(2)");
    }
    ModelSpec m;
    m.p = 4;
    m.family = "diamond";
    m.params = {{"rho", rho}};
    SymMatrix sigma = SymMatrix::identity(4);
    // 1-based layout from the construction: edges are every pair except
    // (1,4); the (2,3) edge carries covariance 0 and the (1,4) non-edge 2rho^2.
    sigma.set(0, 1, rho);
    sigma.set(0, 2, rho);
    sigma.set(1, 3, rho);
    sigma.set(2, 3, rho);
    sigma.set(1, 2, 0.0);
    sigma.set(0, 3, 2.0 * rho * rho);
    try {
        m.theta_star = inverse_spd(sigma);
    } catch (const NotPositiveDefinite&) {
        throw InvalidParameter("diamond covariance is not positive definite for rho=" +
                               std::to_string(rho));
    }
    m.sigma_star = sigma;
    return finish_model(std::move(m));
}

ModelSpec build_custom(const SymMatrix& theta_star) {
    ModelSpec m;
    m.p = theta_star.dim();
    m.family = "custom";
    m.sigma_star = inverse_spd(theta_star);  // throws NotPositiveDefinite
    m.theta_star = theta_star;
    return finish_model(std::move(m));
}

std::string model_to_json(const ModelSpec& model) {
    nlohmann::json j;
    j["p"] = model.p;
    j["family"] = model.family;
    j["params"] = model.params;
    auto edges = nlohmann::json::array();
    for (const auto& [i, k] : model.edges.pairs()) edges.push_back({i, k});
    j["edges"] = edges;
    if (std::isfinite(model.theta_min)) {
        j["theta_min"] = model.theta_min;
    } else {
        j["theta_min"] = nullptr;
    }
    j["d"] = model.degree_d;
    j["s"] = model.sparsity_s;
    if (model.family == "custom") {
        auto theta = nlohmann::json::array();
        for (int i = 0; i < model.p; ++i) {
            auto row = nlohmann::json::array();
            for (int k = 0; k < model.p; ++k) row.push_back(model.theta_star(i, k));
            theta.push_back(row);
        }
        j["theta"] = theta;
    }
    return j.dump(2);
}

ModelSpec model_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw IoError(std::string("bad model JSON: ") + e.what());
    }
    const std::string family = j.at("family").get<std::string>();
    if (family == "chain") {
        return build_chain(j.at("p").get<int>(), j.at("params").at("rho").get<double>());
    }
    if (family == "star") {
        return build_star(j.at("p").get<int>(),
                          static_cast<int>(j.at("params").at("d_spokes").get<double>()),
                          j.at("params").at("rho").get<double>());
    }
    if (family == "grid") {
        return build_grid(static_cast<int>(j.at("params").at("side").get<double>()),
                          j.at("params").at("omega").get<double>());
    }
    if (family == "diamond") {
        return build_diamond(j.at("params").at("rho").get<double>());
    }
    if (family == "custom") {
        const int p = j.at("p").get<int>();
        const auto& theta = j.at("theta");
        std::vector<double> flat;
        flat.reserve(static_cast<size_t>(p) * p);
        for (const auto& row : theta)
            for (const auto& v : row) flat.push_back(v.get<double>());
        return build_custom(SymMatrix::symmetrize(p, flat));
    }
    throw InvalidParameter("unknown model family: " + family);
}

ModelSpec model_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace ggm
