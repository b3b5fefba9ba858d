#include "ggm/sampling.hpp"

#include <cmath>
#include <numbers>

#include "ggm/errors.hpp"
#include "ggm/matrix_io.hpp"

namespace ggm {

namespace {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

Seed Seed::substream(uint64_t label) const {
    uint64_t state = root ^ (label * 0x9e3779b97f4a7c15ULL);
    splitmix64(state);
    return Seed{splitmix64(state)};
}

Seed Seed::substream(const std::string& label) const { return substream(fnv1a(label)); }

Rng::Rng(Seed seed) {
    uint64_t state = seed.root;
    for (auto& si : s_) si = splitmix64(state);
}

uint64_t Rng::next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::next_gaussian() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    // Box-Muller; u1 shifted away from zero so log is finite
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
}

Dataset sample_gaussian(const ModelSpec& model, int n, Seed seed) {
    if (n < 1) throw InvalidParameter("sample size must be >= 1");
    const int p = model.p;
    const CholeskyFactor chol = cholesky(model.sigma_star);
    Dataset data;
    data.n = n;
    data.p = p;
    data.rows.assign(static_cast<size_t>(n) * p, 0.0);
    Rng rng(seed);
    std::vector<double> z(p);
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < p; ++j) z[j] = rng.next_gaussian();
        double* row = data.rows.data() + static_cast<size_t>(k) * p;
        for (int i = 0; i < p; ++i) {
            double s = 0.0;
            for (int j = 0; j <= i; ++j) s += chol(i, j) * z[j];
            row[i] = s;
        }
    }
    return data;
}

SymMatrix sample_covariance(const Dataset& data) {
    if (data.n < 1) throw InvalidParameter("sample covariance needs n >= 1");
    const int n = data.n, p = data.p;
    std::vector<double> acc(static_cast<size_t>(p) * p, 0.0);
    for (int k = 0; k < n; ++k) {
        const double* row = data.rows.data() + static_cast<size_t>(k) * p;
        for (int i = 0; i < p; ++i) {
            const double xi = row[i];
            for (int j = i; j < p; ++j) acc[static_cast<size_t>(i) * p + j] += xi * row[j];
        }
    }
    SymMatrix out(p);
    for (int i = 0; i < p; ++i)
        for (int j = i; j < p; ++j) out.set(i, j, acc[static_cast<size_t>(i) * p + j] / n);
    return out;
}

SymMatrix sample_covariance_centered(const Dataset& data) {
    if (data.n < 1) throw InvalidParameter("sample covariance needs n >= 1");
    const int n = data.n, p = data.p;
    std::vector<double> mean(p, 0.0);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < p; ++j) mean[j] += data(k, j);
    for (double& m : mean) m /= n;
    SymMatrix out(p);
    for (int i = 0; i < p; ++i) {
        for (int j = i; j < p; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += (data(k, i) - mean[i]) * (data(k, j) - mean[j]);
            out.set(i, j, s / n);
        }
    }
    return out;
}

SymMatrix noise_matrix(const SymMatrix& sigma_hat, const ModelSpec& model) {
    if (sigma_hat.dim() != model.p) throw DimensionMismatch("noise_matrix dimension mismatch");
    return sigma_hat - model.sigma_star;
}

std::vector<TailCheckRow> empirical_tail_check(const ModelSpec& model, int n,
                                               const std::vector<double>& delta_grid, int trials,
                                               Seed seed) {
    if (trials < 1) throw InvalidParameter("trials must be >= 1");
    const int p = model.p;
    double max_var = 0.0;
    for (int i = 0; i < p; ++i) max_var = std::max(max_var, model.sigma_star(i, i));
    const double sigma_subg = 1.0;  // Gaussian draws
    const double range = 8.0 * (1.0 + 4.0 * sigma_subg * sigma_subg) * max_var;
    const double c_star =
        1.0 / (128.0 * std::pow(1.0 + 4.0 * sigma_subg * sigma_subg, 2) * max_var * max_var);
    for (double d : delta_grid) {
        if (!(d > 0.0) || d >= range) {
            throw InvalidParameter("delta outside the validity range (0, " +
                                   std::to_string(range) + ")");
        }
    }

    const size_t cells = static_cast<size_t>(p) * p;
    std::vector<std::vector<int>> exceed(delta_grid.size(), std::vector<int>(cells, 0));
    for (int t = 0; t < trials; ++t) {
        const Dataset data = sample_gaussian(model, n, seed.substream("tail-check", t));
        const SymMatrix sig = sample_covariance(data);
        for (int i = 0; i < p; ++i) {
            for (int j = 0; j < p; ++j) {
                const double dev = std::abs(sig(i, j) - model.sigma_star(i, j));
                for (size_t g = 0; g < delta_grid.size(); ++g) {
                    if (dev > delta_grid[g]) exceed[g][static_cast<size_t>(i) * p + j]++;
                }
            }
        }
    }

    std::vector<TailCheckRow> out;
    for (size_t g = 0; g < delta_grid.size(); ++g) {
        TailCheckRow row;
        row.delta = delta_grid[g];
        int worst = 0;
        for (int c : exceed[g]) worst = std::max(worst, c);
        row.emp_rate = static_cast<double>(worst) / trials;
        row.bound = 4.0 * std::exp(-n * delta_grid[g] * delta_grid[g] * c_star);
        out.push_back(row);
    }
    return out;
}

void write_tail_check_csv(const std::vector<TailCheckRow>& table, const std::string& path) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : table) rows.push_back({r.delta, r.emp_rate, r.bound});
    write_table_csv(rows, path, "delta,emp_rate,bound");
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::vector<std::vector<double>> rows(data.n);
    for (int k = 0; k < data.n; ++k) {
        rows[k].assign(data.rows.begin() + static_cast<size_t>(k) * data.p,
                       data.rows.begin() + static_cast<size_t>(k + 1) * data.p);
    }
    write_table_csv(rows, path);
}

Dataset read_dataset_csv(const std::string& path) {
    const auto rows = read_table_csv(path);
    if (rows.empty()) throw IoError("empty dataset: " + path);
    Dataset d;
    d.n = static_cast<int>(rows.size());
    d.p = static_cast<int>(rows[0].size());
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != d.p) throw IoError("ragged dataset: " + path);
        d.rows.insert(d.rows.end(), r.begin(), r.end());
    }
    return d;
}

}  // namespace ggm
