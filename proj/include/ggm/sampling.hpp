#pragma once

#include <cstdint>
#include <type_traits>
#include <string>
#include <vector>

#include "ggm/linalg.hpp"
#include "ggm/models.hpp"

namespace ggm {

/// Root seed plus substream derivation. Substreams are derived by hashing
/// (root, labels...), so trials drawn on different threads or in a different
/// order reproduce the same values.
struct Seed {
    uint64_t root = 0;

    Seed substream(uint64_t label) const;
    Seed substream(const std::string& label) const;

    template <typename First, typename... Rest>
    Seed substream(const First& label, const Rest&... rest) const
        requires(sizeof...(Rest) > 0)
    {
        if constexpr (std::is_integral_v<First>) {
            return substream(static_cast<uint64_t>(label)).substream(rest...);
        } else {
            return substream(std::string(label)).substream(rest...);
        }
    }
};

/// xoshiro256++ stream with Box-Muller normals. Bitwise deterministic for a
/// given Seed, independent of platform library details.
class Rng {
  public:
    explicit Rng(Seed seed);

    uint64_t next_u64();
    double next_uniform();   // in [0, 1)
    double next_gaussian();  // standard normal

  private:
    uint64_t s_[4];
    bool has_cached_ = false;
    double cached_ = 0.0;
};

/// n observations of a p-dimensional vector, one per row.
struct Dataset {
    int n = 0;
    int p = 0;
    std::vector<double> rows;  // row-major n x p

    double operator()(int k, int j) const { return rows[static_cast<size_t>(k) * p + j]; }
};

// Draws n i.i.d. zero-mean Gaussian vectors with covariance model.sigma_star
// (rows are L z with L the Cholesky factor of Sigma*).
Dataset sample_gaussian(const ModelSpec& model, int n, Seed seed);

// (1/n) sum_k x_k x_k^T -- no mean subtraction (zero-mean sampling model).
SymMatrix sample_covariance(const Dataset& data);

// Off-spec convenience for data with unknown mean: subtracts the empirical
// mean first.
SymMatrix sample_covariance_centered(const Dataset& data);

// Effective noise W = sigma_hat - Sigma*.
SymMatrix noise_matrix(const SymMatrix& sigma_hat, const ModelSpec& model);

struct TailCheckRow {
    double delta = 0.0;
    double emp_rate = 0.0;  // max over (i,j) of the empirical exceedance frequency
    double bound = 0.0;     // analytic sub-Gaussian tail bound (sigma = 1)
};

// Monte Carlo check of the sub-Gaussian deviation bound for sample
// covariance entries: for each delta, the worst per-entry frequency of
// |sigma_hat_ij - Sigma*_ij| > delta across `trials` draws of size n,
// next to the bound 4 exp(-n delta^2 / (128 (1+4 sigma^2)^2 max_ii^2)).
std::vector<TailCheckRow> empirical_tail_check(const ModelSpec& model, int n,
                                               const std::vector<double>& delta_grid, int trials,
                                               Seed seed);

void write_tail_check_csv(const std::vector<TailCheckRow>& table, const std::string& path);

// Dataset CSV: n rows by p columns.
void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

}  // namespace ggm
