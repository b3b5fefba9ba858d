#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ggm/linalg.hpp"

namespace ggm {

// Entries of the concentration matrix smaller than this are treated as
// structural zeros when declaring edges; an order of magnitude above inverse
// round-off at the sizes we run.
inline constexpr double kZeroThreshold = 1e-8;

using IndexPair = std::pair<int, int>;  // canonical order: first < second

/// Undirected edges, no self-loops, each pair stored once as (min,max).
class EdgeSet {
  public:
    EdgeSet() = default;

    void insert(int i, int j);
    bool contains(int i, int j) const;
    size_t size() const { return pairs_.size(); }
    const std::set<IndexPair>& pairs() const { return pairs_; }

    bool operator==(const EdgeSet&) const = default;

  private:
    std::set<IndexPair> pairs_;
};

/// A ground-truth Gaussian graphical model: the covariance/concentration
/// pair plus the structural statistics every bound in the library consumes.
struct ModelSpec {
    int p = 0;
    std::string family;                    // chain | grid | star | diamond | custom
    std::map<std::string, double> params;  // family parameters (rho, omega, ...)
    SymMatrix sigma_star{1};               // true covariance
    SymMatrix theta_star{1};               // true concentration, sigma_star^{-1}
    EdgeSet edges;
    int degree_d = 0;      // max row cardinality of theta_star, diagonal counted
    int sparsity_s = 0;    // number of non-zero off-diagonal entries (2 * #edges)
    double theta_min = 0;  // min |theta*_ij| over edges; +inf when no edges
};

// Signed edge map: pairs (i,j), i<j, with |theta_ij| > zero_threshold,
// mapped to the sign (+1/-1) of the entry.
std::map<IndexPair, int> signed_edge_set(const SymMatrix& theta, double zero_threshold);

// Chain (Markov chain in one dimension): Sigma_ij = rho^|i-j|, so the
// concentration matrix is tridiagonal. |rho| < 1 required.
ModelSpec build_chain(int p, double rho);

// Star: hub node 0 with d_spokes spokes at covariance rho, spoke pairs at
// rho^2 (the value the Markov structure forces); remaining nodes are
// independent unit-variance isolates.
ModelSpec build_star(int p, int d_spokes, double rho);

// 4-nearest-neighbor lattice of side x side nodes with Theta_ii = 1 and
// Theta_ij = omega on lattice edges.
ModelSpec build_grid(int side, double omega);

// The 4-node diamond: fully connected minus the (1,4) edge (1-based).
// Sigma_ii = 1, Sigma_ij = rho on edges except Sigma_23 = 0, and the
// non-edge entry Sigma_14 = 2 rho^2, which zeroes Theta_14.
ModelSpec build_diamond(double rho);

// Arbitrary positive-definite concentration matrix.
ModelSpec build_custom(const SymMatrix& theta_star);

// JSON document {p, family, params, edges, theta_min, d, s}; custom models
// embed the concentration entries so the document round-trips.
std::string model_to_json(const ModelSpec& model);
ModelSpec model_from_json(const std::string& json_text);
ModelSpec model_from_json_file(const std::string& path);

}  // namespace ggm
