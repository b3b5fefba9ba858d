#pragma once

#include <cstddef>
#include <vector>

namespace ggm {

/// Dense symmetric p-by-p matrix of finite reals. Immutable in spirit:
/// construction validates symmetry and finiteness; all operations on it are
/// pure functions, so values can be shared freely across threads.
class SymMatrix {
  public:
    // Zero matrix of dimension p.
    explicit SymMatrix(int p);

    // Builds from a row-major dense array. Rejects non-symmetric or
    // non-finite input; use symmetrize() for data that is only symmetric
    // up to round-off (e.g. parsed from a file).
    SymMatrix(int p, std::vector<double> row_major);

    static SymMatrix identity(int p);
    static SymMatrix diagonal(const std::vector<double>& d);

    // Named constructor that averages (a + a^T)/2 instead of rejecting
    // asymmetric input. Entries must still be finite.
    static SymMatrix symmetrize(int p, const std::vector<double>& row_major);

    int dim() const { return p_; }

    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * p_ + j]; }

    // Mutation keeps (i,j) and (j,i) in lock-step so the symmetry invariant
    // cannot be broken entry-wise.
    void set(int i, int j, double v);

    const std::vector<double>& data() const { return a_; }

    SymMatrix operator+(const SymMatrix& b) const;
    SymMatrix operator-(const SymMatrix& b) const;
    SymMatrix scaled(double c) const;

  private:
    SymMatrix() = default;
    int p_ = 0;
    std::vector<double> a_;  // row-major, kept exactly symmetric
};

/// Lower-triangular Cholesky factor L with L L^T = A and L_ii > 0.
struct CholeskyFactor {
    int dim = 0;
    std::vector<double> lower;  // row-major, upper part zero

    double operator()(int i, int j) const { return lower[static_cast<size_t>(i) * dim + j]; }

    // Solves L L^T x = b in place.
    void solve(std::vector<double>& b) const;

    // Sum of log of the diagonal (i.e. (1/2) log det A).
    double half_log_det() const;
};

// Throws NotPositiveDefinite when a pivot is <= 0, which signals that the
// input left the positive-definite cone.
CholeskyFactor cholesky(const SymMatrix& a);

double log_det(const SymMatrix& a);

SymMatrix inverse_spd(const SymMatrix& a);
SymMatrix inverse_spd(const CholeskyFactor& chol);

// The four norms used throughout: elementwise max |a_ij|, the
// l_inf-operator norm (max absolute row sum), Frobenius, and the spectral
// norm (max |eigenvalue|, symmetric input).
double norm_elem_max(const SymMatrix& a);
double norm_linf_op(const SymMatrix& a);
double norm_frobenius(const SymMatrix& a);
double norm_spectral(const SymMatrix& a);

// C = A * B (dense, general; result need not be symmetric so it is returned
// row-major).
std::vector<double> matmul(const SymMatrix& a, const SymMatrix& b);

// max_ij |(A*B)_ij - I_ij|; cheap inversion-quality probe.
double residual_from_identity(const SymMatrix& a, const SymMatrix& b);

}  // namespace ggm
