#include "ggm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ggm/errors.hpp"

namespace ggm {

namespace {

void check_finite(const std::vector<double>& a) {
    for (double v : a) {
        if (!std::isfinite(v)) {
            throw InvalidParameter("matrix entry is not finite");
        }
    }
}

}  // namespace

SymMatrix::SymMatrix(int p) : p_(p), a_(static_cast<size_t>(p) * p, 0.0) {
    if (p <= 0) throw InvalidParameter("matrix dimension must be positive");
}

SymMatrix::SymMatrix(int p, std::vector<double> row_major) : p_(p), a_(std::move(row_major)) {
    if (p <= 0) throw InvalidParameter("matrix dimension must be positive");
    if (a_.size() != static_cast<size_t>(p) * p) {
        throw DimensionMismatch("expected " + std::to_string(p) + "x" + std::to_string(p) +
                                " entries");
    }
    check_finite(a_);
    for (int i = 0; i < p_; ++i) {
        for (int j = i + 1; j < p_; ++j) {
            if (a_[static_cast<size_t>(i) * p_ + j] != a_[static_cast<size_t>(j) * p_ + i]) {
                throw InvalidParameter("matrix is not exactly symmetric; use SymMatrix::symmetrize");
            }
        }
    }
}

SymMatrix SymMatrix::identity(int p) {
    SymMatrix m(p);
    for (int i = 0; i < p; ++i) m.a_[static_cast<size_t>(i) * p + i] = 1.0;
    return m;
}

SymMatrix SymMatrix::diagonal(const std::vector<double>& d) {
    SymMatrix m(static_cast<int>(d.size()));
    for (int i = 0; i < m.p_; ++i) {
        if (!std::isfinite(d[i])) throw InvalidParameter("diagonal entry is not finite");
        m.a_[static_cast<size_t>(i) * m.p_ + i] = d[i];
    }
    return m;
}

SymMatrix SymMatrix::symmetrize(int p, const std::vector<double>& row_major) {
    if (p <= 0) throw InvalidParameter("matrix dimension must be positive");
    if (row_major.size() != static_cast<size_t>(p) * p) {
        throw DimensionMismatch("expected " + std::to_string(p) + "x" + std::to_string(p) +
                                " entries");
    }
    check_finite(row_major);
    SymMatrix m(p);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            m.a_[static_cast<size_t>(i) * p + j] =
                0.5 * (row_major[static_cast<size_t>(i) * p + j] +
                       row_major[static_cast<size_t>(j) * p + i]);
        }
    }
    return m;
}

void SymMatrix::set(int i, int j, double v) {
    if (!std::isfinite(v)) throw InvalidParameter("matrix entry is not finite");
    a_[static_cast<size_t>(i) * p_ + j] = v;
    a_[static_cast<size_t>(j) * p_ + i] = v;
}

SymMatrix SymMatrix::operator+(const SymMatrix& b) const {
    if (b.p_ != p_) throw DimensionMismatch("dimension mismatch in matrix sum");
    SymMatrix r(p_);
    for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] + b.a_[k];
    return r;
}

SymMatrix SymMatrix::operator-(const SymMatrix& b) const {
    if (b.p_ != p_) throw DimensionMismatch("dimension mismatch in matrix difference");
    SymMatrix r(p_);
    for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] - b.a_[k];
    return r;
}

SymMatrix SymMatrix::scaled(double c) const {
    SymMatrix r(p_);
    for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = c * a_[k];
    return r;
}

void CholeskyFactor::solve(std::vector<double>& b) const {
    const int p = dim;
    // forward: L y = b
    for (int i = 0; i < p; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= lower[static_cast<size_t>(i) * p + k] * b[k];
        b[i] = s / lower[static_cast<size_t>(i) * p + i];
    }
    // backward: L^T x = y
    for (int i = p - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < p; ++k) s -= lower[static_cast<size_t>(k) * p + i] * b[k];
        b[i] = s / lower[static_cast<size_t>(i) * p + i];
    }
}

double CholeskyFactor::half_log_det() const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += std::log(lower[static_cast<size_t>(i) * dim + i]);
    return s;
}

CholeskyFactor cholesky(const SymMatrix& a) {
    const int p = a.dim();
    CholeskyFactor f;
    f.dim = p;
    f.lower.assign(static_cast<size_t>(p) * p, 0.0);
    for (int j = 0; j < p; ++j) {
        double d = a(j, j);
        for (int k = 0; k < j; ++k) {
            const double ljk = f.lower[static_cast<size_t>(j) * p + k];
            d -= ljk * ljk;
        }
        if (!(d > 0.0)) {
            throw NotPositiveDefinite("pivot " + std::to_string(j) + " is not positive (" +
                                      std::to_string(d) + ")");
        }
        const double ljj = std::sqrt(d);
        f.lower[static_cast<size_t>(j) * p + j] = ljj;
        for (int i = j + 1; i < p; ++i) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) {
                s -= f.lower[static_cast<size_t>(i) * p + k] *
                     f.lower[static_cast<size_t>(j) * p + k];
            }
            f.lower[static_cast<size_t>(i) * p + j] = s / ljj;
        }
    }
    return f;
}

double log_det(const SymMatrix& a) { return 2.0 * cholesky(a).half_log_det(); }

SymMatrix inverse_spd(const CholeskyFactor& chol) {
    const int p = chol.dim;
    std::vector<double> inv(static_cast<size_t>(p) * p, 0.0);
    std::vector<double> e(p);
    for (int j = 0; j < p; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        chol.solve(e);
        for (int i = 0; i < p; ++i) inv[static_cast<size_t>(i) * p + j] = e[i];
    }
    // the column solves agree only to round-off across the diagonal
    return SymMatrix::symmetrize(p, inv);
}

SymMatrix inverse_spd(const SymMatrix& a) { return inverse_spd(cholesky(a)); }

double norm_elem_max(const SymMatrix& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

double norm_linf_op(const SymMatrix& a) {
    const int p = a.dim();
    double m = 0.0;
    for (int i = 0; i < p; ++i) {
        double row = 0.0;
        for (int j = 0; j < p; ++j) row += std::abs(a(i, j));
        m = std::max(m, row);
    }
    return m;
}

double norm_frobenius(const SymMatrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

namespace {

// Cyclic Jacobi eigenvalue iteration: deterministic (no starting vector),
// quadratically convergent. Returns the eigenvalues; p is assumed modest.
std::vector<double> jacobi_eigenvalues(const SymMatrix& a, double rel_tol, int max_sweeps) {
    const int p = a.dim();
    std::vector<double> m(a.data());
    auto at = [&](int i, int j) -> double& { return m[static_cast<size_t>(i) * p + j]; };
    const double scale = std::max(norm_frobenius(a), 1e-300);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j) off += at(i, j) * at(i, j);
        off = std::sqrt(2.0 * off);
        if (off <= rel_tol * scale) {
            std::vector<double> ev(p);
            for (int i = 0; i < p; ++i) ev[i] = at(i, i);
            return ev;
        }
        for (int q = 1; q < p; ++q) {
            for (int pp = 0; pp < q; ++pp) {
                const double apq = at(pp, q);
                if (apq == 0.0) continue;
                const double app = at(pp, pp), aqq = at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < p; ++k) {
                    const double akp = at(k, pp), akq = at(k, q);
                    at(k, pp) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < p; ++k) {
                    const double apk = at(pp, k), aqk = at(q, k);
                    at(pp, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    throw NotConverged("jacobi eigensolver did not reach tolerance");
}

double power_iteration_abs_max(const SymMatrix& a, double rel_tol, int max_iter) {
    const int p = a.dim();
    std::vector<double> v(p), w(p);
    for (int i = 0; i < p; ++i) v[i] = 1.0 + 1e-3 * (i % 7);  // fixed start
    double prev = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        double nrm = 0.0;
        for (int i = 0; i < p; ++i) {
            double s = 0.0;
            for (int j = 0; j < p; ++j) s += a(i, j) * v[j];
            w[i] = s;
            nrm += s * s;
        }
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) return 0.0;
        double vn = 0.0;
        for (int i = 0; i < p; ++i) vn += v[i] * v[i];
        const double lam = nrm / std::sqrt(vn);
        for (int i = 0; i < p; ++i) v[i] = w[i] / nrm;
        if (it > 0 && std::abs(lam - prev) <= rel_tol * std::max(1.0, std::abs(lam))) return lam;
        prev = lam;
    }
    throw NotConverged("power iteration did not reach tolerance");
}

}  // namespace

double norm_spectral(const SymMatrix& a) {
    if (a.dim() <= 512) {
        const auto ev = jacobi_eigenvalues(a, 1e-9, 60);
        double m = 0.0;
        for (double v : ev) m = std::max(m, std::abs(v));
        return m;
    }
    return power_iteration_abs_max(a, 1e-9, 100000);
}

std::vector<double> matmul(const SymMatrix& a, const SymMatrix& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("dimension mismatch in matmul");
    const int p = a.dim();
    std::vector<double> c(static_cast<size_t>(p) * p, 0.0);
    for (int i = 0; i < p; ++i) {
        for (int k = 0; k < p; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < p; ++j) c[static_cast<size_t>(i) * p + j] += aik * b(k, j);
        }
    }
    return c;
}

double residual_from_identity(const SymMatrix& a, const SymMatrix& b) {
    const auto c = matmul(a, b);
    const int p = a.dim();
    double m = 0.0;
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            const double target = (i == j) ? 1.0 : 0.0;
            m = std::max(m, std::abs(c[static_cast<size_t>(i) * p + j] - target));
        }
    }
    return m;
}

}  // namespace ggm
