#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "ggm/errors.hpp"
#include "ggm/linalg.hpp"
#include "ggm/matrix_io.hpp"
#include "ggm/sampling.hpp"

#include "test_util.hpp"

using namespace ggm;

namespace {

// Cofactor (Laplace) determinant, independent of the Cholesky path; only for
// tiny matrices.
double det_laplace(const std::vector<std::vector<double>>& m) {
    const size_t n = m.size();
    if (n == 1) return m[0][0];
    double det = 0.0;
    for (size_t c = 0; c < n; ++c) {
        std::vector<std::vector<double>> minor;
        for (size_t i = 1; i < n; ++i) {
            std::vector<double> row;
            for (size_t j = 0; j < n; ++j) {
                if (j != c) row.push_back(m[i][j]);
            }
            minor.push_back(row);
        }
        det += (c % 2 == 0 ? 1.0 : -1.0) * m[0][c] * det_laplace(minor);
    }
    return det;
}

}  // namespace

TEST_CASE("symmetry is enforced at construction") {
    CHECK_THROWS_AS(SymMatrix(2, {1.0, 2.0, 3.0, 4.0}), InvalidParameter);
    const SymMatrix s = SymMatrix::symmetrize(2, {1.0, 2.0, 3.0, 4.0});
    CHECK(s(0, 1) == 2.5);
    CHECK(s(1, 0) == 2.5);
    CHECK_THROWS_AS(SymMatrix(2, {1.0, std::nan(""), std::nan(""), 1.0}), InvalidParameter);
}

TEST_CASE("cholesky identity and 2x2 hand factorization") {
    const auto f = cholesky(SymMatrix::identity(3));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(f(i, j) == (i == j ? 1.0 : 0.0));

    const auto g = cholesky(SymMatrix(2, {4, 2, 2, 3}));
    CHECK(g(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(g(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(g(0, 1) == 0.0);
}

TEST_CASE("cholesky rejects indefinite input") {
    CHECK_THROWS_AS(cholesky(SymMatrix(2, {1, 2, 2, 1})), NotPositiveDefinite);
}

TEST_CASE("log_det basic values") {
    CHECK(log_det(SymMatrix::identity(5)) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(log_det(SymMatrix::diagonal({2, 3})) == doctest::Approx(std::log(6.0)).epsilon(1e-12));
    CHECK(log_det(SymMatrix(2, {4, 2, 2, 3})) == doctest::Approx(std::log(8.0)).epsilon(1e-12));
}

TEST_CASE("log_det matches cofactor determinant for p <= 4") {
    Rng rng(Seed{101});
    for (int p = 2; p <= 4; ++p) {
        for (int rep = 0; rep < 20; ++rep) {
            const SymMatrix a = testutil::random_spd(p, 50.0, rng);
            std::vector<std::vector<double>> m(p, std::vector<double>(p));
            for (int i = 0; i < p; ++i)
                for (int j = 0; j < p; ++j) m[i][j] = a(i, j);
            CHECK(std::exp(log_det(a)) == doctest::Approx(det_laplace(m)).epsilon(1e-9));
        }
    }
}

TEST_CASE("inverse_spd examples") {
    const SymMatrix ii = inverse_spd(SymMatrix::identity(4));
    CHECK(norm_elem_max(ii - SymMatrix::identity(4)) < 1e-14);

    const SymMatrix d = inverse_spd(SymMatrix::diagonal({2, 4}));
    CHECK(d(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(d(1, 1) == doctest::Approx(0.25).epsilon(1e-14));

    const SymMatrix a(2, {1, 0.4, 0.4, 1});
    const SymMatrix inv = inverse_spd(a);
    CHECK(inv(0, 0) == doctest::Approx(1.0 / 0.84).epsilon(1e-12));
    CHECK(inv(0, 1) == doctest::Approx(-0.4 / 0.84).epsilon(1e-12));
}

TEST_CASE("inverse round trip on random SPD matrices") {
    Rng rng(Seed{202});
    for (int rep = 0; rep < 30; ++rep) {
        const int p = 2 + static_cast<int>(rng.next_u64() % 19);
        const double cond = std::pow(10.0, rng.next_uniform() * 6.0);
        const SymMatrix a = testutil::random_spd(p, cond, rng);
        const SymMatrix inv = inverse_spd(a);
        CHECK(residual_from_identity(inv, a) < 1e-8);
    }
}

TEST_CASE("norms") {
    CHECK(norm_elem_max(SymMatrix(2, {1, -3, -3, 2})) == 3.0);
    CHECK(norm_elem_max(SymMatrix(3)) == 0.0);
    CHECK(norm_elem_max(SymMatrix::identity(7)) == 1.0);

    CHECK(norm_linf_op(SymMatrix::identity(4)) == 1.0);
    CHECK(norm_linf_op(SymMatrix(2, {1, -2, -2, 4})) == 6.0);

    CHECK(norm_frobenius(SymMatrix::identity(3)) == doctest::Approx(std::sqrt(3.0)));
    CHECK(norm_frobenius(SymMatrix(2, {3, 4, 4, 3})) == doctest::Approx(std::sqrt(50.0)));
    CHECK(norm_frobenius(SymMatrix(5)) == 0.0);

    CHECK(norm_spectral(SymMatrix::diagonal({1, 2, 3})) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(norm_spectral(SymMatrix(2, {0, 1, 1, 0})) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("norm inequalities on random symmetric matrices") {
    Rng rng(Seed{303});
    for (int rep = 0; rep < 25; ++rep) {
        const int p = 2 + static_cast<int>(rng.next_u64() % 11);
        SymMatrix a(p);
        for (int i = 0; i < p; ++i)
            for (int j = i; j < p; ++j) a.set(i, j, rng.next_gaussian());
        const double spec = norm_spectral(a);
        CHECK(spec <= norm_frobenius(a) * (1 + 1e-9));
        CHECK(spec <= norm_linf_op(a) * (1 + 1e-9));
        // symmetric input: the l1 operator norm (max column sum) coincides
        double max_col = 0.0;
        for (int j = 0; j < p; ++j) {
            double col = 0.0;
            for (int i = 0; i < p; ++i) col += std::abs(a(i, j));
            max_col = std::max(max_col, col);
        }
        CHECK(norm_linf_op(a) == max_col);
    }
}

TEST_CASE("matrix csv round trip is bit exact") {
    Rng rng(Seed{404});
    const SymMatrix a = testutil::random_spd(6, 100.0, rng);
    const auto path = std::filesystem::temp_directory_path() / "ggm_matrix_roundtrip.csv";
    write_matrix_csv(a, path.string());
    const SymMatrix b = read_matrix_csv(path.string());
    REQUIRE(b.dim() == a.dim());
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) CHECK(a(i, j) == b(i, j));
    std::filesystem::remove(path);
}

TEST_CASE("matrix csv reader skips a comment header") {
    const auto path = std::filesystem::temp_directory_path() / "ggm_matrix_header.csv";
    {
        std::ofstream out(path);
        out << "# 2x2 covariance\n1.0,0.5\n0.5,2.0\n";
    }
    const SymMatrix a = read_matrix_csv(path.string());
    CHECK(a(0, 1) == 0.5);
    CHECK(a(1, 1) == 2.0);
    std::filesystem::remove(path);
}
