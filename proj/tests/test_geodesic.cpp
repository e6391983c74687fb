#include "geodl/geodesic.hpp"
#include "geodl/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace geodl;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
    return m;
}


Subspace axes(Index d, std::initializer_list<Index> idx) {
    Matrix b = Matrix::Zero(d, static_cast<Index>(idx.size()));
    Index c = 0;
    for (Index i : idx) b(i, c++) = 1.0;
    return Subspace(b);
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("Subspace rejects invalid bases") {
    CHECK_THROWS_AS(Subspace(Matrix::Identity(3, 3)), Error);  // n = d
    Matrix skew(3, 1);
    skew << 1.0, 1.0, 0.0;
    CHECK_THROWS_AS(Subspace{skew}, Error);  // not unit norm
    CHECK_NOTHROW(Subspace(Matrix::Identity(3, 2)));
}

TEST_CASE("orthonormalize") {
    SUBCASE("axis-aligned columns") {
        Matrix m(3, 2);
        m << 2, 0, 0, 0, 0, 3;
        const SpanBasis b = orthonormalize(m);
        Matrix expected(3, 2);
        expected << 1, 0, 0, 0, 0, 1;
        CHECK(max_abs(b.subspace.basis().cwiseAbs() - expected) < 1e-15);
        CHECK_FALSE(b.rank_deficient());
    }
    SUBCASE("already orthonormal columns are returned unchanged") {
        const Matrix m = Matrix::Identity(4, 4).leftCols(2);
        CHECK(max_abs(orthonormalize(m).subspace.basis() - m) == 0.0);
    }
    SUBCASE("seeded random 8x3 spans the same space") {
        Rng rng(42);
        const Matrix m = gaussian_matrix(8, 3, rng);
        const Matrix b = orthonormalize(m).subspace.basis();
        CHECK(max_abs(b.transpose() * b - Matrix::Identity(3, 3)) < 1e-12);
        const Matrix residual = m - b * (b.transpose() * m);
        CHECK(residual.norm() < 1e-12 * m.norm());
    }
    SUBCASE("rank deficiency is reported") {
        Matrix m(4, 3);
        m.col(0) << 1, 2, 3, 4;
        m.col(1) = 2.0 * m.col(0);
        m.col(2) << 0, 1, 0, 0;
        const SpanBasis b = orthonormalize(m);
        CHECK(b.achieved_dim() == 2);
        CHECK(b.requested_dim == 3);
        CHECK(b.rank_deficient());
    }
    SUBCASE("zero matrix") {
        CHECK_THROWS_WITH_AS(orthonormalize(Matrix::Zero(3, 2)), "degenerate span", Error);
    }
}

TEST_CASE("pca_subspace") {
    SUBCASE("variance along the first axis only") {
        Matrix z(2, 2);
        z << 1, -1, 0, 0;
        const PcaResult p = pca_subspace(z, 1, true);
        CHECK(p.subspace.basis()(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(std::abs(p.subspace.basis()(1, 0)) < 1e-15);
    }
    SUBCASE("a batch of identical columns has rank 0") {
        Matrix z(3, 10);
        for (Index j = 0; j < 10; ++j) z.col(j) << 0.3, -1.7, 2.9;
        CHECK_THROWS_AS(pca_subspace(z, 2, true), Error);
    }
    SUBCASE("residual equals the tail singular energy of a full eigendecomposition") {
        Rng rng(7);
        const Matrix z = gaussian_matrix(16, 64, rng);
        const PcaResult p = pca_subspace(z, 8, true);
        Matrix zc = z;
        zc.colwise() -= z.rowwise().mean();
        const Matrix& b = p.subspace.basis();
        const double residual = (zc - b * (b.transpose() * zc)).norm();

        // eigenvalues of Zc Zcᵀ ascending: the smallest 8 are the tail energy
        Eigen::SelfAdjointEigenSolver<Matrix> es(zc * zc.transpose());
        const double tail = std::sqrt(es.eigenvalues().head(8).sum());
        CHECK(std::abs(residual - tail) < 1e-8);
    }
    SUBCASE("rank below n is reduced and flagged") {
        Rng rng(3);
        const Matrix z = gaussian_matrix(6, 2, rng) * gaussian_matrix(2, 20, rng);
        const PcaResult p = pca_subspace(z, 4, false);
        CHECK(p.reduced());
        CHECK(p.achieved_dim() == 2);
    }
    SUBCASE("sign convention: largest-magnitude entry is positive") {
        Rng rng(11);
        const PcaResult p = pca_subspace(gaussian_matrix(10, 30, rng), 4, true);
        for (Index c = 0; c < 4; ++c) {
            Index arg = 0;
            p.subspace.basis().col(c).cwiseAbs().maxCoeff(&arg);
            CHECK(p.subspace.basis()(arg, c) > 0.0);
        }
    }
    SUBCASE("precondition errors") {
        CHECK_THROWS_AS(pca_subspace(Matrix::Ones(3, 1), 1), Error);
        CHECK_THROWS_AS(pca_subspace(Matrix::Random(3, 8), 3), Error);
    }
}

TEST_CASE("orthogonal_complement") {
    SUBCASE("line in R^2") {
        const Matrix r = orthogonal_complement(axes(2, {0}));
        CHECK(r.cols() == 1);
        CHECK(std::abs(std::abs(r(1, 0)) - 1.0) < 1e-15);
        CHECK(std::abs(r(0, 0)) < 1e-15);
    }
    SUBCASE("plane in R^4") {
        const Subspace p = axes(4, {0, 1});
        const Matrix r = orthogonal_complement(p);
        CHECK(max_abs(r.transpose() * p.basis()) < 1e-15);
        CHECK(max_abs(r.topRows(2)) < 1e-15);
    }
    SUBCASE("seeded random G(5,12) completes to an orthogonal matrix") {
        Rng rng(5);
        const Subspace p = random_subspace(12, 5, rng);
        const Matrix r = orthogonal_complement(p);
        Matrix frame(12, 12);
        frame << p.basis(), r;
        CHECK(max_abs(frame.transpose() * frame - Matrix::Identity(12, 12)) < 1e-10);
        CHECK(max_abs(orthogonal_complement(p) - r) == 0.0);  // deterministic
    }
}

TEST_CASE("cs_decompose") {
    SUBCASE("identical subspaces") {
        const Subspace p = axes(4, {0, 1});
        const GeodesicDecomposition dec = cs_decompose(p, p);
        CHECK(dec.omegas.cwiseAbs().maxCoeff() < 1e-15);
        CHECK(max_abs(dec.gammas() - Vector::Ones(2)) < 1e-15);
        CHECK(dec.u2.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("orthogonal lines") {
        const GeodesicDecomposition dec = cs_decompose(axes(2, {0}), axes(2, {1}));
        CHECK(dec.omegas(0) == doctest::Approx(kPi / 2).epsilon(1e-15));
        CHECK(std::abs(dec.gammas()(0)) < 1e-15);
        CHECK(dec.sigmas()(0) == doctest::Approx(1.0));
    }
    SUBCASE("line at 45 degrees in R^3") {
        Matrix b(3, 1);
        b << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
        const GeodesicDecomposition dec = cs_decompose(axes(3, {0}), Subspace(b));
        CHECK(std::abs(dec.omegas(0) - std::acos(1.0 / std::sqrt(2.0))) < 1e-15);
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(cs_decompose(axes(4, {0}), axes(4, {0, 1})), Error);
        CHECK_THROWS_AS(cs_decompose(axes(4, {0}), axes(3, {0})), Error);
    }
    SUBCASE("invariants on seeded pairs, including n > d/2 and near-identical pairs") {
        Rng rng(101);
        for (int k = 0; k < 40; ++k) {
            const Index d = 6 + (k % 5) * 3;
            const Index n = 1 + k % (d - 1);
            const Subspace p_old = random_subspace(d, n, rng);
            const Subspace p_new = (k % 3 == 0)
                                       ? orthonormalize(p_old.basis() + 1e-4 * gaussian_matrix(d, n, rng)).subspace
                                       : random_subspace(d, n, rng);
            const GeodesicDecomposition dec = cs_decompose(p_old, p_new);
            CAPTURE(d);
            CAPTURE(n);
            Matrix frame(d, d);
            frame << p_old.basis(), dec.complement;
            CHECK(max_abs(frame.transpose() * frame - Matrix::Identity(d, d)) < 1e-8);
            const Matrix a = p_old.basis().transpose() * p_new.basis();
            const Matrix b = dec.complement.transpose() * p_new.basis();
            CHECK(max_abs(a - dec.u1 * dec.gammas().asDiagonal() * dec.v.transpose()) < 1e-8);
            CHECK(max_abs(b + dec.u2 * dec.sigmas().asDiagonal() * dec.v.transpose()) < 1e-8);
            CHECK(max_abs(dec.u1.transpose() * dec.u1 - Matrix::Identity(n, n)) < 1e-10);
            CHECK(max_abs(dec.v.transpose() * dec.v - Matrix::Identity(n, n)) < 1e-10);
            for (Index i = 0; i < n; ++i) {
                const double len = dec.u2.col(i).norm();
                CHECK((len == 0.0 || std::abs(len - 1.0) < 1e-10));
                if (i > 0) CHECK(dec.omegas(i) >= dec.omegas(i - 1));
            }
            // U2 = −R^T P_new V / σ amplifies rounding by 1/σ, so mutual
            // orthogonality is checked on the scaled columns U2·Σ.
            const Matrix scaled = dec.u2 * dec.sigmas().asDiagonal();
            const Matrix gram = scaled.transpose() * scaled;
            CHECK(max_abs(gram - Matrix(gram.diagonal().asDiagonal())) < 1e-8);
            CHECK(dec.omegas.minCoeff() >= 0.0);
            CHECK(dec.omegas.maxCoeff() <= kPi / 2);
        }
    }
}

TEST_CASE("geodesic_point") {
    const GeodesicDecomposition lines = cs_decompose(axes(2, {0}), axes(2, {1}));
    SUBCASE("nu = 0 is the old subspace") {
        const Subspace p_old = axes(3, {0});
        const GeodesicDecomposition dec = cs_decompose(p_old, axes(3, {1}));
        const Matrix pi = geodesic_point(dec, 0.0);
        CHECK(max_abs(pi * pi.transpose() - p_old.projector()) < 1e-15);
    }
    SUBCASE("nu = 1 reaches the new line") {
        const Matrix pi = geodesic_point(lines, 1.0);
        CHECK(std::abs(std::abs(pi(1, 0)) - 1.0) < 1e-15);
        CHECK(std::abs(pi(0, 0)) < 1e-15);
    }
    SUBCASE("nu = 0.5 is a bisector of the two lines") {
        // The two bisectors are both geodesic midpoints at ω = π/2; the
        // canonical decomposition picks (e1 − e2)/√2, the one consistent with
        // the kernel [[1, −2/π], [−2/π, 1]].
        const Matrix pi = geodesic_point(lines, 0.5);
        CHECK(std::abs(std::abs(pi(0, 0)) - std::cos(kPi / 4)) < 1e-15);
        CHECK(std::abs(std::abs(pi(1, 0)) - std::sin(kPi / 4)) < 1e-15);
        CHECK(pi(0, 0) * pi(1, 0) < 0.0);
    }
    SUBCASE("nu outside [0, 1]") {
        CHECK_THROWS_AS(geodesic_point(lines, -0.1), Error);
        CHECK_THROWS_AS(geodesic_point(lines, 1.5), Error);
        CHECK_THROWS_AS(geodesic_point(lines, std::nan("")), Error);
    }
    SUBCASE("endpoint spans and orthonormality on 100 seeded pairs") {
        Rng rng(2024);
        double worst_span = 0.0;
        double worst_ortho = 0.0;
        for (int k = 0; k < 100; ++k) {
            const Index d = Index{8} << (k % 3);
            const Index choices[3] = {2, 4, d / 2 - 1};
            const Index n = choices[(k / 3) % 3];
            const Subspace p_old = random_subspace(d, n, rng);
            const Subspace p_new = random_subspace(d, n, rng);
            const GeodesicDecomposition dec = cs_decompose(p_old, p_new);
            const Matrix pi0 = geodesic_point(dec, 0.0);
            const Matrix pi1 = geodesic_point(dec, 1.0);
            worst_span = std::max({worst_span, (pi0 * pi0.transpose() - p_old.projector()).norm(),
                                   (pi1 * pi1.transpose() - p_new.projector()).norm()});
            for (double nu : {0.0, 0.3, 0.5, 0.9, 1.0}) {
                const Matrix pi = geodesic_point(dec, nu);
                worst_ortho = std::max(worst_ortho, max_abs(pi.transpose() * pi - Matrix::Identity(n, n)));
            }
        }
        CHECK(worst_span < 1e-6);
        CHECK(worst_ortho < 1e-8);
    }
}

TEST_CASE("lambda_coefficients") {
    Vector w(3);
    w << 0.0, kPi / 2, kPi / 4;
    const LambdaTriple lam = lambda_coefficients(w);
    SUBCASE("zero angle takes the limit (2, 0, 0)") {
        CHECK(lam.lambda1(0) == 2.0);
        CHECK(lam.lambda2(0) == 0.0);
        CHECK(lam.lambda3(0) == 0.0);
    }
    SUBCASE("right angle") {
        CHECK(std::abs(lam.lambda1(1) - 1.0) < 1e-12);
        CHECK(std::abs(lam.lambda2(1) + 2.0 / kPi) < 1e-12);
        CHECK(std::abs(lam.lambda3(1) - 1.0) < 1e-12);
        CHECK(lam.lambda2(1) == doctest::Approx(-0.636620).epsilon(1e-6));
    }
    SUBCASE("45 degrees") {
        CHECK(std::abs(lam.lambda1(2) - (1.0 + 2.0 / kPi)) < 1e-12);
        CHECK(std::abs(lam.lambda2(2) + 2.0 / kPi) < 1e-12);
        CHECK(std::abs(lam.lambda3(2) - (1.0 - 2.0 / kPi)) < 1e-12);
        CHECK(lam.lambda1(2) == doctest::Approx(1.636620).epsilon(1e-6));
        CHECK(lam.lambda3(2) == doctest::Approx(0.363380).epsilon(1e-6));
    }
    SUBCASE("box constraints and PSD 2x2 blocks over [0, pi/2]") {
        Vector grid = Vector::LinSpaced(1001, 0.0, kPi / 2);
        const LambdaTriple g = lambda_coefficients(grid);
        for (Index i = 0; i < grid.size(); ++i) {
            CHECK(g.lambda1(i) >= 1.0 - 1e-15);
            CHECK(g.lambda1(i) <= 2.0);
            CHECK(g.lambda3(i) >= 0.0);
            CHECK(g.lambda3(i) <= 1.0 + 1e-15);
            CHECK(g.lambda2(i) <= 0.0);
            CHECK(g.lambda2(i) >= -0.7247);  // −sin²ω/ω peaks near ω ≈ 1.166
            CHECK(g.lambda1(i) * g.lambda3(i) - g.lambda2(i) * g.lambda2(i) >= -1e-10);
        }
    }
    SUBCASE("continuity across the small-angle threshold") {
        Vector pair(2);
        pair << 1e-5, 9.9e-7;  // exact formula vs Taylor branch
        const LambdaTriple l = lambda_coefficients(pair);
        CHECK(std::abs(l.lambda1(0) - l.lambda1(1)) < 1e-8);
        CHECK(std::abs(l.lambda3(0) - l.lambda3(1)) < 1e-8);
        // λ2 ≈ −ω has slope −1, so across these two angles it moves by the
        // angle gap itself; bound it by that gap.
        CHECK(std::abs(l.lambda2(0) - l.lambda2(1)) <= (1e-5 - 9.9e-7) + 1e-8);

        Vector edge(2);
        edge << std::nextafter(kSmallAngle, 0.0), kSmallAngle;
        const LambdaTriple e = lambda_coefficients(edge);
        CHECK(std::abs(e.lambda1(0) - e.lambda1(1)) < 1e-8);
        CHECK(std::abs(e.lambda2(0) - e.lambda2(1)) < 1e-8);
        CHECK(std::abs(e.lambda3(0) - e.lambda3(1)) < 1e-8);
    }
}

TEST_CASE("geodesic_kernel") {
    SUBCASE("identical subspaces give 2PP^T") {
        Rng rng(9);
        const Subspace p = random_subspace(10, 4, rng);
        CHECK((geodesic_kernel(p, p).q - 2.0 * p.projector()).norm() < 1e-8);
    }
    SUBCASE("orthogonal lines in R^2") {
        Matrix expected(2, 2);
        expected << 1.0, -2.0 / kPi, -2.0 / kPi, 1.0;
        CHECK(max_abs(geodesic_kernel(axes(2, {0}), axes(2, {1})).q - expected) < 1e-12);
    }
    SUBCASE("equals twice the quadrature oracle on a seeded G(6,24) pair") {
        Rng rng(24);
        const GeodesicDecomposition dec = cs_decompose(random_subspace(24, 6, rng), random_subspace(24, 6, rng));
        const Matrix q = geodesic_kernel(dec).q;
        CHECK((q - 2.0 * kernel_quadrature_oracle(dec, 2001)).norm() / q.norm() < 1e-6);
    }
    SUBCASE("symmetric PSD with role-swap invariant spectrum") {
        Rng rng(77);
        for (int k = 0; k < 30; ++k) {
            const Index d = 8 + 2 * (k % 6);
            const Index n = 1 + k % (d / 2);
            const Subspace a = random_subspace(d, n, rng);
            const Subspace b = random_subspace(d, n, rng);
            const GeodesicDecomposition ab = cs_decompose(a, b);
            const GeodesicDecomposition ba = cs_decompose(b, a);
            const Matrix q = geodesic_kernel(ab).q;
            CHECK(max_abs(q - q.transpose()) < 1e-10);
            Eigen::SelfAdjointEigenSolver<Matrix> e1(q), e2(geodesic_kernel(ba).q);
            CHECK(e1.eigenvalues().minCoeff() >= -1e-8);
            CHECK(max_abs(e1.eigenvalues() - e2.eigenvalues()) < 1e-6);
            CHECK(max_abs(ab.omegas - ba.omegas) < 1e-8);
        }
    }
}

TEST_CASE("kernel_quadrature_oracle") {
    SUBCASE("constant integrand for identical subspaces") {
        Rng rng(1);
        const Subspace p = random_subspace(7, 3, rng);
        const GeodesicDecomposition dec = cs_decompose(p, p);
        for (int steps : {3, 11, 101}) CHECK(max_abs(kernel_quadrature_oracle(dec, steps) - p.projector()) < 1e-14);
    }
    SUBCASE("orthogonal lines match the analytic integral") {
        // ∫₀¹ cos²(πν/2) dν = 1/2, ∫₀¹ cos(πν/2) sin(πν/2) dν = 1/π
        Matrix expected(2, 2);
        expected << 0.5, -1.0 / kPi, -1.0 / kPi, 0.5;
        const GeodesicDecomposition dec = cs_decompose(axes(2, {0}), axes(2, {1}));
        CHECK(max_abs(kernel_quadrature_oracle(dec, 2001) - expected) < 1e-9);
    }
    SUBCASE("converged at 2001 nodes") {
        Rng rng(31);
        const GeodesicDecomposition dec = cs_decompose(random_subspace(12, 4, rng), random_subspace(12, 4, rng));
        CHECK(max_abs(kernel_quadrature_oracle(dec, 2001) - kernel_quadrature_oracle(dec, 4001)) < 1e-9);
    }
    SUBCASE("even or too few steps") {
        const GeodesicDecomposition dec = cs_decompose(axes(2, {0}), axes(2, {1}));
        CHECK_THROWS_AS(kernel_quadrature_oracle(dec, 2000), Error);
        CHECK_THROWS_AS(kernel_quadrature_oracle(dec, 1), Error);
    }
}
