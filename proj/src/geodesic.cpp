#include "geodl/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

namespace geodl {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Below this cosine a principal direction counts as orthogonal to the other
// subspace; the sign of its V column is then fixed from U2 instead of U1.
constexpr double kOrthogonalGamma = 1e-12;

std::string dims(Index r, Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

// Projects v off the columns of q twice ("twice is enough").
void project_off(const Matrix& q, Index used, Eigen::Ref<Vector> v) {
    if (used == 0) return;
    for (int pass = 0; pass < 2; ++pass) {
        const auto basis = q.leftCols(used);
        v -= basis * (basis.transpose() * v);
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Subspace

Subspace::Subspace(Matrix basis) : basis_(std::move(basis)) {
    const Index d = basis_.rows();
    const Index n = basis_.cols();
    if (n < 1 || n >= d)
        throw Error("subspace dimension must satisfy 0 < n < d, got basis " + dims(d, n));
    if (!basis_.allFinite()) throw Error("subspace basis has non-finite entries");
    const Matrix gram = basis_.transpose() * basis_;
    const double err = (gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (err > kOrthonormalTol)
        throw Error("subspace basis is not orthonormal (max |BᵀB − I| = " + std::to_string(err) +
                    ")");
}

Subspace Subspace::leading(Index k) const {
    if (k < 1 || k > dim()) throw Error("leading(k) requires 1 <= k <= n");
    return Subspace(basis_.leftCols(k));
}

// ---------------------------------------------------------------------------
// Bases

SpanBasis orthonormalize(const Matrix& m) {
    if (m.rows() < 1 || m.cols() < 1) throw Error("orthonormalize: empty matrix");
    if (!m.allFinite()) throw Error("orthonormalize: non-finite entries");
    const Index d = m.rows();
    const Index k = m.cols();
    const double scale = m.colwise().norm().maxCoeff();
    if (scale == 0.0) throw Error("degenerate span");
    const double tol = 1e-10 * scale;

    Matrix q(d, std::min(d, k));
    Index used = 0;
    for (Index c = 0; c < k && used < d; ++c) {
        Vector v = m.col(c);
        project_off(q, used, v);
        const double norm = v.norm();
        if (norm <= tol) continue;
        q.col(used++) = v / norm;
    }
    if (used == 0) throw Error("degenerate span");
    return SpanBasis{Subspace(q.leftCols(used)), k};
}

PcaResult pca_subspace(const Matrix& z, Index n, bool center) {
    const Index d = z.rows();
    const Index batch = z.cols();
    if (batch < 2) throw Error("pca_subspace: need at least 2 samples, got " + std::to_string(batch));
    if (n < 1 || n >= d)
        throw Error("pca_subspace: subspace dimension must satisfy 0 < n < d (n = " +
                    std::to_string(n) + ", d = " + std::to_string(d) + ")");
    if (!z.allFinite()) throw Error("pca_subspace: non-finite features");

    Matrix zc = z;
    if (center) zc.colwise() -= z.rowwise().mean();

    Eigen::JacobiSVD<Matrix> svd(zc, Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    const double ref = std::max(s.size() ? s(0) : 0.0, z.norm());
    const double tol = static_cast<double>(std::max(d, batch)) * kEps * ref;
    Index rank = 0;
    while (rank < s.size() && s(rank) > tol) ++rank;
    if (rank == 0) throw Error("degenerate span: feature batch has rank 0");

    const Index kept = std::min(n, rank);
    Matrix basis = svd.matrixU().leftCols(kept);
    for (Index c = 0; c < kept; ++c) canonicalize_sign(basis.col(c));
    return PcaResult{Subspace(std::move(basis)), n, s};
}

Matrix orthogonal_complement(const Subspace& p) {
    const Index d = p.ambient_dim();
    const Index n = p.dim();
    const Index m = d - n;

    Matrix frame(d, d);
    frame.leftCols(n) = p.basis();
    Index used = n;

    // residuals[:, j] = e_j minus its projection onto the frame built so far
    Matrix residuals = Matrix::Identity(d, d) - p.basis() * p.basis().transpose();
    std::vector<bool> taken(static_cast<std::size_t>(d), false);

    for (Index step = 0; step < m; ++step) {
        Index best = -1;
        double best_norm = -1.0;
        for (Index j = 0; j < d; ++j) {
            if (taken[static_cast<std::size_t>(j)]) continue;
            const double nrm = residuals.col(j).norm();
            if (nrm > best_norm) {
                best_norm = nrm;
                best = j;
            }
        }
        if (best < 0 || best_norm < 1e-8)
            throw Error("orthogonal_complement: completion failed");
        taken[static_cast<std::size_t>(best)] = true;

        Vector v = Vector::Unit(d, best);
        project_off(frame, used, v);
        v.normalize();
        frame.col(used++) = v;
        residuals -= v * (v.transpose() * residuals);
    }
    return frame.rightCols(m);
}

// ---------------------------------------------------------------------------
// Geodesic flow

GeodesicDecomposition cs_decompose(const Subspace& p_old, const Subspace& p_new) {
    if (p_old.ambient_dim() != p_new.ambient_dim() || p_old.dim() != p_new.dim())
        throw Error("cs_decompose: dimension mismatch (" +
                    dims(p_old.ambient_dim(), p_old.dim()) + " vs " +
                    dims(p_new.ambient_dim(), p_new.dim()) + ")");
    const Index d = p_old.ambient_dim();
    const Index n = p_old.dim();

    Matrix r = orthogonal_complement(p_old);
    const Matrix a = p_old.basis().transpose() * p_new.basis();
    const Matrix b = r.transpose() * p_new.basis();

    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix u1 = svd.matrixU();
    Matrix v = svd.matrixV();
    Vector gamma = svd.singularValues().cwiseMax(-1.0).cwiseMin(1.0);

    // Singular values are nonnegative, so γ ≥ 0 and every ω lands in
    // [0, π/2] without flipping. Fix the remaining sign freedom per pair.
    for (Index i = 0; i < n; ++i) {
        if (canonical_sign(u1.col(i)) < 0.0) {
            u1.col(i) = -u1.col(i);
            v.col(i) = -v.col(i);
        }
    }

    Matrix w = b * v;
    Matrix u2 = Matrix::Zero(d - n, n);
    Vector omegas(n);
    for (Index i = 0; i < n; ++i) {
        const double sigma = w.col(i).norm();
        // atan2 keeps small angles accurate where arccos(γ) loses half the digits.
        omegas(i) = std::atan2(sigma, gamma(i));
        if (sigma >= kSigmaThreshold) u2.col(i) = -w.col(i) / sigma;
    }

    // A direction orthogonal to the other subspace leaves V's sign free;
    // take the one that makes the U2 column canonical.
    for (Index i = 0; i < n; ++i) {
        if (gamma(i) <= kOrthogonalGamma && u2.col(i).squaredNorm() > 0.0 &&
            canonical_sign(u2.col(i)) < 0.0) {
            u2.col(i) = -u2.col(i);
            v.col(i) = -v.col(i);
        }
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index x, Index y) { return omegas(x) < omegas(y); });

    GeodesicDecomposition dec{p_old, p_new, std::move(r), Matrix(n, n), Matrix(d - n, n),
                              Matrix(n, n), Vector(n)};
    for (Index k = 0; k < n; ++k) {
        const Index src = order[static_cast<std::size_t>(k)];
        dec.u1.col(k) = u1.col(src);
        dec.u2.col(k) = u2.col(src);
        dec.v.col(k) = v.col(src);
        dec.omegas(k) = std::clamp(omegas(src), 0.0, std::numbers::pi / 2);
    }
    return dec;
}

Matrix geodesic_point(const GeodesicDecomposition& dec, double nu) {
    if (!(nu >= 0.0 && nu <= 1.0))
        throw Error("geodesic_point: nu must lie in [0, 1], got " + std::to_string(nu));
    const Vector scaled = nu * dec.omegas;
    const Vector cos_nu = scaled.array().cos().matrix();
    const Vector sin_nu = scaled.array().sin().matrix();
    return dec.p_old.basis() * (dec.u1 * cos_nu.asDiagonal()) -
           dec.complement * (dec.u2 * sin_nu.asDiagonal());
}

LambdaTriple lambda_coefficients(const Vector& omegas) {
    const Index n = omegas.size();
    LambdaTriple out{Vector(n), Vector(n), Vector(n)};
    for (Index i = 0; i < n; ++i) {
        const double w = omegas(i);
        double sinc2;  // sin(2ω)/(2ω)
        double l2;
        if (std::abs(w) < kSmallAngle) {
            sinc2 = 1.0 - (2.0 * w) * (2.0 * w) / 6.0;
            l2 = -w;
        } else {
            sinc2 = std::sin(2.0 * w) / (2.0 * w);
            l2 = (std::cos(2.0 * w) - 1.0) / (2.0 * w);
        }
        out.lambda1(i) = 1.0 + sinc2;
        out.lambda2(i) = l2;
        out.lambda3(i) = 1.0 - sinc2;
    }
    return out;
}

GeodesicKernel geodesic_kernel(const GeodesicDecomposition& dec) {
    const LambdaTriple lam = lambda_coefficients(dec.omegas);
    const Matrix left = dec.p_old.basis() * dec.u1;   // P_old U1
    const Matrix right = dec.complement * dec.u2;     // R U2

    Matrix q = left * lam.lambda1.asDiagonal() * left.transpose() +
               right * lam.lambda3.asDiagonal() * right.transpose();
    const Matrix cross = left * lam.lambda2.asDiagonal() * right.transpose();
    q += cross + cross.transpose();
    q = 0.5 * (q + q.transpose()).eval();
    return GeodesicKernel{std::move(q), dec};
}

GeodesicKernel geodesic_kernel(const Subspace& p_old, const Subspace& p_new) {
    return geodesic_kernel(cs_decompose(p_old, p_new));
}

Matrix kernel_quadrature_oracle(const GeodesicDecomposition& dec, int steps) {
    if (steps < 3 || steps % 2 == 0)
        throw Error("kernel_quadrature_oracle: steps must be odd and >= 3, got " +
                    std::to_string(steps));
    const Index d = dec.ambient_dim();
    const double h = 1.0 / static_cast<double>(steps - 1);
    Matrix acc = Matrix::Zero(d, d);
    for (int k = 0; k < steps; ++k) {
        const double weight = (k == 0 || k == steps - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        const Matrix pi = geodesic_point(dec, std::min(1.0, k * h));
        acc.noalias() += weight * (pi * pi.transpose());
    }
    return acc * (h / 3.0);
}

}  // namespace geodl
