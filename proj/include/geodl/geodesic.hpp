#pragma once

// Grassmann-manifold machinery: subspace bases, the geodesic flow between two
// subspaces and the closed-form kernel integrating projections along it.

#include "geodl/linalg.hpp"

namespace geodl {

/// Below this angle the lambda coefficients switch to their Taylor expansions.
inline constexpr double kSmallAngle = 1e-6;
/// Columns of U2 whose sine falls below this value are set to zero.
inline constexpr double kSigmaThreshold = 1e-8;
/// Per-entry tolerance on basisᵀ·basis = I accepted by Subspace.
inline constexpr double kOrthonormalTol = 1e-10;

/// A point on G(n, d): a d×n matrix with orthonormal columns, 0 < n < d.
class Subspace {
public:
    explicit Subspace(Matrix basis);

    const Matrix& basis() const noexcept { return basis_; }
    Index ambient_dim() const noexcept { return basis_.rows(); }
    Index dim() const noexcept { return basis_.cols(); }

    /// P·Pᵀ
    Matrix projector() const { return basis_ * basis_.transpose(); }

    /// The leading k basis columns as a subspace of their own.
    Subspace leading(Index k) const;

private:
    Matrix basis_;
};

struct SpanBasis {
    Subspace subspace;
    Index requested_dim;  // columns of the input

    Index achieved_dim() const noexcept { return subspace.dim(); }
    bool rank_deficient() const noexcept { return achieved_dim() < requested_dim; }
};

/// Orthonormal basis for the column span of m (Gram-Schmidt with
/// re-orthogonalization, in column order). Dependent columns are dropped.
/// Throws on a zero span or when the span is all of R^d.
SpanBasis orthonormalize(const Matrix& m);

struct PcaResult {
    Subspace subspace;
    Index requested_dim;
    Vector singular_values;  // of the (centered) feature matrix, descending

    Index achieved_dim() const noexcept { return subspace.dim(); }
    bool reduced() const noexcept { return achieved_dim() < requested_dim; }
};

/// Top-n left singular directions of the d×B feature matrix z (columns are
/// samples), mean-centered across samples when `center` is set. Each basis
/// vector has its largest-magnitude entry made positive. When the numerical
/// rank is below n the dimension is reduced and `reduced()` reports it; a
/// rank of zero throws ("degenerate span").
PcaResult pca_subspace(const Matrix& z, Index n, bool center = true);

/// Deterministic completion R of P so that [P | R] is orthogonal. Standard
/// basis vectors are projected off the span built so far and the largest
/// residual is taken at each step (ties go to the lowest index).
Matrix orthogonal_complement(const Subspace& p);

/// Joint decomposition of the old/new subspace pair:
///   P_oldᵀ P_new =  U1 Γ(1) Vᵀ
///   Rᵀ P_new     = -U2 Σ(1) Vᵀ
/// with Γ(1) = diag(cos ω), Σ(1) = diag(sin ω) and ω nondecreasing in [0, π/2].
struct GeodesicDecomposition {
    Subspace p_old;
    Subspace p_new;
    Matrix complement;  // R, d×(d−n)
    Matrix u1;          // n×n orthogonal
    Matrix u2;          // (d−n)×n, orthonormal or zero columns
    Matrix v;           // n×n orthogonal
    Vector omegas;

    Index ambient_dim() const noexcept { return p_old.ambient_dim(); }
    Index dim() const noexcept { return p_old.dim(); }
    Vector gammas() const { return omegas.array().cos().matrix(); }
    Vector sigmas() const { return omegas.array().sin().matrix(); }
};

GeodesicDecomposition cs_decompose(const Subspace& p_old, const Subspace& p_new);

/// Π(ν) = [P_old | R]·[U1 Γ(ν); −U2 Σ(ν)] for ν in [0, 1].
Matrix geodesic_point(const GeodesicDecomposition& dec, double nu);

struct LambdaTriple {
    Vector lambda1;
    Vector lambda2;
    Vector lambda3;
};

/// λ1 = 1 + sin2ω/2ω, λ2 = (cos2ω − 1)/2ω, λ3 = 1 − sin2ω/2ω, with Taylor
/// expansions below kSmallAngle. These are twice the literal integrals of
/// cos², −cos·sin and sin² over ν in [0, 1].
LambdaTriple lambda_coefficients(const Vector& omegas);

struct GeodesicKernel {
    Matrix q;  // d×d, symmetric positive semi-definite
    GeodesicDecomposition source;
};

/// Q = Δ·[[diag λ1, diag λ2], [diag λ2, diag λ3]]·Δᵀ with Δ = [P_old U1 | R U2].
/// Equals 2·∫₀¹ Π(ν)Π(ν)ᵀ dν; identical subspaces give Q = 2·P·Pᵀ.
GeodesicKernel geodesic_kernel(const GeodesicDecomposition& dec);

/// Convenience: decompose and build the kernel in one call.
GeodesicKernel geodesic_kernel(const Subspace& p_old, const Subspace& p_new);

/// Composite Simpson approximation of ∫₀¹ Π(ν)Π(ν)ᵀ dν on `steps` equally
/// spaced nodes (odd, >= 3). Independent check on the closed form.
Matrix kernel_quadrature_oracle(const GeodesicDecomposition& dec, int steps);

}  // namespace geodl
