#pragma once

#include "geodl/geodesic.hpp"
#include "geodl/linalg.hpp"

namespace geodl {

/// Encodings of one input by the old (frozen) and the new (trained) model.
struct FeaturePair {
    Vector z_old;
    Vector z_new;
};

struct DistillConfig {
    double beta = 6.0;      // base weight of the distillation term
    double tau = 2.0;       // softmax temperature of the prediction-level loss
    double epsilon = 1e-12; // guard on normalized ratios
    bool q_stop_gradient = true;

    void validate() const;
};

// Geodesic distillation loss
//
//   1 − z_newᵀ Q z_old / (√(z_newᵀ Q z_new)·√(z_oldᵀ Q z_old) + ε)
//
// i.e. the cosine of the two encodings in the inner product defined by the
// geodesic kernel. Invariant to positive rescaling of Q.
double geodl_loss(const FeaturePair& pair, const Matrix& q, double epsilon = 1e-12);
double geodl_loss(const FeaturePair& pair, const GeodesicKernel& kernel, double epsilon = 1e-12);

struct LossGradient {
    Vector grad;      // ∂loss/∂z_new
    bool degenerate;  // a Q-norm vanished; grad is zero
};

/// Gradient of geodl_loss with respect to z_new, Q held constant.
/// Throws if cfg.q_stop_gradient is false: differentiating through the
/// decomposition that produced Q is not supported.
LossGradient geodl_loss_grad(const FeaturePair& pair, const Matrix& q,
                             const DistillConfig& cfg = {});
LossGradient geodl_loss_grad(const FeaturePair& pair, const GeodesicKernel& kernel,
                             const DistillConfig& cfg = {});

/// 1 − cos(z_new, z_old), ε-guarded.
double cosine_distill_loss(const FeaturePair& pair, double epsilon = 1e-12);
LossGradient cosine_distill_grad(const FeaturePair& pair, double epsilon = 1e-12);

/// Softmax of logits / tau with max subtraction.
Vector tempered_softmax(const Vector& logits, double tau);

/// Prediction distillation: −Σ_k p_old(k)·log p_new(k) with tempered softmax.
double lwf_loss(const Vector& logits_old, const Vector& logits_new, double tau);

/// ∂lwf_loss/∂logits_new = (p_new − p_old) / τ.
Vector lwf_loss_grad(const Vector& logits_old, const Vector& logits_new, double tau);

/// β·√(n_new/n_old), counts being numbers of classes.
double adaptive_beta(double beta, long n_new, long n_old);

}  // namespace geodl
