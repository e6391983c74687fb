#pragma once

#include "geodl/linalg.hpp"
#include "geodl/rng.hpp"

#include <cstdint>
#include <vector>

namespace geodl {

enum class Activation { Tanh, Identity };

/// Two-layer encoder z = W2·act(W1·x + b1) + b2.
struct Encoder {
    Matrix w1;  // H×D
    Vector b1;  // H
    Matrix w2;  // d×H
    Vector b2;  // d
    Activation activation = Activation::Tanh;

    Index input_dim() const noexcept { return w1.cols(); }
    Index hidden_dim() const noexcept { return w1.rows(); }
    Index feature_dim() const noexcept { return w2.rows(); }

    Vector encode(const Vector& x) const;
    /// Columns of x are samples.
    Matrix encode_batch(const Matrix& x) const;
};

/// Encoder parameters θ plus one prototype column per seen class.
struct ModelState {
    Encoder encoder;
    Matrix prototypes;  // d×C
    std::vector<int> seen_classes;  // label of each prototype column

    Index num_classes() const noexcept { return prototypes.cols(); }
    bool all_finite() const;
};

/// Seeded initialization: W ~ N(0, 1/fan_in), zero biases, unit-norm Gaussian
/// prototypes for labels [0, num_classes).
ModelState init_model(int input_dim, int hidden_dim, int feature_dim, int num_classes, Rng& rng);

/// cos(φ_i, z) for every prototype column; ε-guarded norms.
Vector cosine_logits(const Vector& z, const Matrix& prototypes);

/// exp(cos(φ_i, z)) / Σ_j exp(cos(φ_j, z)).
Vector class_probabilities(const Vector& z, const Matrix& prototypes);

/// Index of the most likely class (lowest index on ties).
Index predict(const Vector& z, const Matrix& prototypes);

/// FNV-1a over the raw bytes of every parameter, for immutability checks.
std::uint64_t parameter_hash(const ModelState& model);

// ---------------------------------------------------------------------------
// Backpropagation

struct ForwardCache {
    Matrix pre;     // W1·X + b1
    Matrix hidden;  // act(pre)
    Matrix z;       // encoder output
};

ForwardCache forward(const Encoder& enc, const Matrix& x);

/// Same shapes as the parameters of a ModelState.
struct ModelGradient {
    Matrix w1;
    Vector b1;
    Matrix w2;
    Vector b2;
    Matrix prototypes;

    static ModelGradient zeros_like(const ModelState& model);
};

/// Accumulates into grad the backward pass of logits s_i = cos(φ_i, z_j)
/// for i < dlogits.rows(), given ∂L/∂s (classes × batch). Returns ∂L/∂Z.
Matrix cosine_logits_backward(const Matrix& z, const Matrix& prototypes, const Matrix& dlogits,
                              ModelGradient& grad);

/// Accumulates the encoder gradient given ∂L/∂Z.
void encoder_backward(const Encoder& enc, const Matrix& x, const ForwardCache& cache,
                      const Matrix& dz, ModelGradient& grad);

/// Plain gradient-descent update: params −= lr·grad.
void apply_gradient(ModelState& model, const ModelGradient& grad, double lr);

}  // namespace geodl
