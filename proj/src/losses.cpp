#include "geodl/losses.hpp"

#include <cmath>
#include <string>

namespace geodl {

namespace {

void require_finite(const FeaturePair& pair, const char* who) {
    if (!pair.z_old.allFinite() || !pair.z_new.allFinite())
        throw Error(std::string(who) + ": non-finite features");
    if (pair.z_old.size() != pair.z_new.size())
        throw Error(std::string(who) + ": feature dimension mismatch");
}

void require_kernel_shape(const FeaturePair& pair, const Matrix& q, const char* who) {
    if (q.rows() != q.cols() || q.rows() != pair.z_new.size())
        throw Error(std::string(who) + ": kernel is " + std::to_string(q.rows()) + "x" +
                    std::to_string(q.cols()) + " but features have dimension " +
                    std::to_string(pair.z_new.size()));
}

// zᵀQz can dip below zero by rounding for a PSD Q.
double q_norm(const Vector& z, const Matrix& q) {
    return std::sqrt(std::max(0.0, z.dot(q * z)));
}

}  // namespace

void DistillConfig::validate() const {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw Error("beta must be finite and >= 0");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw Error("tau must be finite and > 0");
    if (!(epsilon > 0.0)) throw Error("epsilon must be > 0");
}

double geodl_loss(const FeaturePair& pair, const Matrix& q, double epsilon) {
    require_finite(pair, "geodl_loss");
    require_kernel_shape(pair, q, "geodl_loss");
    const double inner = pair.z_new.dot(q * pair.z_old);
    const double a = q_norm(pair.z_new, q);
    const double b = q_norm(pair.z_old, q);
    return 1.0 - inner / (a * b + epsilon);
}

double geodl_loss(const FeaturePair& pair, const GeodesicKernel& kernel, double epsilon) {
    return geodl_loss(pair, kernel.q, epsilon);
}

LossGradient geodl_loss_grad(const FeaturePair& pair, const Matrix& q, const DistillConfig& cfg) {
    if (!cfg.q_stop_gradient)
        throw Error("geodl_loss_grad: gradients through the kernel construction are not supported; "
                    "set q_stop_gradient");
    require_finite(pair, "geodl_loss_grad");
    require_kernel_shape(pair, q, "geodl_loss_grad");

    const Vector q_old = q * pair.z_old;
    const Vector q_new = q * pair.z_new;
    const double a = std::sqrt(std::max(0.0, pair.z_new.dot(q_new)));
    const double b = std::sqrt(std::max(0.0, pair.z_old.dot(q_old)));
    if (a == 0.0 || b == 0.0 || a * b <= cfg.epsilon)
        return {Vector::Zero(pair.z_new.size()), true};

    const double inner = pair.z_new.dot(q_old);
    const double denom = a * b + cfg.epsilon;
    Vector grad = -(q_old / denom - (inner * b / (a * denom * denom)) * q_new);
    return {std::move(grad), false};
}

LossGradient geodl_loss_grad(const FeaturePair& pair, const GeodesicKernel& kernel,
                             const DistillConfig& cfg) {
    return geodl_loss_grad(pair, kernel.q, cfg);
}

double cosine_distill_loss(const FeaturePair& pair, double epsilon) {
    require_finite(pair, "cosine_distill_loss");
    return 1.0 - pair.z_new.dot(pair.z_old) / (pair.z_new.norm() * pair.z_old.norm() + epsilon);
}

LossGradient cosine_distill_grad(const FeaturePair& pair, double epsilon) {
    require_finite(pair, "cosine_distill_grad");
    const double a = pair.z_new.norm();
    const double b = pair.z_old.norm();
    if (a == 0.0 || b == 0.0 || a * b <= epsilon) return {Vector::Zero(pair.z_new.size()), true};
    const double inner = pair.z_new.dot(pair.z_old);
    const double denom = a * b + epsilon;
    Vector grad = -(pair.z_old / denom - (inner * b / (a * denom * denom)) * pair.z_new);
    return {std::move(grad), false};
}

Vector tempered_softmax(const Vector& logits, double tau) {
    const Vector scaled = logits / tau;
    const Vector e = (scaled.array() - scaled.maxCoeff()).exp().matrix();
    return e / e.sum();
}

namespace {

Vector tempered_log_softmax(const Vector& logits, double tau) {
    const Vector scaled = logits / tau;
    const double m = scaled.maxCoeff();
    const double lse = m + std::log((scaled.array() - m).exp().sum());
    return (scaled.array() - lse).matrix();
}

void check_logits(const Vector& logits_old, const Vector& logits_new, double tau) {
    if (logits_old.size() != logits_new.size())
        throw Error("lwf_loss: logit vectors differ in length");
    if (logits_old.size() < 2) throw Error("lwf_loss: need at least 2 classes");
    if (!(tau > 0.0)) throw Error("lwf_loss: tau must be > 0");
    if (!logits_old.allFinite() || !logits_new.allFinite())
        throw Error("lwf_loss: non-finite logits");
}

}  // namespace

double lwf_loss(const Vector& logits_old, const Vector& logits_new, double tau) {
    check_logits(logits_old, logits_new, tau);
    const Vector p_old = tempered_softmax(logits_old, tau);
    return -p_old.dot(tempered_log_softmax(logits_new, tau));
}

Vector lwf_loss_grad(const Vector& logits_old, const Vector& logits_new, double tau) {
    check_logits(logits_old, logits_new, tau);
    return (tempered_softmax(logits_new, tau) - tempered_softmax(logits_old, tau)) / tau;
}

double adaptive_beta(double beta, long n_new, long n_old) {
    if (n_new < 1 || n_old < 1)
        throw Error("adaptive_beta: class counts must be >= 1 (n_new = " + std::to_string(n_new) +
                    ", n_old = " + std::to_string(n_old) + ")");
    return beta * std::sqrt(static_cast<double>(n_new) / static_cast<double>(n_old));
}

}  // namespace geodl
