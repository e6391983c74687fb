#include "geodl/model.hpp"

#include <cmath>
#include <cstring>

namespace geodl {

namespace {

constexpr double kNormFloor = 1e-12;

double guarded_norm(const Eigen::Ref<const Vector>& v) {
    return std::max(v.norm(), kNormFloor);
}

void hash_bytes(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
}

template <typename M>
void hash_matrix(std::uint64_t& h, const M& m) {
    const std::int64_t shape[2] = {static_cast<std::int64_t>(m.rows()),
                                   static_cast<std::int64_t>(m.cols())};
    hash_bytes(h, shape, sizeof shape);
    hash_bytes(h, m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
}

}  // namespace

Vector Encoder::encode(const Vector& x) const {
    Vector pre = w1 * x + b1;
    if (activation == Activation::Tanh) pre = pre.array().tanh().matrix();
    return w2 * pre + b2;
}

Matrix Encoder::encode_batch(const Matrix& x) const {
    return forward(*this, x).z;
}

bool ModelState::all_finite() const {
    return encoder.w1.allFinite() && encoder.b1.allFinite() && encoder.w2.allFinite() &&
           encoder.b2.allFinite() && prototypes.allFinite();
}

ModelState init_model(int input_dim, int hidden_dim, int feature_dim, int num_classes, Rng& rng) {
    if (input_dim < 1 || hidden_dim < 1 || feature_dim < 1 || num_classes < 1)
        throw Error("init_model: all dimensions must be >= 1");
    std::normal_distribution<double> normal(0.0, 1.0);
    auto gaussian = [&](Index rows, Index cols, double scale) {
        Matrix m(rows, cols);
        for (Index c = 0; c < cols; ++c)
            for (Index r = 0; r < rows; ++r) m(r, c) = scale * normal(rng);
        return m;
    };

    ModelState model;
    model.encoder.w1 = gaussian(hidden_dim, input_dim, 1.0 / std::sqrt(static_cast<double>(input_dim)));
    model.encoder.b1 = Vector::Zero(hidden_dim);
    model.encoder.w2 = gaussian(feature_dim, hidden_dim, 1.0 / std::sqrt(static_cast<double>(hidden_dim)));
    model.encoder.b2 = Vector::Zero(feature_dim);
    model.prototypes = gaussian(feature_dim, num_classes, 1.0);
    for (Index c = 0; c < num_classes; ++c) model.prototypes.col(c) /= guarded_norm(model.prototypes.col(c));
    for (int c = 0; c < num_classes; ++c) model.seen_classes.push_back(c);
    return model;
}

Vector cosine_logits(const Vector& z, const Matrix& prototypes) {
    if (prototypes.cols() == 0) throw Error("cosine_logits: no prototypes");
    if (prototypes.rows() != z.size()) throw Error("cosine_logits: feature dimension mismatch");
    const Vector zn = z / guarded_norm(z);
    Vector s(prototypes.cols());
    for (Index i = 0; i < prototypes.cols(); ++i)
        s(i) = zn.dot(prototypes.col(i)) / guarded_norm(prototypes.col(i));
    return s;
}

Vector class_probabilities(const Vector& z, const Matrix& prototypes) {
    const Vector s = cosine_logits(z, prototypes);
    const Vector e = (s.array() - s.maxCoeff()).exp().matrix();
    return e / e.sum();
}

Index predict(const Vector& z, const Matrix& prototypes) {
    const Vector s = cosine_logits(z, prototypes);
    Index best = 0;
    for (Index i = 1; i < s.size(); ++i)
        if (s(i) > s(best)) best = i;
    return best;
}

std::uint64_t parameter_hash(const ModelState& model) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    hash_matrix(h, model.encoder.w1);
    hash_matrix(h, model.encoder.b1);
    hash_matrix(h, model.encoder.w2);
    hash_matrix(h, model.encoder.b2);
    hash_matrix(h, model.prototypes);
    const int act = static_cast<int>(model.encoder.activation);
    hash_bytes(h, &act, sizeof act);
    hash_bytes(h, model.seen_classes.data(), model.seen_classes.size() * sizeof(int));
    return h;
}

ForwardCache forward(const Encoder& enc, const Matrix& x) {
    ForwardCache cache;
    cache.pre = enc.w1 * x;
    cache.pre.colwise() += enc.b1;
    cache.hidden = enc.activation == Activation::Tanh ? Matrix(cache.pre.array().tanh()) : cache.pre;
    cache.z = enc.w2 * cache.hidden;
    cache.z.colwise() += enc.b2;
    return cache;
}

ModelGradient ModelGradient::zeros_like(const ModelState& model) {
    const Encoder& e = model.encoder;
    return ModelGradient{Matrix::Zero(e.w1.rows(), e.w1.cols()), Vector::Zero(e.b1.size()),
                         Matrix::Zero(e.w2.rows(), e.w2.cols()), Vector::Zero(e.b2.size()),
                         Matrix::Zero(model.prototypes.rows(), model.prototypes.cols())};
}

Matrix cosine_logits_backward(const Matrix& z, const Matrix& prototypes, const Matrix& dlogits,
                              ModelGradient& grad) {
    const Index classes = dlogits.rows();
    Matrix dz = Matrix::Zero(z.rows(), z.cols());

    Matrix phi_n(prototypes.rows(), classes);
    Vector phi_norm(classes);
    for (Index i = 0; i < classes; ++i) {
        phi_norm(i) = guarded_norm(prototypes.col(i));
        phi_n.col(i) = prototypes.col(i) / phi_norm(i);
    }

    for (Index j = 0; j < z.cols(); ++j) {
        const double z_norm = guarded_norm(z.col(j));
        const Vector zn = z.col(j) / z_norm;
        for (Index i = 0; i < classes; ++i) {
            const double g = dlogits(i, j);
            if (g == 0.0) continue;
            const double s = zn.dot(phi_n.col(i));
            dz.col(j) += g * (phi_n.col(i) - s * zn) / z_norm;
            grad.prototypes.col(i) += g * (zn - s * phi_n.col(i)) / phi_norm(i);
        }
    }
    return dz;
}

void encoder_backward(const Encoder& enc, const Matrix& x, const ForwardCache& cache,
                      const Matrix& dz, ModelGradient& grad) {
    grad.w2.noalias() += dz * cache.hidden.transpose();
    grad.b2 += dz.rowwise().sum();
    Matrix dpre = enc.w2.transpose() * dz;
    if (enc.activation == Activation::Tanh)
        dpre.array() *= 1.0 - cache.hidden.array().square();
    grad.w1.noalias() += dpre * x.transpose();
    grad.b1 += dpre.rowwise().sum();
}

void apply_gradient(ModelState& model, const ModelGradient& grad, double lr) {
    model.encoder.w1 -= lr * grad.w1;
    model.encoder.b1 -= lr * grad.b1;
    model.encoder.w2 -= lr * grad.w2;
    model.encoder.b2 -= lr * grad.b2;
    model.prototypes -= lr * grad.prototypes;
}

}  // namespace geodl
