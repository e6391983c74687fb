#include "geodl/trainer.hpp"

#include "geodl/geodesic.hpp"
#include "geodl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace geodl {

std::string_view to_string(DistillMode mode) {
    switch (mode) {
        case DistillMode::None: return "none";
        case DistillMode::LwF: return "lwf";
        case DistillMode::Cosine: return "cosine";
        case DistillMode::GeoDL: return "geodl";
    }
    return "unknown";
}

std::optional<DistillMode> parse_mode(std::string_view text) {
    if (text == "none") return DistillMode::None;
    if (text == "lwf") return DistillMode::LwF;
    if (text == "cosine") return DistillMode::Cosine;
    if (text == "geodl") return DistillMode::GeoDL;
    return std::nullopt;
}

void TrainingConfig::validate() const {
    if (hidden_dim < 1) throw Error("hidden_dim must be >= 1");
    if (feature_dim < 2) throw Error("feature_dim must be >= 2");
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw Error("lr must be finite and >= 0");
    if (epochs_base < 0 || epochs_incr < 0) throw Error("epoch counts must be >= 0");
    if (batch < 1) throw Error("batch must be >= 1");
    if (subspace_n < 1 || subspace_n >= feature_dim)
        throw Error("subspace_n must satisfy 1 <= subspace_n < feature_dim");
    if (memory_per_class < 0) throw Error("memory_per_class must be >= 0");
    distill.validate();
}

double scheduled_lr(double lr, int epoch, int epochs) {
    double scale = 1.0;
    if (epoch >= epochs / 2) scale *= 0.1;
    if (epoch >= (3 * epochs) / 4) scale *= 0.1;
    return lr * scale;
}

namespace {

// Per-batch geodesic kernel; a batch too small for a 1-dimensional subspace
// falls back to the identity, which turns the loss into the plain cosine.
Matrix batch_kernel(const Matrix& z_old, const Matrix& z_new, const TrainingConfig& cfg,
                    DistillTerm& term) {
    const Index d = z_new.rows();
    const Index batch = z_new.cols();
    const Index usable = std::min<Index>({cfg.subspace_n, d - 1, batch - (cfg.pca_center ? 1 : 0)});
    if (usable >= 1 && batch >= 2) {
        try {
            const PcaResult p_old = pca_subspace(z_old, usable, cfg.pca_center);
            const PcaResult p_new = pca_subspace(z_new, usable, cfg.pca_center);
            const Index n = std::min(p_old.achieved_dim(), p_new.achieved_dim());
            term.subspace_dim = n;
            term.reduced_subspace = n < cfg.subspace_n;
            return geodesic_kernel(p_old.subspace.leading(n), p_new.subspace.leading(n)).q;
        } catch (const Error&) {
            // rank-0 batch: handled below
        }
    }
    term.degenerate_subspace = true;
    term.reduced_subspace = true;
    term.subspace_dim = 0;
    return Matrix::Identity(d, d);
}

}  // namespace

DistillTerm distillation_term(DistillMode mode, const ModelState& old, const ModelState& model,
                              const Matrix& z_old, const Matrix& z_new,
                              const TrainingConfig& cfg) {
    const Index batch = z_new.cols();
    const double inv_batch = 1.0 / static_cast<double>(batch);
    DistillTerm term;
    term.dz = Matrix::Zero(z_new.rows(), batch);

    switch (mode) {
        case DistillMode::None:
            break;
        case DistillMode::GeoDL: {
            const Matrix q = batch_kernel(z_old, z_new, cfg, term);
            for (Index j = 0; j < batch; ++j) {
                const FeaturePair pair{z_old.col(j), z_new.col(j)};
                term.loss += geodl_loss(pair, q, cfg.distill.epsilon);
                term.dz.col(j) = geodl_loss_grad(pair, q, cfg.distill).grad * inv_batch;
            }
            break;
        }
        case DistillMode::Cosine: {
            for (Index j = 0; j < batch; ++j) {
                const FeaturePair pair{z_old.col(j), z_new.col(j)};
                term.loss += cosine_distill_loss(pair, cfg.distill.epsilon);
                term.dz.col(j) = cosine_distill_grad(pair, cfg.distill.epsilon).grad * inv_batch;
            }
            break;
        }
        case DistillMode::LwF: {
            const Index known = old.num_classes();
            if (known < 2 || model.num_classes() < known)
                throw Error("lwf distillation needs at least 2 previously seen classes");
            Matrix dlogits(known, batch);
            for (Index j = 0; j < batch; ++j) {
                const Vector s_old = cosine_logits(z_old.col(j), old.prototypes);
                const Vector s_new = cosine_logits(z_new.col(j), model.prototypes.leftCols(known));
                term.loss += lwf_loss(s_old, s_new, cfg.distill.tau);
                dlogits.col(j) = lwf_loss_grad(s_old, s_new, cfg.distill.tau) * inv_batch;
            }
            ModelGradient g;
            g.prototypes = Matrix::Zero(model.prototypes.rows(), model.prototypes.cols());
            term.dz = cosine_logits_backward(z_new, model.prototypes, dlogits, g);
            term.dprototypes = std::move(g.prototypes);
            break;
        }
    }
    term.loss *= inv_batch;
    return term;
}

StepStats train_step(ModelState& model, const ModelState* old, const Matrix& x,
                     const std::vector<int>& labels, DistillMode mode, double beta_ad, double lr,
                     const TrainingConfig& cfg, long step_index) {
    const Index batch = x.cols();
    if (batch == 0 || static_cast<Index>(labels.size()) != batch)
        throw Error("train_step: batch/label size mismatch");
    const double inv_batch = 1.0 / static_cast<double>(batch);
    const Index classes = model.num_classes();

    const ForwardCache cache = forward(model.encoder, x);
    ModelGradient grad = ModelGradient::zeros_like(model);
    StepStats stats;

    Matrix dlogits(classes, batch);
    for (Index j = 0; j < batch; ++j) {
        const int y = labels[static_cast<std::size_t>(j)];
        if (y < 0 || y >= classes) throw Error("train_step: label " + std::to_string(y) + " has no prototype");
        const Vector s = cosine_logits(cache.z.col(j), model.prototypes);
        const double m = s.maxCoeff();
        const double lse = m + std::log((s.array() - m).exp().sum());
        stats.ce_loss -= s(y) - lse;
        Vector p = (s.array() - lse).exp().matrix();
        p(y) -= 1.0;
        dlogits.col(j) = p * inv_batch;
    }
    stats.ce_loss *= inv_batch;
    Matrix dz = cosine_logits_backward(cache.z, model.prototypes, dlogits, grad);

    if (old != nullptr && mode != DistillMode::None) {
        const Matrix z_old = old->encoder.encode_batch(x);
        const DistillTerm term = distillation_term(mode, *old, model, z_old, cache.z, cfg);
        stats.distill_loss = term.loss;
        stats.degenerate_subspace = term.degenerate_subspace;
        stats.reduced_subspace = term.reduced_subspace;
        if (beta_ad != 0.0) {
            dz += beta_ad * term.dz;
            if (term.dprototypes.size() != 0) grad.prototypes += beta_ad * term.dprototypes;
        }
    }
    stats.total_loss = stats.ce_loss + beta_ad * stats.distill_loss;
    if (!std::isfinite(stats.total_loss))
        throw Error("non-finite loss at step " + std::to_string(step_index));

    encoder_backward(model.encoder, x, cache, dz, grad);
    apply_gradient(model, grad, lr);
    return stats;
}

void update_memory(ExemplarMemory& memory, const ModelState& model, const TaskData& task) {
    for (int label : task.labels) {
        const Matrix inputs = task.train.samples_of(label);
        const Index k = std::min<Index>(memory.budget_per_class(), inputs.cols());
        const Matrix features = model.encoder.encode_batch(inputs);
        const std::vector<Index> chosen = select_exemplars(features, k);
        Matrix kept(inputs.rows(), k);
        for (Index i = 0; i < k; ++i) kept.col(i) = inputs.col(chosen[static_cast<std::size_t>(i)]);
        memory.store(label, kept);
    }
}

namespace {

struct EpochLoopResult {
    long steps = 0;
    long degenerate = 0;
    long reduced = 0;
    double first_distill = 0.0;
};

EpochLoopResult run_epochs(ModelState& model, const ModelState* old, const LabeledSet& data,
                           int epochs, DistillMode mode, double beta_ad,
                           const TrainingConfig& cfg, Rng& rng) {
    EpochLoopResult out;
    if (data.empty()) return out;
    std::vector<Index> perm(static_cast<std::size_t>(data.size()));
    std::iota(perm.begin(), perm.end(), Index{0});
    Matrix xb;
    std::vector<int> yb;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        const double lr = scheduled_lr(cfg.lr, epoch, epochs);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (Index start = 0; start < data.size(); start += cfg.batch) {
            const Index len = std::min<Index>(cfg.batch, data.size() - start);
            xb.resize(data.x.rows(), len);
            yb.resize(static_cast<std::size_t>(len));
            for (Index k = 0; k < len; ++k) {
                const Index src = perm[static_cast<std::size_t>(start + k)];
                xb.col(k) = data.x.col(src);
                yb[static_cast<std::size_t>(k)] = data.labels[static_cast<std::size_t>(src)];
            }
            const StepStats s = train_step(model, old, xb, yb, mode, beta_ad, lr, cfg, out.steps);
            if (out.steps == 0) out.first_distill = s.distill_loss;
            if (s.degenerate_subspace) ++out.degenerate;
            if (s.reduced_subspace) ++out.reduced;
            ++out.steps;
        }
    }
    return out;
}

}  // namespace

BaseResult train_base(const RealizedStream& stream, const TrainingConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng init_rng(derive_seed(seed, {1}));
    ModelState model = init_model(stream.spec.input_dim, cfg.hidden_dim, cfg.feature_dim,
                                  stream.spec.base_classes, init_rng);
    model.encoder.activation = cfg.activation;

    Rng shuffle_rng(derive_seed(seed, {2}));
    const TaskData& base = stream.tasks.at(0);
    run_epochs(model, nullptr, base.train, cfg.epochs_base, DistillMode::None, 0.0, cfg, shuffle_rng);

    ExemplarMemory memory(cfg.memory_per_class);
    update_memory(memory, model, base);
    return BaseResult{std::move(model), std::move(memory)};
}

IncrementalResult incremental_step(const ModelState& old, const TaskData& task,
                                   const ExemplarMemory& memory, const TrainingConfig& cfg,
                                   DistillMode mode, std::uint64_t seed) {
    cfg.validate();
    if (task.labels.empty()) throw Error("incremental_step: task introduces no classes");

    IncrementalResult result;
    result.model = old;
    ModelState& model = result.model;

    const Index known = old.num_classes();
    const Index added = static_cast<Index>(task.labels.size());
    model.prototypes.conservativeResize(Eigen::NoChange, known + added);
    for (Index k = 0; k < added; ++k) {
        const int label = task.labels[static_cast<std::size_t>(k)];
        if (label != known + k)
            throw Error("incremental_step: class " + std::to_string(label) +
                        " is not the next unseen label");
        const Matrix inputs = task.train.samples_of(label);
        if (inputs.cols() == 0) throw Error("incremental_step: class without training samples");
        const Matrix z = model.encoder.encode_batch(inputs.leftCols(std::min<Index>(cfg.batch, inputs.cols())));
        Vector mean = z.rowwise().mean();
        const double nrm = mean.norm();
        model.prototypes.col(known + k) = nrm > 0.0 ? Vector(mean / nrm) : Vector::Unit(mean.size(), 0);
        model.seen_classes.push_back(label);
    }

    const double beta_ad = adaptive_beta(cfg.distill.beta, static_cast<long>(added), static_cast<long>(known));
    const LabeledSet data = concat(task.train, memory.as_labeled_set());
    Rng rng(seed);
    const EpochLoopResult loop = run_epochs(model, &old, data, cfg.epochs_incr, mode, beta_ad, cfg, rng);
    result.first_batch_distill_loss = loop.first_distill;
    result.steps = loop.steps;
    result.degenerate_batches = loop.degenerate;
    result.reduced_batches = loop.reduced;
    return result;
}

ExperimentReport run_experiment(const ExperimentSetup& setup) {
    setup.training.validate();
    TaskStreamSpec spec = setup.stream;
    spec.seed = derive_seed(setup.seed, {0});
    const RealizedStream stream = make_task_stream(spec);

    BaseResult base = train_base(stream, setup.training, setup.seed);
    const double base_initial = evaluate(base.model, stream.tasks[0].test);

    ModelState model = std::move(base.model);
    ExemplarMemory memory = std::move(base.memory);
    std::vector<double> accuracies;
    for (int t = 1; t <= spec.tasks; ++t) {
        IncrementalResult step =
            incremental_step(model, stream.tasks[static_cast<std::size_t>(t)], memory, setup.training,
                             setup.mode, derive_seed(setup.seed, {3, static_cast<std::uint64_t>(t)}));
        model = std::move(step.model);
        accuracies.push_back(evaluate(model, stream.test_up_to(t)));
        update_memory(memory, model, stream.tasks[static_cast<std::size_t>(t)]);
    }
    const double base_final = evaluate(model, stream.tasks[0].test);

    ExperimentReport report = compute_metrics(accuracies, base_initial, base_final);
    report.seed = setup.seed;
    report.config_hash = setup.config_hash;
    return report;
}

}  // namespace geodl
