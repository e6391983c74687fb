#pragma once

// Class-incremental training loop: base training on D_0, then one
// incremental step per task on D_t ∪ M with an optional distillation term
// tying the new encoder to the frozen previous one.

#include "geodl/exemplar_memory.hpp"
#include "geodl/losses.hpp"
#include "geodl/metrics.hpp"
#include "geodl/model.hpp"
#include "geodl/task_stream.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace geodl {

enum class DistillMode { None, LwF, Cosine, GeoDL };

std::string_view to_string(DistillMode mode);
std::optional<DistillMode> parse_mode(std::string_view text);

struct TrainingConfig {
    int hidden_dim = 32;
    int feature_dim = 8;
    double lr = 0.05;
    int epochs_base = 60;
    int epochs_incr = 40;
    int batch = 32;
    int subspace_n = 6;
    int memory_per_class = 10;
    bool pca_center = true;
    Activation activation = Activation::Tanh;
    DistillConfig distill;

    void validate() const;
};

/// lr scaled by 0.1 from epoch ⌊E/2⌋ on and by another 0.1 from ⌊3E/4⌋ on.
double scheduled_lr(double lr, int epoch, int epochs);

struct DistillTerm {
    double loss = 0.0;   // mean over the batch
    Matrix dz;           // ∂(mean loss)/∂Z_new, d×B
    Matrix dprototypes;  // ∂(mean loss)/∂φ, LwF only (empty otherwise)
    bool degenerate_subspace = false;  // batch rank too low, fell back to Q ∝ I
    bool reduced_subspace = false;     // subspace dimension lowered to batch rank
    Index subspace_dim = 0;
};

/// Distillation term of one batch with the new model's features z_new and the
/// frozen model's z_old (columns are samples). LwF compares the predictions
/// over the classes known to `old`.
DistillTerm distillation_term(DistillMode mode, const ModelState& old, const ModelState& model,
                              const Matrix& z_old, const Matrix& z_new,
                              const TrainingConfig& cfg);

struct StepStats {
    double ce_loss = 0.0;
    double distill_loss = 0.0;
    double total_loss = 0.0;
    bool degenerate_subspace = false;
    bool reduced_subspace = false;
};

/// One gradient-descent step on the batch (columns of x) minimizing
/// mean CE + beta_ad · mean distillation. `old` may be null for CE only.
StepStats train_step(ModelState& model, const ModelState* old, const Matrix& x,
                     const std::vector<int>& labels, DistillMode mode, double beta_ad, double lr,
                     const TrainingConfig& cfg, long step_index = 0);

/// Selects and stores exemplars for each class of `task` using the model's
/// current encodings of its training samples.
void update_memory(ExemplarMemory& memory, const ModelState& model, const TaskData& task);

struct BaseResult {
    ModelState model;
    ExemplarMemory memory;
};

/// Seeded random initialization, CE training on D_0, base exemplar selection.
BaseResult train_base(const RealizedStream& stream, const TrainingConfig& cfg, std::uint64_t seed);

struct IncrementalResult {
    ModelState model;
    double first_batch_distill_loss = 0.0;  // before any update
    long steps = 0;
    long degenerate_batches = 0;
    long reduced_batches = 0;
};

/// Trains Φ_t from a copy of Φ_{t-1} on D_t ∪ M. New-class prototypes start at
/// the normalized mean encoding of the class's first `batch` training samples.
/// `old` is never modified.
IncrementalResult incremental_step(const ModelState& old, const TaskData& task,
                                   const ExemplarMemory& memory, const TrainingConfig& cfg,
                                   DistillMode mode, std::uint64_t seed);

struct ExperimentSetup {
    TaskStreamSpec stream;
    TrainingConfig training;
    DistillMode mode = DistillMode::GeoDL;
    std::uint64_t seed = 0;
    std::string config_hash;
};

/// Full pipeline. Stream, initialization and shuffling derive from `seed`
/// only, so every mode sees the same data and starting point.
ExperimentReport run_experiment(const ExperimentSetup& setup);

}  // namespace geodl
