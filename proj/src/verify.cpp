#include "geodl/verify.hpp"

#include "geodl/losses.hpp"
#include "geodl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace geodl {

std::optional<Suite> parse_suite(std::string_view text) {
    if (text == "geometry") return Suite::Geometry;
    if (text == "losses") return Suite::Losses;
    if (text == "sim") return Suite::Sim;
    if (text == "all") return Suite::All;
    return std::nullopt;
}

Subspace random_subspace(Index d, Index n, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(d, n);
    for (Index c = 0; c < n; ++c)
        for (Index r = 0; r < d; ++r) m(r, c) = normal(rng);
    return orthonormalize(m).subspace;
}

Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
    Vector g(x.size());
    Vector probe = x;
    for (Index i = 0; i < x.size(); ++i) {
        probe(i) = x(i) + h;
        const double up = f(probe);
        probe(i) = x(i) - h;
        const double down = f(probe);
        probe(i) = x(i);
        g(i) = (up - down) / (2.0 * h);
    }
    return g;
}

namespace {

CheckResult upper(std::string name, double measured, double tol) {
    return {std::move(name), measured < tol, measured, tol};
}

CheckResult lower(std::string name, double measured, double tol) {
    return {std::move(name), measured >= tol, measured, tol};
}

struct PairCase {
    Index d;
    Index n;
};

std::vector<PairCase> pair_grid() {
    std::vector<PairCase> grid;
    for (Index d : {8, 16, 32})
        for (Index n : {Index{2}, Index{4}, d / 2 - 1}) grid.push_back({d, n});
    return grid;
}

double min_eigenvalue(const Matrix& q) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(q, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

std::vector<CheckResult> verify_geometry() {
    Rng rng(20210611);
    const auto grid = pair_grid();
    double worst_oracle = 0.0, worst_sym = 0.0, min_eig = 1.0, worst_identical = 0.0;
    double worst_endpoint = 0.0, worst_ortho = 0.0, worst_dec = 0.0, worst_swap_angles = 0.0,
           worst_swap_eigs = 0.0;

    for (int k = 0; k < 100; ++k) {
        const PairCase pc = grid[static_cast<std::size_t>(k) % grid.size()];
        const Subspace p_old = random_subspace(pc.d, pc.n, rng);
        const Subspace p_new = random_subspace(pc.d, pc.n, rng);
        const GeodesicDecomposition dec = cs_decompose(p_old, p_new);
        const GeodesicKernel ker = geodesic_kernel(dec);
        const Matrix quad = kernel_quadrature_oracle(dec, 2001);
        worst_oracle = std::max(worst_oracle, (ker.q - 2.0 * quad).norm() / ker.q.norm());
        worst_sym = std::max(worst_sym, (ker.q - ker.q.transpose()).cwiseAbs().maxCoeff());
        min_eig = std::min(min_eig, min_eigenvalue(ker.q));

        const Matrix same = geodesic_kernel(p_old, p_old).q;
        worst_identical = std::max(worst_identical, (same - 2.0 * p_old.projector()).norm());

        const Matrix pi0 = geodesic_point(dec, 0.0);
        const Matrix pi1 = geodesic_point(dec, 1.0);
        worst_endpoint = std::max({worst_endpoint, (pi0 * pi0.transpose() - p_old.projector()).norm(),
                                   (pi1 * pi1.transpose() - p_new.projector()).norm()});
        for (double nu : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const Matrix pi = geodesic_point(dec, nu);
            worst_ortho = std::max(worst_ortho,
                                   (pi.transpose() * pi - Matrix::Identity(pc.n, pc.n)).cwiseAbs().maxCoeff());
        }

        Matrix frame(pc.d, pc.d);
        frame << p_old.basis(), dec.complement;
        const Matrix a = p_old.basis().transpose() * p_new.basis();
        const Matrix b = dec.complement.transpose() * p_new.basis();
        worst_dec = std::max({worst_dec,
                              (frame.transpose() * frame - Matrix::Identity(pc.d, pc.d)).cwiseAbs().maxCoeff(),
                              (a - dec.u1 * dec.gammas().asDiagonal() * dec.v.transpose()).cwiseAbs().maxCoeff(),
                              (b + dec.u2 * dec.sigmas().asDiagonal() * dec.v.transpose()).cwiseAbs().maxCoeff()});

        const GeodesicDecomposition swapped = cs_decompose(p_new, p_old);
        worst_swap_angles = std::max(worst_swap_angles, (swapped.omegas - dec.omegas).cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Matrix> e1(ker.q, Eigen::EigenvaluesOnly);
        Eigen::SelfAdjointEigenSolver<Matrix> e2(geodesic_kernel(swapped).q, Eigen::EigenvaluesOnly);
        worst_swap_eigs = std::max(worst_swap_eigs, (e1.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff());
    }

    // jump across the small-angle threshold
    Vector around(2);
    around << std::nextafter(kSmallAngle, 0.0), kSmallAngle;
    const LambdaTriple lam = lambda_coefficients(around);
    const double jump = std::max({std::abs(lam.lambda1(0) - lam.lambda1(1)), std::abs(lam.lambda2(0) - lam.lambda2(1)),
                                  std::abs(lam.lambda3(0) - lam.lambda3(1))});

    // orthogonal lines in R²
    const Subspace e1(Matrix(Vector::Unit(2, 0)));
    const Subspace e2(Matrix(Vector::Unit(2, 1)));
    Matrix expected(2, 2);
    expected << 1.0, -2.0 / std::numbers::pi, -2.0 / std::numbers::pi, 1.0;
    const double micro = (geodesic_kernel(e1, e2).q - expected).cwiseAbs().maxCoeff();

    return {
        upper("closed-form Q = 2x quadrature (max relative Frobenius error)", worst_oracle, 1e-6),
        upper("Q symmetric (max |Q - Q^T|)", worst_sym, 1e-10),
        lower("Q positive semi-definite (min eigenvalue)", min_eig, -1e-8),
        upper("identical subspaces give Q = 2PP^T (max Frobenius error)", worst_identical, 1e-8),
        upper("geodesic endpoints span P_old and P_new (max Frobenius error)", worst_endpoint, 1e-6),
        upper("Pi(nu) column-orthonormal (max entry error)", worst_ortho, 1e-8),
        upper("decomposition invariants (max entry error)", worst_dec, 1e-8),
        upper("role swap keeps principal angles (max error)", worst_swap_angles, 1e-8),
        upper("role swap keeps kernel eigenvalues (max error)", worst_swap_eigs, 1e-6),
        upper("lambda continuity across small-angle threshold", jump, 1e-8),
        upper("orthogonal lines kernel [[1,-2/pi],[-2/pi,1]] (max entry error)", micro, 1e-12),
    };
}

std::vector<CheckResult> verify_losses() {
    Rng rng(977);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> scale_dist(0.1, 10.0);
    auto gaussian = [&](Index n) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) v(i) = normal(rng);
        return v;
    };

    double worst_scale = 0.0, worst_cos = 0.0, worst_grad = 0.0, worst_sym = 0.0;
    double lowest = 1.0, highest = 1.0;
    for (int k = 0; k < 50; ++k) {
        const Index d = (k % 2 == 0) ? 8 : 64;
        const Index n = (k % 2 == 0) ? 3 : 12;
        const Matrix q = geodesic_kernel(random_subspace(d, n, rng), random_subspace(d, n, rng)).q;
        const FeaturePair pair{gaussian(d), gaussian(d)};
        const double base = geodl_loss(pair, q);
        const double c = scale_dist(rng);
        worst_scale = std::max(worst_scale, std::abs(geodl_loss(pair, c * q) - base));
        worst_cos = std::max(worst_cos, std::abs(geodl_loss(pair, 2.0 * Matrix::Identity(d, d)) -
                                                 cosine_distill_loss(pair)));
        worst_sym = std::max(worst_sym, std::abs(geodl_loss({pair.z_new, pair.z_old}, q) - base));
        lowest = std::min({lowest, base, cosine_distill_loss(pair)});
        highest = std::max({highest, base, cosine_distill_loss(pair)});

        const Vector analytic = geodl_loss_grad(pair, q).grad;
        const Vector numeric = central_difference(
            [&](const Vector& z) { return geodl_loss({pair.z_old, z}, q); }, pair.z_new, 1e-5);
        worst_grad = std::max(worst_grad, (analytic - numeric).norm() / numeric.norm());
    }

    // cross-entropy never drops below the equal-logits value
    double worst_drop = 0.0;
    for (int k = 0; k < 5; ++k) {
        const Vector logits = gaussian(6);
        const double at_equal = lwf_loss(logits, logits, 2.0);
        for (int dir = 0; dir < 20; ++dir)
            worst_drop = std::max(worst_drop, at_equal - lwf_loss(logits, logits + 0.1 * gaussian(6), 2.0));
    }

    return {
        upper("kernel-scale invariance (max |L(cQ) - L(Q)|)", worst_scale, 1e-10),
        upper("Q = 2I recovers the cosine loss (max error)", worst_cos, 1e-9),
        upper("gradient vs central differences h=1e-5 (max relative error)", worst_grad, 1e-5),
        lower("losses bounded below by 0", lowest, -1e-9),
        upper("losses bounded above by 2", highest, 2.0 + 1e-9),
        upper("loss symmetric in (z_old, z_new)", worst_sym, 1e-12),
        upper("lwf minimal at equal logits (max decrease)", worst_drop, 1e-9),
    };
}

namespace {

ExperimentSetup small_setup(DistillMode mode) {
    ExperimentSetup s;
    s.stream.input_dim = 8;
    s.stream.classes_total = 6;
    s.stream.base_classes = 4;
    s.stream.tasks = 1;
    s.stream.classes_per_task = 2;
    s.stream.train_per_class = 30;
    s.stream.test_per_class = 15;
    s.training.hidden_dim = 12;
    s.training.feature_dim = 6;
    s.training.epochs_base = 8;
    s.training.epochs_incr = 5;
    s.training.batch = 16;
    s.training.subspace_n = 3;
    s.training.memory_per_class = 5;
    s.mode = mode;
    s.seed = 5;
    return s;
}

}  // namespace

std::vector<CheckResult> verify_sim() {
    std::vector<CheckResult> out;
    auto flag = [&](std::string name, bool ok) { out.push_back({std::move(name), ok, 0.0, 0.0, true}); };

    const ExperimentSetup geodl = small_setup(DistillMode::GeoDL);
    const ExperimentReport r1 = run_experiment(geodl);
    const ExperimentReport r2 = run_experiment(geodl);
    flag("fixed seed reproduces the report exactly",
         r1.per_task_accuracy == r2.per_task_accuracy && r1.forgetting_rate == r2.forgetting_rate);

    ExperimentSetup zero_beta = geodl;
    zero_beta.training.distill.beta = 0.0;
    ExperimentSetup none = zero_beta;
    none.mode = DistillMode::None;
    const ExperimentReport rz = run_experiment(zero_beta);
    const ExperimentReport rn = run_experiment(none);
    flag("beta = 0 geodl matches mode none", rz.per_task_accuracy == rn.per_task_accuracy &&
                                                  rz.base_accuracy_final == rn.base_accuracy_final);

    TaskStreamSpec spec = geodl.stream;
    spec.seed = 11;
    const RealizedStream stream = make_task_stream(spec);
    BaseResult base = train_base(stream, geodl.training, 11);
    const std::uint64_t before = parameter_hash(base.model);
    const IncrementalResult step =
        incremental_step(base.model, stream.tasks[1], base.memory, geodl.training, DistillMode::GeoDL, 3);
    flag("old model unchanged by incremental step", parameter_hash(base.model) == before);
    flag("prototype count equals seen classes", step.model.num_classes() == stream.classes_up_to(1));
    ExemplarMemory memory = base.memory;
    update_memory(memory, step.model, stream.tasks[1]);
    flag("memory within budget",
         memory.total_size() <= static_cast<Index>(geodl.training.memory_per_class) * stream.classes_up_to(1));

    const IncrementalResult cos_step =
        incremental_step(base.model, stream.tasks[1], base.memory, geodl.training, DistillMode::Cosine, 3);
    out.push_back(upper("first-batch geodl loss equals cosine loss for a copied encoder",
                        std::abs(step.first_batch_distill_loss - cos_step.first_batch_distill_loss), 1e-6));

    TrainingConfig frozen = geodl.training;
    frozen.lr = 0.0;
    bool stationary = true;
    for (auto mode : {DistillMode::GeoDL, DistillMode::Cosine, DistillMode::LwF}) {
        const IncrementalResult s = incremental_step(base.model, stream.tasks[1], base.memory, frozen, mode, 3);
        const auto& e_old = base.model.encoder;
        const auto& e_new = s.model.encoder;
        stationary = stationary && e_old.w1 == e_new.w1 && e_old.b1 == e_new.b1 && e_old.w2 == e_new.w2 &&
                     e_old.b2 == e_new.b2 &&
                     s.model.prototypes.leftCols(base.model.num_classes()) == base.model.prototypes;
    }
    flag("lr = 0 leaves every parameter unchanged", stationary);
    return out;
}

std::vector<CheckResult> run_suite(Suite suite) {
    switch (suite) {
        case Suite::Geometry: return verify_geometry();
        case Suite::Losses: return verify_losses();
        case Suite::Sim: return verify_sim();
        case Suite::All: {
            auto all = verify_geometry();
            for (auto&& r : verify_losses()) all.push_back(std::move(r));
            for (auto&& r : verify_sim()) all.push_back(std::move(r));
            return all;
        }
    }
    return {};
}

bool print_report(std::ostream& os, const std::vector<CheckResult>& results) {
    bool ok = true;
    char line[256];
    for (const auto& r : results) {
        if (r.boolean)
            std::snprintf(line, sizeof line, "[%s] %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str());
        else
            std::snprintf(line, sizeof line, "[%s] %s: measured=%.3e tolerance=%.3e\n",
                          r.passed ? "PASS" : "FAIL", r.name.c_str(), r.measured, r.tolerance);
        os << line;
        ok = ok && r.passed;
    }
    os << (ok ? "all checks passed" : "some checks FAILED") << '\n';
    return ok;
}

}  // namespace geodl
