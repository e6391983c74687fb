#include "geodl/runner.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace geodl;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig c = parse_config(
        "input_dim = 6\nclasses_total = 6\nbase_classes = 4\ntasks = 1\nclasses_per_task = 2\n"
        "train_per_class = 20\ntest_per_class = 10\nhidden_dim = 8\nfeature_dim = 5\nsubspace_n = 3\n"
        "epochs_base = 6\nepochs_incr = 4\nbatch = 16\nmemory_per_class = 4\n");
    c.seeds = {7};
    return c;
}

std::string results_text(const std::vector<RunRecord>& records) {
    std::ostringstream os;
    write_results_csv(os, records);
    return os.str();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("format_fixed6") {
    CHECK(format_fixed6(0.5) == "0.500000");
    CHECK(format_fixed6(-1e-9) == "0.000000");
    CHECK(format_fixed6(1.0 / 3.0) == "0.333333");
}

TEST_CASE("repeated runs give byte-identical results") {
    ExperimentConfig c = tiny_config();
    c.modes = {DistillMode::GeoDL, DistillMode::LwF};
    const std::string once = results_text(run_all(c, 1));
    CHECK(once == results_text(run_all(c, 1)));
    CHECK(once == results_text(run_all(c, 4)));  // worker count does not matter
}

TEST_CASE("records come back in config order with T + 1 rows each") {
    ExperimentConfig c = tiny_config();
    c.modes = {DistillMode::Cosine, DistillMode::None};
    c.seeds = {2, 1};
    const auto records = run_all(c, 3);
    REQUIRE(records.size() == 4);
    CHECK(records[0].mode == DistillMode::Cosine);
    CHECK(records[0].seed == 2);
    CHECK(records[3].mode == DistillMode::None);
    CHECK(records[3].seed == 1);
    for (const auto& r : records) {
        CHECK(r.task_accuracy.size() == 2);
        CHECK(r.wall_ms == 0.0);
    }
}

TEST_CASE("geodl with beta = 0 reproduces mode none") {
    ExperimentConfig g = tiny_config();
    g.modes = {DistillMode::GeoDL};
    g.training.distill.beta = 0.0;
    ExperimentConfig n = tiny_config();
    n.modes = {DistillMode::None};
    const auto rg = run_all(g, 1);
    const auto rn = run_all(n, 1);
    REQUIRE(rg.size() == rn.size());
    CHECK(rg[0].task_accuracy == rn[0].task_accuracy);
    CHECK(rg[0].forgetting_rate == rn[0].forgetting_rate);
}

TEST_CASE("summary statistics") {
    std::vector<RunRecord> records(3);
    const double acc[3] = {0.5, 0.7, 0.9};
    for (int i = 0; i < 3; ++i) {
        records[static_cast<std::size_t>(i)].mode = DistillMode::GeoDL;
        records[static_cast<std::size_t>(i)].seed = static_cast<std::uint64_t>(i);
        records[static_cast<std::size_t>(i)].average_accuracy = acc[i];
        records[static_cast<std::size_t>(i)].forgetting_rate = 0.1;
    }
    const auto rows = summarize(records);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mean_avg_acc == doctest::Approx(0.7));
    CHECK(rows[0].std_avg_acc == doctest::Approx(0.2));
    CHECK(rows[0].std_forgetting == doctest::Approx(0.0));
    CHECK(rows[0].n_seeds == 3);
}

TEST_CASE("run_and_write produces both CSV files") {
    const auto dir = std::filesystem::temp_directory_path() / "geodl_runner_test";
    std::filesystem::remove_all(dir);
    ExperimentConfig c = tiny_config();
    c.modes = {DistillMode::None};
    run_and_write(c, dir.string());
    const std::string results = slurp(dir / "results.csv");
    const std::string summary = slurp(dir / "summary.csv");
    CHECK(results.rfind(std::string(kResultsHeader) + "\n", 0) == 0);
    CHECK(summary.rfind(std::string(kSummaryHeader) + "\n", 0) == 0);
    CHECK(std::count(results.begin(), results.end(), '\n') == 3);
    std::filesystem::remove_all(dir);
}
