#pragma once

#include "geodl/config.hpp"
#include "geodl/trainer.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace geodl {

struct RunRecord {
    DistillMode mode = DistillMode::None;
    std::uint64_t seed = 0;
    std::vector<double> task_accuracy;  // index 0: A_0 under Φ_0, then A_1 .. A_T
    double average_accuracy = 0.0;
    double forgetting_rate = 0.0;
    double wall_ms = 0.0;
};

/// Failure of one (mode, seed) run.
class RunError : public Error {
public:
    RunError(DistillMode mode, std::uint64_t seed, const std::string& what);
    DistillMode mode;
    std::uint64_t seed;
};

/// Executes every (mode, seed) pair on up to `jobs` worker threads (0: one per
/// hardware thread). Records come back in config order: modes outer, seeds inner.
std::vector<RunRecord> run_all(const ExperimentConfig& config, int jobs = -1);

struct SummaryRow {
    DistillMode mode = DistillMode::None;
    double mean_avg_acc = 0.0;
    double std_avg_acc = 0.0;
    double mean_forgetting = 0.0;
    double std_forgetting = 0.0;
    std::size_t n_seeds = 0;
};

/// Mean and sample standard deviation per mode, computed from the values as
/// printed in results.csv so the summary can be recomputed from that file.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);

inline constexpr const char* kResultsHeader =
    "mode,seed,task_index,accuracy,avg_accuracy,forgetting_rate,wall_ms";
inline constexpr const char* kSummaryHeader =
    "mode,mean_avg_acc,std_avg_acc,mean_forgetting,std_forgetting,n_seeds";

void write_results_csv(std::ostream& os, const std::vector<RunRecord>& records);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

/// Fixed 6-decimal rendering used by both CSV files.
std::string format_fixed6(double v);

/// Runs the config and writes results.csv and summary.csv into out_dir
/// (created if needed).
std::vector<RunRecord> run_and_write(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace geodl
