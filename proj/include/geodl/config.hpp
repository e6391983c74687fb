#pragma once

#include "geodl/task_stream.hpp"
#include "geodl/trainer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace geodl {

struct ExperimentConfig {
    TaskStreamSpec stream;
    TrainingConfig training;
    std::vector<DistillMode> modes{DistillMode::None, DistillMode::LwF, DistillMode::Cosine,
                                   DistillMode::GeoDL};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::uint64_t master_seed = 0;
    std::string output_path = "results";
    bool record_wall_time = false;  // wall_ms column is 0 unless set
    int jobs = 0;                   // 0: one worker per hardware thread

    /// Number of (mode, seed) runs.
    std::size_t run_count() const noexcept { return modes.size() * seeds.size(); }

    /// Seed handed to the simulator for a configured seed value.
    std::uint64_t run_seed(std::uint64_t seed) const;

    /// FNV-1a of the canonical text of every field that affects results.
    std::string hash() const;
};

/// Thrown by parse_config; `problems` holds one message per invalid line
/// or violated invariant.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Parses `key = value` lines; `#` starts a comment and lists are
/// comma-separated. Missing keys keep their defaults, unknown keys fail.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical `key = value` text; parse_config(format_config(c)) == c.
std::string format_config(const ExperimentConfig& config);

}  // namespace geodl
