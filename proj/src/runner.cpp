#include "geodl/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

namespace geodl {

RunError::RunError(DistillMode m, std::uint64_t s, const std::string& what)
    : Error("run (mode=" + std::string(to_string(m)) + ", seed=" + std::to_string(s) + ") failed: " + what),
      mode(m),
      seed(s) {}

std::string format_fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    if (s == "-0.000000") s = "0.000000";
    return s;
}

namespace {

RunRecord run_one(const ExperimentConfig& config, DistillMode mode, std::uint64_t seed,
                  const std::string& config_hash) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentSetup setup;
    setup.stream = config.stream;
    setup.training = config.training;
    setup.mode = mode;
    setup.seed = config.run_seed(seed);
    setup.config_hash = config_hash;
    const ExperimentReport report = run_experiment(setup);

    RunRecord rec;
    rec.mode = mode;
    rec.seed = seed;
    rec.task_accuracy.push_back(report.base_accuracy_initial);
    rec.task_accuracy.insert(rec.task_accuracy.end(), report.per_task_accuracy.begin(),
                             report.per_task_accuracy.end());
    rec.average_accuracy = report.average_accuracy;
    rec.forgetting_rate = report.forgetting_rate;
    if (config.record_wall_time)
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

double printed(double v) { return std::strtod(format_fixed6(v).c_str(), nullptr); }

}  // namespace

std::vector<RunRecord> run_all(const ExperimentConfig& config, int jobs) {
    struct Job {
        DistillMode mode;
        std::uint64_t seed;
    };
    std::vector<Job> queue;
    for (auto m : config.modes)
        for (auto s : config.seeds) queue.push_back({m, s});

    if (jobs < 0) jobs = config.jobs;
    if (jobs == 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::min<int>(jobs, static_cast<int>(queue.size()));

    const std::string hash = config.hash();
    std::vector<RunRecord> records(queue.size());
    std::vector<std::exception_ptr> failures(queue.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < queue.size(); i = next++) {
            try {
                records[i] = run_one(config, queue[i].mode, queue[i].seed, hash);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }

    for (std::size_t i = 0; i < queue.size(); ++i) {
        if (!failures[i]) continue;
        try {
            std::rethrow_exception(failures[i]);
        } catch (const std::exception& e) {
            throw RunError(queue[i].mode, queue[i].seed, e.what());
        }
    }
    return records;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
    std::vector<SummaryRow> rows;
    auto stats = [](const std::vector<double>& xs, double& mean, double& sd) {
        mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        sd = 0.0;
        if (xs.size() > 1) {
            for (double x : xs) sd += (x - mean) * (x - mean);
            sd = std::sqrt(sd / static_cast<double>(xs.size() - 1));
        }
    };
    std::vector<DistillMode> order;
    for (const auto& r : records)
        if (std::find(order.begin(), order.end(), r.mode) == order.end()) order.push_back(r.mode);
    for (auto mode : order) {
        std::vector<double> acc, forget;
        for (const auto& r : records) {
            if (r.mode != mode) continue;
            acc.push_back(printed(r.average_accuracy));
            forget.push_back(printed(r.forgetting_rate));
        }
        SummaryRow row;
        row.mode = mode;
        row.n_seeds = acc.size();
        stats(acc, row.mean_avg_acc, row.std_avg_acc);
        stats(forget, row.mean_forgetting, row.std_forgetting);
        rows.push_back(row);
    }
    return rows;
}

void write_results_csv(std::ostream& os, const std::vector<RunRecord>& records) {
    os << kResultsHeader << '\n';
    for (const auto& r : records) {
        for (std::size_t t = 0; t < r.task_accuracy.size(); ++t) {
            os << to_string(r.mode) << ',' << r.seed << ',' << t << ',' << format_fixed6(r.task_accuracy[t])
               << ',' << format_fixed6(r.average_accuracy) << ',' << format_fixed6(r.forgetting_rate) << ','
               << format_fixed6(r.wall_ms) << '\n';
        }
    }
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << kSummaryHeader << '\n';
    for (const auto& r : rows) {
        os << to_string(r.mode) << ',' << format_fixed6(r.mean_avg_acc) << ',' << format_fixed6(r.std_avg_acc)
           << ',' << format_fixed6(r.mean_forgetting) << ',' << format_fixed6(r.std_forgetting) << ','
           << r.n_seeds << '\n';
    }
}

std::vector<RunRecord> run_and_write(const ExperimentConfig& config, const std::string& out_dir) {
    std::vector<RunRecord> records = run_all(config);
    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);
    std::ofstream results(dir / "results.csv", std::ios::binary);
    std::ofstream summary(dir / "summary.csv", std::ios::binary);
    if (!results || !summary) throw Error("cannot write CSV files into \"" + out_dir + "\"");
    write_results_csv(results, records);
    write_summary_csv(summary, summarize(records));
    return records;
}

}  // namespace geodl
