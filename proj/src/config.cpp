#include "geodl/config.hpp"

#include "geodl/rng.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace geodl {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = value.find(',', start);
        out.push_back(trim(std::string_view(value).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_number(const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || text.empty())
        throw Error("cannot parse \"" + text + "\" as a number");
    return value;
}

int parse_int(const std::string& text) { return parse_number<int>(text); }

double parse_real(const std::string& text) {
    const double v = parse_number<double>(text);
    if (!std::isfinite(v)) throw Error("value must be finite");
    return v;
}

bool parse_bool(const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw Error("cannot parse \"" + text + "\" as a boolean");
}

std::string format_real(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, ptr);
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"input_dim", [](ExperimentConfig& c, const std::string& v) { c.stream.input_dim = parse_int(v); }},
        {"classes_total", [](ExperimentConfig& c, const std::string& v) { c.stream.classes_total = parse_int(v); }},
        {"base_classes", [](ExperimentConfig& c, const std::string& v) { c.stream.base_classes = parse_int(v); }},
        {"tasks", [](ExperimentConfig& c, const std::string& v) { c.stream.tasks = parse_int(v); }},
        {"classes_per_task", [](ExperimentConfig& c, const std::string& v) { c.stream.classes_per_task = parse_int(v); }},
        {"train_per_class", [](ExperimentConfig& c, const std::string& v) { c.stream.train_per_class = parse_int(v); }},
        {"test_per_class", [](ExperimentConfig& c, const std::string& v) { c.stream.test_per_class = parse_int(v); }},
        {"noise_sigma", [](ExperimentConfig& c, const std::string& v) { c.stream.noise_sigma = parse_real(v); }},
        {"hidden_dim", [](ExperimentConfig& c, const std::string& v) { c.training.hidden_dim = parse_int(v); }},
        {"feature_dim", [](ExperimentConfig& c, const std::string& v) { c.training.feature_dim = parse_int(v); }},
        {"lr", [](ExperimentConfig& c, const std::string& v) { c.training.lr = parse_real(v); }},
        {"epochs_base", [](ExperimentConfig& c, const std::string& v) { c.training.epochs_base = parse_int(v); }},
        {"epochs_incr", [](ExperimentConfig& c, const std::string& v) { c.training.epochs_incr = parse_int(v); }},
        {"batch", [](ExperimentConfig& c, const std::string& v) { c.training.batch = parse_int(v); }},
        {"subspace_n", [](ExperimentConfig& c, const std::string& v) { c.training.subspace_n = parse_int(v); }},
        {"memory_per_class", [](ExperimentConfig& c, const std::string& v) { c.training.memory_per_class = parse_int(v); }},
        {"pca_center", [](ExperimentConfig& c, const std::string& v) { c.training.pca_center = parse_bool(v); }},
        {"beta", [](ExperimentConfig& c, const std::string& v) { c.training.distill.beta = parse_real(v); }},
        {"tau", [](ExperimentConfig& c, const std::string& v) { c.training.distill.tau = parse_real(v); }},
        {"epsilon", [](ExperimentConfig& c, const std::string& v) { c.training.distill.epsilon = parse_real(v); }},
        {"mode",
         [](ExperimentConfig& c, const std::string& v) {
             std::vector<DistillMode> modes;
             for (const auto& item : split_list(v)) {
                 const auto m = parse_mode(item);
                 if (!m) throw Error("unknown mode \"" + item + "\" (expected none, lwf, cosine or geodl)");
                 modes.push_back(*m);
             }
             c.modes = std::move(modes);
         }},
        {"seeds",
         [](ExperimentConfig& c, const std::string& v) {
             std::vector<std::uint64_t> seeds;
             for (const auto& item : split_list(v)) seeds.push_back(parse_number<std::uint64_t>(item));
             c.seeds = std::move(seeds);
         }},
        {"master_seed", [](ExperimentConfig& c, const std::string& v) { c.master_seed = parse_number<std::uint64_t>(v); }},
        {"output_path",
         [](ExperimentConfig& c, const std::string& v) {
             if (v.empty()) throw Error("output_path must not be empty");
             c.output_path = v;
         }},
        {"record_wall_time", [](ExperimentConfig& c, const std::string& v) { c.record_wall_time = parse_bool(v); }},
        {"jobs",
         [](ExperimentConfig& c, const std::string& v) {
             const int j = parse_int(v);
             if (j < 0) throw Error("jobs must be >= 0");
             c.jobs = j;
         }},
    };
    return table;
}

void check_invariants(const ExperimentConfig& c, std::vector<std::string>& problems) {
    auto check = [&](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            problems.push_back(e.what());
        }
    };
    check([&] { c.stream.validate(); });
    check([&] { c.training.validate(); });
    if (c.modes.empty()) problems.push_back("mode list is empty");
    if (c.seeds.empty()) problems.push_back("seed list is empty");
    if (std::set<DistillMode>(c.modes.begin(), c.modes.end()).size() != c.modes.size())
        problems.push_back("mode list contains duplicates");
    if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size())
        problems.push_back("seed list contains duplicates");
    for (auto m : c.modes)
        if (m == DistillMode::LwF && c.stream.base_classes < 2)
            problems.push_back("lwf mode needs base_classes >= 2");
}

}  // namespace

std::uint64_t ExperimentConfig::run_seed(std::uint64_t seed) const {
    return derive_seed(master_seed, {seed});
}

std::string ExperimentConfig::hash() const {
    ExperimentConfig canonical = *this;
    canonical.output_path = "-";
    canonical.jobs = 0;
    canonical.record_wall_time = false;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : format_config(canonical)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error([&] {
          std::string msg = "invalid configuration:";
          for (const auto& p : problems) msg += "\n  " + p;
          return msg;
      }()),
      problems_(std::move(problems)) {}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig config;
    std::vector<std::string> problems;
    std::set<std::string, std::less<>> seen;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(std::string_view(raw).substr(0, raw.find('#')));
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back(where + "expected `key = value`");
            continue;
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            problems.push_back(where + "unknown key \"" + key + "\"");
            continue;
        }
        if (!seen.insert(key).second) {
            problems.push_back(where + "duplicate key \"" + key + "\"");
            continue;
        }
        try {
            it->second(config, value);
        } catch (const Error& e) {
            problems.push_back(where + key + ": " + e.what());
        }
    }
    check_invariants(config, problems);
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file \"" + path + "\""});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string format_config(const ExperimentConfig& c) {
    std::ostringstream os;
    auto kv = [&](const char* key, const std::string& value) { os << key << " = " << value << '\n'; };
    auto join = [](const auto& items, auto&& fmt) {
        std::string out;
        for (const auto& item : items) {
            if (!out.empty()) out += ",";
            out += fmt(item);
        }
        return out;
    };

    os << "# task stream\n";
    kv("input_dim", std::to_string(c.stream.input_dim));
    kv("classes_total", std::to_string(c.stream.classes_total));
    kv("base_classes", std::to_string(c.stream.base_classes));
    kv("tasks", std::to_string(c.stream.tasks));
    kv("classes_per_task", std::to_string(c.stream.classes_per_task));
    kv("train_per_class", std::to_string(c.stream.train_per_class));
    kv("test_per_class", std::to_string(c.stream.test_per_class));
    kv("noise_sigma", format_real(c.stream.noise_sigma));
    os << "# model and optimization\n";
    kv("hidden_dim", std::to_string(c.training.hidden_dim));
    kv("feature_dim", std::to_string(c.training.feature_dim));
    kv("lr", format_real(c.training.lr));
    kv("epochs_base", std::to_string(c.training.epochs_base));
    kv("epochs_incr", std::to_string(c.training.epochs_incr));
    kv("batch", std::to_string(c.training.batch));
    kv("subspace_n", std::to_string(c.training.subspace_n));
    kv("memory_per_class", std::to_string(c.training.memory_per_class));
    kv("pca_center", c.training.pca_center ? "true" : "false");
    os << "# distillation\n";
    kv("beta", format_real(c.training.distill.beta));
    kv("tau", format_real(c.training.distill.tau));
    kv("epsilon", format_real(c.training.distill.epsilon));
    os << "# runs\n";
    kv("mode", join(c.modes, [](DistillMode m) { return std::string(to_string(m)); }));
    kv("seeds", join(c.seeds, [](std::uint64_t s) { return std::to_string(s); }));
    kv("master_seed", std::to_string(c.master_seed));
    kv("output_path", c.output_path);
    kv("record_wall_time", c.record_wall_time ? "true" : "false");
    kv("jobs", std::to_string(c.jobs));
    return os.str();
}

}  // namespace geodl
