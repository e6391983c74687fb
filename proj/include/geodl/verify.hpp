#pragma once

// Property suites behind `geodl verify`: each check reports the worst value
// measured over its instances next to the tolerance it must meet.

#include "geodl/geodesic.hpp"
#include "geodl/rng.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace geodl {

struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    bool boolean = false;  // pass/fail only; measured/tolerance unused
};

enum class Suite { Geometry, Losses, Sim, All };

std::optional<Suite> parse_suite(std::string_view text);

std::vector<CheckResult> verify_geometry();
std::vector<CheckResult> verify_losses();
std::vector<CheckResult> verify_sim();
std::vector<CheckResult> run_suite(Suite suite);

/// Prints one line per check; returns true when all passed.
bool print_report(std::ostream& os, const std::vector<CheckResult>& results);

/// Uniformly distributed point on G(n, d): orthonormalized Gaussian matrix.
Subspace random_subspace(Index d, Index n, Rng& rng);

/// Central differences of f at x with step h.
Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x, double h);

}  // namespace geodl
