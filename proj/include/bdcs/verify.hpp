#pragma once

// Built-in property and oracle checks run by `bdcs verify`.

#include <string>
#include <vector>

#include "bdcs/pilot.hpp"
#include "bdcs/recovery.hpp"

namespace bdcs {

struct CheckResult
{
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Minimum-residual block support of size k by exhaustive search over all
/// C(L, k) tap subsets, each solved by least squares.
struct OracleSupport
{
    IndexSet support;
    double residual_norm = 0.0;
};
OracleSupport exhaustive_block_support(const ObservationSet& obs, const MeasurementSystem& meas, int k);

/// Runs every check, in a fixed order, without stopping at the first failure.
std::vector<CheckResult> run_builtin_checks();

} // namespace bdcs
