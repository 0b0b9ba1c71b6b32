#pragma once

// Run configuration text format:
//
//   # comment            ; comment
//   [system]
//   n_subcarriers = 512
//   ...
//   [experiment]
//   sweep_variable = snr
//   sweep_values = 0, 10, 20
//   methods = ls, somp, bsomp
//   [output]
//   results = results.csv
//
// Keys are unique per section; unknown sections or keys are errors.

#include <iosfwd>
#include <string>

#include "bdcs/experiment.hpp"

namespace bdcs {

struct RunConfig
{
    ExperimentSpec spec;
    std::string results_path = "results.csv";
    std::string manifest_path;   // empty: results_path + ".manifest"
    std::string pattern_path = "pilots.txt";

    std::string resolved_manifest_path() const;
};

/// Throws ConfigError("<source>:<line>: <message>") on syntax errors, unknown
/// sections or keys, duplicate keys and values that do not parse. Semantic
/// checks (K <= L, packing, ...) are left to ExperimentSpec::validate.
RunConfig parse_run_config(std::istream& is, const std::string& source = "<config>");

/// ConfigError with line 0 when the file cannot be opened.
RunConfig load_run_config(const std::string& path);

/// Canonical text form; parse_run_config(format_run_config(c)) reproduces c.
std::string format_run_config(const RunConfig& config);

} // namespace bdcs
