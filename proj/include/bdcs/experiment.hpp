#pragma once

// Monte-Carlo driver: sweeps one parameter, runs independent trials in
// parallel and collects one CSV row per (trial, method).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bdcs/channel.hpp"
#include "bdcs/pilot.hpp"
#include "bdcs/recovery.hpp"

namespace bdcs {

enum class SweepVariable { Snr, Doppler, Sparsity, Iterations };
enum class PilotScheme { Equidistant, Ga, Bdso };
enum class ChannelModel { Jakes, ExactBem };

std::string sweep_name(SweepVariable v);
std::string scheme_name(PilotScheme s);
std::string channel_model_name(ChannelModel m);
SweepVariable parse_sweep_variable(const std::string& name);
PilotScheme parse_scheme(const std::string& name);
ChannelModel parse_channel_model(const std::string& name);

struct ExperimentSpec
{
    SweepVariable sweep_variable = SweepVariable::Snr;
    std::vector<double> sweep_values{30.0};
    int trials = 1;
    std::vector<Method> methods{Method::BSOMP};
    PilotScheme pilot_scheme = PilotScheme::Bdso;
    int pilot_iterations = 500;
    SystemConfig base_config;
    std::uint64_t seed = 1;
    bool smoothing = true;                 // add "<method>-li" rows for greedy methods
    ChannelModel channel_model = ChannelModel::Jakes;
    bool record_runtime = false;           // runtime_ms is 0 unless set
    int threads = 0;                       // 0 = hardware concurrency

    /// Throws ParameterError on an invalid spec.
    void validate() const;
};

struct ResultRow
{
    std::string method;
    std::uint64_t seed = 0;
    double snr_db = 0.0;
    double doppler_norm = 0.0;
    int n_antennas = 0;
    int sparsity = 0;
    double nmse_db = 0.0;
    bool support_hit = false;
    double runtime_ms = 0.0;
    bool failed = false;
    std::string error;
};

/// mu(Z_s) of an optimizer's reported state after `iterations` steps.
struct TraceRow
{
    std::string scheme;
    std::uint64_t seed = 0;
    int iterations = 0;
    double mu = 0.0;
};

struct ExperimentResult
{
    std::vector<ResultRow> rows;
    std::vector<TraceRow> traces;
    PilotPattern pattern;      // pattern used by the NMSE sweeps
    double pattern_mu = 0.0;
    std::vector<std::string> warnings;
};

struct DesignedPilots
{
    PilotPattern pattern;
    PilotDesign design;
};

/// Random +-1 values and centres from the chosen scheme.
DesignedPilots design_pilots(const SystemConfig& config, PilotScheme scheme, int iterations,
                             std::uint64_t seed);

ExperimentResult run_experiment(const ExperimentSpec& spec);

inline constexpr const char* kResultCsvHeader =
    "method,seed,snr_db,doppler_norm,n_antennas,K,nmse_db,support_hit,runtime_ms";
inline constexpr const char* kTraceCsvHeader = "scheme,seed,iterations,mu";

void write_result_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows);

} // namespace bdcs
