#include "bdcs/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "bdcs/errors.hpp"
#include "bdcs/rng.hpp"
#include "bdcs/sim.hpp"

namespace bdcs {

namespace {

enum StreamTag : std::uint64_t {
    kValueStream = 1,
    kDesignStream = 2,
    kTrialStream = 3,
    kChannelStream = 4,
    kBitsStream = 5,
    kNoiseStream = 6,
    kUplinkStream = 7,
};

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

SystemConfig apply_sweep(const SystemConfig& base, SweepVariable v, double value)
{
    SystemConfig c = base;
    switch (v) {
    case SweepVariable::Snr: c.snr_db = value; break;
    case SweepVariable::Doppler: c.speed_mps = base.speed_for_normalized_doppler(value); break;
    case SweepVariable::Sparsity: c.sparsity = static_cast<int>(std::lround(value)); break;
    case SweepVariable::Iterations: break;
    }
    return c;
}

template <class Fn>
void parallel_for(int count, int threads, Fn&& fn)
{
    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, std::max(count, 1));
    if (workers == 1) {
        for (int i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++)
                fn(i);
        });
    for (auto& t : pool)
        t.join();
}

struct Timer
{
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const
    {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
};

std::vector<ResultRow> run_trial(const ExperimentSpec& spec, const PilotPattern& pattern,
                                 const MeasurementSystem& meas, const BemBasis& basis,
                                 const SystemConfig& config, std::uint64_t trial_seed)
{
    std::vector<ResultRow> rows;
    ResultRow base;
    base.seed = trial_seed;
    base.snr_db = config.snr_db;
    base.doppler_norm = config.normalized_doppler();
    base.n_antennas = config.n_antennas;
    base.sparsity = config.sparsity;

    const IndexSet support = draw_common_support(config.channel_length, config.sparsity, trial_seed);
    ChannelRealization channel;
    if (spec.channel_model == ChannelModel::ExactBem) {
        const auto coeffs = random_block_sparse_coefficients(config.n_antennas, config.channel_length,
                                                             config.bem_order, support,
                                                             derive_seed(trial_seed, {kChannelStream}));
        channel = exact_bem_channel(coeffs, basis);
    } else {
        channel = generate_ds_channel(config, support, derive_seed(trial_seed, {kChannelStream}));
    }

    const auto bits = random_bits(2 * static_cast<std::size_t>(data_subcarrier_count(pattern)) * config.n_antennas,
                                  derive_seed(trial_seed, {kBitsStream}));

    // downlink observations are shared by LS / SOMP / BSOMP
    ObservationSet downlink;
    bool have_downlink = false;
    auto downlink_obs = [&]() -> const ObservationSet& {
        if (!have_downlink) {
            const TransmitFrame frame = build_transmit_frame(pattern, bits);
            const ReceivedSignal rx =
                apply_channel(frame, channel.taps, config.snr_db, derive_seed(trial_seed, {kNoiseStream}));
            downlink = extract_pilot_observations(rx.y, pattern, rx.noise_variance);
            have_downlink = true;
        }
        return downlink;
    };

    auto record = [&](const std::string& name, const ChannelTensor& estimate, const IndexSet& est_support,
                      double ms) {
        ResultRow row = base;
        row.method = name;
        row.nmse_db = nmse_db(estimate, channel.taps);
        row.support_hit = est_support == channel.support;
        row.runtime_ms = spec.record_runtime ? ms : 0.0;
        rows.push_back(row);
    };

    for (Method method : spec.methods) {
        const std::string name = method_name(method);
        try {
            Timer timer;
            ChannelTensor estimate;
            IndexSet est_support;
            if (method == Method::UplinkDCS) {
                PilotPattern shared = pattern;
                shared.values = pattern.values.topRows(1);
                const auto up_bits = random_bits(2 * static_cast<std::size_t>(data_subcarrier_count(shared)),
                                                 derive_seed(trial_seed, {kUplinkStream}));
                const TransmitFrame frame = build_transmit_frame(shared, up_bits);
                std::vector<ObservationSet> per_antenna;
                for (int b = 0; b < config.n_antennas; ++b) {
                    const ReceivedSignal rx = apply_channel(
                        frame, antenna_slice(channel.taps, b), config.snr_db,
                        derive_seed(trial_seed, {kUplinkStream, static_cast<std::uint64_t>(b)}));
                    per_antenna.push_back(extract_pilot_observations(rx.y, shared, rx.noise_variance));
                }
                const auto results = uplink_dcs_estimate(per_antenna, shared, config.channel_length, config.sparsity);
                estimate = ChannelTensor(config.n_antennas, config.n_subcarriers, config.channel_length);
                for (int b = 0; b < config.n_antennas; ++b) {
                    const ChannelTensor one = reconstruct_channel(results[b], basis);
                    for (int t = 0; t < config.n_subcarriers; ++t)
                        for (int l = 0; l < config.channel_length; ++l)
                            estimate(b, t, l) = one(0, t, l);
                }
                est_support = results.front().support;
            } else {
                const ObservationSet& obs = downlink_obs();
                RecoveryResult result;
                switch (method) {
                case Method::LS: result = solve_ls(obs, meas); break;
                case Method::SOMP: result = somp(obs, meas, config.sparsity); break;
                case Method::BSOMP: result = bsomp(obs, meas, config.sparsity); break;
                case Method::UplinkDCS: break;
                }
                estimate = reconstruct_channel(result, basis);
                est_support = result.support;
            }
            const double ms = timer.ms();
            record(name, estimate, est_support, ms);
            if (spec.smoothing && method != Method::LS && config.n_subcarriers % 4 == 0) {
                Timer smooth_timer;
                const ChannelTensor smoothed = linear_smoothing(estimate, est_support);
                record(name + "-li", smoothed, est_support, ms + smooth_timer.ms());
            }
        } catch (const std::exception& e) {
            ResultRow row = base;
            row.method = name;
            row.failed = true;
            row.nmse_db = std::numeric_limits<double>::quiet_NaN();
            row.error = e.what();
            rows.push_back(row);
        }
    }
    return rows;
}

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

std::string sweep_name(SweepVariable v)
{
    switch (v) {
    case SweepVariable::Snr: return "snr";
    case SweepVariable::Doppler: return "doppler";
    case SweepVariable::Sparsity: return "sparsity";
    case SweepVariable::Iterations: return "iterations";
    }
    return "unknown";
}

std::string scheme_name(PilotScheme s)
{
    switch (s) {
    case PilotScheme::Equidistant: return "equidistant";
    case PilotScheme::Ga: return "ga";
    case PilotScheme::Bdso: return "bdso";
    }
    return "unknown";
}

std::string channel_model_name(ChannelModel m)
{
    return m == ChannelModel::ExactBem ? "exact_bem" : "jakes";
}

SweepVariable parse_sweep_variable(const std::string& name)
{
    const std::string s = lower(name);
    if (s == "snr") return SweepVariable::Snr;
    if (s == "doppler") return SweepVariable::Doppler;
    if (s == "sparsity") return SweepVariable::Sparsity;
    if (s == "iterations") return SweepVariable::Iterations;
    throw ParameterError("unknown sweep variable '" + name + "'");
}

PilotScheme parse_scheme(const std::string& name)
{
    const std::string s = lower(name);
    if (s == "equidistant") return PilotScheme::Equidistant;
    if (s == "ga") return PilotScheme::Ga;
    if (s == "bdso") return PilotScheme::Bdso;
    throw ParameterError("unknown pilot scheme '" + name + "'");
}

ChannelModel parse_channel_model(const std::string& name)
{
    const std::string s = lower(name);
    if (s == "jakes") return ChannelModel::Jakes;
    if (s == "exact_bem") return ChannelModel::ExactBem;
    throw ParameterError("unknown channel model '" + name + "'");
}

void ExperimentSpec::validate() const
{
    base_config.validate();
    if (trials < 1)
        throw ParameterError("trials must be at least 1");
    if (sweep_values.empty())
        throw ParameterError("sweep values must not be empty");
    if (sweep_variable != SweepVariable::Iterations && methods.empty())
        throw ParameterError("at least one recovery method is required");
    if (pilot_iterations < 0)
        throw ParameterError("pilot iterations must be non-negative");
    for (double v : sweep_values) {
        switch (sweep_variable) {
        case SweepVariable::Sparsity:
            if (v < 0 || v > base_config.channel_length || v != std::floor(v))
                throw ParameterError("sparsity sweep values must be integers in [0, L]");
            break;
        case SweepVariable::Doppler:
            if (v < 0)
                throw ParameterError("normalized Doppler must be non-negative");
            break;
        case SweepVariable::Iterations:
            if (v < 0 || v != std::floor(v))
                throw ParameterError("iteration sweep values must be non-negative integers");
            break;
        case SweepVariable::Snr: break;
        }
    }
}

DesignedPilots design_pilots(const SystemConfig& config, PilotScheme scheme, int iterations, std::uint64_t seed)
{
    config.validate();
    DesignedPilots out;
    out.pattern.n_subcarriers = config.n_subcarriers;
    out.pattern.n_groups = config.n_groups;
    out.pattern.bem_order = config.bem_order;
    out.pattern.values = random_sign_sequences(config.n_antennas, config.n_groups, derive_seed(seed, {kValueStream}));
    const std::uint64_t design_seed = derive_seed(seed, {kDesignStream});
    switch (scheme) {
    case PilotScheme::Equidistant:
        out.design.centers = equidistant_positions(config.n_subcarriers, config.n_groups, config.bem_order);
        out.pattern.centers = out.design.centers;
        out.design.mu_trace.push_back(block_coherence(out.pattern, config.channel_length));
        break;
    case PilotScheme::Bdso:
        out.design = bdso_optimize(config, out.pattern.values, std::max(iterations, 1), design_seed);
        break;
    case PilotScheme::Ga:
        out.design = ga_optimize(config, out.pattern.values, iterations, design_seed);
        break;
    }
    out.pattern.centers = out.design.centers;
    out.pattern.validate();
    return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec)
{
    spec.validate();
    ExperimentResult result;
    const int n_values = static_cast<int>(spec.sweep_values.size());
    const int n_tasks = n_values * spec.trials;

    if (spec.sweep_variable == SweepVariable::Iterations) {
        int max_iter = 0;
        for (double v : spec.sweep_values)
            max_iter = std::max(max_iter, static_cast<int>(v));
        std::vector<std::vector<TraceRow>> per_trial(static_cast<std::size_t>(spec.trials));
        parallel_for(spec.trials, spec.threads, [&](int t) {
            const std::uint64_t trial_seed = derive_seed(spec.seed, {kTrialStream, 0, static_cast<std::uint64_t>(t)});
            const DesignedPilots pilots = design_pilots(spec.base_config, spec.pilot_scheme, max_iter, trial_seed);
            const auto& trace = pilots.design.mu_trace;
            for (double v : spec.sweep_values) {
                const auto it = static_cast<std::size_t>(v);
                per_trial[t].push_back(TraceRow{scheme_name(spec.pilot_scheme), trial_seed, static_cast<int>(it),
                                                trace[std::min(it, trace.size() - 1)]});
            }
        });
        for (const auto& rows : per_trial)
            result.traces.insert(result.traces.end(), rows.begin(), rows.end());
        return result;
    }

    const DesignedPilots pilots = design_pilots(spec.base_config, spec.pilot_scheme, spec.pilot_iterations, spec.seed);
    result.pattern = pilots.pattern;
    result.pattern_mu = block_coherence(pilots.pattern, spec.base_config.channel_length);
    if (!spec.base_config.common_support_valid())
        result.warnings.push_back("antenna spacing violates s_max/c <= 1/(10 BW); common support is assumed anyway");

    const MeasurementSystem meas = assemble_measurement_matrix(pilots.pattern, spec.base_config.channel_length);
    const BemBasis basis = build_cebem_basis(spec.base_config.n_subcarriers, spec.base_config.bem_order);

    std::vector<std::vector<ResultRow>> per_task(static_cast<std::size_t>(n_tasks));
    parallel_for(n_tasks, spec.threads, [&](int task) {
        const int v = task / spec.trials;
        const int t = task % spec.trials;
        const SystemConfig config = apply_sweep(spec.base_config, spec.sweep_variable, spec.sweep_values[v]);
        const std::uint64_t trial_seed =
            derive_seed(spec.seed, {kTrialStream, static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(t)});
        try {
            config.validate();
            per_task[task] = run_trial(spec, pilots.pattern, meas, basis, config, trial_seed);
        } catch (const std::exception& e) {
            for (Method m : spec.methods) {
                ResultRow row;
                row.method = method_name(m);
                row.seed = trial_seed;
                row.snr_db = config.snr_db;
                row.doppler_norm = config.normalized_doppler();
                row.n_antennas = config.n_antennas;
                row.sparsity = config.sparsity;
                row.nmse_db = std::numeric_limits<double>::quiet_NaN();
                row.failed = true;
                row.error = e.what();
                per_task[task].push_back(row);
            }
        }
    });
    for (const auto& rows : per_task)
        result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    return result;
}

void write_result_csv(std::ostream& os, const std::vector<ResultRow>& rows)
{
    os << kResultCsvHeader << '\n';
    for (const auto& r : rows) {
        os << r.method << ',' << r.seed << ',' << format_double(r.snr_db) << ',' << format_double(r.doppler_norm)
           << ',' << r.n_antennas << ',' << r.sparsity << ',' << format_double(r.nmse_db) << ','
           << (r.support_hit ? 1 : 0) << ',' << format_double(r.runtime_ms) << '\n';
    }
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows)
{
    os << kTraceCsvHeader << '\n';
    for (const auto& r : rows)
        os << r.scheme << ',' << r.seed << ',' << r.iterations << ',' << format_double(r.mu) << '\n';
}

} // namespace bdcs
