#include "bdcs/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "bdcs/errors.hpp"

namespace bdcs {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(trim(item));
    return out;
}

struct Fail
{
    std::string message;
};

int to_int(const std::string& s)
{
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw Fail{"expected an integer, got '" + s + "'"};
    return v;
}

std::uint64_t to_u64(const std::string& s)
{
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw Fail{"expected a non-negative integer, got '" + s + "'"};
    return v;
}

double to_double(const std::string& s)
{
    if (s == "inf" || s == "+inf")
        return std::numeric_limits<double>::infinity();
    // std::from_chars for double is missing from libstdc++ 11 in some builds
    std::istringstream is(s);
    is.imbue(std::locale::classic());
    double v = 0.0;
    is >> v;
    if (s.empty() || is.fail() || !is.eof())
        throw Fail{"expected a number, got '" + s + "'"};
    return v;
}

bool to_bool(const std::string& s)
{
    if (s == "true" || s == "yes" || s == "1" || s == "on")
        return true;
    if (s == "false" || s == "no" || s == "0" || s == "off")
        return false;
    throw Fail{"expected a boolean, got '" + s + "'"};
}

template <class Fn>
auto wrap(Fn fn)
{
    return [fn](const std::string& v) {
        try {
            fn(v);
        } catch (const ParameterError& e) {
            throw Fail{e.what()};
        }
    };
}

using Setter = std::function<void(const std::string&)>;

std::map<std::string, Setter> setters(RunConfig& c)
{
    SystemConfig& sys = c.spec.base_config;
    ExperimentSpec& ex = c.spec;
    std::map<std::string, Setter> m;
    m["system.n_subcarriers"] = [&](const std::string& v) { sys.n_subcarriers = to_int(v); };
    m["system.n_groups"] = [&](const std::string& v) { sys.n_groups = to_int(v); };
    m["system.bem_order"] = [&](const std::string& v) { sys.bem_order = to_int(v); };
    m["system.channel_length"] = [&](const std::string& v) { sys.channel_length = to_int(v); };
    m["system.sparsity"] = [&](const std::string& v) { sys.sparsity = to_int(v); };
    m["system.n_antennas"] = [&](const std::string& v) { sys.n_antennas = to_int(v); };
    m["system.carrier_hz"] = [&](const std::string& v) { sys.carrier_hz = to_double(v); };
    m["system.bandwidth_hz"] = [&](const std::string& v) { sys.bandwidth_hz = to_double(v); };
    m["system.speed_mps"] = [&](const std::string& v) { sys.speed_mps = to_double(v); };
    m["system.speed_kmh"] = [&](const std::string& v) { sys.speed_mps = to_double(v) / 3.6; };
    m["system.snr_db"] = [&](const std::string& v) { sys.snr_db = to_double(v); };
    m["system.max_antenna_spacing_m"] = [&](const std::string& v) { sys.max_antenna_spacing_m = to_double(v); };

    m["experiment.sweep_variable"] = wrap([&](const std::string& v) { ex.sweep_variable = parse_sweep_variable(v); });
    m["experiment.sweep_values"] = [&](const std::string& v) {
        ex.sweep_values.clear();
        for (const auto& item : split_list(v))
            ex.sweep_values.push_back(to_double(item));
    };
    m["experiment.trials"] = [&](const std::string& v) { ex.trials = to_int(v); };
    m["experiment.methods"] = wrap([&](const std::string& v) {
        ex.methods.clear();
        for (const auto& item : split_list(v))
            ex.methods.push_back(parse_method(item));
    });
    m["experiment.pilot_scheme"] = wrap([&](const std::string& v) { ex.pilot_scheme = parse_scheme(v); });
    m["experiment.pilot_iterations"] = [&](const std::string& v) { ex.pilot_iterations = to_int(v); };
    m["experiment.seed"] = [&](const std::string& v) { ex.seed = to_u64(v); };
    m["experiment.smoothing"] = [&](const std::string& v) { ex.smoothing = to_bool(v); };
    m["experiment.channel_model"] = wrap([&](const std::string& v) { ex.channel_model = parse_channel_model(v); });
    m["experiment.record_runtime"] = [&](const std::string& v) { ex.record_runtime = to_bool(v); };
    m["experiment.threads"] = [&](const std::string& v) { ex.threads = to_int(v); };

    m["output.results"] = [&](const std::string& v) { c.results_path = v; };
    m["output.manifest"] = [&](const std::string& v) { c.manifest_path = v; };
    m["output.pattern"] = [&](const std::string& v) { c.pattern_path = v; };
    return m;
}

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string RunConfig::resolved_manifest_path() const
{
    return manifest_path.empty() ? results_path + ".manifest" : manifest_path;
}

RunConfig parse_run_config(std::istream& is, const std::string& source)
{
    RunConfig config;
    const auto table = setters(config);
    static const std::set<std::string> sections{"system", "experiment", "output"};
    std::set<std::string> seen;
    std::string section;
    std::string raw;
    int line_no = 0;

    auto fail = [&](const std::string& msg) {
        throw ConfigError(line_no, source + ":" + std::to_string(line_no) + ": " + msg);
    };

    while (std::getline(is, raw)) {
        ++line_no;
        std::string line = raw;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos)
            line.erase(comment);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!sections.count(section))
                fail("unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail("expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            fail("key '" + key + "' outside of a section");
        const std::string full = section + "." + key;
        const auto it = table.find(full);
        if (it == table.end())
            fail("unknown key '" + key + "' in [" + section + "]");
        if (!seen.insert(full).second)
            fail("duplicate key '" + key + "'");
        try {
            it->second(value);
        } catch (const Fail& f) {
            fail("invalid value for '" + key + "': " + f.message);
        }
    }
    return config;
}

RunConfig load_run_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(0, path + ": cannot open config file");
    return parse_run_config(in, path);
}

std::string format_run_config(const RunConfig& c)
{
    const SystemConfig& s = c.spec.base_config;
    const ExperimentSpec& e = c.spec;
    std::ostringstream os;
    os << "[system]\n"
       << "n_subcarriers = " << s.n_subcarriers << '\n'
       << "n_groups = " << s.n_groups << '\n'
       << "bem_order = " << s.bem_order << '\n'
       << "channel_length = " << s.channel_length << '\n'
       << "sparsity = " << s.sparsity << '\n'
       << "n_antennas = " << s.n_antennas << '\n'
       << "carrier_hz = " << num(s.carrier_hz) << '\n'
       << "bandwidth_hz = " << num(s.bandwidth_hz) << '\n'
       << "speed_mps = " << num(s.speed_mps) << '\n'
       << "snr_db = " << num(s.snr_db) << '\n'
       << "max_antenna_spacing_m = " << num(s.max_antenna_spacing_m) << '\n'
       << "\n[experiment]\n"
       << "sweep_variable = " << sweep_name(e.sweep_variable) << '\n'
       << "sweep_values = ";
    for (std::size_t i = 0; i < e.sweep_values.size(); ++i)
        os << (i ? ", " : "") << num(e.sweep_values[i]);
    os << "\ntrials = " << e.trials << '\n' << "methods = ";
    for (std::size_t i = 0; i < e.methods.size(); ++i)
        os << (i ? ", " : "") << method_name(e.methods[i]);
    os << "\npilot_scheme = " << scheme_name(e.pilot_scheme) << '\n'
       << "pilot_iterations = " << e.pilot_iterations << '\n'
       << "seed = " << e.seed << '\n'
       << "smoothing = " << (e.smoothing ? "true" : "false") << '\n'
       << "channel_model = " << channel_model_name(e.channel_model) << '\n'
       << "record_runtime = " << (e.record_runtime ? "true" : "false") << '\n'
       << "threads = " << e.threads << '\n'
       << "\n[output]\n"
       << "results = " << c.results_path << '\n'
       << "manifest = " << c.resolved_manifest_path() << '\n'
       << "pattern = " << c.pattern_path << '\n';
    return os.str();
}

} // namespace bdcs
