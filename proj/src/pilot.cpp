#include "bdcs/pilot.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "bdcs/errors.hpp"
#include "bdcs/rng.hpp"

namespace bdcs {

namespace {

std::atomic<bool> g_offset_sign_fault{false};

enum StreamTag : std::uint64_t { kSignStream = 11, kPlacementStream = 12 };

int min_group_spacing(int d) { return 2 * d - 1; }

} // namespace

namespace testing {
void set_offset_sign_fault(bool enabled) { g_offset_sign_fault.store(enabled); }
} // namespace testing

int circular_distance(int a, int b, int n)
{
    const int diff = ((a - b) % n + n) % n;
    return std::min(diff, n - diff);
}

int min_circular_spacing(const IndexSet& centers, int n)
{
    if (centers.size() < 2)
        return n;
    IndexSet sorted = centers;
    std::sort(sorted.begin(), sorted.end());
    int best = n;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        best = std::min(best, sorted[i + 1] - sorted[i]);
    // wrap-around gap between last and first
    best = std::min(best, sorted.front() + n - sorted.back());
    return best;
}

void PilotPattern::validate() const
{
    if (n_subcarriers <= 0 || n_groups <= 0)
        throw ParameterError("pilot pattern needs positive N and G");
    if (bem_order < 1 || bem_order % 2 == 0)
        throw ParameterError("pilot pattern BEM order must be a positive odd integer");
    if (static_cast<int>(centers.size()) != n_groups)
        throw ParameterError("pilot pattern has " + std::to_string(centers.size()) + " centres, expected G = " +
                             std::to_string(n_groups));
    if (!std::is_sorted(centers.begin(), centers.end()))
        throw ParameterError("pilot centres must be sorted");
    for (int c : centers)
        if (c < 0 || c >= n_subcarriers)
            throw ParameterError("pilot centre " + std::to_string(c) + " outside [0, N-1]");
    if (static_cast<long long>(n_groups) * min_group_spacing(bem_order) > n_subcarriers)
        throw ParameterError("pilot groups do not fit: G(2D-1) > N");
    if (min_circular_spacing(centers, n_subcarriers) < min_group_spacing(bem_order))
        throw ParameterError("pilot groups overlap: spacing below 2D-1");
    if (values.cols() != n_groups || values.rows() < 1)
        throw ParameterError("pilot values must be an N_B x G matrix");
    if (((values.array() != 1) && (values.array() != -1)).any())
        throw ParameterError("pilot values must be +1 or -1");
}

std::vector<IndexSet> derived_index_sets(const PilotPattern& pattern)
{
    const int center = (pattern.bem_order - 1) / 2;
    const int sign = g_offset_sign_fault.load() ? -1 : 1;
    std::vector<IndexSet> sets(static_cast<std::size_t>(pattern.bem_order));
    for (int d = 0; d < pattern.bem_order; ++d) {
        const int shift = sign * (d - center);
        for (int c : pattern.centers)
            sets[d].push_back(((c + shift) % pattern.n_subcarriers + pattern.n_subcarriers) % pattern.n_subcarriers);
    }
    return sets;
}

IndexSet guard_band_positions(const PilotPattern& pattern)
{
    IndexSet band;
    const int n = pattern.n_subcarriers;
    for (int c : pattern.centers)
        for (int k = -(pattern.bem_order - 1); k <= pattern.bem_order - 1; ++k)
            band.push_back(((c + k) % n + n) % n);
    std::sort(band.begin(), band.end());
    band.erase(std::unique(band.begin(), band.end()), band.end());
    return band;
}

IndexSet equidistant_positions(int n, int g, int d)
{
    if (n <= 0 || g <= 0 || d <= 0 || d % 2 == 0)
        throw ParameterError("equidistant positions need positive N, G and odd D");
    if (static_cast<long long>(g) * min_group_spacing(d) > n)
        throw ParameterError("infeasible pilot packing: G(2D-1) = " + std::to_string(g * min_group_spacing(d)) +
                             " > N = " + std::to_string(n));
    const int spacing = n / g;
    IndexSet out;
    for (int i = 0; i < g; ++i)
        out.push_back((d - 1 + i * spacing) % n);
    std::sort(out.begin(), out.end());
    return out;
}

SignMatrix random_sign_sequences(int n_antennas, int g, std::uint64_t rng_seed)
{
    if (n_antennas <= 0 || g <= 0)
        throw ParameterError("sign sequences need positive dimensions");
    RandomStream rng(rng_seed, {kSignStream});
    SignMatrix values(n_antennas, g);
    for (int b = 0; b < n_antennas; ++b)
        for (int i = 0; i < g; ++i)
            values(b, i) = rng.uniform_int(0, 1) == 0 ? -1 : 1;
    return values;
}

IndexSet random_feasible_positions(int n, int g, int d, std::uint64_t rng_seed)
{
    if (static_cast<long long>(g) * min_group_spacing(d) > n)
        throw ParameterError("infeasible pilot packing: G(2D-1) > N");
    const int spacing = min_group_spacing(d);
    RandomStream rng(rng_seed, {kPlacementStream});
    constexpr int kAttempts = 64;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        IndexSet chosen;
        std::vector<int> blocked(static_cast<std::size_t>(n), 0);
        bool ok = true;
        for (int i = 0; i < g; ++i) {
            IndexSet free;
            for (int p = 0; p < n; ++p)
                if (!blocked[p])
                    free.push_back(p);
            if (free.empty()) {
                ok = false;
                break;
            }
            const int p = free[rng.uniform_int(0, static_cast<int>(free.size()) - 1)];
            chosen.push_back(p);
            for (int k = -(spacing - 1); k <= spacing - 1; ++k)
                blocked[((p + k) % n + n) % n] = 1;
        }
        if (ok) {
            std::sort(chosen.begin(), chosen.end());
            return chosen;
        }
    }
    // dense packings are hard to hit by random placement; fall back to the
    // equidistant layout shifted by a random offset
    IndexSet fallback = equidistant_positions(n, g, d);
    const int shift = rng.uniform_int(0, n - 1);
    for (auto& p : fallback)
        p = (p + shift) % n;
    std::sort(fallback.begin(), fallback.end());
    return fallback;
}

MeasurementSystem assemble_measurement_matrix(const PilotPattern& pattern, int channel_length)
{
    if (channel_length <= 0 || channel_length > pattern.n_subcarriers)
        throw DimensionError("channel length must lie in [1, N]");
    pattern.validate();

    const int g = pattern.n_groups;
    const int nb = pattern.n_antennas();
    const int n = pattern.n_subcarriers;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double step = -2.0 * std::numbers::pi / n;

    // [W_L]_{S_cen}
    CMatrix partial_dft(g, channel_length);
    for (int i = 0; i < g; ++i)
        for (int l = 0; l < channel_length; ++l)
            partial_dft(i, l) = std::polar(
                scale, step * static_cast<double>((static_cast<long long>(pattern.centers[i]) * l) % n));

    MeasurementSystem meas;
    meas.n_antennas = nb;
    meas.channel_length = channel_length;
    meas.z.resize(g, static_cast<Eigen::Index>(nb) * channel_length);
    for (int b = 0; b < nb; ++b)
        for (int l = 0; l < channel_length; ++l)
            for (int i = 0; i < g; ++i)
                meas.z(i, static_cast<Eigen::Index>(b) * channel_length + l) =
                    static_cast<double>(pattern.values(b, i)) * partial_dft(i, l);

    meas.block_index.resize(static_cast<std::size_t>(channel_length));
    meas.z_s.resize(static_cast<Eigen::Index>(g) * nb, channel_length);
    for (int l = 0; l < channel_length; ++l) {
        for (int b = 0; b < nb; ++b) {
            const int col = b * channel_length + l;
            meas.block_index[l].push_back(col);
            meas.z_s.col(l).segment(static_cast<Eigen::Index>(b) * g, g) = meas.z.col(col);
        }
    }
    return meas;
}

double mutual_coherence(const CMatrix& m)
{
    if (m.cols() < 2)
        throw DimensionError("mutual coherence needs at least two columns");
    Eigen::VectorXd norms = m.colwise().norm().transpose();
    if ((norms.array() == 0.0).any())
        throw DegenerateInputError("mutual coherence of a matrix with a zero column");
    const CMatrix gram = m.adjoint() * m;
    double mu = 0.0;
    for (Eigen::Index i = 0; i < gram.rows(); ++i)
        for (Eigen::Index j = i + 1; j < gram.cols(); ++j)
            mu = std::max(mu, std::abs(gram(i, j)) / (norms(i) * norms(j)));
    return std::min(mu, 1.0);
}

double block_coherence(const PilotPattern& pattern, int channel_length)
{
    return mutual_coherence(assemble_measurement_matrix(pattern, channel_length).z_s);
}

void write_pilot_pattern(std::ostream& os, const PilotPattern& pattern)
{
    os << pattern.n_subcarriers << ' ' << pattern.n_groups << ' ' << pattern.bem_order << ' '
       << pattern.n_antennas() << '\n';
    for (std::size_t i = 0; i < pattern.centers.size(); ++i)
        os << (i ? " " : "") << pattern.centers[i];
    os << '\n';
    for (int b = 0; b < pattern.n_antennas(); ++b) {
        for (int i = 0; i < pattern.values.cols(); ++i)
            os << (i ? " " : "") << pattern.values(b, i);
        os << '\n';
    }
}

PilotPattern read_pilot_pattern(std::istream& is)
{
    auto next_line = [&is](const char* what) {
        std::string line;
        if (!std::getline(is, line))
            throw ParameterError(std::string("pilot pattern: missing ") + what);
        return std::istringstream(line);
    };

    PilotPattern p;
    int nb = 0;
    {
        auto header = next_line("header line");
        if (!(header >> p.n_subcarriers >> p.n_groups >> p.bem_order >> nb) || nb <= 0)
            throw ParameterError("pilot pattern: malformed header, expected `N G D N_B`");
    }
    {
        auto line = next_line("centre line");
        int c = 0;
        while (line >> c)
            p.centers.push_back(c);
    }
    p.values.resize(nb, p.n_groups);
    for (int b = 0; b < nb; ++b) {
        auto line = next_line("pilot value line");
        for (int i = 0; i < p.n_groups; ++i)
            if (!(line >> p.values(b, i)))
                throw ParameterError("pilot pattern: value row " + std::to_string(b) + " too short");
    }
    p.validate();
    return p;
}

} // namespace bdcs
