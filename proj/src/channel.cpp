#include "bdcs/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "bdcs/errors.hpp"
#include "bdcs/rng.hpp"

namespace bdcs {

namespace {

constexpr int kJakesSinusoids = 16;

// ITU-R M.1225 Vehicular B, relative powers in dB, delay order.
constexpr std::array<double, 6> kVehicularBPowerDb{-2.5, 0.0, -12.8, -10.0, -25.2, -16.0};

enum StreamTag : std::uint64_t { kSupportStream = 1, kFadingStream = 2, kCoefficientStream = 3 };

} // namespace

void SystemConfig::validate() const
{
    auto fail = [](const std::string& what) { throw ParameterError(what); };
    if (n_subcarriers <= 0) fail("n_subcarriers must be positive");
    if (n_groups <= 0) fail("n_groups must be positive");
    if (bem_order <= 0 || bem_order % 2 == 0) fail("bem_order must be a positive odd integer");
    if (channel_length <= 0) fail("channel_length must be positive");
    if (channel_length > n_subcarriers) fail("channel_length exceeds n_subcarriers");
    if (sparsity < 0) fail("sparsity must be non-negative");
    if (sparsity > channel_length) fail("sparsity exceeds channel_length");
    if (n_antennas <= 0) fail("n_antennas must be positive");
    if (!(carrier_hz > 0.0)) fail("carrier_hz must be positive");
    if (!(bandwidth_hz > 0.0)) fail("bandwidth_hz must be positive");
    if (!(speed_mps >= 0.0)) fail("speed_mps must be non-negative");
    if (!(max_antenna_spacing_m > 0.0)) fail("max_antenna_spacing_m must be positive");
    if (static_cast<long long>(n_groups) * (2 * bem_order - 1) > n_subcarriers)
        fail("pilot groups do not fit: G(2D-1) > N");
}

double SystemConfig::doppler_hz() const { return speed_mps * carrier_hz / kSpeedOfLight; }

double SystemConfig::normalized_doppler() const { return doppler_hz() * n_subcarriers / bandwidth_hz; }

double SystemConfig::speed_for_normalized_doppler(double nu) const
{
    return nu * bandwidth_hz * kSpeedOfLight / (static_cast<double>(n_subcarriers) * carrier_hz);
}

bool SystemConfig::common_support_valid() const
{
    return max_antenna_spacing_m / kSpeedOfLight <= 1.0 / (10.0 * bandwidth_hz);
}

double SystemConfig::pilot_overhead() const
{
    return static_cast<double>(n_groups) * (2 * bem_order - 1) / n_subcarriers;
}

IndexSet draw_common_support(int channel_length, int sparsity, std::uint64_t rng_seed)
{
    if (sparsity < 0 || channel_length < 0)
        throw ParameterError("support size and channel length must be non-negative");
    if (sparsity > channel_length)
        throw ParameterError("sparsity " + std::to_string(sparsity) + " exceeds channel length " +
                             std::to_string(channel_length));
    IndexSet all(static_cast<std::size_t>(channel_length));
    std::iota(all.begin(), all.end(), 0);
    RandomStream rng(rng_seed, {kSupportStream});
    // partial Fisher-Yates
    for (int i = 0; i < sparsity; ++i)
        std::swap(all[i], all[rng.uniform_int(i, channel_length - 1)]);
    IndexSet support(all.begin(), all.begin() + sparsity);
    std::sort(support.begin(), support.end());
    return support;
}

std::vector<double> vehicular_b_powers(int sparsity)
{
    if (sparsity < 0)
        throw ParameterError("sparsity must be non-negative");
    const int n_itu = static_cast<int>(kVehicularBPowerDb.size());
    std::vector<double> linear(kVehicularBPowerDb.size());
    std::transform(kVehicularBPowerDb.begin(), kVehicularBPowerDb.end(), linear.begin(),
                   [](double db) { return std::pow(10.0, db / 10.0); });

    std::vector<double> powers;
    if (sparsity <= n_itu) {
        std::vector<int> order(kVehicularBPowerDb.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return linear[a] > linear[b]; });
        order.resize(static_cast<std::size_t>(sparsity));
        std::sort(order.begin(), order.end());
        for (int idx : order)
            powers.push_back(linear[idx]);
    } else {
        powers = linear;
        const double mean = std::accumulate(linear.begin(), linear.end(), 0.0) / n_itu;
        powers.resize(static_cast<std::size_t>(sparsity), mean);
    }
    const double total = std::accumulate(powers.begin(), powers.end(), 0.0);
    for (auto& p : powers)
        p /= total;
    return powers;
}

ChannelRealization generate_ds_channel(const SystemConfig& config, const IndexSet& support,
                                       std::uint64_t rng_seed)
{
    config.validate();
    for (int l : support)
        if (l < 0 || l >= config.channel_length)
            throw ParameterError("support index " + std::to_string(l) + " outside [0, L-1]");
    if (!std::is_sorted(support.begin(), support.end()) ||
        std::adjacent_find(support.begin(), support.end()) != support.end())
        throw ParameterError("support must be sorted and free of duplicates");

    ChannelRealization out;
    out.taps = ChannelTensor(config.n_antennas, config.n_subcarriers, config.channel_length);
    out.support = support;
    out.tap_powers = vehicular_b_powers(static_cast<int>(support.size()));
    out.common_support_assumption_holds = config.common_support_valid();

    // Doppler phase advance per time sample
    const double fd_per_sample = config.doppler_hz() / config.bandwidth_hz;
    const double two_pi = 2.0 * std::numbers::pi;

    for (int b = 0; b < config.n_antennas; ++b) {
        for (std::size_t k = 0; k < support.size(); ++k) {
            RandomStream rng(rng_seed, {kFadingStream, static_cast<std::uint64_t>(b),
                                        static_cast<std::uint64_t>(support[k])});
            std::array<double, kJakesSinusoids> freq{};
            std::array<double, kJakesSinusoids> phase{};
            for (int m = 0; m < kJakesSinusoids; ++m) {
                const double angle = two_pi * rng.uniform();
                freq[m] = two_pi * fd_per_sample * std::cos(angle);
                phase[m] = two_pi * rng.uniform();
            }
            const double amp = std::sqrt(out.tap_powers[k] / kJakesSinusoids);
            for (int n = 0; n < config.n_subcarriers; ++n) {
                cd acc{0.0, 0.0};
                for (int m = 0; m < kJakesSinusoids; ++m)
                    acc += std::polar(1.0, freq[m] * n + phase[m]);
                out.taps(b, n, support[k]) = amp * acc;
            }
        }
    }
    return out;
}

ChannelRealization exact_bem_channel(const BemCoefficientMatrix& coeffs, const BemBasis& basis)
{
    if (coeffs.order != basis.order || coeffs.data.cols() != basis.order)
        throw DimensionError("coefficient order does not match the basis");
    if (coeffs.data.rows() != static_cast<Eigen::Index>(coeffs.n_antennas) * coeffs.channel_length)
        throw DimensionError("coefficient matrix has the wrong number of rows");
    if (coeffs.channel_length > basis.n_subcarriers)
        throw DimensionError("channel length exceeds the number of subcarriers");

    ChannelRealization out;
    out.taps = ChannelTensor(coeffs.n_antennas, basis.n_subcarriers, coeffs.channel_length);
    out.support = coeffs.support;
    for (int b = 0; b < coeffs.n_antennas; ++b) {
        const CMatrix series = bem_tap_series(coeffs.antenna_slice(b), basis);
        for (int n = 0; n < basis.n_subcarriers; ++n)
            for (int l = 0; l < coeffs.channel_length; ++l)
                out.taps(b, n, l) = series(n, l);
    }
    double total = 0.0;
    for (int l : out.support) {
        double e = 0.0;
        for (int b = 0; b < coeffs.n_antennas; ++b)
            e += coeffs.data.row(static_cast<Eigen::Index>(b) * coeffs.channel_length + l).squaredNorm();
        out.tap_powers.push_back(e);
        total += e;
    }
    if (total > 0.0)
        for (auto& p : out.tap_powers)
            p /= total;
    return out;
}

BemCoefficientMatrix random_block_sparse_coefficients(int n_antennas, int channel_length, int order,
                                                      const IndexSet& support, std::uint64_t rng_seed)
{
    auto coeffs = BemCoefficientMatrix::zeros(n_antennas, channel_length, order);
    coeffs.support = support;
    RandomStream rng(rng_seed, {kCoefficientStream});
    for (int b = 0; b < n_antennas; ++b)
        for (int l : support) {
            if (l < 0 || l >= channel_length)
                throw ParameterError("support index outside [0, L-1]");
            for (int d = 0; d < order; ++d)
                coeffs.data(static_cast<Eigen::Index>(b) * channel_length + l, d) = rng.complex_normal(1.0);
        }
    return coeffs;
}

BemCoefficientMatrix fit_channel_coefficients(const ChannelTensor& taps, const BemBasis& basis,
                                              const IndexSet& support)
{
    if (taps.n_time() != basis.n_subcarriers)
        throw DimensionError("channel time length does not match the basis");
    auto coeffs = BemCoefficientMatrix::zeros(taps.n_antennas(), taps.n_taps(), basis.order);
    coeffs.support = support;
    CVector series(taps.n_time());
    for (int b = 0; b < taps.n_antennas(); ++b)
        for (int l : support) {
            for (int n = 0; n < taps.n_time(); ++n)
                series(n) = taps(b, n, l);
            coeffs.data.row(static_cast<Eigen::Index>(b) * taps.n_taps() + l) =
                fit_bem_coefficients(series, basis).transpose();
        }
    return coeffs;
}

void write_channel_csv(std::ostream& os, const ChannelTensor& taps)
{
    os << "antenna,time,tap,re,im\n";
    os << std::setprecision(17);
    for (int b = 0; b < taps.n_antennas(); ++b)
        for (int n = 0; n < taps.n_time(); ++n)
            for (int l = 0; l < taps.n_taps(); ++l) {
                const cd v = taps(b, n, l);
                os << b << ',' << n << ',' << l << ',' << v.real() << ',' << v.imag() << '\n';
            }
}

ChannelTensor read_channel_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line != "antenna,time,tap,re,im")
        throw DimensionError("channel dump: missing or unexpected header");
    struct Entry { int b, n, l; cd v; };
    std::vector<Entry> entries;
    int nb = 0, nn = 0, nl = 0;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        Entry e{};
        double re = 0.0, im = 0.0;
        if (!(fields >> e.b >> e.n >> e.l >> re >> im))
            throw DimensionError("channel dump: malformed row '" + line + "'");
        e.v = {re, im};
        nb = std::max(nb, e.b + 1);
        nn = std::max(nn, e.n + 1);
        nl = std::max(nl, e.l + 1);
        entries.push_back(e);
    }
    if (static_cast<long long>(nb) * nn * nl != static_cast<long long>(entries.size()))
        throw DimensionError("channel dump: incomplete tensor");
    ChannelTensor taps(nb, nn, nl);
    for (const auto& e : entries)
        taps(e.b, e.n, e.l) = e.v;
    return taps;
}

} // namespace bdcs
