#include "bdcs/sim.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <unsupported/Eigen/FFT>

#include "bdcs/errors.hpp"
#include "bdcs/rng.hpp"

namespace bdcs {

namespace {

enum StreamTag : std::uint64_t { kBitStream = 21, kNoiseStream = 22 };

} // namespace

cd qpsk_symbol(std::uint8_t b0, std::uint8_t b1)
{
    const double a = 1.0 / std::sqrt(2.0);
    return {b1 ? -a : a, b0 ? -a : a};
}

int data_subcarrier_count(const PilotPattern& pattern)
{
    return pattern.n_subcarriers - static_cast<int>(guard_band_positions(pattern).size());
}

std::vector<std::uint8_t> random_bits(std::size_t count, std::uint64_t rng_seed)
{
    RandomStream rng(rng_seed, {kBitStream});
    std::vector<std::uint8_t> bits(count);
    for (auto& b : bits)
        b = static_cast<std::uint8_t>(rng.uniform_int(0, 1));
    return bits;
}

TransmitFrame build_transmit_frame(const PilotPattern& pattern, std::span<const std::uint8_t> data_bits)
{
    pattern.validate();
    const int n = pattern.n_subcarriers;
    const int nb = pattern.n_antennas();
    const int n_data = data_subcarrier_count(pattern);
    const std::size_t needed = 2 * static_cast<std::size_t>(n_data) * nb;
    if (data_bits.size() < needed)
        throw ParameterError("frame needs " + std::to_string(needed) + " data bits, got " +
                             std::to_string(data_bits.size()));

    TransmitFrame frame;
    frame.symbols = CMatrix::Zero(nb, n);
    frame.pilot_mask.assign(static_cast<std::size_t>(n), false);
    for (int p : guard_band_positions(pattern))
        frame.pilot_mask[p] = true;
    for (int i = 0; i < pattern.n_groups; ++i)
        for (int b = 0; b < nb; ++b)
            frame.symbols(b, pattern.centers[i]) = static_cast<double>(pattern.values(b, i));

    std::size_t bit = 0;
    for (int b = 0; b < nb; ++b)
        for (int k = 0; k < n; ++k) {
            if (frame.pilot_mask[k])
                continue;
            frame.symbols(b, k) = qpsk_symbol(data_bits[bit], data_bits[bit + 1]);
            bit += 2;
        }
    frame.data_bits.assign(data_bits.begin(), data_bits.begin() + static_cast<std::ptrdiff_t>(needed));
    return frame;
}

ReceivedSignal apply_channel(const TransmitFrame& frame, const ChannelTensor& taps, double snr_db,
                             std::uint64_t rng_seed, std::optional<double> noise_variance)
{
    const auto nb = static_cast<int>(frame.symbols.rows());
    const auto n = static_cast<int>(frame.symbols.cols());
    if (taps.n_antennas() != nb || taps.n_time() != n)
        throw DimensionError("channel tensor does not match the frame (N_B x N)");

    Eigen::FFT<double> fft;
    const double root_n = std::sqrt(static_cast<double>(n));
    std::vector<cd> freq(static_cast<std::size_t>(n));
    std::vector<cd> time;
    std::vector<cd> rx_time(static_cast<std::size_t>(n), cd{0.0, 0.0});

    for (int b = 0; b < nb; ++b) {
        std::vector<int> active;
        for (int l = 0; l < taps.n_taps(); ++l)
            for (int t = 0; t < n; ++t)
                if (taps(b, t, l) != cd{0.0, 0.0}) {
                    active.push_back(l);
                    break;
                }
        if (active.empty())
            continue;
        for (int k = 0; k < n; ++k)
            freq[k] = frame.symbols(b, k);
        fft.inv(time, freq);  // (1/N) sum_k X[k] e^{+j...}
        for (auto& v : time)
            v *= root_n;      // W^H S
        for (int t = 0; t < n; ++t) {
            cd acc{0.0, 0.0};
            for (int l : active)
                acc += taps(b, t, l) * time[((t - l) % n + n) % n];
            rx_time[t] += acc;
        }
    }

    std::vector<cd> rx_freq;
    fft.fwd(rx_freq, rx_time);
    ReceivedSignal out;
    out.y.resize(n);
    double power = 0.0;
    for (int k = 0; k < n; ++k) {
        out.y(k) = rx_freq[k] / root_n;
        power += std::norm(out.y(k));
    }
    out.signal_power = power / n;

    if (noise_variance)
        out.noise_variance = *noise_variance;
    else if (std::isinf(snr_db) && snr_db > 0)
        out.noise_variance = 0.0;
    else
        out.noise_variance = out.signal_power / std::pow(10.0, snr_db / 10.0);

    if (out.noise_variance > 0.0) {
        RandomStream rng(rng_seed, {kNoiseStream});
        for (int k = 0; k < n; ++k)
            out.y(k) += rng.complex_normal(out.noise_variance);
    }
    return out;
}

ChannelTensor antenna_slice(const ChannelTensor& taps, int b)
{
    if (b < 0 || b >= taps.n_antennas())
        throw DimensionError("antenna index out of range");
    ChannelTensor out(1, taps.n_time(), taps.n_taps());
    for (int t = 0; t < taps.n_time(); ++t)
        for (int l = 0; l < taps.n_taps(); ++l)
            out(0, t, l) = taps(b, t, l);
    return out;
}

} // namespace bdcs
