#pragma once

// One OFDM symbol: pilot/data frame construction and the doubly selective
// channel acting on it.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bdcs/pilot.hpp"
#include "bdcs/types.hpp"

namespace bdcs {

struct TransmitFrame
{
    CMatrix symbols;                 // N_B x N
    std::vector<bool> pilot_mask;    // true on every pilot-group subcarrier (centre and guards)
    std::vector<std::uint8_t> data_bits;
};

struct ReceivedSignal
{
    CVector y;                  // length N, frequency domain
    double signal_power = 0.0;  // mean |Y_clean|^2 per subcarrier
    double noise_variance = 0.0;
};

/// Gray-mapped unit-energy QPSK: 00 -> (1+j), 01 -> (-1+j), 11 -> (-1-j),
/// 10 -> (1-j), all scaled by 1/sqrt(2).
cd qpsk_symbol(std::uint8_t b0, std::uint8_t b1);

/// Number of data subcarriers per antenna (N minus the pilot groups).
int data_subcarrier_count(const PilotPattern& pattern);

std::vector<std::uint8_t> random_bits(std::size_t count, std::uint64_t rng_seed);

/// Pilot centres carry the antenna's +-1 value, guards are zero, all other
/// subcarriers carry QPSK. Consumes 2 * data_subcarrier_count * N_B bits.
TransmitFrame build_transmit_frame(const PilotPattern& pattern, std::span<const std::uint8_t> data_bits);

/// Y = sum_b H_f^{(b)} S^{(b)} + noise with H_f from the time-varying taps
/// (circular convolution in time, then DFT). The noise variance is chosen so
/// the measured receive SNR equals snr_db unless `noise_variance` is given;
/// snr_db = +inf yields a noiseless output.
ReceivedSignal apply_channel(const TransmitFrame& frame, const ChannelTensor& taps, double snr_db,
                             std::uint64_t rng_seed, std::optional<double> noise_variance = std::nullopt);

/// One antenna of a channel tensor as a single-antenna tensor.
ChannelTensor antenna_slice(const ChannelTensor& taps, int b);

} // namespace bdcs
