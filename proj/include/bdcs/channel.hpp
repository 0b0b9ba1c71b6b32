#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bdcs/bem.hpp"
#include "bdcs/types.hpp"

namespace bdcs {

inline constexpr double kSpeedOfLight = 299'792'458.0;

/// Scalar system parameters shared by every module.
struct SystemConfig
{
    int n_subcarriers = 512;       // N
    int n_groups = 24;             // G
    int bem_order = 3;             // D
    int channel_length = 50;       // L
    int sparsity = 4;              // K
    int n_antennas = 8;            // N_B
    double carrier_hz = 2.35e9;
    double bandwidth_hz = 20e6;
    double speed_mps = 300.0 / 3.6;
    double snr_db = 30.0;
    double max_antenna_spacing_m = 1.0;

    /// Throws ParameterError on any violated invariant.
    void validate() const;

    /// Maximum Doppler shift f_d = v f_c / c in Hz.
    double doppler_hz() const;
    /// Doppler per OFDM symbol, f_d N / BW.
    double normalized_doppler() const;
    /// Speed giving the requested normalized Doppler with the other
    /// parameters unchanged.
    double speed_for_normalized_doppler(double nu) const;
    /// s_max / c <= 1 / (10 BW): antennas see a common delay support.
    bool common_support_valid() const;
    /// Pilot overhead G(2D-1)/N.
    double pilot_overhead() const;
};

struct ChannelRealization
{
    ChannelTensor taps;               // N_B x N x L
    IndexSet support;                 // sorted, common to all antennas
    std::vector<double> tap_powers;   // one per support entry, sums to 1
    bool common_support_assumption_holds = true;
};

/// K distinct taps from [0, L-1], uniform without replacement, sorted.
IndexSet draw_common_support(int channel_length, int sparsity, std::uint64_t rng_seed);

/// Relative tap powers for K taps derived from ITU Vehicular B, in delay
/// order, normalized to unit sum.
std::vector<double> vehicular_b_powers(int sparsity);

/// Doubly selective channel: every active (antenna, tap) is an independent
/// sum-of-sinusoids Jakes process with maximum Doppler f_d.
ChannelRealization generate_ds_channel(const SystemConfig& config, const IndexSet& support,
                                       std::uint64_t rng_seed);

/// Channel with zero BEM modeling error, h[n,l] = sum_d v_d[n] theta[d,l].
ChannelRealization exact_bem_channel(const BemCoefficientMatrix& coeffs, const BemBasis& basis);

/// Block-sparse Lambda with i.i.d. CN(0,1) entries on the support rows of
/// every antenna, zero elsewhere.
BemCoefficientMatrix random_block_sparse_coefficients(int n_antennas, int channel_length, int order,
                                                      const IndexSet& support, std::uint64_t rng_seed);

/// Fits BEM coefficients tap-wise for every antenna.
BemCoefficientMatrix fit_channel_coefficients(const ChannelTensor& taps, const BemBasis& basis,
                                              const IndexSet& support);

/// CSV dump, header `antenna,time,tap,re,im`, antenna-major, time-major,
/// tap-minor; values printed with 17 significant digits.
void write_channel_csv(std::ostream& os, const ChannelTensor& taps);
ChannelTensor read_channel_csv(std::istream& is);

} // namespace bdcs
