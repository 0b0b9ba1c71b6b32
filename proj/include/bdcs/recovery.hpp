#pragma once

// Estimation of the CE-BEM coefficient matrix Lambda from received pilots:
// Y_pilot = Z Lambda + noise, with common support over BEM orders and block
// support over antennas.

#include <string>
#include <vector>

#include "bdcs/bem.hpp"
#include "bdcs/pilot.hpp"
#include "bdcs/types.hpp"

namespace bdcs {

enum class Method { LS, SOMP, BSOMP, UplinkDCS };

std::string method_name(Method m);
/// Case-insensitive; throws ParameterError for unknown names.
Method parse_method(const std::string& name);

/// Received pilots arranged as [ [Y]_{S_0} ... [Y]_{S_{D-1}} ].
struct ObservationSet
{
    CMatrix y_blocks;             // G x D
    double noise_variance = 0.0;  // per entry of y_blocks
};

struct RecoveryResult
{
    BemCoefficientMatrix coeffs;
    IndexSet support;
    double residual_norm = 0.0;
    Method method = Method::LS;
    std::vector<double> residual_trace;  // Frobenius residual after each greedy step
    bool exhausted = false;              // greedy selection ran out of candidates
};

struct GreedyOptions
{
    /// Stop as soon as the residual drops below `relative_tolerance * ||Y||_F`.
    /// SOMP always honours it; BSOMP only in this unknown-K mode.
    bool stop_on_residual = false;
    double relative_tolerance = 1e-8;
};

/// Column d holds received[S_d] / sqrt(N); the scaling absorbs the
/// unnormalized tap spectrum so that y_blocks = Z Lambda + noise.
ObservationSet extract_pilot_observations(const CVector& received, const PilotPattern& pattern,
                                          double noise_variance = 0.0);

/// Minimum-norm least-squares solution of A X = B via a complete orthogonal
/// decomposition with relative rank tolerance 1e-10.
CMatrix pseudo_inverse_solve(const CMatrix& a, const CMatrix& b);

RecoveryResult solve_ls(const ObservationSet& obs, const MeasurementSystem& meas);

/// Simultaneous OMP over individual columns of Z; at most
/// sparsity_cols * N_B selections.
RecoveryResult somp(const ObservationSet& obs, const MeasurementSystem& meas, int sparsity_cols,
                    GreedyOptions options = {});

/// Block simultaneous OMP: selects whole tap blocks A_l.
RecoveryResult bsomp(const ObservationSet& obs, const MeasurementSystem& meas, int sparsity_blocks,
                     GreedyOptions options = {});

/// Uplink estimator: every base-station antenna observes the same pilot
/// sequence, so all N_B * D observation columns share one SISO matrix.
/// `shared_pattern` must carry exactly one value row.
std::vector<RecoveryResult> uplink_dcs_estimate(const std::vector<ObservationSet>& per_antenna_obs,
                                                const PilotPattern& shared_pattern, int channel_length,
                                                int sparsity);

/// h^{(b)}[n,l] = sum_d v_d[n] theta^{(b)}[d,l].
ChannelTensor reconstruct_channel(const BemCoefficientMatrix& coeffs, const BemBasis& basis);
ChannelTensor reconstruct_channel(const RecoveryResult& result, const BemBasis& basis);

/// Replaces every supported tap by the straight line through its two
/// half-symbol means. Unsupported taps are copied unchanged.
ChannelTensor linear_smoothing(const ChannelTensor& taps, const IndexSet& support);

inline constexpr double kNmseFloorDb = -300.0;

/// 10 log10(||est - truth||^2 / ||truth||^2), floored at -300 dB.
double nmse_db(const ChannelTensor& estimate, const ChannelTensor& truth);

} // namespace bdcs
