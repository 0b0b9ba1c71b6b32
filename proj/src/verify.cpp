#include "bdcs/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "bdcs/bem.hpp"
#include "bdcs/channel.hpp"
#include "bdcs/rng.hpp"
#include "bdcs/sim.hpp"

namespace bdcs {

namespace {

constexpr std::uint64_t kVerifySeed = 0x5eed'0f'c0ffeeULL;

CMatrix random_matrix(int rows, int cols, RandomStream& rng)
{
    CMatrix m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r)
            m(r, c) = rng.complex_normal(1.0);
    return m;
}

double rel_diff(const CMatrix& a, const CMatrix& b)
{
    const double scale = std::max(b.norm(), 1e-300);
    return (a - b).norm() / scale;
}

std::string fmt(const char* label, double v)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s = %.3e", label, v);
    return buf;
}

CheckResult check_circulant()
{
    RandomStream rng(kVerifySeed, {1});
    double worst = 0.0;
    for (int n : {16, 64}) {
        const CVector theta = random_matrix(8, 1, rng);
        worst = std::max(worst, rel_diff(circulant_via_dft(theta, n), circulant(theta, n)));
    }
    return {"circulant_diagonalization", worst < 1e-12, fmt("max relative error", worst)};
}

CheckResult check_path_equivalence()
{
    RandomStream rng(kVerifySeed, {2});
    const int n = 64;
    const BemBasis basis = build_cebem_basis(n, 3);
    const CMatrix theta = random_matrix(8, 3, rng);
    const CMatrix h_t = bem_to_time_channel(theta, basis);
    const CMatrix via_time = time_to_freq_channel(h_t);
    const CMatrix direct = bem_freq_channel(theta, basis);
    const double e1 = rel_diff(via_time, direct);
    const double e2 = rel_diff(time_channel_matrix(bem_tap_series(theta, basis)), h_t);
    const double worst = std::max(e1, e2);
    return {"path_equivalence", worst < 1e-10, fmt("max relative error", worst)};
}

CheckResult check_energy()
{
    RandomStream rng(kVerifySeed, {3});
    const CMatrix h_t = random_matrix(32, 32, rng);
    const double e = std::abs(time_to_freq_channel(h_t).norm() - h_t.norm()) / h_t.norm();
    return {"energy_preservation", e < 1e-12, fmt("relative difference", e)};
}

// V_d = W diag(v_d) W^H moves energy from subcarrier s to exactly one other
// subcarrier; that subcarrier must be the matching entry of S_d.
CheckResult check_index_consistency()
{
    const int n = 64;
    const int order = 3;
    PilotPattern pattern;
    pattern.n_subcarriers = n;
    pattern.n_groups = 4;
    pattern.bem_order = order;
    pattern.centers = {0, 16, 33, 50};
    pattern.values = SignMatrix::Ones(1, 4);
    const BemBasis basis = build_cebem_basis(n, order);
    const CMatrix w = unitary_dft(n);
    const auto sets = derived_index_sets(pattern);
    for (int d = 0; d < order; ++d) {
        const CMatrix v_d = w * basis.matrix.col(d).asDiagonal() * w.adjoint();
        for (int g = 0; g < pattern.n_groups; ++g) {
            Eigen::Index row = 0;
            v_d.col(pattern.centers[g]).cwiseAbs().maxCoeff(&row);
            if (row != sets[d][g])
                return {"index_consistency", false,
                        "S_" + std::to_string(d) + "[" + std::to_string(g) + "] = " + std::to_string(sets[d][g]) +
                            ", shift operator maps the centre to " + std::to_string(row)};
        }
    }
    return {"index_consistency", true, "all derived sets match the shift operators"};
}

CheckResult check_block_flatten()
{
    RandomStream rng(kVerifySeed, {5});
    const int n = 128;
    const int g = 8;
    const int l = 6;
    PilotPattern pattern;
    pattern.n_subcarriers = n;
    pattern.n_groups = g;
    pattern.bem_order = 3;
    pattern.centers = random_feasible_positions(n, g, 3, derive_seed(kVerifySeed, {5, 1}));
    pattern.values = random_sign_sequences(3, g, derive_seed(kVerifySeed, {5, 2}));
    const MeasurementSystem meas = assemble_measurement_matrix(pattern, l);
    double worst = 0.0;
    for (int a = 0; a < l; ++a) {
        CMatrix za(g, meas.n_antennas);
        for (int b = 0; b < meas.n_antennas; ++b)
            za.col(b) = meas.z.col(meas.block_index[a][b]);
        for (int c = 0; c < l; ++c) {
            CMatrix zc(g, meas.n_antennas);
            for (int b = 0; b < meas.n_antennas; ++b)
                zc.col(b) = meas.z.col(meas.block_index[c][b]);
            const cd block_inner = (za.adjoint() * zc).trace();
            const cd flat_inner = meas.z_s.col(a).dot(meas.z_s.col(c));
            worst = std::max(worst, std::abs(block_inner - flat_inner));
        }
    }
    return {"block_flatten_isometry", worst < 1e-10, fmt("max inner-product difference", worst)};
}

CheckResult check_forward_purity()
{
    const int n = 128;
    SystemConfig config;
    config.n_subcarriers = n;
    config.n_groups = 8;
    config.bem_order = 3;
    config.channel_length = 10;
    config.sparsity = 3;
    config.n_antennas = 3;
    PilotPattern pattern;
    pattern.n_subcarriers = n;
    pattern.n_groups = config.n_groups;
    pattern.bem_order = config.bem_order;
    pattern.centers = random_feasible_positions(n, config.n_groups, 3, derive_seed(kVerifySeed, {6, 1}));
    pattern.values = random_sign_sequences(config.n_antennas, config.n_groups, derive_seed(kVerifySeed, {6, 2}));
    const BemBasis basis = build_cebem_basis(n, config.bem_order);
    const IndexSet support = draw_common_support(config.channel_length, config.sparsity, derive_seed(kVerifySeed, {6, 3}));
    const auto coeffs = random_block_sparse_coefficients(config.n_antennas, config.channel_length, config.bem_order,
                                                         support, derive_seed(kVerifySeed, {6, 4}));
    const ChannelRealization channel = exact_bem_channel(coeffs, basis);
    const auto bits = random_bits(2 * static_cast<std::size_t>(data_subcarrier_count(pattern)) * config.n_antennas,
                                  derive_seed(kVerifySeed, {6, 5}));
    const TransmitFrame frame = build_transmit_frame(pattern, bits);
    const ReceivedSignal rx = apply_channel(frame, channel.taps, std::numeric_limits<double>::infinity(), 0);
    const ObservationSet obs = extract_pilot_observations(rx.y, pattern);
    const MeasurementSystem meas = assemble_measurement_matrix(pattern, config.channel_length);
    const double r = (obs.y_blocks - meas.z * coeffs.data).norm() / obs.y_blocks.norm();
    return {"forward_model_purity", r < 1e-9, fmt("relative residual", r)};
}

// Greedy selection is not guaranteed to find the minimum-residual support,
// so the check asks for exact oracle recovery of the truth and at least 80%
// BSOMP agreement on BDSO-designed pilots.
CheckResult check_tiny_oracle()
{
    SystemConfig config;
    config.n_subcarriers = 64;
    config.n_groups = 6;
    config.bem_order = 3;
    config.channel_length = 8;
    config.sparsity = 2;
    config.n_antennas = 2;
    const int instances = 50;
    int matches = 0;
    for (int t = 0; t < instances; ++t) {
        const auto tag = static_cast<std::uint64_t>(t);
        PilotPattern pattern;
        pattern.n_subcarriers = config.n_subcarriers;
        pattern.n_groups = config.n_groups;
        pattern.bem_order = config.bem_order;
        pattern.values = random_sign_sequences(config.n_antennas, config.n_groups, derive_seed(kVerifySeed, {7, 1, tag}));
        pattern.centers = bdso_optimize(config, pattern.values, 200, derive_seed(kVerifySeed, {7, 2, tag})).centers;
        const MeasurementSystem meas = assemble_measurement_matrix(pattern, config.channel_length);
        const IndexSet support = draw_common_support(config.channel_length, config.sparsity, derive_seed(kVerifySeed, {7, 3, tag}));
        const auto coeffs = random_block_sparse_coefficients(config.n_antennas, config.channel_length, config.bem_order,
                                                             support, derive_seed(kVerifySeed, {7, 4, tag}));
        ObservationSet obs;
        obs.y_blocks = meas.z * coeffs.data;
        const OracleSupport oracle = exhaustive_block_support(obs, meas, config.sparsity);
        if (oracle.support != support || oracle.residual_norm > 1e-9 * obs.y_blocks.norm())
            return {"tiny_bruteforce_oracle", false, "instance " + std::to_string(t) + ": oracle missed the true support"};
        if (bsomp(obs, meas, config.sparsity).support == oracle.support)
            ++matches;
    }
    const std::string detail = std::to_string(matches) + "/" + std::to_string(instances) + " BSOMP supports equal the oracle";
    return {"tiny_bruteforce_oracle", matches * 10 >= instances * 8, detail};
}

CheckResult check_overhead()
{
    SystemConfig config;
    config.n_subcarriers = 4096;
    config.n_groups = 192;
    config.bem_order = 3;
    const double o = config.pilot_overhead();
    return {"pilot_overhead", o == 0.234375, fmt("G(2D-1)/N", o)};
}

} // namespace

OracleSupport exhaustive_block_support(const ObservationSet& obs, const MeasurementSystem& meas, int k)
{
    const int l = meas.channel_length;
    OracleSupport best;
    best.residual_norm = std::numeric_limits<double>::infinity();
    std::vector<bool> pick(static_cast<std::size_t>(l), false);
    std::fill(pick.begin(), pick.begin() + k, true);
    // prev_permutation over a descending mask walks subsets in lexicographic order
    do {
        IndexSet taps;
        std::vector<int> cols;
        for (int t = 0; t < l; ++t)
            if (pick[t]) {
                taps.push_back(t);
                for (int c : meas.block_index[t])
                    cols.push_back(c);
            }
        CMatrix a(meas.z.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t i = 0; i < cols.size(); ++i)
            a.col(static_cast<Eigen::Index>(i)) = meas.z.col(cols[i]);
        const CMatrix x = pseudo_inverse_solve(a, obs.y_blocks);
        const double r = (obs.y_blocks - a * x).norm();
        if (r < best.residual_norm) {
            best.residual_norm = r;
            best.support = taps;
        }
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return best;
}

std::vector<CheckResult> run_builtin_checks()
{
    return {check_circulant(),      check_path_equivalence(), check_energy(),      check_index_consistency(),
            check_block_flatten(),  check_forward_purity(),   check_tiny_oracle(), check_overhead()};
}

} // namespace bdcs
