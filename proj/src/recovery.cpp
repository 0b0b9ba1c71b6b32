#include "bdcs/recovery.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "bdcs/errors.hpp"

namespace bdcs {

namespace {

constexpr double kRankTolerance = 1e-10;

CMatrix gather_columns(const CMatrix& z, const IndexSet& cols)
{
    CMatrix out(z.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k)
        out.col(static_cast<Eigen::Index>(k)) = z.col(cols[k]);
    return out;
}

void check_shapes(const ObservationSet& obs, const MeasurementSystem& meas)
{
    if (meas.z.size() == 0)
        throw DimensionError("empty measurement matrix");
    if (obs.y_blocks.rows() != meas.z.rows())
        throw DimensionError("observation rows (" + std::to_string(obs.y_blocks.rows()) +
                             ") do not match measurement rows (" + std::to_string(meas.z.rows()) + ")");
    if (meas.z.cols() != static_cast<Eigen::Index>(meas.n_antennas) * meas.channel_length)
        throw DimensionError("measurement matrix columns do not equal N_B * L");
}

// Scatters the LS solution of the selected columns back into Lambda.
RecoveryResult finish(const ObservationSet& obs, const MeasurementSystem& meas, const IndexSet& cols,
                      const CMatrix& solution, Method method)
{
    RecoveryResult r;
    r.method = method;
    r.coeffs = BemCoefficientMatrix::zeros(meas.n_antennas, meas.channel_length,
                                           static_cast<int>(obs.y_blocks.cols()));
    for (std::size_t k = 0; k < cols.size(); ++k)
        r.coeffs.data.row(cols[k]) = solution.row(static_cast<Eigen::Index>(k));
    for (int c : cols)
        r.support.push_back(c % meas.channel_length);
    std::sort(r.support.begin(), r.support.end());
    r.support.erase(std::unique(r.support.begin(), r.support.end()), r.support.end());
    r.coeffs.support = r.support;
    if (cols.empty())
        r.residual_norm = obs.y_blocks.norm();
    else
        r.residual_norm = (obs.y_blocks - gather_columns(meas.z, cols) * solution).norm();
    return r;
}

} // namespace

std::string method_name(Method m)
{
    switch (m) {
    case Method::LS: return "LS";
    case Method::SOMP: return "SOMP";
    case Method::BSOMP: return "BSOMP";
    case Method::UplinkDCS: return "UplinkDCS";
    }
    return "unknown";
}

Method parse_method(const std::string& name)
{
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "ls") return Method::LS;
    if (lower == "somp") return Method::SOMP;
    if (lower == "bsomp") return Method::BSOMP;
    if (lower == "uplinkdcs" || lower == "uplink") return Method::UplinkDCS;
    throw ParameterError("unknown recovery method '" + name + "'");
}

ObservationSet extract_pilot_observations(const CVector& received, const PilotPattern& pattern,
                                          double noise_variance)
{
    if (received.size() != pattern.n_subcarriers)
        throw DimensionError("received vector length " + std::to_string(received.size()) +
                             " does not match N = " + std::to_string(pattern.n_subcarriers));
    const auto sets = derived_index_sets(pattern);
    const double scale = 1.0 / std::sqrt(static_cast<double>(pattern.n_subcarriers));
    ObservationSet obs;
    obs.y_blocks.resize(pattern.n_groups, pattern.bem_order);
    for (int d = 0; d < pattern.bem_order; ++d)
        for (int i = 0; i < pattern.n_groups; ++i) {
            const int idx = sets[d][i];
            if (idx < 0 || idx >= received.size())
                throw DimensionError("pilot index out of range");
            obs.y_blocks(i, d) = received(idx) * scale;
        }
    obs.noise_variance = noise_variance * scale * scale;
    return obs;
}

CMatrix pseudo_inverse_solve(const CMatrix& a, const CMatrix& b)
{
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod;
    cod.setThreshold(kRankTolerance);
    cod.compute(a);
    return cod.solve(b);
}

RecoveryResult solve_ls(const ObservationSet& obs, const MeasurementSystem& meas)
{
    check_shapes(obs, meas);
    IndexSet all(static_cast<std::size_t>(meas.z.cols()));
    for (std::size_t c = 0; c < all.size(); ++c)
        all[c] = static_cast<int>(c);
    RecoveryResult r = finish(obs, meas, all, pseudo_inverse_solve(meas.z, obs.y_blocks), Method::LS);
    r.residual_trace.push_back(r.residual_norm);
    return r;
}

RecoveryResult somp(const ObservationSet& obs, const MeasurementSystem& meas, int sparsity_cols,
                    GreedyOptions options)
{
    check_shapes(obs, meas);
    const auto n_cols = static_cast<int>(meas.z.cols());
    if (sparsity_cols < 0 || static_cast<long long>(sparsity_cols) * meas.n_antennas > n_cols)
        throw ParameterError("SOMP sparsity exceeds the number of columns");
    const int max_selections = sparsity_cols * meas.n_antennas;

    const Eigen::VectorXd col_norms = meas.z.colwise().norm().transpose();
    const double y_norm = obs.y_blocks.norm();
    const double tolerance = options.relative_tolerance * y_norm;

    IndexSet cols;
    std::vector<char> used(static_cast<std::size_t>(n_cols), 0);
    CMatrix residual = obs.y_blocks;
    CMatrix solution(0, obs.y_blocks.cols());
    std::vector<double> trace;
    bool exhausted = false;

    for (int it = 0; it < max_selections; ++it) {
        if (y_norm == 0.0 || residual.norm() <= tolerance)
            break;
        const CMatrix corr = meas.z.adjoint() * residual;  // n_cols x D
        int best = -1;
        double best_score = -1.0;
        for (int c = 0; c < n_cols; ++c) {
            if (used[c] || col_norms(c) == 0.0)
                continue;
            const double score = corr.row(c).cwiseAbs().sum() / col_norms(c);
            if (score > best_score) {
                best_score = score;
                best = c;
            }
        }
        if (best < 0) {
            exhausted = true;
            break;
        }
        used[best] = 1;
        cols.push_back(best);
        const CMatrix sub = gather_columns(meas.z, cols);
        solution = pseudo_inverse_solve(sub, obs.y_blocks);
        residual = obs.y_blocks - sub * solution;
        trace.push_back(residual.norm());
    }

    RecoveryResult r = finish(obs, meas, cols, solution, Method::SOMP);
    r.residual_trace = std::move(trace);
    r.exhausted = exhausted;
    return r;
}

RecoveryResult bsomp(const ObservationSet& obs, const MeasurementSystem& meas, int sparsity_blocks,
                     GreedyOptions options)
{
    check_shapes(obs, meas);
    const int n_blocks = meas.channel_length;
    if (sparsity_blocks < 0 || sparsity_blocks > n_blocks)
        throw ParameterError("BSOMP sparsity exceeds the channel length");
    if (static_cast<int>(meas.block_index.size()) != n_blocks)
        throw DimensionError("measurement system has no block index");

    const double y_norm = obs.y_blocks.norm();
    const double tolerance = options.relative_tolerance * y_norm;

    IndexSet cols;
    std::vector<char> used(static_cast<std::size_t>(n_blocks), 0);
    CMatrix residual = obs.y_blocks;
    CMatrix solution(0, obs.y_blocks.cols());
    std::vector<double> trace;
    bool exhausted = false;

    for (int it = 0; it < sparsity_blocks; ++it) {
        if (y_norm == 0.0)
            break;
        if (options.stop_on_residual && residual.norm() <= tolerance)
            break;
        const CMatrix corr = meas.z.adjoint() * residual;  // (N_B L) x D
        int best = -1;
        double best_score = -1.0;
        for (int l = 0; l < n_blocks; ++l) {
            if (used[l])
                continue;
            double score = 0.0;
            for (int c : meas.block_index[l])
                score += corr.row(c).squaredNorm();
            if (score > best_score) {
                best_score = score;
                best = l;
            }
        }
        if (best < 0) {
            exhausted = true;
            break;
        }
        used[best] = 1;
        cols.insert(cols.end(), meas.block_index[best].begin(), meas.block_index[best].end());
        const CMatrix sub = gather_columns(meas.z, cols);
        solution = pseudo_inverse_solve(sub, obs.y_blocks);
        residual = obs.y_blocks - sub * solution;
        trace.push_back(residual.norm());
    }

    RecoveryResult r = finish(obs, meas, cols, solution, Method::BSOMP);
    r.residual_trace = std::move(trace);
    r.exhausted = exhausted;
    return r;
}

std::vector<RecoveryResult> uplink_dcs_estimate(const std::vector<ObservationSet>& per_antenna_obs,
                                                const PilotPattern& shared_pattern, int channel_length,
                                                int sparsity)
{
    if (shared_pattern.n_antennas() != 1)
        throw DimensionError("uplink estimation needs a single shared pilot sequence");
    if (per_antenna_obs.empty())
        throw DimensionError("uplink estimation needs at least one antenna");
    const auto g = per_antenna_obs.front().y_blocks.rows();
    const auto d = per_antenna_obs.front().y_blocks.cols();
    for (const auto& o : per_antenna_obs)
        if (o.y_blocks.rows() != g || o.y_blocks.cols() != d)
            throw DimensionError("inconsistent uplink observation shapes");

    const auto nb = static_cast<Eigen::Index>(per_antenna_obs.size());
    ObservationSet stacked;
    stacked.y_blocks.resize(g, nb * d);
    for (Eigen::Index b = 0; b < nb; ++b)
        stacked.y_blocks.middleCols(b * d, d) = per_antenna_obs[b].y_blocks;
    stacked.noise_variance = per_antenna_obs.front().noise_variance;

    const MeasurementSystem meas = assemble_measurement_matrix(shared_pattern, channel_length);
    const RecoveryResult joint = somp(stacked, meas, sparsity, GreedyOptions{true, 1e-8});

    std::vector<RecoveryResult> out;
    for (Eigen::Index b = 0; b < nb; ++b) {
        RecoveryResult r;
        r.method = Method::UplinkDCS;
        r.coeffs = BemCoefficientMatrix::zeros(1, channel_length, static_cast<int>(d));
        r.coeffs.data = joint.coeffs.data.middleCols(b * d, d);
        r.support = joint.support;
        r.coeffs.support = joint.support;
        const CMatrix fitted = meas.z * r.coeffs.data;
        r.residual_norm = (per_antenna_obs[b].y_blocks - fitted).norm();
        r.residual_trace = joint.residual_trace;
        r.exhausted = joint.exhausted;
        out.push_back(std::move(r));
    }
    return out;
}

ChannelTensor reconstruct_channel(const BemCoefficientMatrix& coeffs, const BemBasis& basis)
{
    if (coeffs.order != basis.order || coeffs.data.cols() != basis.order)
        throw DimensionError("coefficient order does not match the basis");
    if (coeffs.data.rows() != static_cast<Eigen::Index>(coeffs.n_antennas) * coeffs.channel_length)
        throw DimensionError("coefficient matrix has the wrong number of rows");
    ChannelTensor taps(coeffs.n_antennas, basis.n_subcarriers, coeffs.channel_length);
    for (int b = 0; b < coeffs.n_antennas; ++b) {
        const CMatrix series = bem_tap_series(coeffs.antenna_slice(b), basis);
        for (int n = 0; n < basis.n_subcarriers; ++n)
            for (int l = 0; l < coeffs.channel_length; ++l)
                taps(b, n, l) = series(n, l);
    }
    return taps;
}

ChannelTensor reconstruct_channel(const RecoveryResult& result, const BemBasis& basis)
{
    return reconstruct_channel(result.coeffs, basis);
}

double nmse_db(const ChannelTensor& estimate, const ChannelTensor& truth)
{
    if (!estimate.same_shape(truth))
        throw DimensionError("NMSE operands differ in shape");
    const double reference = truth.squared_norm();
    if (reference == 0.0)
        throw DegenerateInputError("NMSE against an all-zero truth");
    double err = 0.0;
    for (std::size_t k = 0; k < truth.data().size(); ++k)
        err += std::norm(estimate.data()[k] - truth.data()[k]);
    if (err == 0.0)
        return kNmseFloorDb;
    return std::max(kNmseFloorDb, 10.0 * std::log10(err / reference));
}

} // namespace bdcs
