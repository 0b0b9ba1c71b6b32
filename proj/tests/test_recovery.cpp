#include <doctest.h>

#include <cmath>
#include <limits>

#include <unsupported/Eigen/KroneckerProduct>

#include "bdcs/channel.hpp"
#include "bdcs/errors.hpp"
#include "bdcs/experiment.hpp"
#include "bdcs/recovery.hpp"
#include "bdcs/rng.hpp"
#include "bdcs/sim.hpp"
#include "bdcs/verify.hpp"
#include "helpers.hpp"

using namespace bdcs;

namespace {

struct Instance
{
    PilotPattern pattern;
    MeasurementSystem meas;
    BemCoefficientMatrix coeffs;
    ObservationSet obs;
};

SystemConfig config_for(int n, int g, int l, int k, int nb)
{
    SystemConfig c;
    c.n_subcarriers = n;
    c.n_groups = g;
    c.bem_order = 3;
    c.channel_length = l;
    c.sparsity = k;
    c.n_antennas = nb;
    return c;
}

// Noiseless Y = Z Lambda with BDSO-designed or random pilot positions.
Instance make_instance(const SystemConfig& c, std::uint64_t seed, bool bdso)
{
    Instance in;
    in.pattern.n_subcarriers = c.n_subcarriers;
    in.pattern.n_groups = c.n_groups;
    in.pattern.bem_order = c.bem_order;
    in.pattern.values = random_sign_sequences(c.n_antennas, c.n_groups, derive_seed(seed, {1}));
    in.pattern.centers = bdso ? bdso_optimize(c, in.pattern.values, 200, derive_seed(seed, {2})).centers
                              : random_feasible_positions(c.n_subcarriers, c.n_groups, c.bem_order, derive_seed(seed, {2}));
    in.meas = assemble_measurement_matrix(in.pattern, c.channel_length);
    const IndexSet sup = draw_common_support(c.channel_length, c.sparsity, derive_seed(seed, {3}));
    in.coeffs = random_block_sparse_coefficients(c.n_antennas, c.channel_length, c.bem_order, sup, derive_seed(seed, {4}));
    in.obs.y_blocks = in.meas.z * in.coeffs.data;
    return in;
}

double relative_error(const CMatrix& est, const CMatrix& truth) { return (est - truth).norm() / truth.norm(); }

ChannelTensor tensor_from(const std::vector<cd>& values, int nb, int n, int l)
{
    ChannelTensor t(nb, n, l);
    t.data() = values;
    return t;
}

} // namespace

TEST_CASE("method names")
{
    for (Method m : {Method::LS, Method::SOMP, Method::BSOMP, Method::UplinkDCS})
        CHECK(parse_method(method_name(m)) == m);
    CHECK(parse_method("bsomp") == Method::BSOMP);
    CHECK_THROWS_AS(parse_method("ssp"), ParameterError);
}

TEST_CASE("observation extraction examples")
{
    PilotPattern p;
    p.n_subcarriers = 64;
    p.n_groups = 4;
    p.bem_order = 3;
    p.centers = {3, 20, 37, 50};
    p.values = SignMatrix::Ones(2, 4);
    CVector y = CVector::Zero(64);
    y(37) = 8.0;  // sqrt(64)
    const ObservationSet obs = extract_pilot_observations(y, p, 64.0);
    REQUIRE(obs.y_blocks.rows() == 4);
    REQUIRE(obs.y_blocks.cols() == 3);
    CHECK(obs.y_blocks(2, 1) == cd(1.0));
    CHECK(obs.y_blocks.cwiseAbs().sum() == doctest::Approx(1.0));
    CHECK(obs.noise_variance == doctest::Approx(1.0));
    CHECK(extract_pilot_observations(CVector::Zero(64), p).y_blocks.norm() == 0.0);
    CHECK_THROWS_AS(extract_pilot_observations(CVector::Zero(63), p), DimensionError);

    // columns are S_0, S_1, S_2 in centre order
    CVector ramp(64);
    for (int k = 0; k < 64; ++k)
        ramp(k) = double(k) * 8.0;
    const ObservationSet r = extract_pilot_observations(ramp, p);
    CHECK(r.y_blocks(0, 0) == cd(2.0));
    CHECK(r.y_blocks(3, 2) == cd(51.0));
}

TEST_CASE("observations from the simulated frame equal Z Lambda")
{
    const SystemConfig c = config_for(128, 8, 10, 3, 3);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Instance in = make_instance(c, seed, false);
        const BemBasis basis = build_cebem_basis(c.n_subcarriers, c.bem_order);
        const ChannelRealization ch = exact_bem_channel(in.coeffs, basis);
        const auto bits = random_bits(2 * static_cast<std::size_t>(data_subcarrier_count(in.pattern)) * c.n_antennas, seed);
        const ReceivedSignal rx = apply_channel(build_transmit_frame(in.pattern, bits), ch.taps,
                                                std::numeric_limits<double>::infinity(), seed);
        const ObservationSet obs = extract_pilot_observations(rx.y, in.pattern);
        CHECK(relative_error(obs.y_blocks, in.obs.y_blocks) < 1e-9);
    }
}

TEST_CASE("pseudo-inverse agrees with the normal equations on full-rank systems")
{
    RandomStream rng(5);
    CMatrix a(12, 5), b(12, 3);
    for (int i = 0; i < 12; ++i) {
        for (int j = 0; j < 5; ++j)
            a(i, j) = rng.complex_normal(1.0);
        for (int j = 0; j < 3; ++j)
            b(i, j) = rng.complex_normal(1.0);
    }
    const CMatrix expected = (a.adjoint() * a).ldlt().solve(a.adjoint() * b);
    CHECK(testutil::max_abs(pseudo_inverse_solve(a, b) - expected) < 1e-10);
    // minimum-norm solution in the underdetermined case: x = A^H (A A^H)^{-1} b
    const CMatrix wide = a.transpose();
    const CMatrix rhs = b.topRows(5);
    const CMatrix min_norm = wide.adjoint() * (wide * wide.adjoint()).ldlt().solve(rhs);
    CHECK(testutil::max_abs(pseudo_inverse_solve(wide, rhs) - min_norm) < 1e-10);
}

TEST_CASE("least squares examples")
{
    const SystemConfig c = config_for(64, 12, 4, 2, 1);
    const Instance in = make_instance(c, 3, false);
    const RecoveryResult r = solve_ls(in.obs, in.meas);
    CHECK(r.method == Method::LS);
    CHECK(testutil::max_abs(r.coeffs.data - in.coeffs.data) < 1e-8);
    CHECK(r.support.size() == 4);
    CHECK(r.residual_norm < 1e-10);

    ObservationSet zero;
    zero.y_blocks = CMatrix::Zero(12, 3);
    CHECK(solve_ls(zero, in.meas).coeffs.data.norm() == 0.0);

    ObservationSet wrong;
    wrong.y_blocks = CMatrix::Zero(11, 3);
    CHECK_THROWS_AS(solve_ls(wrong, in.meas), DimensionError);
}

TEST_CASE("least squares is near 0 dB in the underdetermined regime")
{
    const SystemConfig c = config_for(512, 24, 50, 4, 8);
    const BemBasis basis = build_cebem_basis(c.n_subcarriers, c.bem_order);
    double worst = -1e9;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Instance in = make_instance(c, seed, false);
        const ChannelTensor truth = reconstruct_channel(in.coeffs, basis);
        const double ls = nmse_db(reconstruct_channel(solve_ls(in.obs, in.meas), basis), truth);
        CHECK(ls > -3.0);
        CHECK(ls <= 0.0);  // minimum-norm solution never overshoots the truth energy
        worst = std::max(worst, ls);
    }
    CHECK(worst > -3.0);
}

TEST_CASE("SOMP examples")
{
    const SystemConfig c = config_for(64, 8, 6, 1, 2);
    Instance in = make_instance(c, 4, false);
    in.coeffs.data.setZero();
    in.coeffs.data.row(6 + 2) << 1.0, cd(0, 2), -0.5;  // antenna 1, tap 2
    in.obs.y_blocks = in.meas.z * in.coeffs.data;
    const RecoveryResult r = somp(in.obs, in.meas, 1);
    CHECK(r.residual_trace.size() == 1);
    CHECK(r.support == IndexSet{2});
    CHECK(testutil::max_abs(r.coeffs.data - in.coeffs.data) < 1e-10);

    ObservationSet zero;
    zero.y_blocks = CMatrix::Zero(8, 3);
    const RecoveryResult z = somp(zero, in.meas, 2);
    CHECK(z.support.empty());
    CHECK(z.coeffs.data.norm() == 0.0);

    CHECK_THROWS_AS(somp(in.obs, in.meas, 7), ParameterError);
}

TEST_CASE("SOMP recovers small well-conditioned instances")
{
    const SystemConfig c = config_for(128, 12, 8, 2, 2);
    int good = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Instance in = make_instance(c, seed, true);
        const RecoveryResult r = somp(in.obs, in.meas, c.sparsity);
        CHECK(r.support.size() <= static_cast<std::size_t>(c.sparsity * c.n_antennas));
        const bool superset = std::includes(r.support.begin(), r.support.end(), in.coeffs.support.begin(),
                                            in.coeffs.support.end());
        if (superset && relative_error(r.coeffs.data, in.coeffs.data) < 1e-6)
            ++good;
    }
    CHECK(good >= 95);
}

TEST_CASE("BSOMP examples")
{
    const SystemConfig c = config_for(64, 8, 6, 1, 2);
    Instance in = make_instance(c, 6, false);
    in.coeffs.data.setZero();
    in.coeffs.data.row(4) << 1.0, 2.0, 3.0;
    in.coeffs.data.row(6 + 4) << cd(0, 1), -1.0, 0.5;
    in.obs.y_blocks = in.meas.z * in.coeffs.data;
    const RecoveryResult r = bsomp(in.obs, in.meas, 1);
    CHECK(r.support == IndexSet{4});
    CHECK(r.residual_trace.size() == 1);
    CHECK(testutil::max_abs(r.coeffs.data - in.coeffs.data) < 1e-10);

    // K = L selects everything and coincides with LS
    const SystemConfig full = config_for(64, 8, 3, 3, 2);
    const Instance f = make_instance(full, 2, false);
    const RecoveryResult all = bsomp(f.obs, f.meas, 3);
    CHECK(all.support == IndexSet{0, 1, 2});
    CHECK(testutil::max_abs(all.coeffs.data - solve_ls(f.obs, f.meas).coeffs.data) < 1e-8);

    ObservationSet zero;
    zero.y_blocks = CMatrix::Zero(8, 3);
    CHECK(bsomp(zero, in.meas, 2).support.empty());
    CHECK_THROWS_AS(bsomp(in.obs, in.meas, 7), ParameterError);
    ObservationSet wrong;
    wrong.y_blocks = CMatrix::Zero(8, 2);
    CHECK_NOTHROW(bsomp(wrong, in.meas, 1));  // D is taken from the observations
    wrong.y_blocks = CMatrix::Zero(7, 3);
    CHECK_THROWS_AS(bsomp(wrong, in.meas, 1), DimensionError);
}

TEST_CASE("greedy results keep rows outside the support at zero and residuals non-increasing")
{
    const SystemConfig c = config_for(256, 16, 20, 3, 4);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Instance in = make_instance(c, seed, false);
        RandomStream rng(seed, {9});
        for (Eigen::Index i = 0; i < in.obs.y_blocks.size(); ++i)
            in.obs.y_blocks.data()[i] += rng.complex_normal(1e-3);
        for (const RecoveryResult& r : {somp(in.obs, in.meas, 3), bsomp(in.obs, in.meas, 3)}) {
            CHECK(r.support.size() <= 3 * static_cast<std::size_t>(r.method == Method::SOMP ? c.n_antennas : 1));
            for (int b = 0; b < c.n_antennas; ++b)
                for (int l = 0; l < c.channel_length; ++l)
                    if (!std::binary_search(r.support.begin(), r.support.end(), l))
                        CHECK(r.coeffs.data.row(b * c.channel_length + l).norm() == 0.0);
            for (std::size_t k = 1; k < r.residual_trace.size(); ++k)
                CHECK(r.residual_trace[k] <= r.residual_trace[k - 1] * (1 + 1e-12));
        }
    }
}

TEST_CASE("BSOMP is exact whenever the coherence bound is met")
{
    // mu (4K - 1) < 1 with K = 1 needs mu < 1/3
    const SystemConfig c = config_for(128, 12, 8, 1, 2);
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const Instance in = make_instance(c, seed, true);
        const double mu = mutual_coherence(in.meas.z_s);
        if (mu * (4 * c.sparsity - 1) >= 1.0)
            continue;
        ++checked;
        const RecoveryResult r = bsomp(in.obs, in.meas, c.sparsity);
        CHECK(relative_error(r.coeffs.data, in.coeffs.data) < 1e-6);
    }
    CHECK(checked >= 30);
}

TEST_CASE("exhaustive search finds the true support of noiseless instances")
{
    const SystemConfig c = config_for(64, 6, 8, 2, 2);
    int agree = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Instance in = make_instance(c, seed, true);
        const OracleSupport oracle = exhaustive_block_support(in.obs, in.meas, 2);
        CHECK(oracle.support == in.coeffs.support);
        CHECK(oracle.residual_norm < 1e-9 * in.obs.y_blocks.norm());
        const RecoveryResult r = bsomp(in.obs, in.meas, 2);
        if (r.support == oracle.support)
            ++agree;
        else
            CHECK(r.residual_norm >= oracle.residual_norm);
    }
    // greedy selection agrees with the oracle most of the time
    CHECK(agree >= 40);
}

TEST_CASE("uplink estimator")
{
    const SystemConfig c = config_for(128, 12, 10, 2, 1);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Instance siso = make_instance(c, seed, true);
        const auto up = uplink_dcs_estimate({siso.obs}, siso.pattern, c.channel_length, c.sparsity);
        const RecoveryResult direct = somp(siso.obs, siso.meas, c.sparsity, GreedyOptions{true, 1e-8});
        REQUIRE(up.size() == 1);
        CHECK(up[0].support == direct.support);
        CHECK(testutil::max_abs(up[0].coeffs.data - direct.coeffs.data) < 1e-12);
    }

    // several receive antennas, one shared pilot sequence, common support
    const int nb = 4;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Instance base = make_instance(c, seed, true);
        const auto coeffs = random_block_sparse_coefficients(nb, c.channel_length, 3, base.coeffs.support, seed + 50);
        std::vector<ObservationSet> per;
        IndexSet intersect;
        for (int b = 0; b < nb; ++b) {
            ObservationSet o;
            o.y_blocks = base.meas.z * coeffs.antenna_slice(b);
            per.push_back(o);
            const IndexSet own = somp(o, base.meas, c.sparsity).support;
            if (b == 0) {
                intersect = own;
            } else {
                IndexSet tmp;
                std::set_intersection(intersect.begin(), intersect.end(), own.begin(), own.end(), std::back_inserter(tmp));
                intersect = tmp;
            }
        }
        const auto up = uplink_dcs_estimate(per, base.pattern, c.channel_length, c.sparsity);
        REQUIRE(up.size() == static_cast<std::size_t>(nb));
        CHECK(up[0].support == base.coeffs.support);
        CHECK(up[0].support == intersect);
        for (int b = 0; b < nb; ++b) {
            CHECK(up[b].method == Method::UplinkDCS);
            CHECK(testutil::max_abs(up[b].coeffs.data - coeffs.antenna_slice(b)) < 1e-8);
        }
    }

    const Instance base = make_instance(c, 1, false);
    ObservationSet zero;
    zero.y_blocks = CMatrix::Zero(12, 3);
    const auto z = uplink_dcs_estimate({zero, zero}, base.pattern, c.channel_length, c.sparsity);
    CHECK(z[0].coeffs.data.norm() == 0.0);
    CHECK(z[1].support.empty());
    ObservationSet odd;
    odd.y_blocks = CMatrix::Zero(11, 3);
    CHECK_THROWS_AS(uplink_dcs_estimate({zero, odd}, base.pattern, c.channel_length, 2), DimensionError);
    PilotPattern two = base.pattern;
    two.values = random_sign_sequences(2, 12, 3);
    CHECK_THROWS_AS(uplink_dcs_estimate({zero}, two, c.channel_length, 2), DimensionError);
}

TEST_CASE("reconstruction examples")
{
    const BemBasis basis = build_cebem_basis(32, 3);
    CHECK(reconstruct_channel(BemCoefficientMatrix::zeros(2, 5, 3), basis).squared_norm() == 0.0);

    const BemBasis flat = build_cebem_basis(32, 1);
    const auto c1 = random_block_sparse_coefficients(2, 5, 1, {0, 3}, 2);
    const ChannelTensor t = reconstruct_channel(c1, flat);
    for (int n = 0; n < 32; ++n)
        CHECK(t(1, n, 3) == c1.data(5 + 3, 0));
    CHECK_THROWS_AS(reconstruct_channel(c1, basis), DimensionError);
}

TEST_CASE("reconstruction matches the Kronecker formulation")
{
    // h_bar = (V kron I_L) theta_bar with theta_bar = vec over (d, l)
    const int n = 16, l = 5, d = 3, nb = 2;
    const BemBasis basis = build_cebem_basis(n, d);
    const CMatrix v = testutil::cebem_by_definition(n, d);
    const auto coeffs = random_block_sparse_coefficients(nb, l, d, {0, 1, 2, 3, 4}, 7);
    const ChannelTensor t = reconstruct_channel(coeffs, basis);
    const CMatrix kron = Eigen::kroneckerProduct(v, CMatrix::Identity(l, l));
    for (int b = 0; b < nb; ++b) {
        CVector theta_bar(d * l);
        for (int k = 0; k < d; ++k)
            for (int tap = 0; tap < l; ++tap)
                theta_bar(k * l + tap) = coeffs.data(b * l + tap, k);
        const CVector h_bar = kron * theta_bar;
        for (int time = 0; time < n; ++time)
            for (int tap = 0; tap < l; ++tap)
                CHECK(std::abs(t(b, time, tap) - h_bar(time * l + tap)) < 1e-12);
    }
}

TEST_CASE("NMSE examples")
{
    const auto c = random_block_sparse_coefficients(1, 4, 3, {1, 2}, 3);
    const ChannelTensor truth = reconstruct_channel(c, build_cebem_basis(8, 3));
    CHECK(nmse_db(truth, truth) == kNmseFloorDb);
    CHECK(nmse_db(ChannelTensor(1, 8, 4), truth) == doctest::Approx(0.0));
    ChannelTensor scaled = truth;
    for (auto& x : scaled.data())
        x *= 1.1;
    CHECK(nmse_db(scaled, truth) == doctest::Approx(-20.0).epsilon(1e-9));
    CHECK_THROWS_AS(nmse_db(truth, ChannelTensor(1, 8, 4)), DegenerateInputError);
    CHECK_THROWS_AS(nmse_db(ChannelTensor(1, 8, 3), truth), DimensionError);
}

TEST_CASE("linear smoothing examples")
{
    const int n = 16, l = 3;
    ChannelTensor constant(1, n, l);
    for (int t = 0; t < n; ++t)
        constant(0, t, 1) = cd(0.3, -0.7);
    const ChannelTensor sc = linear_smoothing(constant, {1});
    for (int t = 0; t < n; ++t)
        CHECK(std::abs(sc(0, t, 1) - constant(0, t, 1)) < 1e-15);

    ChannelTensor line(2, n, l);
    for (int b = 0; b < 2; ++b)
        for (int t = 0; t < n; ++t) {
            line(b, t, 0) = cd(0.25 * t - 1.0, 0.1 * b);
            line(b, t, 2) = cd(-0.5 * t, 2.0);
        }
    const ChannelTensor sl = linear_smoothing(line, {0, 2});
    for (int b = 0; b < 2; ++b)
        for (int t = 0; t < n; ++t) {
            CHECK(std::abs(sl(b, t, 0) - line(b, t, 0)) < 1e-12);
            CHECK(std::abs(sl(b, t, 2) - line(b, t, 2)) < 1e-12);
        }

    // taps outside the support are copied
    ChannelTensor mixed = line;
    mixed(0, 3, 1) = 5.0;
    CHECK(linear_smoothing(mixed, {0})(0, 3, 1) == cd(5.0));

    CHECK_THROWS_AS(linear_smoothing(ChannelTensor(1, 18, 2), {0}), ParameterError);
    CHECK_THROWS_AS(linear_smoothing(ChannelTensor(1, 16, 2), {2}), ParameterError);
}

TEST_CASE("linear smoothing output matches the two half means and is idempotent")
{
    RandomStream rng(4);
    const int n = 64;
    ChannelTensor t(1, n, 2);
    for (int k = 0; k < n; ++k)
        t(0, k, 1) = rng.complex_normal(1.0);
    const ChannelTensor s = linear_smoothing(t, {1});
    cd first{0, 0}, second{0, 0}, s_first{0, 0}, s_second{0, 0};
    for (int k = 0; k < n / 2; ++k) {
        first += t(0, k, 1);
        second += t(0, k + n / 2, 1);
        s_first += s(0, k, 1);
        s_second += s(0, k + n / 2, 1);
    }
    CHECK(std::abs(first - s_first) < 1e-12);
    CHECK(std::abs(second - s_second) < 1e-12);
    // output is a straight line
    for (int k = 2; k < n; ++k)
        CHECK(std::abs(s(0, k, 1) - 2.0 * s(0, k - 1, 1) + s(0, k - 2, 1)) < 1e-12);
    const ChannelTensor twice = linear_smoothing(s, {1});
    for (int k = 0; k < n; ++k)
        CHECK(std::abs(twice(0, k, 1) - s(0, k, 1)) < 1e-12);
}

TEST_CASE("smoothing a fitted sinusoidal tap reduces the error")
{
    SystemConfig c = config_for(256, 8, 4, 1, 1);
    c.speed_mps = c.speed_for_normalized_doppler(0.1);
    const BemBasis basis = build_cebem_basis(c.n_subcarriers, 3);
    int wins = 0;
    const int trials = 50;
    double err_bem = 0.0, err_li = 0.0;
    for (std::uint64_t seed = 0; seed < trials; ++seed) {
        const ChannelRealization ch = generate_ds_channel(c, {2}, seed);
        const auto fitted = fit_channel_coefficients(ch.taps, basis, {2});
        const ChannelTensor bem = reconstruct_channel(fitted, basis);
        const ChannelTensor li = linear_smoothing(bem, {2});
        const double eb = std::pow(10.0, nmse_db(bem, ch.taps) / 10);
        const double el = std::pow(10.0, nmse_db(li, ch.taps) / 10);
        err_bem += eb;
        err_li += el;
        wins += el < eb ? 1 : 0;
    }
    CHECK(err_li < err_bem);
    CHECK(wins > trials / 2);
}

namespace {

double median_of(const std::vector<ResultRow>& rows, const std::string& method)
{
    std::vector<double> v;
    for (const auto& r : rows)
        if (r.method == method)
            v.push_back(r.nmse_db);
    std::sort(v.begin(), v.end());
    return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

ExperimentResult desk_comparison()
{
    ExperimentSpec spec;
    spec.sweep_variable = SweepVariable::Doppler;
    spec.sweep_values = {0.1};
    spec.trials = 40;
    spec.methods = {Method::LS, Method::SOMP, Method::BSOMP};
    spec.base_config.sparsity = 4;
    spec.base_config.snr_db = 30;
    spec.seed = 21;
    spec.smoothing = false;
    return run_experiment(spec);
}

} // namespace

TEST_CASE("BSOMP median NMSE is below SOMP and LS at desk scale")
{
    const ExperimentResult res = desk_comparison();
    const double ls = median_of(res.rows, "LS");
    const double somp_med = median_of(res.rows, "SOMP");
    const double bsomp_med = median_of(res.rows, "BSOMP");
    CHECK(bsomp_med <= somp_med);
    CHECK(bsomp_med <= ls);
}

// With 24 pilot rows and N_B L = 400 candidate columns, per-column selection is
// not identifiable at this size, so SOMP lands above the minimum-norm LS fit.
TEST_CASE("SOMP median NMSE is below LS at desk scale" * doctest::may_fail())
{
    const ExperimentResult res = desk_comparison();
    CHECK(median_of(res.rows, "SOMP") <= median_of(res.rows, "LS"));
}
