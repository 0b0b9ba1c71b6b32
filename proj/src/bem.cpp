#include "bdcs/bem.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bdcs/errors.hpp"

namespace bdcs {

namespace {

void check_theta(const CMatrix& theta, const BemBasis& basis)
{
    if (theta.cols() != basis.order)
        throw DimensionError("coefficient slice has " + std::to_string(theta.cols()) +
                             " columns, BEM order is " + std::to_string(basis.order));
    if (theta.rows() > basis.n_subcarriers)
        throw DimensionError("channel length exceeds the number of subcarriers");
}

// sqrt(N) * W * (theta, 0)^T, i.e. the unnormalized DFT of the zero-padded taps.
CVector tap_spectrum(const CVector& theta, int n)
{
    CVector spectrum(n);
    const double w = -2.0 * std::numbers::pi / n;
    for (int k = 0; k < n; ++k) {
        cd acc{0.0, 0.0};
        for (int l = 0; l < theta.size(); ++l)
            acc += theta(l) * std::polar(1.0, w * static_cast<double>((static_cast<long long>(k) * l) % n));
        spectrum(k) = acc;
    }
    return spectrum;
}

} // namespace

BemCoefficientMatrix BemCoefficientMatrix::zeros(int n_antennas, int channel_length, int order)
{
    BemCoefficientMatrix m;
    m.n_antennas = n_antennas;
    m.channel_length = channel_length;
    m.order = order;
    m.data = CMatrix::Zero(static_cast<Eigen::Index>(n_antennas) * channel_length, order);
    return m;
}

CMatrix BemCoefficientMatrix::antenna_slice(int b) const
{
    if (b < 0 || b >= n_antennas)
        throw DimensionError("antenna index out of range");
    return data.middleRows(static_cast<Eigen::Index>(b) * channel_length, channel_length);
}

IndexSet BemCoefficientMatrix::active_taps(double tol) const
{
    IndexSet taps;
    for (int l = 0; l < channel_length; ++l) {
        double energy = 0.0;
        for (int b = 0; b < n_antennas; ++b)
            energy += data.row(static_cast<Eigen::Index>(b) * channel_length + l).squaredNorm();
        if (energy > tol * tol)
            taps.push_back(l);
    }
    return taps;
}

BemBasis build_cebem_basis(int n_subcarriers, int order)
{
    if (order < 1 || order % 2 == 0)
        throw ParameterError("BEM order must be a positive odd integer, got " + std::to_string(order));
    if (order > n_subcarriers)
        throw ParameterError("BEM order exceeds the number of subcarriers");

    BemBasis basis;
    basis.n_subcarriers = n_subcarriers;
    basis.order = order;
    basis.matrix.resize(n_subcarriers, order);
    const double w = 2.0 * std::numbers::pi / n_subcarriers;
    for (int d = 0; d < order; ++d) {
        const long long k = basis.offset(d);
        for (int n = 0; n < n_subcarriers; ++n) {
            // reduce the phase index modulo N so large N keeps full precision
            const long long idx = ((static_cast<long long>(n) * k) % n_subcarriers + n_subcarriers) % n_subcarriers;
            basis.matrix(n, d) = std::polar(1.0, w * static_cast<double>(idx));
        }
    }
    return basis;
}

CVector fit_bem_coefficients(const CVector& tap_series, const BemBasis& basis)
{
    if (tap_series.size() != basis.n_subcarriers)
        throw DimensionError("tap series length " + std::to_string(tap_series.size()) +
                             " does not match N = " + std::to_string(basis.n_subcarriers));
    return basis.matrix.adjoint() * tap_series / static_cast<double>(basis.n_subcarriers);
}

CMatrix unitary_dft(int n)
{
    CMatrix w(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double step = -2.0 * std::numbers::pi / n;
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k)
            w(m, k) = std::polar(scale, step * static_cast<double>((static_cast<long long>(m) * k) % n));
    return w;
}

CMatrix circulant(const CVector& first_column, int n)
{
    if (first_column.size() > n)
        throw DimensionError("circulant generator longer than the matrix order");
    CMatrix c = CMatrix::Zero(n, n);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            const int lag = ((p - q) % n + n) % n;
            if (lag < first_column.size())
                c(p, q) = first_column(lag);
        }
    return c;
}

CMatrix circulant_via_dft(const CVector& theta, int n)
{
    if (theta.size() > n)
        throw DimensionError("channel length exceeds the number of subcarriers");
    const CMatrix w = unitary_dft(n);
    return w.adjoint() * tap_spectrum(theta, n).asDiagonal() * w;
}

CMatrix time_channel_matrix(const CMatrix& taps)
{
    const auto n = static_cast<int>(taps.rows());
    const auto l_len = static_cast<int>(taps.cols());
    if (l_len > n)
        throw DimensionError("channel length exceeds the number of time samples");
    CMatrix h = CMatrix::Zero(n, n);
    for (int p = 0; p < n; ++p)
        for (int l = 0; l < l_len; ++l)
            h(p, ((p - l) % n + n) % n) = taps(p, l);
    return h;
}

CMatrix bem_to_time_channel(const CMatrix& theta, const BemBasis& basis)
{
    check_theta(theta, basis);
    const int n = basis.n_subcarriers;
    const CMatrix w = unitary_dft(n);
    CMatrix h = CMatrix::Zero(n, n);
    for (int d = 0; d < basis.order; ++d) {
        const CMatrix circ = w.adjoint() * tap_spectrum(theta.col(d), n).asDiagonal() * w;
        h += basis.matrix.col(d).asDiagonal() * circ;
    }
    return h;
}

CMatrix time_to_freq_channel(const CMatrix& h_time)
{
    if (h_time.rows() != h_time.cols())
        throw DimensionError("time-domain channel matrix must be square");
    const CMatrix w = unitary_dft(static_cast<int>(h_time.rows()));
    return w * h_time * w.adjoint();
}

CMatrix freq_to_time_channel(const CMatrix& h_freq)
{
    if (h_freq.rows() != h_freq.cols())
        throw DimensionError("frequency-domain channel matrix must be square");
    const CMatrix w = unitary_dft(static_cast<int>(h_freq.rows()));
    return w.adjoint() * h_freq * w;
}

CMatrix bem_freq_channel(const CMatrix& theta, const BemBasis& basis)
{
    check_theta(theta, basis);
    const int n = basis.n_subcarriers;
    const CMatrix w = unitary_dft(n);
    CMatrix h = CMatrix::Zero(n, n);
    for (int d = 0; d < basis.order; ++d) {
        const CMatrix v_d = w * basis.matrix.col(d).asDiagonal() * w.adjoint();
        h += v_d * tap_spectrum(theta.col(d), n).asDiagonal();
    }
    return h;
}

CMatrix bem_tap_series(const CMatrix& theta, const BemBasis& basis)
{
    if (theta.cols() != basis.order)
        throw DimensionError("coefficient slice does not match the BEM order");
    // theta is L x D, result N x L
    return basis.matrix * theta.transpose();
}

} // namespace bdcs
