#pragma once

// Complex-exponential basis expansion model (CE-BEM) and the time/frequency
// channel matrices it induces.
//
// Conventions used throughout the library:
//   W[m,n] = N^{-1/2} exp(-j 2 pi m n / N)         (unitary DFT)
//   v_d[n] = exp(j 2 pi n (d - (D-1)/2) / N)       (basis column d)
//   h[n,l] = sum_d v_d[n] theta[d,l]               (zero modeling error)

#include "bdcs/types.hpp"

namespace bdcs {

struct BemBasis
{
    int n_subcarriers = 0;
    int order = 0;
    CMatrix matrix;  // N x D, column d is v_d

    /// Index of the all-ones column, (D-1)/2.
    int center() const { return (order - 1) / 2; }
    /// Frequency offset d - (D-1)/2 of column d, in subcarriers.
    int offset(int d) const { return d - center(); }
};

/// BEM coefficients for all antennas, the matrix Lambda of the compact
/// estimator: row b*L + l, column d holds theta^{(b)}[d,l].
struct BemCoefficientMatrix
{
    int n_antennas = 0;
    int channel_length = 0;
    int order = 0;
    CMatrix data;        // (N_B*L) x D
    IndexSet support;    // sorted tap indices

    static BemCoefficientMatrix zeros(int n_antennas, int channel_length, int order);

    /// L x D block of antenna b (column d is theta~_d^{(b)}).
    CMatrix antenna_slice(int b) const;
    /// Tap indices whose row is nonzero for at least one antenna.
    IndexSet active_taps(double tol = 0.0) const;
};

BemBasis build_cebem_basis(int n_subcarriers, int order);

/// Least-squares BEM fit of one tap's time series: (1/N) V^H h.
CVector fit_bem_coefficients(const CVector& tap_series, const BemBasis& basis);

/// Unitary N x N DFT matrix.
CMatrix unitary_dft(int n);

/// Circulant matrix with the given first column (length n, zero padded).
CMatrix circulant(const CVector& first_column, int n);

/// W^H diag(sqrt(N) W_L theta) W, the circulant generated by theta.
CMatrix circulant_via_dft(const CVector& theta, int n);

/// Time-domain channel matrix H_t[p,q] = h[p, mod(p-q, N)] of one antenna.
/// `taps` is N x L with taps(n, l) = h[n,l].
CMatrix time_channel_matrix(const CMatrix& taps);

/// H_t = sum_d diag(v_d) W^H diag(sqrt(N) W_L theta~_d) W.
/// `theta` is L x D (one antenna slice).
CMatrix bem_to_time_channel(const CMatrix& theta, const BemBasis& basis);

/// H_f = W H_t W^H.
CMatrix time_to_freq_channel(const CMatrix& h_time);

/// H_t = W^H H_f W.
CMatrix freq_to_time_channel(const CMatrix& h_freq);

/// H_f = sum_d V_d Theta_d with V_d = W diag(v_d) W^H and
/// Theta_d = diag(sqrt(N) W (theta~_d, 0)).
CMatrix bem_freq_channel(const CMatrix& theta, const BemBasis& basis);

/// Tap series h[n,l] = sum_d v_d[n] theta[d,l] of one antenna as N x L.
CMatrix bem_tap_series(const CMatrix& theta, const BemBasis& basis);

} // namespace bdcs
