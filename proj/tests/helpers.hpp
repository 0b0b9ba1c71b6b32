#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "bdcs/types.hpp"

namespace testutil {

using bdcs::cd;
using bdcs::CMatrix;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Unitary DFT written out from its definition, independent of the library.
inline CMatrix dft_by_definition(int n)
{
    CMatrix w(n, n);
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k)
            w(m, k) = std::polar(1.0 / std::sqrt(double(n)), -kTwoPi * m * k / n);
    return w;
}

// v_d[n] = exp(j 2 pi n (d - (D-1)/2) / N)
inline CMatrix cebem_by_definition(int n, int order)
{
    CMatrix v(n, order);
    for (int k = 0; k < n; ++k)
        for (int d = 0; d < order; ++d)
            v(k, d) = std::polar(1.0, kTwoPi * k * (d - (order - 1) / 2) / n);
    return v;
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace testutil
