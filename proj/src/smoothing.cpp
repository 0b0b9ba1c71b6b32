#include "bdcs/errors.hpp"
#include "bdcs/recovery.hpp"

namespace bdcs {

// Each supported tap is replaced by the line through its two half-symbol
// means. A half mean is the line's value at that half's centroid
// (N/4 - 1/2 and 3N/4 - 1/2), so linear inputs are fixed points.
ChannelTensor linear_smoothing(const ChannelTensor& taps, const IndexSet& support)
{
    const int n = taps.n_time();
    if (n % 4 != 0)
        throw ParameterError("linear smoothing needs N divisible by 4, got " + std::to_string(n));
    for (int l : support)
        if (l < 0 || l >= taps.n_taps())
            throw ParameterError("support index outside [0, L-1]");

    ChannelTensor out = taps;
    const int half = n / 2;
    const double anchor = n / 4.0 - 0.5;
    for (int b = 0; b < taps.n_antennas(); ++b) {
        for (int l : support) {
            cd first{0.0, 0.0};
            cd second{0.0, 0.0};
            for (int t = 0; t < half; ++t) {
                first += taps(b, t, l);
                second += taps(b, t + half, l);
            }
            first /= static_cast<double>(half);
            second /= static_cast<double>(half);
            const cd slope = (second - first) / static_cast<double>(half);
            for (int t = 0; t < n; ++t)
                out(b, t, l) = first + (static_cast<double>(t) - anchor) * slope;
        }
    }
    return out;
}

} // namespace bdcs
