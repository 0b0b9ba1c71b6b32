#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace bdcs {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using SignMatrix = Eigen::MatrixXi;

/// Sorted set of integer indices (tap indices, subcarrier indices).
using IndexSet = std::vector<int>;

/// Dense N_B x N x L array of tap gains h^{(b)}[n,l].
///
/// Storage is antenna-major, time-major, tap-minor, which is also the
/// ordering used by the channel dump format.
class ChannelTensor
{
public:
    ChannelTensor() = default;
    ChannelTensor(int n_antennas, int n_time, int n_taps)
        : n_antennas_(n_antennas), n_time_(n_time), n_taps_(n_taps),
          data_(static_cast<std::size_t>(n_antennas) * n_time * n_taps, cd{0.0, 0.0})
    {
    }

    int n_antennas() const { return n_antennas_; }
    int n_time() const { return n_time_; }
    int n_taps() const { return n_taps_; }

    cd& operator()(int b, int n, int l) { return data_[offset(b, n, l)]; }
    const cd& operator()(int b, int n, int l) const { return data_[offset(b, n, l)]; }

    std::vector<cd>& data() { return data_; }
    const std::vector<cd>& data() const { return data_; }

    bool same_shape(const ChannelTensor& other) const
    {
        return n_antennas_ == other.n_antennas_ && n_time_ == other.n_time_ &&
               n_taps_ == other.n_taps_;
    }

    double squared_norm() const
    {
        double s = 0.0;
        for (const auto& v : data_)
            s += std::norm(v);
        return s;
    }

private:
    std::size_t offset(int b, int n, int l) const
    {
        return (static_cast<std::size_t>(b) * n_time_ + n) * n_taps_ + l;
    }

    int n_antennas_ = 0;
    int n_time_ = 0;
    int n_taps_ = 0;
    std::vector<cd> data_;
};

} // namespace bdcs
