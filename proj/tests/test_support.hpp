// SPDX-License-Identifier: Apache-2.0
//
// Test-only helpers: synthetic channels and independent scalar oracles.
// Nothing here calls into the solver paths it is used to check.

#pragma once

#include "mcbf/beams.hpp"
#include "mcbf/config.hpp"
#include "mcbf/network.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iterator>
#include <complex>
#include <random>
#include <vector>

namespace mcbf::testing {

inline Vec random_vec(std::mt19937_64& rng, int n, double scale = 1.0)
{
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * cdouble(g(rng), g(rng));
    return v;
}

/// Random PSD matrix sum_i f_i f_i^H of the given rank.
inline Mat random_psd(std::mt19937_64& rng, int n, int rank, double scale = 1.0)
{
    Mat l = Mat::Zero(n, n);
    for (int r = 0; r < rank; ++r) {
        const Vec f = random_vec(rng, n, scale);
        l += f * f.adjoint();
    }
    return l;
}

/// Normalized channels with i.i.d. CN(0, scale^2 I) entries per link.
inline ChannelState random_channels(Dims d, std::uint64_t seed, double scale = 1.0)
{
    std::mt19937_64 rng(seed);
    std::vector<Vec> h(static_cast<std::size_t>(d.num_bs) * d.num_users() * d.num_subchannels);
    for (Vec& v : h) v = random_vec(rng, d.num_antennas, scale);
    return ChannelState::from_normalized(d, std::move(h));
}

inline BeamSet random_beams(const NetworkConfig& cfg, std::uint64_t seed, double scale = 0.2)
{
    std::mt19937_64 rng(seed);
    BeamSet b(cfg);
    for (int m = 0; m < cfg.dims.num_bs; ++m)
        for (int k = 0; k < cfg.dims.users_per_cell; ++k)
            for (int n = 0; n < cfg.dims.num_subchannels; ++n)
                if (cfg.is_active(m, k, n)) b.at(m, k, n) = random_vec(rng, cfg.dims.num_antennas, scale);
    return b;
}

/// h^H v written out element by element.
inline cdouble inner(const Vec& h, const Vec& v)
{
    cdouble s = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) s += std::conj(h[i]) * v[i];
    return s;
}

/// SINR by literal term-by-term accumulation.
inline double scalar_sinr(const ChannelState& ch, const BeamSet& b, int m, int k, int n)
{
    const Dims& d = ch.dims;
    const int user = d.user_id(m, k);
    double signal = std::norm(inner(ch.h(m, user, n), b.at(m, k, n)));
    double denom = 1.0;
    for (int j = 0; j < d.num_bs; ++j)
        for (int u = 0; u < d.users_per_cell; ++u) {
            if (j == m && u == k) continue;
            if (!b.is_active(j, u, n)) continue;
            denom += std::norm(inner(ch.h(j, user, n), b.at(j, u, n)));
        }
    return signal / denom;
}

inline double scalar_wsr(const ChannelState& ch, const BeamSet& b, const NetworkConfig& cfg)
{
    const Dims& d = cfg.dims;
    double total = 0.0;
    for (int n = 0; n < d.num_subchannels; ++n)
        for (int m = 0; m < d.num_bs; ++m)
            for (int k = 0; k < d.users_per_cell; ++k)
                if (cfg.is_active(m, k, n))
                    total += cfg.weight(d.user_id(m, k), n) * std::log(1.0 + scalar_sinr(ch, b, m, k, n)) / std::log(2.0);
    return total;
}

/// Leakage matrix accumulated with the q coefficient written out from the
/// derivative of the rate of user (j,u) with respect to its interference.
inline Mat scalar_leakage(const ChannelState& ch, const BeamSet& b, const NetworkConfig& cfg, int m, int k, int n)
{
    const Dims& d = cfg.dims;
    Mat l = Mat::Zero(d.num_antennas, d.num_antennas);
    for (int j = 0; j < d.num_bs; ++j)
        for (int u = 0; u < d.users_per_cell; ++u) {
            if ((j == m && u == k) || !cfg.is_active(j, u, n)) continue;
            const int user = d.user_id(j, u);
            const double signal = std::norm(inner(ch.h(j, user, n), b.at(j, u, n)));
            double interf = 0.0;
            for (int l2 = 0; l2 < d.num_bs; ++l2)
                for (int s = 0; s < d.users_per_cell; ++s) {
                    if ((l2 == j && s == u) || !cfg.is_active(l2, s, n)) continue;
                    interf += std::norm(inner(ch.h(l2, user, n), b.at(l2, s, n)));
                }
            // -d/dI [w log(1 + S/(1+I))] * ln2 = w S / ((1 + I)(1 + I + S)) = w SINR / (1 + I + S)
            const double q = cfg.weight(user, n) * (signal / (1.0 + interf)) / (1.0 + interf + signal);
            const Vec& g = ch.h(m, user, n);
            for (int r = 0; r < d.num_antennas; ++r)
                for (int c = 0; c < d.num_antennas; ++c) l(r, c) += q * g[r] * std::conj(g[c]);
        }
    return l;
}

/// Power drawn by one triple at λ with Γ formed by a general LU inverse.
inline double dense_power(const Vec& h, const Mat& leakage, double interference, double weight, double lambda)
{
    const int nt = static_cast<int>(h.size());
    const Mat t = leakage + lambda * std::log(2.0) * Mat::Identity(nt, nt);
    const Mat g = t.fullPivLu().inverse();
    const double u = h.dot(g * h).real();
    const double b2 = std::max(0.0, weight * u - interference - 1.0) / (u * u);
    return b2 * (g * h).squaredNorm();
}

/// Exhaustive search for M = 2, K = 1, N = 1, Nt = 2: each BS beam is
/// sqrt(p) (cos t, sin t e^{j phi}) on a (t, phi, p) grid; a common phase does
/// not change any rate. Returns the best weighted sum-rate over all pairs.
struct GridSize {
    int theta = 16;
    int phi = 16;
    int power = 8;
    long long points() const
    {
        const long long per_bs = static_cast<long long>(theta) * phi * power;
        return per_bs * per_bs;
    }
};

inline double grid_search_two_links(const ChannelState& ch, const NetworkConfig& cfg, GridSize g = {})
{
    const double pi = std::acos(-1.0);
    const double levels[] = {0.0, 1.0 / 64, 1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 3.0 / 4, 1.0};
    std::vector<double> power_levels;
    if (g.power == 8) {
        power_levels.assign(std::begin(levels), std::end(levels));
    } else {
        for (int i = 0; i < g.power; ++i) power_levels.push_back(static_cast<double>(i) / (g.power - 1));
    }
    // gain[m][option][user] = |h_{m,user}^H v|^2
    std::vector<std::array<double, 2>> gain[2];
    for (int m = 0; m < 2; ++m)
        for (int a = 0; a < g.theta; ++a)
            for (int b = 0; b < g.phi; ++b)
                for (double p : power_levels) {
                    const double t = 0.5 * pi * a / (g.theta - 1);
                    const double f = 2.0 * pi * b / g.phi;
                    Vec v(2);
                    v << std::cos(t), std::sin(t) * std::polar(1.0, f);
                    v *= std::sqrt(p * cfg.p_max);
                    gain[m].push_back({std::norm(inner(ch.h(m, 0, 0), v)), std::norm(inner(ch.h(m, 1, 0), v))});
                }
    const double w0 = cfg.weight(0, 0), w1 = cfg.weight(1, 0);
    double best = 0.0;
    for (const auto& a : gain[0])
        for (const auto& b : gain[1]) {
            const double r = w0 * std::log2(1.0 + a[0] / (1.0 + b[0])) + w1 * std::log2(1.0 + b[1] / (1.0 + a[1]));
            best = std::max(best, r);
        }
    return best;
}

} // namespace mcbf::testing
