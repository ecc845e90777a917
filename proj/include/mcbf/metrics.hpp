// SPDX-License-Identifier: Apache-2.0
//
// SINR, rates, weighted sum-rate, SLNR and per-BS power. All quantities use
// noise-normalized channels, so every noise term is 1.

#pragma once

#include "mcbf/beams.hpp"
#include "mcbf/config.hpp"
#include "mcbf/network.hpp"

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace mcbf {

/// Received power |h_{j,u}(n)^H v_{j,s}(n)|^2 of every active beam (j,s,n) at
/// every user u on the same subchannel. Built once per beam set so that
/// SINR/interference sums over the whole network stay O(1) per lookup.
class CrossGains {
public:
    CrossGains(const ChannelState& channels, const BeamSet& beams);

    /// Power of beam (j, s, n) arriving at global user `user`.
    double at(int j, int s, int n, int user) const
    {
        return gains_[dims_.triple(j, s, n) * static_cast<std::size_t>(dims_.num_users()) + user];
    }

    /// 1 + sum over all active beams on n of the power received by `user`.
    double received_plus_noise(int user, int n) const
    {
        return 1.0 + total_[static_cast<std::size_t>(user) * dims_.num_subchannels + n];
    }

    double signal(int m, int k, int n) const { return at(m, k, n, dims_.user_id(m, k)); }

    /// i_{m,k}(n): every active co-subchannel beam except the user's own.
    double interference(int m, int k, int n) const
    {
        return received_plus_noise(dims_.user_id(m, k), n) - 1.0 - signal(m, k, n);
    }

    double sinr(int m, int k, int n) const { return signal(m, k, n) / (1.0 + interference(m, k, n)); }

private:
    Dims dims_;
    std::vector<double> gains_;  // [triple][user], zero for inactive triples
    std::vector<double> total_;  // [user][n]
};

/// SINR of active triple (m, k, n). Throws UsageError for inactive triples.
double sinr(const ChannelState& channels, const BeamSet& beams, int m, int k, int n);

/// log2(1 + sinr).
double rate_from_sinr(double sinr);

/// Sum over active triples of w_k(n) * log2(1 + SINR_{m,k}(n)).
double weighted_sum_rate(const ChannelState& channels, const BeamSet& beams, const NetworkConfig& config);

double bs_power(const BeamSet& beams, int m);

/// True when every BS uses at most p_max * (1 + 1e-9).
bool power_feasible(const BeamSet& beams, const NetworkConfig& config);

/// Signal-to-leakage-plus-noise ratio of triple (m, k, n); leakage is measured
/// on BS m's channels to every other active co-subchannel user.
double slnr(const ChannelState& channels, const BeamSet& beams, int m, int k, int n);

struct TripleRate {
    int m = 0;
    int k = 0;
    int n = 0;
    double sinr = 0.0;
    double rate = 0.0;
};

struct RateReport {
    std::vector<TripleRate> triples;  // active triples in (m, k, n) order
    double weighted_sum_rate = 0.0;
    std::vector<double> user_rate;    // [global user], sum over subchannels
    std::vector<double> bs_power;     // [m]
};

RateReport rate_report(const ChannelState& channels, const BeamSet& beams, const NetworkConfig& config);

/// Per-user total rates of all reports, concatenated and sorted ascending.
std::vector<double> per_user_rate_samples(std::span<const RateReport> reports);

/// Empirical quantile of ascending-sorted samples with linear interpolation
/// between order statistics (p in [0, 1]).
double empirical_quantile(std::span<const double> sorted, double p);

/// Header "trial,algo,m,k,n,sinr,rate".
void write_rate_csv_header(std::ostream& out);
void write_rate_csv_rows(std::ostream& out, int trial, std::string_view algo, const RateReport& report);

} // namespace mcbf
