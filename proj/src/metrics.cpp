// SPDX-License-Identifier: Apache-2.0

#include "mcbf/metrics.hpp"

#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace mcbf {

CrossGains::CrossGains(const ChannelState& channels, const BeamSet& beams)
    : dims_(beams.dims()),
      gains_(dims_.num_triples() * static_cast<std::size_t>(dims_.num_users()), 0.0),
      total_(static_cast<std::size_t>(dims_.num_users()) * dims_.num_subchannels, 0.0)
{
    if (!(channels.dims == dims_)) throw UsageError("channel and beam dimensions differ");
    if (!channels.is_normalized()) throw UsageError("channels are not normalized");
    const int users = dims_.num_users();
    beams.for_each_active([&](int j, int s, int n, const Vec& v) {
        const std::size_t base = dims_.triple(j, s, n) * static_cast<std::size_t>(users);
        for (int u = 0; u < users; ++u) {
            const double g = std::norm(channels.h(j, u, n).dot(v));
            gains_[base + u] = g;
            total_[static_cast<std::size_t>(u) * dims_.num_subchannels + n] += g;
        }
    });
}

double sinr(const ChannelState& channels, const BeamSet& beams, int m, int k, int n)
{
    const Dims& d = beams.dims();
    const Vec& v = beams.at(m, k, n);
    const int user = d.user_id(m, k);
    const double signal = std::norm(channels.h(m, user, n).dot(v));
    double interference = 0.0;
    for (int j = 0; j < d.num_bs; ++j)
        for (int s = 0; s < d.users_per_cell; ++s) {
            if ((j == m && s == k) || !beams.is_active(j, s, n)) continue;
            interference += std::norm(channels.h(j, user, n).dot(beams.at(j, s, n)));
        }
    return signal / (1.0 + interference);
}

double rate_from_sinr(double sinr)
{
    return std::log2(1.0 + sinr);
}

double weighted_sum_rate(const ChannelState& channels, const BeamSet& beams, const NetworkConfig& config)
{
    const CrossGains cg(channels, beams);
    const Dims& d = beams.dims();
    double total = 0.0;
    beams.for_each_active([&](int m, int k, int n, const Vec&) {
        total += config.weight(d.user_id(m, k), n) * rate_from_sinr(cg.sinr(m, k, n));
    });
    return total;
}

double bs_power(const BeamSet& beams, int m)
{
    return beams.bs_power(m);
}

bool power_feasible(const BeamSet& beams, const NetworkConfig& config)
{
    for (int m = 0; m < beams.dims().num_bs; ++m)
        if (beams.bs_power(m) > config.p_max * (1.0 + 1e-9)) return false;
    return true;
}

double slnr(const ChannelState& channels, const BeamSet& beams, int m, int k, int n)
{
    const Dims& d = beams.dims();
    const Vec& v = beams.at(m, k, n);
    const double signal = std::norm(channels.h(m, d.user_id(m, k), n).dot(v));
    double leakage = 0.0;
    for (int j = 0; j < d.num_bs; ++j)
        for (int u = 0; u < d.users_per_cell; ++u) {
            if ((j == m && u == k) || !beams.is_active(j, u, n)) continue;
            leakage += std::norm(channels.h(m, d.user_id(j, u), n).dot(v));
        }
    return signal / (leakage + 1.0);
}

RateReport rate_report(const ChannelState& channels, const BeamSet& beams, const NetworkConfig& config)
{
    const Dims& d = beams.dims();
    const CrossGains cg(channels, beams);
    RateReport rep;
    rep.user_rate.assign(static_cast<std::size_t>(d.num_users()), 0.0);
    beams.for_each_active([&](int m, int k, int n, const Vec&) {
        const double s = cg.sinr(m, k, n);
        const double r = rate_from_sinr(s);
        const int user = d.user_id(m, k);
        rep.triples.push_back({m, k, n, s, r});
        rep.user_rate[user] += r;
        rep.weighted_sum_rate += config.weight(user, n) * r;
    });
    for (int m = 0; m < d.num_bs; ++m) rep.bs_power.push_back(beams.bs_power(m));
    return rep;
}

std::vector<double> per_user_rate_samples(std::span<const RateReport> reports)
{
    std::vector<double> out;
    for (const RateReport& r : reports) out.insert(out.end(), r.user_rate.begin(), r.user_rate.end());
    std::sort(out.begin(), out.end());
    return out;
}

double empirical_quantile(std::span<const double> sorted, double p)
{
    if (sorted.empty()) throw UsageError("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError("quantile level outside [0, 1]");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void write_rate_csv_header(std::ostream& out)
{
    out << "trial,algo,m,k,n,sinr,rate\n";
}

void write_rate_csv_rows(std::ostream& out, int trial, std::string_view algo, const RateReport& report)
{
    using detail::fmt;
    for (const TripleRate& t : report.triples)
        out << trial << ',' << algo << ',' << t.m << ',' << t.k << ',' << t.n << ',' << fmt(t.sinr) << ','
            << fmt(t.rate) << '\n';
}

} // namespace mcbf
