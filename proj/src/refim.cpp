// SPDX-License-Identifier: Apache-2.0

#include "mcbf/refim.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace mcbf {

std::vector<UserRef> reference_candidates(const NetworkConfig& config, int m, int k, int n)
{
    const Dims& d = config.dims;
    std::vector<UserRef> out;
    for (int c = 0; c < d.num_bs; ++c)
        for (int u = 0; u < d.users_per_cell; ++u) {
            if ((c == m && u == k) || !config.is_active(c, u, n)) continue;
            out.push_back({c, u});
        }
    return out;
}

double reference_score(const ChannelState& channels, int m, UserRef candidate, int k, int n)
{
    const Vec& hu = channels.h(m, candidate, n);
    const Vec& hk = channels.h(m, channels.dims.user_id(m, k), n);
    return hu.squaredNorm() * std::norm(hu.dot(hk));
}

ReferenceList select_references(const ChannelState& channels, const NetworkConfig& config, int m, int k, int n,
                                int count)
{
    if (count < 0) throw ConfigError("reference count must be >= 0");
    const std::vector<UserRef> candidates = reference_candidates(config, m, k, n);
    std::vector<std::pair<double, UserRef>> scored;
    scored.reserve(candidates.size());
    for (const UserRef& c : candidates) scored.emplace_back(reference_score(channels, m, c, k, n), c);
    // candidates arrive in (cell, user) order, so a stable sort keeps the tie rule
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    ReferenceList out;
    const std::size_t take = std::min(static_cast<std::size_t>(count), scored.size());
    for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].second);
    return out;
}

ReferenceMap select_all_references(const ChannelState& channels, const NetworkConfig& config, int count)
{
    const Dims& d = config.dims;
    ReferenceMap map;
    map.dims = d;
    map.refs.resize(d.num_triples());
    for (int m = 0; m < d.num_bs; ++m)
        for (int k = 0; k < d.users_per_cell; ++k)
            for (int n = 0; n < d.num_subchannels; ++n)
                if (config.is_active(m, k, n))
                    map.refs[d.triple(m, k, n)] = select_references(channels, config, m, k, n, count);
    return map;
}

LeakageMatrix leakage_refim(const CrossGains& gains, const ChannelState& channels, const NetworkConfig& config, int m,
                            int n, std::span<const UserRef> refs)
{
    LeakageMatrix l = LeakageMatrix::zero(config.dims.num_antennas);
    for (const UserRef& r : refs) l.add_term(q_coefficient(gains, config, r.cell, r.k, n), channels.h(m, r, n));
    return l;
}

LeakageMatrix leakage_refim(const ChannelState& channels, const BeamSet& beams, const NetworkConfig& config, int m,
                            int k, int n, std::span<const UserRef> refs)
{
    if (!beams.is_active(m, k, n)) throw UsageError("leakage of an inactive triple");
    for (const UserRef& r : refs)
        if (r.cell == m && r.k == k) throw UsageError("a beam cannot reference its own user");
    const CrossGains gains(channels, beams);
    return leakage_refim(gains, channels, config, m, n, refs);
}

std::vector<LeakageMatrix> leakage_refim_all(const ChannelState& channels, const BeamSet& beams,
                                             const NetworkConfig& config, const ReferenceMap& refs)
{
    const Dims& d = config.dims;
    const CrossGains gains(channels, beams);
    std::vector<LeakageMatrix> out(d.num_triples());
    beams.for_each_active([&](int m, int k, int n, const Vec&) {
        out[d.triple(m, k, n)] = leakage_refim(gains, channels, config, m, n, refs.at(m, k, n));
    });
    return out;
}

Mat invert_rank_r(std::span<const Vec> factors, double lambda, int nt)
{
    const double c = lambda * kLn2;
    Mat inv = Mat::Identity(nt, nt) / c;
    for (const Vec& f : factors) {
        // (A + f f^H)^{-1} = A^{-1} - A^{-1} f f^H A^{-1} / (1 + f^H A^{-1} f)
        const Vec af = inv * f;
        const double denom = 1.0 + f.dot(af).real();
        inv.noalias() -= (af * af.adjoint()) / denom;
    }
    return 0.5 * (inv + inv.adjoint());
}

namespace {

long long other_cell_users(const NetworkConfig& config, int m, int n)
{
    const Dims& d = config.dims;
    long long count = 0;
    for (int c = 0; c < d.num_bs; ++c)
        for (int u = 0; u < d.users_per_cell; ++u)
            if (c != m && config.is_active(c, u, n)) ++count;
    return count;
}

} // namespace

int distinct_out_of_cell_refs(const ReferenceMap& refs, const NetworkConfig& config, int m, int n)
{
    const Dims& d = config.dims;
    std::set<std::pair<int, int>> seen;
    for (int k = 0; k < d.users_per_cell; ++k) {
        if (!config.is_active(m, k, n)) continue;
        for (const UserRef& r : refs.at(m, k, n))
            if (r.cell != m) seen.emplace(r.cell, r.k);
    }
    return static_cast<int>(seen.size());
}

FeedbackCount feedback_icbf(const NetworkConfig& config, const FeedbackModel& model)
{
    const Dims& d = config.dims;
    FeedbackCount fc;
    for (int m = 0; m < d.num_bs; ++m)
        for (int n = 0; n < d.num_subchannels; ++n)
            fc.reals += other_cell_users(config, m, n) * (2LL * d.num_antennas + 3);
    fc.bits = fc.reals * model.quant_bits;
    return fc;
}

FeedbackCount feedback_cb_refim(const NetworkConfig& config, const ReferenceMap& refs, const FeedbackModel& model)
{
    const Dims& d = config.dims;
    FeedbackCount fc;
    for (int m = 0; m < d.num_bs; ++m)
        for (int n = 0; n < d.num_subchannels; ++n)
            fc.reals += other_cell_users(config, m, n) * 2LL * d.num_antennas +
                        3LL * distinct_out_of_cell_refs(refs, config, m, n);
    fc.bits = fc.reals * model.quant_bits;
    return fc;
}

} // namespace mcbf
