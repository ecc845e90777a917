// SPDX-License-Identifier: Apache-2.0

#include "mcbf/beam_init.hpp"
#include "mcbf/refim.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>

namespace mcbf {
namespace {

using testing::random_beams;
using testing::random_channels;
using testing::random_vec;

TEST(Candidates, EveryOtherActiveUser)
{
    NetworkConfig cfg = NetworkConfig::with_dims(Dims{});
    EXPECT_EQ(reference_candidates(cfg, 1, 2, 0).size(), 8u);
    cfg.set_active(0, 0, 0, false);
    const std::vector<UserRef> c = reference_candidates(cfg, 1, 2, 0);
    EXPECT_EQ(c.size(), 7u);
    for (const UserRef& u : c) {
        EXPECT_FALSE(u.cell == 1 && u.k == 2);
        EXPECT_FALSE(u.cell == 0 && u.k == 0);
    }
}

TEST(SelectReferences, SingleCandidate)
{
    const NetworkConfig cfg = NetworkConfig::with_dims(Dims{2, 1, 1, 2});
    const ChannelState ch = random_channels(cfg.dims, 1);
    for (int r : {1, 2, 5}) {
        const ReferenceList refs = select_references(ch, cfg, 0, 0, 0, r);
        ASSERT_EQ(refs.size(), 1u);
        EXPECT_EQ(refs[0], (UserRef{1, 0}));
    }
    EXPECT_TRUE(select_references(ch, cfg, 0, 0, 0, 0).empty());
    EXPECT_THROW(select_references(ch, cfg, 0, 0, 0, -1), ConfigError);
}

TEST(SelectReferences, OrthogonalCandidateLoses)
{
    // BS 0 serves user 0; candidates are user 1 (orthogonal) and user 2 (weak but aligned).
    const Dims d{1, 1, 3, 2};
    Vec h0(2), h1(2), h2(2);
    h0 << 1.0, 0.0;
    h1 << 0.0, 10.0;
    h2 << 0.01, 0.0;
    const ChannelState ch = ChannelState::from_normalized(d, {h0, h1, h2});
    const NetworkConfig cfg = NetworkConfig::with_dims(d);
    EXPECT_EQ(reference_score(ch, 0, UserRef{0, 1}, 0, 0), 0.0);
    const ReferenceList refs = select_references(ch, cfg, 0, 0, 0, 1);
    ASSERT_EQ(refs.size(), 1u);
    EXPECT_EQ(refs[0], (UserRef{0, 2}));
}

TEST(SelectReferences, TiesGoToLowestIndex)
{
    const Dims d{2, 1, 2, 1};
    // all four channels from BS 0 identical: every candidate scores the same
    std::vector<Vec> h(8, Vec::Ones(1));
    const ChannelState ch = ChannelState::from_normalized(d, h);
    const NetworkConfig cfg = NetworkConfig::with_dims(d);
    const ReferenceList refs = select_references(ch, cfg, 0, 1, 0, 3);
    ASSERT_EQ(refs.size(), 3u);
    EXPECT_EQ(refs[0], (UserRef{0, 0}));
    EXPECT_EQ(refs[1], (UserRef{1, 0}));
    EXPECT_EQ(refs[2], (UserRef{1, 1}));
}

TEST(SelectReferences, MatchesExhaustiveArgmax)
{
    std::mt19937_64 rng(5);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const NetworkConfig cfg = NetworkConfig::with_dims(Dims{});
        const Dims& d = cfg.dims;
        const ChannelState ch = random_channels(d, seed);
        const int m = static_cast<int>(seed % 3), k = static_cast<int>((seed / 3) % 3), n = 1;
        const Vec& hk = ch.h(m, d.user_id(m, k), n);
        double best = -1.0;
        UserRef arg{};
        for (int c = 0; c < d.num_bs; ++c)
            for (int u = 0; u < d.users_per_cell; ++u) {
                if (c == m && u == k) continue;
                const Vec& hu = ch.h(m, d.user_id(c, u), n);
                const Mat g = hu * hu.adjoint();
                const double score = (g * hk).squaredNorm();
                EXPECT_NEAR(reference_score(ch, m, UserRef{c, u}, k, n), score, 1e-10 * score);
                if (score > best) {
                    best = score;
                    arg = {c, u};
                }
            }
        const ReferenceList refs = select_references(ch, cfg, m, k, n, 1);
        ASSERT_EQ(refs.size(), 1u);
        EXPECT_EQ(refs[0], arg);
    }
}

TEST(SelectReferences, ListInvariants)
{
    const NetworkConfig cfg = NetworkConfig::with_dims(Dims{});
    const ChannelState ch = random_channels(cfg.dims, 9);
    for (int r = 0; r <= 10; ++r) {
        const ReferenceMap map = select_all_references(ch, cfg, r);
        for (int m = 0; m < 3; ++m)
            for (int k = 0; k < 3; ++k)
                for (int n = 0; n < 3; ++n) {
                    const ReferenceList& refs = map.at(m, k, n);
                    EXPECT_EQ(refs.size(), static_cast<std::size_t>(std::min(r, 8)));
                    std::set<std::pair<int, int>> seen;
                    double prev = std::numeric_limits<double>::infinity();
                    for (const UserRef& u : refs) {
                        EXPECT_FALSE(u.cell == m && u.k == k);
                        EXPECT_TRUE(seen.emplace(u.cell, u.k).second);
                        const double s = reference_score(ch, m, u, k, n);
                        EXPECT_LE(s, prev);
                        prev = s;
                    }
                }
    }
}

TEST(SelectReferences, InvariantToPositiveRescaling)
{
    const Dims d{};
    const NetworkConfig cfg = NetworkConfig::with_dims(d);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        ChannelState ch = random_channels(d, seed + 300);
        const UserRef before = select_references(ch, cfg, 0, 1, 2, 1).at(0);
        ch.normalized[ch.raw_index(0, d.user_id(0, 1), 2)] *= 7.5;
        EXPECT_EQ(select_references(ch, cfg, 0, 1, 2, 1).at(0), before);
    }
}

TEST(SelectReferences, ScalarChannelsReduceToStrongestGain)
{
    const Dims d{3, 1, 3, 1};
    const NetworkConfig cfg = NetworkConfig::with_dims(d);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const ChannelState ch = random_channels(d, seed);
        const int m = static_cast<int>(seed % 3), k = static_cast<int>(seed / 3 % 3);
        double best = -1.0;
        UserRef arg{};
        for (const UserRef& u : reference_candidates(cfg, m, k, 0)) {
            const double g = ch.h(m, u, 0).squaredNorm();
            if (g > best) {
                best = g;
                arg = u;
            }
        }
        EXPECT_EQ(select_references(ch, cfg, m, k, 0, 1).at(0), arg);
    }
}

TEST(LeakageRefim, NoReferencesIsZero)
{
    const NetworkConfig cfg = NetworkConfig::with_dims(Dims{});
    const ChannelState ch = random_channels(cfg.dims, 2);
    const BeamSet b = random_beams(cfg, 3);
    const LeakageMatrix l = leakage_refim(ch, b, cfg, 0, 0, 0, {});
    EXPECT_EQ(l.matrix.norm(), 0.0);
    EXPECT_EQ(l.rank_hint, 0);
}

TEST(LeakageRefim, AllCandidatesEqualFullLeakage)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const NetworkConfig cfg = NetworkConfig::with_dims(Dims{});
        const ChannelState ch = random_channels(cfg.dims, seed);
        const BeamSet b = random_beams(cfg, seed + 1, 1.0);
        const ReferenceMap all = select_all_references(ch, cfg, 8);
        const std::vector<LeakageMatrix> refim = leakage_refim_all(ch, b, cfg, all);
        const std::vector<LeakageMatrix> full = leakage_full_all(ch, b, cfg);
        for (std::size_t t = 0; t < full.size(); ++t) {
            EXPECT_LE((refim[t].matrix - full[t].matrix).norm(), 1e-12 * (1.0 + full[t].matrix.norm()));
            EXPECT_EQ(refim[t].rank_hint, 8);
        }
    }
}

TEST(LeakageRefim, SingleReferenceIsRankOne)
{
    const NetworkConfig cfg = NetworkConfig::with_dims(Dims{});
    const ChannelState ch = random_channels(cfg.dims, 4);
    const BeamSet b = random_beams(cfg, 5, 1.0);
    const ReferenceMap refs = select_all_references(ch, cfg, 1);
    for (const LeakageMatrix& l : leakage_refim_all(ch, b, cfg, refs)) {
        const Eigen::SelfAdjointEigenSolver<Mat> es(l.matrix);
        const double tr = l.matrix.trace().real();
        EXPECT_LE(es.eigenvalues()[1], 1e-10 * tr);
        EXPECT_EQ(l.rank_hint, 1);
    }
}

TEST(LeakageRefim, RejectsSelfReference)
{
    const NetworkConfig cfg = NetworkConfig::with_dims(Dims{});
    const ChannelState ch = random_channels(cfg.dims, 4);
    const BeamSet b = random_beams(cfg, 5);
    const std::vector<UserRef> self{{1, 1}};
    EXPECT_THROW(leakage_refim(ch, b, cfg, 1, 1, 0, self), UsageError);
}

TEST(InvertRankR, NoTermsIsScaledIdentity)
{
    const Mat g = invert_rank_r({}, 0.5, 3);
    EXPECT_LE((g - Mat::Identity(3, 3) / (0.5 * kLn2)).norm(), 1e-15);
}

TEST(InvertRankR, OneTermMatchesShermanMorrison)
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::vector<Vec> f{random_vec(rng, 3, 2.0)};
        const double lambda = std::pow(10.0, -4.0 + trial % 6);
        const Mat sm = gamma_sherman_morrison(f[0] * f[0].adjoint(), lambda);
        EXPECT_LE((invert_rank_r(f, lambda, 3) - sm).norm(), 1e-12 * sm.norm());
    }
}

TEST(InvertRankR, ExactInverseOfSum)
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Vec> f;
        for (int r = 0; r < 3; ++r) f.push_back(random_vec(rng, 3, 1.5));
        const double lambda = std::pow(10.0, -3.0 + trial % 5);
        Mat t = lambda * kLn2 * Mat::Identity(3, 3);
        for (const Vec& x : f) t += x * x.adjoint();
        const Mat g = invert_rank_r(f, lambda, 3);
        EXPECT_LE((g * t - Mat::Identity(3, 3)).norm(), 1e-10);
        EXPECT_LE((g - g.adjoint()).norm(), 1e-14 * g.norm());
        const Eigen::SelfAdjointEigenSolver<Mat> es(g);
        EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
    }
}

// Every beam references a distinct out-of-cell user: (m, k) -> (m + 1 mod 3, k).
ReferenceMap rotated_references(const NetworkConfig& cfg)
{
    const Dims& d = cfg.dims;
    ReferenceMap map;
    map.dims = d;
    map.refs.resize(d.num_triples());
    for (int m = 0; m < d.num_bs; ++m)
        for (int k = 0; k < d.users_per_cell; ++k)
            for (int n = 0; n < d.num_subchannels; ++n) map.refs[d.triple(m, k, n)] = {{(m + 1) % d.num_bs, k}};
    return map;
}

TEST(Feedback, HandCountDeskScale)
{
    const NetworkConfig cfg = NetworkConfig::with_dims(Dims{});
    // per (m, n): 6 other-cell users x (2*3 + 3) = 54 reals; 9 pairs
    const FeedbackCount icbf = feedback_icbf(cfg);
    EXPECT_EQ(icbf.reals, 54LL * 9);
    EXPECT_EQ(icbf.bits, 54LL * 9 * 8);
    // distinct out-of-cell references: 6 * 6 + 3 * 3 = 45 reals per pair
    const ReferenceMap refs = rotated_references(cfg);
    EXPECT_EQ(distinct_out_of_cell_refs(refs, cfg, 0, 0), 3);
    const FeedbackCount cb = feedback_cb_refim(cfg, refs);
    EXPECT_EQ(cb.reals, 45LL * 9);
    EXPECT_EQ(cb.bits, 45LL * 9 * 8);
}

TEST(Feedback, RepeatedAndIntraCellReferencesCostLess)
{
    const NetworkConfig cfg = NetworkConfig::with_dims(Dims{});
    const Dims& d = cfg.dims;
    ReferenceMap map;
    map.dims = d;
    map.refs.resize(d.num_triples());
    for (int m = 0; m < 3; ++m)
        for (int k = 0; k < 3; ++k)
            for (int n = 0; n < 3; ++n)
                map.refs[d.triple(m, k, n)] = k == 0 ? ReferenceList{{m, 1}} : ReferenceList{{(m + 1) % 3, 0}};
    EXPECT_EQ(distinct_out_of_cell_refs(map, cfg, 0, 0), 1);
    EXPECT_EQ(feedback_cb_refim(cfg, map).reals, (36LL + 3) * 9);
}

TEST(Feedback, RatioTendsToOneForManyAntennas)
{
    double prev = 0.0;
    for (int nt : {2, 8, 32, 128, 1024}) {
        const NetworkConfig cfg = NetworkConfig::with_dims(Dims{3, 3, 3, nt});
        const double ratio = static_cast<double>(feedback_cb_refim(cfg, rotated_references(cfg)).bits) /
                             static_cast<double>(feedback_icbf(cfg).bits);
        EXPECT_GT(ratio, prev);
        EXPECT_LT(ratio, 1.0);
        prev = ratio;
    }
    EXPECT_GT(prev, 0.999);
}

TEST(Feedback, QuantizationScalesBits)
{
    const NetworkConfig cfg = NetworkConfig::with_dims(Dims{});
    const FeedbackCount f = feedback_icbf(cfg, FeedbackModel{5});
    EXPECT_EQ(f.bits, f.reals * 5);
}

TEST(CbRefim, FullReferenceSetTracksIcbf)
{
    // With every candidate as reference and exact rank-R inversion, CB-REFIM
    // runs the same iteration as ICBF.
    const NetworkConfig cfg = NetworkConfig::with_dims(Dims{});
    const Realization rz = realize(cfg, 12);
    const BeamSet start = init_mslnr(rz.channels, cfg);
    const SolveResult a = solve(rz.channels, cfg, start, {Algorithm::icbf, 1});
    const SolveResult b = solve(rz.channels, cfg, start, {Algorithm::cb_refim, 8});
    EXPECT_NEAR(weighted_sum_rate(rz.channels, b.beams, cfg), weighted_sum_rate(rz.channels, a.beams, cfg), 1e-6);
}

} // namespace
} // namespace mcbf
