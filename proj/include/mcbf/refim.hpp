// SPDX-License-Identifier: Apache-2.0
//
// Reference-user interference management: reference selection, the
// rank-limited leakage built from it, exact inversion of a sum of rank-one
// terms, and inter-BS feedback accounting.

#pragma once

#include "mcbf/coordinated.hpp"

#include <span>
#include <vector>

namespace mcbf {

using ReferenceList = std::vector<UserRef>;

/// A(m,n) \ {(m,k)}: every active user on subchannel n in the neighbourhood
/// of BS m. The coordinated cluster is a full mesh, so that is every active
/// user of every coordinated cell.
std::vector<UserRef> reference_candidates(const NetworkConfig& config, int m, int k, int n);

/// |h_{m,u}|^2 |h_{m,u}^H h_{m,k}|^2, which equals |G_{m,u} h_{m,k}|^2.
double reference_score(const ChannelState& channels, int m, UserRef candidate, int k, int n);

/// The `count` highest-scoring candidates in descending score order; ties go
/// to the lowest (cell, user). Returns every candidate if count exceeds them.
ReferenceList select_references(const ChannelState& channels, const NetworkConfig& config, int m, int k, int n,
                                int count);

struct ReferenceMap {
    Dims dims;
    std::vector<ReferenceList> refs;  // [Dims::triple]

    const ReferenceList& at(int m, int k, int n) const { return refs[dims.triple(m, k, n)]; }
};

ReferenceMap select_all_references(const ChannelState& channels, const NetworkConfig& config, int count);

/// sum over the references u of q_u(n) h_{m,u} h_{m,u}^H; zero when `refs` is empty.
LeakageMatrix leakage_refim(const ChannelState& channels, const BeamSet& beams, const NetworkConfig& config,
                            int m, int k, int n, std::span<const UserRef> refs);

LeakageMatrix leakage_refim(const CrossGains& gains, const ChannelState& channels, const NetworkConfig& config,
                            int m, int n, std::span<const UserRef> refs);

/// Leakage for every active triple from a reference map (indexed by Dims::triple).
std::vector<LeakageMatrix> leakage_refim_all(const ChannelState& channels, const BeamSet& beams,
                                             const NetworkConfig& config, const ReferenceMap& refs);

/// Exact (λ ln2 I + sum f f^H)^{-1}, built by one Sherman-Morrison update per
/// factor starting from I / (λ ln2).
Mat invert_rank_r(std::span<const Vec> factors, double lambda, int nt);

struct FeedbackModel {
    int quant_bits = 8;  // per real number
};

struct FeedbackCount {
    long long reals = 0;
    long long bits = 0;
};

/// Every BS m receives, per subchannel and per active user of the other
/// coordinated cells, the channel vector (2 Nt reals) plus weight, received
/// signal strength and interference-plus-noise (1 real each).
FeedbackCount feedback_icbf(const NetworkConfig& config, const FeedbackModel& model = {});

/// Channel vectors for all other-cell users as above, but the three scalars
/// only for the distinct out-of-cell reference users of BS m on n.
FeedbackCount feedback_cb_refim(const NetworkConfig& config, const ReferenceMap& refs,
                                const FeedbackModel& model = {});

/// Number of distinct out-of-cell users referenced by BS m's beams on n.
int distinct_out_of_cell_refs(const ReferenceMap& refs, const NetworkConfig& config, int m, int n);

} // namespace mcbf
