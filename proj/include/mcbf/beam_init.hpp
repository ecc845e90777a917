// SPDX-License-Identifier: Apache-2.0
//
// Initial feasible beam sets: channel-matched, per-cell zero-forcing and
// maximum-SLNR. All three split the power budget equally, so every BS uses
// exactly p_max when all N*K triples are active.

#pragma once

#include "mcbf/beams.hpp"
#include "mcbf/config.hpp"
#include "mcbf/network.hpp"

#include <string_view>

namespace mcbf {

enum class InitKind { cm, zf, mslnr };

InitKind parse_init_kind(std::string_view name);
std::string_view to_string(InitKind kind);

/// v = sqrt(p_max/(N K)) h / |h|.
BeamSet init_cm(const ChannelState& channels, const NetworkConfig& config);

/// Projects h onto the orthogonal complement of the other active same-cell
/// channels on the subchannel. Requires Nt >= K.
BeamSet init_zf(const ChannelState& channels, const NetworkConfig& config);

enum class MslnrNorm {
    equal_split,  // |v|^2 = p_max / (N K)
    unit,         // |v| = 1
};

/// Maximizes v^H G v / v^H D v with D = sum of leaked outer products plus
/// (N K / p_max) I. G is rank one, so the maximizer is D^{-1} h.
BeamSet init_mslnr(const ChannelState& channels, const NetworkConfig& config,
                   MslnrNorm norm = MslnrNorm::equal_split);

BeamSet make_initial_beams(InitKind kind, const ChannelState& channels, const NetworkConfig& config);

} // namespace mcbf
