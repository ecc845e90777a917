// SPDX-License-Identifier: Apache-2.0
//
// Cellular layout, user drop, fading channels and the long-term noise model.
// Everything here is a pure function of (config, seed).

#pragma once

#include "mcbf/config.hpp"
#include "mcbf/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace mcbf {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(Point a, Point b);

struct LayoutParams {
    double site_spacing = 2000.0;  // adjacent BS distance [m]
    double inner_radius = 500.0;   // user annulus around the serving BS [m]
    double outer_radius = 1100.0;
    int out_of_cluster = 24;       // uncoordinated BSs contributing to noise
};

/// BS grid and user drop. Sites [0, M) are the coordinated cluster, the
/// remaining sites are the uncoordinated ring around it. Users are numbered
/// globally (cell * K + k) and served by the site with index `cell`.
struct Topology {
    Dims dims;
    LayoutParams layout;
    std::vector<Point> bs_positions;
    std::vector<Point> user_positions;

    int num_sites() const { return static_cast<int>(bs_positions.size()); }
    int serving_bs(int user) const { return dims.cell_of(user); }
    double distance(int site, int user) const;
};

/// Largest cluster the hexagonal layout generator can place.
inline constexpr int kMaxLayoutBs = 7;

/// Hexagonal grid with the M coordinated sites around the layout anchor
/// (the centroid of three mutually adjacent sites when M = 3, a single site
/// otherwise), the next `out_of_cluster` nearest sites as interferers, and
/// K users per coordinated cell dropped uniformly in angle and radius.
Topology build_topology(const NetworkConfig& config, std::uint64_t seed,
                        const LayoutParams& layout = {});

struct ChannelModel {
    double reference_distance = 200.0;  // [m], unit path gain
    double path_loss_exponent = 3.5;
    double shadowing_std_db = 8.0;
};

/// Large-scale power gain (d0/d)^alpha * 10^(shadow_db/10).
double link_gain(double distance_m, double shadow_db, const ChannelModel& model = {});

/// Raw channels for every site, plus noise and noise-normalized channels for
/// the coordinated BSs once `compute_noise` / `normalize_channels` have run.
struct ChannelState {
    Dims dims;
    int num_sites = 0;

    std::vector<Vec> raw;           // [site][user][n]
    std::vector<double> shadow_db;  // [site][user], shared across subchannels
    std::vector<double> gain;       // [site][user], path loss times shadowing
    std::vector<double> noise;      // [user][n], linear
    std::vector<Vec> normalized;    // [bs < M][user][n]

    std::size_t link_index(int site, int user) const
    {
        return static_cast<std::size_t>(site) * dims.num_users() + user;
    }
    std::size_t raw_index(int site, int user, int n) const
    {
        return link_index(site, user) * dims.num_subchannels + n;
    }
    std::size_t noise_index(int user, int n) const
    {
        return static_cast<std::size_t>(user) * dims.num_subchannels + n;
    }

    const Vec& raw_channel(int site, int user, int n) const { return raw[raw_index(site, user, n)]; }

    /// Noise-normalized channel from coordinated BS `bs` to global user `user`.
    const Vec& h(int bs, int user, int n) const { return normalized[raw_index(bs, user, n)]; }
    const Vec& h(int bs, UserRef u, int n) const { return h(bs, dims.user_id(u.cell, u.k), n); }

    bool is_normalized() const { return !normalized.empty(); }

    /// Wrap already-normalized channels ([bs][user][n], unit noise).
    static ChannelState from_normalized(Dims dims, std::vector<Vec> normalized);
};

/// Draws shadowing once per (site, user) link and Rayleigh fading per
/// (site, user, subchannel). Fills `raw`, `shadow_db` and `gain`.
ChannelState draw_channels(const Topology& topology, const NetworkConfig& config,
                           std::uint64_t seed, const ChannelModel& model = {});

/// Per-user noise: thermal sigma^2 plus the long-term power received from
/// every uncoordinated site at p_max / N per subchannel.
std::vector<double> compute_noise(const NetworkConfig& config, const ChannelState& channels);

/// Fills `normalized` with raw / sqrt(noise) for the coordinated BSs.
/// Throws NumericalError when `noise` is missing or non-positive.
void normalize_channels(ChannelState& channels);

/// Independent 64-bit stream derivation (splitmix64 of seed and stream id).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Topology, channels, noise and normalization for one realization; the
/// topology and fading use streams 1 and 2 of `seed`.
struct Realization {
    Topology topology;
    ChannelState channels;
};
Realization realize(const NetworkConfig& config, std::uint64_t seed,
                    const LayoutParams& layout = {}, const ChannelModel& model = {});

/// Columns: kind,index,cell,x,y (kind is "bs" or "user").
void write_topology_csv(const Topology& topology, std::ostream& out);

/// Columns: m,k,n,noise,re_0,im_0,...; m runs over all sites for raw
/// channels and over coordinated BSs for normalized ones, k is the global user.
void write_channels_csv(const ChannelState& channels, bool normalized, std::ostream& out);

} // namespace mcbf
