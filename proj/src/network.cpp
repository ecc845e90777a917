// SPDX-License-Identifier: Apache-2.0

#include "mcbf/network.hpp"

#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <string>

namespace mcbf {

double distance(Point a, Point b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

double Topology::distance(int site, int user) const
{
    return mcbf::distance(bs_positions.at(site), user_positions.at(user));
}

namespace {

struct Site {
    Point p;
    double radius;
    double angle;
};

// Hexagonal grid sites sorted by distance from the anchor, then by angle.
std::vector<Point> ordered_sites(double spacing, Point anchor, std::size_t count)
{
    const int span = 8;
    std::vector<Site> sites;
    for (int i = -span; i <= span; ++i) {
        for (int j = -span; j <= span; ++j) {
            const Point p{spacing * (i + 0.5 * j), spacing * (std::sqrt(3.0) / 2.0) * j};
            const double dx = p.x - anchor.x;
            const double dy = p.y - anchor.y;
            double ang = std::atan2(dy, dx);
            if (ang < -1e-9) ang += 2.0 * std::numbers::pi;
            sites.push_back({Point{dx, dy}, std::hypot(dx, dy), std::max(ang, 0.0)});
        }
    }
    const double eps = 1e-6 * spacing;
    std::sort(sites.begin(), sites.end(), [eps](const Site& a, const Site& b) {
        if (std::abs(a.radius - b.radius) > eps) return a.radius < b.radius;
        return a.angle < b.angle;
    });
    std::vector<Point> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count && i < sites.size(); ++i) out.push_back(sites[i].p);
    return out;
}

} // namespace

Topology build_topology(const NetworkConfig& config, std::uint64_t seed, const LayoutParams& layout)
{
    config.validate();
    const Dims& d = config.dims;
    if (d.num_bs > kMaxLayoutBs)
        throw UnsupportedConfigError("layout generator supports 1.." + std::to_string(kMaxLayoutBs) +
                                     " coordinated BSs, got M=" + std::to_string(d.num_bs));
    if (!(layout.site_spacing > 0.0) || !(layout.inner_radius > 0.0) ||
        !(layout.outer_radius >= layout.inner_radius) || layout.out_of_cluster < 0)
        throw ConfigError("invalid layout parameters");

    Topology topo;
    topo.dims = d;
    topo.layout = layout;

    // Three mutually adjacent sites are centred on their common centroid.
    const double s = layout.site_spacing;
    const Point anchor = d.num_bs == 3 ? Point{s / 2.0, s / (2.0 * std::sqrt(3.0))} : Point{0.0, 0.0};
    topo.bs_positions = ordered_sites(s, anchor, static_cast<std::size_t>(d.num_bs + layout.out_of_cluster));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> radius(layout.inner_radius, layout.outer_radius);
    topo.user_positions.reserve(static_cast<std::size_t>(d.num_users()));
    for (int c = 0; c < d.num_bs; ++c) {
        const Point bs = topo.bs_positions[c];
        for (int k = 0; k < d.users_per_cell; ++k) {
            const double a = angle(rng);
            const double r = radius(rng);
            topo.user_positions.push_back({bs.x + r * std::cos(a), bs.y + r * std::sin(a)});
        }
    }
    return topo;
}

double link_gain(double distance_m, double shadow_db, const ChannelModel& model)
{
    if (!(distance_m > 0.0)) throw ConfigError("link distance must be positive");
    return std::pow(model.reference_distance / distance_m, model.path_loss_exponent) *
           std::pow(10.0, shadow_db / 10.0);
}

ChannelState ChannelState::from_normalized(Dims dims, std::vector<Vec> normalized)
{
    const std::size_t expected =
        static_cast<std::size_t>(dims.num_bs) * dims.num_users() * dims.num_subchannels;
    if (normalized.size() != expected)
        throw UsageError("normalized channel count does not match dimensions");
    for (const Vec& h : normalized)
        if (h.size() != dims.num_antennas) throw UsageError("channel vector length != Nt");
    ChannelState st;
    st.dims = dims;
    st.num_sites = dims.num_bs;
    st.noise.assign(static_cast<std::size_t>(dims.num_users()) * dims.num_subchannels, 1.0);
    st.raw = normalized;
    st.normalized = std::move(normalized);
    st.shadow_db.assign(static_cast<std::size_t>(dims.num_bs) * dims.num_users(), 0.0);
    st.gain.assign(st.shadow_db.size(), 1.0);
    return st;
}

ChannelState draw_channels(const Topology& topology, const NetworkConfig& config, std::uint64_t seed,
                           const ChannelModel& model)
{
    const Dims& d = config.dims;
    if (!(topology.dims == d)) throw UsageError("topology dimensions do not match config");

    ChannelState st;
    st.dims = d;
    st.num_sites = topology.num_sites();
    const std::size_t links = static_cast<std::size_t>(st.num_sites) * d.num_users();
    st.shadow_db.resize(links);
    st.gain.resize(links);
    st.raw.resize(links * d.num_subchannels);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> shadow(0.0, model.shadowing_std_db);
    std::normal_distribution<double> fading(0.0, std::sqrt(0.5));

    for (int site = 0; site < st.num_sites; ++site) {
        for (int u = 0; u < d.num_users(); ++u) {
            const std::size_t li = st.link_index(site, u);
            st.shadow_db[li] = model.shadowing_std_db > 0.0 ? shadow(rng) : 0.0;
            st.gain[li] = link_gain(topology.distance(site, u), st.shadow_db[li], model);
            const double amp = std::sqrt(st.gain[li]);
            for (int n = 0; n < d.num_subchannels; ++n) {
                Vec h(d.num_antennas);
                for (int a = 0; a < d.num_antennas; ++a) {
                    const double re = fading(rng);
                    const double im = fading(rng);
                    h[a] = amp * cdouble(re, im);
                }
                if (h.squaredNorm() == 0.0)
                    throw DegenerateChannelError("all-zero channel drawn for site " + std::to_string(site) +
                                                 ", user " + std::to_string(u));
                st.raw[st.raw_index(site, u, n)] = std::move(h);
            }
        }
    }
    return st;
}

std::vector<double> compute_noise(const NetworkConfig& config, const ChannelState& channels)
{
    const Dims& d = config.dims;
    const double sigma2 = config.noise_power();
    const double per_subchannel = config.p_max / d.num_subchannels;
    std::vector<double> noise(static_cast<std::size_t>(d.num_users()) * d.num_subchannels);
    for (int u = 0; u < d.num_users(); ++u) {
        double interference = 0.0;
        for (int site = d.num_bs; site < channels.num_sites; ++site)
            interference += channels.gain[channels.link_index(site, u)] * per_subchannel;
        for (int n = 0; n < d.num_subchannels; ++n) noise[channels.noise_index(u, n)] = sigma2 + interference;
    }
    return noise;
}

void normalize_channels(ChannelState& channels)
{
    const Dims& d = channels.dims;
    const std::size_t expected_noise = static_cast<std::size_t>(d.num_users()) * d.num_subchannels;
    if (channels.noise.size() != expected_noise)
        throw NumericalError("noise map missing or mis-sized; run compute_noise first");
    channels.normalized.assign(static_cast<std::size_t>(d.num_bs) * d.num_users() * d.num_subchannels, Vec());
    for (int bs = 0; bs < d.num_bs; ++bs) {
        for (int u = 0; u < d.num_users(); ++u) {
            for (int n = 0; n < d.num_subchannels; ++n) {
                const double nk = channels.noise[channels.noise_index(u, n)];
                if (!(nk > 0.0) || !std::isfinite(nk))
                    throw NumericalError("non-positive noise power for user " + std::to_string(u));
                channels.normalized[channels.raw_index(bs, u, n)] =
                    channels.raw[channels.raw_index(bs, u, n)] / std::sqrt(nk);
            }
        }
    }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    // splitmix64 finalizer over a golden-ratio-spaced counter
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Realization realize(const NetworkConfig& config, std::uint64_t seed, const LayoutParams& layout,
                    const ChannelModel& model)
{
    Realization r;
    r.topology = build_topology(config, mix_seed(seed, 1), layout);
    r.channels = draw_channels(r.topology, config, mix_seed(seed, 2), model);
    r.channels.noise = compute_noise(config, r.channels);
    normalize_channels(r.channels);
    return r;
}

void write_topology_csv(const Topology& topology, std::ostream& out)
{
    using detail::fmt;
    out << "kind,index,cell,x,y\n";
    for (int i = 0; i < topology.num_sites(); ++i) {
        const Point p = topology.bs_positions[i];
        out << "bs," << i << ',' << (i < topology.dims.num_bs ? i : -1) << ',' << fmt(p.x) << ','
            << fmt(p.y) << '\n';
    }
    for (int u = 0; u < static_cast<int>(topology.user_positions.size()); ++u) {
        const Point p = topology.user_positions[u];
        out << "user," << u << ',' << topology.serving_bs(u) << ',' << fmt(p.x) << ',' << fmt(p.y) << '\n';
    }
}

void write_channels_csv(const ChannelState& channels, bool normalized, std::ostream& out)
{
    using detail::fmt;
    const Dims& d = channels.dims;
    out << "m,k,n,noise";
    for (int a = 0; a < d.num_antennas; ++a) out << ",re_" << a << ",im_" << a;
    out << '\n';
    const int sites = normalized ? d.num_bs : channels.num_sites;
    for (int m = 0; m < sites; ++m) {
        for (int u = 0; u < d.num_users(); ++u) {
            for (int n = 0; n < d.num_subchannels; ++n) {
                const Vec& h = normalized ? channels.h(m, u, n) : channels.raw_channel(m, u, n);
                const double nk = channels.noise.empty() ? 0.0 : channels.noise[channels.noise_index(u, n)];
                out << m << ',' << u << ',' << n << ',' << fmt(nk);
                for (int a = 0; a < d.num_antennas; ++a) out << ',' << fmt(h[a].real()) << ',' << fmt(h[a].imag());
                out << '\n';
            }
        }
    }
}

} // namespace mcbf
