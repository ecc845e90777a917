// SPDX-License-Identifier: Apache-2.0

#include "mcbf/beam_init.hpp"

#include <cmath>
#include <string>

namespace mcbf {

InitKind parse_init_kind(std::string_view name)
{
    if (name == "cm") return InitKind::cm;
    if (name == "zf") return InitKind::zf;
    if (name == "mslnr") return InitKind::mslnr;
    throw ConfigError("unknown initializer '" + std::string(name) + "' (expected cm|zf|mslnr)");
}

std::string_view to_string(InitKind kind)
{
    switch (kind) {
    case InitKind::cm: return "cm";
    case InitKind::zf: return "zf";
    case InitKind::mslnr: return "mslnr";
    }
    return "?";
}

namespace {

double split_amplitude(const NetworkConfig& config)
{
    const Dims& d = config.dims;
    return std::sqrt(config.p_max / (static_cast<double>(d.num_subchannels) * d.users_per_cell));
}

void require_normalized(const ChannelState& channels, const NetworkConfig& config)
{
    if (!channels.is_normalized()) throw UsageError("channels are not normalized");
    if (!(channels.dims == config.dims)) throw UsageError("channel dimensions do not match config");
}

} // namespace

BeamSet init_cm(const ChannelState& channels, const NetworkConfig& config)
{
    require_normalized(channels, config);
    const double amp = split_amplitude(config);
    BeamSet beams(config);
    const Dims& d = config.dims;
    for (int m = 0; m < d.num_bs; ++m)
        for (int k = 0; k < d.users_per_cell; ++k)
            for (int n = 0; n < d.num_subchannels; ++n) {
                if (!config.is_active(m, k, n)) continue;
                const Vec& h = channels.h(m, d.user_id(m, k), n);
                const double norm = h.norm();
                if (norm == 0.0) throw DegenerateChannelError("zero channel in channel-matched init");
                beams.at(m, k, n) = (amp / norm) * h;
            }
    return beams;
}

BeamSet init_zf(const ChannelState& channels, const NetworkConfig& config)
{
    require_normalized(channels, config);
    const Dims& d = config.dims;
    if (d.num_antennas < d.users_per_cell)
        throw UnsupportedConfigError("per-cell zero-forcing needs Nt >= K (Nt=" + std::to_string(d.num_antennas) +
                                     ", K=" + std::to_string(d.users_per_cell) + ")");
    const double amp = split_amplitude(config);
    BeamSet beams(config);
    for (int m = 0; m < d.num_bs; ++m)
        for (int n = 0; n < d.num_subchannels; ++n)
            for (int k = 0; k < d.users_per_cell; ++k) {
                if (!config.is_active(m, k, n)) continue;
                const Vec& h = channels.h(m, d.user_id(m, k), n);
                Mat others(d.num_antennas, 0);
                for (int u = 0; u < d.users_per_cell; ++u) {
                    if (u == k || !config.is_active(m, u, n)) continue;
                    others.conservativeResize(Eigen::NoChange, others.cols() + 1);
                    others.col(others.cols() - 1) = channels.h(m, d.user_id(m, u), n);
                }
                Vec proj = h;
                if (others.cols() > 0) {
                    // Pi_X h = X (X^H X)^{-1} X^H h, via a thin QR of X.
                    Eigen::HouseholderQR<Mat> qr(others);
                    const Mat q = qr.householderQ() * Mat::Identity(d.num_antennas, others.cols());
                    proj = h - q * (q.adjoint() * h);
                }
                const double norm = proj.norm();
                if (!(norm > 1e-12 * h.norm()))
                    throw DegenerateChannelError("channel lies in the span of the other same-cell channels");
                beams.at(m, k, n) = (amp / norm) * proj;
            }
    return beams;
}

BeamSet init_mslnr(const ChannelState& channels, const NetworkConfig& config, MslnrNorm norm)
{
    require_normalized(channels, config);
    const Dims& d = config.dims;
    const double amp = norm == MslnrNorm::equal_split ? split_amplitude(config) : 1.0;
    const double ridge = static_cast<double>(d.num_subchannels) * d.users_per_cell / config.p_max;
    BeamSet beams(config);
    for (int m = 0; m < d.num_bs; ++m)
        for (int n = 0; n < d.num_subchannels; ++n)
            for (int k = 0; k < d.users_per_cell; ++k) {
                if (!config.is_active(m, k, n)) continue;
                Mat dm = ridge * Mat::Identity(d.num_antennas, d.num_antennas);
                for (int j = 0; j < d.num_bs; ++j)
                    for (int u = 0; u < d.users_per_cell; ++u) {
                        if ((j == m && u == k) || !config.is_active(j, u, n)) continue;
                        const Vec& g = channels.h(m, d.user_id(j, u), n);
                        dm.selfadjointView<Eigen::Lower>().rankUpdate(g);
                    }
                Eigen::LLT<Mat, Eigen::Lower> llt(dm);
                if (llt.info() != Eigen::Success) throw NumericalError("leakage-plus-noise matrix not positive definite");
                const Vec x = llt.solve(channels.h(m, d.user_id(m, k), n));
                const double xn = x.norm();
                if (xn == 0.0) throw DegenerateChannelError("zero channel in max-SLNR init");
                beams.at(m, k, n) = (amp / xn) * x;
            }
    return beams;
}

BeamSet make_initial_beams(InitKind kind, const ChannelState& channels, const NetworkConfig& config)
{
    switch (kind) {
    case InitKind::cm: return init_cm(channels, config);
    case InitKind::zf: return init_zf(channels, config);
    case InitKind::mslnr: return init_mslnr(channels, config);
    }
    throw ConfigError("unknown initializer");
}

} // namespace mcbf
