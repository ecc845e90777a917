// SPDX-License-Identifier: Apache-2.0

#include "mcbf/config.hpp"

#include <cmath>
#include <string>

namespace mcbf {

NetworkConfig NetworkConfig::with_dims(Dims d)
{
    NetworkConfig cfg;
    cfg.dims = d;
    cfg.reset_defaults();
    return cfg;
}

void NetworkConfig::reset_defaults()
{
    if (dims.num_bs < 1 || dims.num_subchannels < 1 || dims.users_per_cell < 1)
        throw ConfigError("dimensions must be positive before sizing defaults");
    const double w = 1.0 / (static_cast<double>(dims.num_bs) * dims.num_subchannels);
    weights.assign(static_cast<std::size_t>(dims.num_users()) * dims.num_subchannels, w);
    active.assign(dims.num_triples(), 1);
}

double NetworkConfig::noise_power() const
{
    return p_max / std::pow(10.0, gamma_db / 10.0);
}

void NetworkConfig::validate() const
{
    if (dims.num_bs < 1) throw ConfigError("M must be >= 1");
    if (dims.num_subchannels < 1) throw ConfigError("N must be >= 1");
    if (dims.users_per_cell < 1) throw ConfigError("K must be >= 1");
    if (dims.num_antennas < 1) throw ConfigError("Nt must be >= 1");
    if (!(p_max > 0.0) || !std::isfinite(p_max)) throw ConfigError("Pmax must be > 0");
    if (!std::isfinite(gamma_db)) throw ConfigError("gamma_db must be finite");
    if (!(lambda_min > 0.0)) throw ConfigError("lambda_min must be > 0");
    if (inner_iters < 1) throw ConfigError("inner_iters must be >= 1");
    if (outer_iters < 1) throw ConfigError("outer_iters must be >= 1");
    if (!(inner_tol >= 0.0) || !(outer_tol >= 0.0)) throw ConfigError("tolerances must be >= 0");
    if (weights.size() != static_cast<std::size_t>(dims.num_users()) * dims.num_subchannels)
        throw ConfigError("weights size does not match dimensions");
    if (active.size() != dims.num_triples())
        throw ConfigError("assignment size does not match dimensions");
    for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weights must be finite and >= 0");
}

} // namespace mcbf
