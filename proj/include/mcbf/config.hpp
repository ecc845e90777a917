// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mcbf/types.hpp"

#include <vector>

namespace mcbf {

/// Network and solver configuration shared by every stage of a trial.
///
/// Weights are stored per (global user, subchannel); the activity mask per
/// (serving BS, local user, subchannel) triple. Both are sized by
/// `reset_defaults()` and must be kept consistent with `dims`.
struct NetworkConfig {
    Dims dims;
    double p_max = 1.0;      // per-BS power budget, linear
    double gamma_db = 30.0;  // transmit SNR p_max / sigma^2

    std::vector<double> weights;  // [user * N + n]
    std::vector<char> active;     // [Dims::triple(m, k, n)]

    int inner_iters = 40;
    int outer_iters = 4;
    double lambda_min = 1e-10;
    double inner_tol = 1e-6;  // relative weighted-sum-rate change
    double outer_tol = 1e-4;

    /// Config with the given dimensions, equal weights 1/(MN) and full reuse.
    static NetworkConfig with_dims(Dims d);

    /// Resize weights/assignment to `dims` with the default values.
    void reset_defaults();

    double weight(int user, int n) const
    {
        return weights[static_cast<std::size_t>(user) * dims.num_subchannels + n];
    }
    double& weight(int user, int n)
    {
        return weights[static_cast<std::size_t>(user) * dims.num_subchannels + n];
    }
    bool is_active(int m, int k, int n) const { return active[dims.triple(m, k, n)] != 0; }
    void set_active(int m, int k, int n, bool on) { active[dims.triple(m, k, n)] = on ? 1 : 0; }

    double noise_power() const;  // sigma^2 = p_max / gamma

    /// Throws ConfigError when an invariant does not hold.
    void validate() const;
};

} // namespace mcbf
