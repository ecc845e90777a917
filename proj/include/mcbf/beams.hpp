// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mcbf/config.hpp"
#include "mcbf/types.hpp"

#include <vector>

namespace mcbf {

/// Beam vectors v_{m,k}(n) for the active (BS, user, subchannel) triples.
/// Inactive triples hold no vector; accessing them throws UsageError.
class BeamSet {
public:
    BeamSet() = default;

    /// Zero beams for every active triple of `config`.
    explicit BeamSet(const NetworkConfig& config);

    const Dims& dims() const { return dims_; }
    bool is_active(int m, int k, int n) const { return active_[dims_.triple(m, k, n)] != 0; }

    const Vec& at(int m, int k, int n) const;
    Vec& at(int m, int k, int n);

    /// Sum of squared beam norms over every active triple of BS m.
    double bs_power(int m) const;

    bool all_finite() const;

    template <typename F>
    void for_each_active(F&& f) const
    {
        for (int m = 0; m < dims_.num_bs; ++m)
            for (int k = 0; k < dims_.users_per_cell; ++k)
                for (int n = 0; n < dims_.num_subchannels; ++n)
                    if (is_active(m, k, n)) f(m, k, n, beams_[dims_.triple(m, k, n)]);
    }

private:
    void check(int m, int k, int n) const;

    Dims dims_;
    std::vector<char> active_;
    std::vector<Vec> beams_;
};

} // namespace mcbf
