// SPDX-License-Identifier: Apache-2.0

#include "mcbf/beams.hpp"

#include <string>

namespace mcbf {

BeamSet::BeamSet(const NetworkConfig& config)
    : dims_(config.dims), active_(config.active), beams_(config.dims.num_triples())
{
    if (active_.size() != dims_.num_triples()) throw UsageError("assignment size does not match dimensions");
    for (std::size_t i = 0; i < beams_.size(); ++i)
        if (active_[i]) beams_[i] = Vec::Zero(dims_.num_antennas);
}

void BeamSet::check(int m, int k, int n) const
{
    if (m < 0 || m >= dims_.num_bs || k < 0 || k >= dims_.users_per_cell || n < 0 ||
        n >= dims_.num_subchannels)
        throw UsageError("beam index out of range");
    if (!active_[dims_.triple(m, k, n)])
        throw UsageError("inactive triple (m=" + std::to_string(m) + ", k=" + std::to_string(k) +
                         ", n=" + std::to_string(n) + ")");
}

const Vec& BeamSet::at(int m, int k, int n) const
{
    check(m, k, n);
    return beams_[dims_.triple(m, k, n)];
}

Vec& BeamSet::at(int m, int k, int n)
{
    check(m, k, n);
    return beams_[dims_.triple(m, k, n)];
}

double BeamSet::bs_power(int m) const
{
    double p = 0.0;
    for (int k = 0; k < dims_.users_per_cell; ++k)
        for (int n = 0; n < dims_.num_subchannels; ++n)
            if (is_active(m, k, n)) p += beams_[dims_.triple(m, k, n)].squaredNorm();
    return p;
}

bool BeamSet::all_finite() const
{
    for (const Vec& v : beams_)
        if (!v.allFinite()) return false;
    return true;
}

} // namespace mcbf
