// SPDX-License-Identifier: Apache-2.0
//
// Common aliases, index helpers and error types shared by every module.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcbf {

using cdouble = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

/// Problem dimensions: M coordinated BSs, N subchannels, K users per cell,
/// Nt transmit antennas per BS. Users are numbered globally as cell * K + k.
struct Dims {
    int num_bs = 3;
    int num_subchannels = 3;
    int users_per_cell = 3;
    int num_antennas = 3;

    int num_users() const { return num_bs * users_per_cell; }
    int user_id(int cell, int k) const { return cell * users_per_cell + k; }
    int cell_of(int user) const { return user / users_per_cell; }
    int local_of(int user) const { return user % users_per_cell; }

    /// Flat index of a (serving BS, local user, subchannel) triple.
    std::size_t triple(int m, int k, int n) const
    {
        return (static_cast<std::size_t>(m) * users_per_cell + k) * num_subchannels + n;
    }
    std::size_t num_triples() const
    {
        return static_cast<std::size_t>(num_bs) * users_per_cell * num_subchannels;
    }

    bool operator==(const Dims&) const = default;
};

/// A user identified by its serving cell and its index inside that cell.
struct UserRef {
    int cell = 0;
    int k = 0;
    bool operator==(const UserRef&) const = default;
};

/// Bad configuration values (counts, powers, malformed keys).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Calling an operation on an inactive triple or with mismatched shapes.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Configuration that is valid in general but not supported by an algorithm
/// (e.g. zero-forcing with fewer antennas than same-cell users).
class UnsupportedConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A channel realization that makes an operation ill-defined.
class DegenerateChannelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical invariant was violated (non-positive noise, indefinite Γ, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mcbf
