// SPDX-License-Identifier: Apache-2.0
//
// Configuration parsing and the Monte-Carlo experiment driver behind `sim`.
//
// Every trial t draws its own topology, shadowing and fading from
// trial_seed(seed, t), so results do not depend on worker count or order.

#pragma once

#include "mcbf/beam_init.hpp"
#include "mcbf/coordinated.hpp"
#include "mcbf/metrics.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcbf {

enum class ExperimentKind { convergence, snr_sweep, ref_sweep, cdf, feedback };

ExperimentKind parse_experiment_kind(std::string_view name);
std::string_view to_string(ExperimentKind kind);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::snr_sweep;
    int trials = 100;
    std::uint64_t seed = 1;
    std::vector<double> gamma_db = {30.0};
    std::vector<std::string> algos;  // empty: per-kind default
    InitKind init = InitKind::mslnr;
    int refs = 1;
    std::vector<int> ref_counts;     // ref_sweep; empty: 0 .. M K - 1
    std::vector<int> feedback_k = {2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<int> feedback_nt = {2, 3, 4};
    int quant_bits = 8;
    int workers = 1;
    std::string out_path = "-";      // "-" is stdout
    std::string dump_rates;          // optional per-triple rate CSV
    std::string dump_traces;         // optional per-iteration trace CSV
    std::string dump_channels;       // optional directory for trial-0 layout/channel CSVs

    void validate() const;
};

struct ParsedConfig {
    NetworkConfig network = NetworkConfig::with_dims(Dims{});
    ExperimentSpec experiment;
};

/// Applies one `key=value` setting. Throws ConfigError naming the key when the
/// key is unknown or the value is malformed.
void apply_setting(ParsedConfig& config, std::string_view key, std::string_view value);

/// Flat `key=value` text, one per line; '#' starts a comment. Settings are
/// applied on top of `base`; finalize() is not called.
ParsedConfig parse_config_text(std::string_view text, ParsedConfig base = {});
ParsedConfig parse_config_file(const std::string& path, ParsedConfig base = {});

/// Re-derives weights/assignment for the final dimensions, copies the first
/// γ into the network config, and validates both halves.
void finalize(ParsedConfig& config);

/// A column of an experiment: a baseline initializer or an iterative solver.
struct Method {
    std::string name;
    bool baseline = false;
    InitKind init = InitKind::mslnr;
    Algorithm algo = Algorithm::icbf;
    int refs = 1;
};

/// cm|zf|mslnr|icbf|icbf_wi|cb_refim.
Method parse_method(std::string_view name, int refs = 1);

struct MethodResult {
    std::string name;
    int refs = 0;
    double sum_rate = 0.0;
    RateReport report;
    SolverTrace trace;  // empty for baselines
};

struct TrialResult {
    int trial = 0;
    bool ok = false;
    std::string error;
    std::vector<MethodResult> methods;
};

std::uint64_t trial_seed(std::uint64_t seed, int trial);

/// One realization at the config's γ, evaluated with every method from the
/// same initializer. Exceptions are captured into `error`.
TrialResult run_trial(const NetworkConfig& config, std::span<const Method> methods, InitKind init,
                      std::uint64_t seed, int trial);

/// Trials 0..trials-1 on `workers` threads; output ordered by trial index.
std::vector<TrialResult> run_trials(const NetworkConfig& config, std::span<const Method> methods, InitKind init,
                                    std::uint64_t seed, int trials, int workers);

struct ExperimentOutput {
    std::string csv;
    int trials_run = 0;
    int trials_excluded = 0;
    std::vector<std::string> warnings;
};

/// Runs the experiment and returns its CSV. Column sets per kind:
///   convergence  gamma_db,algo,outer,sum_rate
///   snr_sweep    gamma_db,algo,mean_sum_rate,trials
///   ref_sweep    gamma_db,algo,refs,mean_sum_rate,trials
///   cdf          gamma_db,algo,index,rate,cdf
///   feedback     algo,K,Nt,bits
/// Dump files named in the ExperimentSpec are written as a side effect.
ExperimentOutput run_experiment(const NetworkConfig& config, const ExperimentSpec& spec);

/// Default method list for an experiment kind.
std::vector<std::string> default_algos(ExperimentKind kind);

} // namespace mcbf
