// SPDX-License-Identifier: Apache-2.0

#include "mcbf/harness.hpp"

#include "mcbf/network.hpp"
#include "mcbf/refim.hpp"

#include "csv.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace mcbf {

using detail::fmt;

ExperimentKind parse_experiment_kind(std::string_view name)
{
    if (name == "convergence") return ExperimentKind::convergence;
    if (name == "snr_sweep") return ExperimentKind::snr_sweep;
    if (name == "ref_sweep") return ExperimentKind::ref_sweep;
    if (name == "cdf") return ExperimentKind::cdf;
    if (name == "feedback") return ExperimentKind::feedback;
    throw ConfigError("unknown experiment '" + std::string(name) +
                      "' (expected convergence|snr_sweep|ref_sweep|cdf|feedback)");
}

std::string_view to_string(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::convergence: return "convergence";
    case ExperimentKind::snr_sweep: return "snr_sweep";
    case ExperimentKind::ref_sweep: return "ref_sweep";
    case ExperimentKind::cdf: return "cdf";
    case ExperimentKind::feedback: return "feedback";
    }
    return "?";
}

void ExperimentSpec::validate() const
{
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (gamma_db.empty()) throw ConfigError("gamma_db list must not be empty");
    if (refs < 0) throw ConfigError("refs must be >= 0");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (quant_bits < 1) throw ConfigError("quant_bits must be >= 1");
    for (int r : ref_counts)
        if (r < 0) throw ConfigError("ref_counts entries must be >= 0");
    if (kind == ExperimentKind::feedback && (feedback_k.empty() || feedback_nt.empty()))
        throw ConfigError("feedback_K and feedback_Nt must not be empty");
}

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s)
{
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = s.find(',');
        out.push_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view why)
{
    throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) + "': " +
                      std::string(why));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value)
{
    value = trim(value);
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty())
        bad_value(key, value, "not a number");
    return out;
}

int parse_count(std::string_view key, std::string_view value, int min)
{
    const int v = parse_number<int>(key, value);
    if (v < min) bad_value(key, value, "must be >= " + std::to_string(min));
    return v;
}

double parse_positive(std::string_view key, std::string_view value)
{
    const double v = parse_number<double>(key, value);
    if (!(v > 0.0)) bad_value(key, value, "must be > 0");
    return v;
}

std::vector<int> parse_int_list(std::string_view key, std::string_view value, int min)
{
    std::vector<int> out;
    for (std::string_view item : split_list(value)) out.push_back(parse_count(key, item, min));
    return out;
}

} // namespace

void apply_setting(ParsedConfig& config, std::string_view raw_key, std::string_view value)
{
    std::string key(trim(raw_key));
    std::replace(key.begin(), key.end(), '-', '_');
    value = trim(value);
    NetworkConfig& net = config.network;
    ExperimentSpec& exp = config.experiment;

    if (key == "experiment") {
        exp.kind = parse_experiment_kind(value);
    } else if (key == "M") {
        net.dims.num_bs = parse_count(key, value, 1);
    } else if (key == "N") {
        net.dims.num_subchannels = parse_count(key, value, 1);
    } else if (key == "K") {
        net.dims.users_per_cell = parse_count(key, value, 1);
    } else if (key == "Nt") {
        net.dims.num_antennas = parse_count(key, value, 1);
    } else if (key == "Pmax") {
        net.p_max = parse_positive(key, value);
    } else if (key == "gamma_db") {
        exp.gamma_db.clear();
        for (std::string_view item : split_list(value)) exp.gamma_db.push_back(parse_number<double>(key, item));
    } else if (key == "trials") {
        exp.trials = parse_count(key, value, 1);
    } else if (key == "seed") {
        exp.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "algo") {
        exp.algos.clear();
        for (std::string_view item : split_list(value)) {
            try {
                parse_method(item);
            } catch (const ConfigError& e) {
                bad_value(key, item, e.what());
            }
            exp.algos.emplace_back(item);
        }
    } else if (key == "init") {
        try {
            exp.init = parse_init_kind(value);
        } catch (const ConfigError& e) {
            bad_value(key, value, e.what());
        }
    } else if (key == "refs") {
        exp.refs = parse_count(key, value, 0);
    } else if (key == "ref_counts") {
        exp.ref_counts = parse_int_list(key, value, 0);
    } else if (key == "feedback_K") {
        exp.feedback_k = parse_int_list(key, value, 1);
    } else if (key == "feedback_Nt") {
        exp.feedback_nt = parse_int_list(key, value, 1);
    } else if (key == "quant_bits") {
        exp.quant_bits = parse_count(key, value, 1);
    } else if (key == "workers") {
        exp.workers = parse_count(key, value, 1);
    } else if (key == "inner_iters") {
        net.inner_iters = parse_count(key, value, 1);
    } else if (key == "outer_iters") {
        net.outer_iters = parse_count(key, value, 1);
    } else if (key == "lambda_min") {
        net.lambda_min = parse_positive(key, value);
    } else if (key == "inner_tol") {
        net.inner_tol = parse_number<double>(key, value);
    } else if (key == "outer_tol") {
        net.outer_tol = parse_number<double>(key, value);
    } else if (key == "out") {
        exp.out_path = std::string(value);
    } else if (key == "dump_rates") {
        exp.dump_rates = std::string(value);
    } else if (key == "dump_traces") {
        exp.dump_traces = std::string(value);
    } else if (key == "dump_channels") {
        exp.dump_channels = std::string(value);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

ParsedConfig parse_config_text(std::string_view text, ParsedConfig base)
{
    int line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value, got '" + std::string(line) +
                              "'");
        apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    }
    return base;
}

ParsedConfig parse_config_file(const std::string& path, ParsedConfig base)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), std::move(base));
}

void finalize(ParsedConfig& config)
{
    config.network.reset_defaults();
    config.experiment.validate();
    config.network.gamma_db = config.experiment.gamma_db.front();
    config.network.validate();
    for (const std::string& a : config.experiment.algos) parse_method(a);
}

Method parse_method(std::string_view name, int refs)
{
    Method m;
    m.name = std::string(name);
    m.refs = refs;
    if (name == "cm" || name == "zf" || name == "mslnr") {
        m.baseline = true;
        m.init = parse_init_kind(name);
        return m;
    }
    if (name == "icbf" || name == "icbf_wi" || name == "cb_refim") {
        m.algo = parse_algorithm(name);
        return m;
    }
    throw ConfigError("unknown algorithm '" + std::string(name) + "' (expected cm|zf|mslnr|icbf|icbf_wi|cb_refim)");
}

std::vector<std::string> default_algos(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::convergence: return {"icbf", "icbf_wi", "cb_refim"};
    case ExperimentKind::feedback: return {"icbf", "cb_refim"};
    default: return {"cm", "zf", "mslnr", "icbf", "icbf_wi", "cb_refim"};
    }
}

std::uint64_t trial_seed(std::uint64_t seed, int trial)
{
    return mix_seed(seed, 1000ULL + static_cast<std::uint64_t>(trial));
}

TrialResult run_trial(const NetworkConfig& config, std::span<const Method> methods, InitKind init, std::uint64_t seed,
                      int trial)
{
    TrialResult tr;
    tr.trial = trial;
    try {
        const Realization r = realize(config, trial_seed(seed, trial));
        const BeamSet start = make_initial_beams(init, r.channels, config);
        for (const Method& method : methods) {
            MethodResult mr;
            mr.name = method.name;
            mr.refs = method.refs;
            BeamSet beams;
            if (method.baseline) {
                beams = method.init == init ? start : make_initial_beams(method.init, r.channels, config);
            } else {
                SolveResult s = solve(r.channels, config, start, SolveOptions{method.algo, method.refs});
                beams = std::move(s.beams);
                mr.trace = std::move(s.trace);
            }
            mr.report = rate_report(r.channels, beams, config);
            mr.sum_rate = mr.report.weighted_sum_rate;
            tr.methods.push_back(std::move(mr));
        }
        tr.ok = true;
    } catch (const std::exception& e) {
        tr.ok = false;
        tr.error = e.what();
        tr.methods.clear();
    }
    return tr;
}

std::vector<TrialResult> run_trials(const NetworkConfig& config, std::span<const Method> methods, InitKind init,
                                    std::uint64_t seed, int trials, int workers)
{
    std::vector<TrialResult> results(static_cast<std::size_t>(std::max(trials, 0)));
    const int threads = std::clamp(workers, 1, std::max(trials, 1));
    if (threads == 1) {
        for (int t = 0; t < trials; ++t) results[t] = run_trial(config, methods, init, seed, t);
        return results;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (int t = next++; t < trials; t = next++) results[t] = run_trial(config, methods, init, seed, t);
        });
    for (std::thread& th : pool) th.join();
    return results;
}

namespace {

std::vector<Method> expand_methods(const NetworkConfig& config, const ExperimentSpec& spec)
{
    const std::vector<std::string> names = spec.algos.empty() ? default_algos(spec.kind) : spec.algos;
    std::vector<Method> out;
    for (const std::string& name : names) {
        if (spec.kind == ExperimentKind::ref_sweep && name == "cb_refim") {
            std::vector<int> counts = spec.ref_counts;
            if (counts.empty())
                for (int r = 0; r < config.dims.num_users(); ++r) counts.push_back(r);
            for (int r : counts) out.push_back(parse_method(name, r));
        } else {
            out.push_back(parse_method(name, spec.refs));
        }
    }
    return out;
}

std::string dump_path(const std::string& path, const ExperimentSpec& spec, double gamma)
{
    if (spec.gamma_db.size() == 1) return path;
    std::filesystem::path p(path);
    const std::string stem = p.stem().string() + "_gamma" + fmt(gamma);
    return (p.parent_path() / (stem + p.extension().string())).string();
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

void write_dumps(const NetworkConfig& config, const ExperimentSpec& spec, double gamma,
                 const std::vector<TrialResult>& results)
{
    if (!spec.dump_rates.empty()) {
        std::ofstream out = open_output(dump_path(spec.dump_rates, spec, gamma));
        write_rate_csv_header(out);
        for (const TrialResult& tr : results)
            for (const MethodResult& mr : tr.methods) write_rate_csv_rows(out, tr.trial, mr.name, mr.report);
    }
    if (!spec.dump_traces.empty()) {
        std::ofstream out = open_output(dump_path(spec.dump_traces, spec, gamma));
        out << "trial,algo,refs,outer,inner,sum_rate";
        for (int m = 1; m <= config.dims.num_bs; ++m) out << ",power_" << m;
        out << ",residual\n";
        for (const TrialResult& tr : results)
            for (const MethodResult& mr : tr.methods)
                for (const TraceEntry& e : mr.trace.entries) {
                    out << tr.trial << ',' << mr.name << ',' << mr.refs << ',' << e.outer << ',' << e.inner << ','
                        << fmt(e.sum_rate);
                    for (double p : e.power) out << ',' << fmt(p);
                    out << ',' << fmt(e.residual) << '\n';
                }
    }
}

void dump_channels(const NetworkConfig& config, const ExperimentSpec& spec)
{
    const std::filesystem::path dir(spec.dump_channels);
    std::filesystem::create_directories(dir);
    const Realization r = realize(config, trial_seed(spec.seed, 0));
    std::ofstream topo = open_output((dir / "topology.csv").string());
    write_topology_csv(r.topology, topo);
    std::ofstream raw = open_output((dir / "channels_raw.csv").string());
    write_channels_csv(r.channels, false, raw);
    std::ofstream norm = open_output((dir / "channels_normalized.csv").string());
    write_channels_csv(r.channels, true, norm);
}

struct Tally {
    int run = 0;
    int excluded = 0;
    std::vector<std::string> warnings;

    void add(const std::vector<TrialResult>& results, double gamma)
    {
        for (const TrialResult& tr : results) {
            ++run;
            if (!tr.ok) {
                ++excluded;
                warnings.push_back("gamma_db=" + fmt(gamma) + " trial " + std::to_string(tr.trial) +
                                   " excluded: " + tr.error);
            }
        }
    }
};

double mean_sum_rate(const std::vector<TrialResult>& results, std::size_t method, int& count)
{
    double total = 0.0;
    count = 0;
    for (const TrialResult& tr : results) {
        if (!tr.ok) continue;
        total += tr.methods[method].sum_rate;
        ++count;
    }
    return count > 0 ? total / count : 0.0;
}

std::string refs_field(const Method& m)
{
    return (!m.baseline && m.algo == Algorithm::cb_refim) ? std::to_string(m.refs) : std::string();
}

void run_feedback(const NetworkConfig& base, const ExperimentSpec& spec, std::ostringstream& csv, Tally& tally)
{
    csv << "algo,K,Nt,bits\n";
    const FeedbackModel model{spec.quant_bits};
    for (int k : spec.feedback_k)
        for (int nt : spec.feedback_nt) {
            NetworkConfig cfg = base;
            cfg.dims.users_per_cell = k;
            cfg.dims.num_antennas = nt;
            cfg.reset_defaults();
            const FeedbackCount icbf = feedback_icbf(cfg, model);
            double refim_bits = 0.0;
            int ok = 0;
            for (int t = 0; t < spec.trials; ++t) {
                ++tally.run;
                try {
                    const Realization r = realize(cfg, trial_seed(spec.seed, t));
                    const ReferenceMap refs = select_all_references(r.channels, cfg, spec.refs);
                    refim_bits += static_cast<double>(feedback_cb_refim(cfg, refs, model).bits);
                    ++ok;
                } catch (const std::exception& e) {
                    ++tally.excluded;
                    tally.warnings.push_back("feedback K=" + std::to_string(k) + " Nt=" + std::to_string(nt) +
                                             " trial " + std::to_string(t) + " excluded: " + e.what());
                }
            }
            const std::vector<std::string> names = spec.algos.empty() ? default_algos(spec.kind) : spec.algos;
            for (const std::string& name : names) {
                if (name == "icbf" || name == "icbf_wi")
                    csv << name << ',' << k << ',' << nt << ',' << icbf.bits << '\n';
                else if (name == "cb_refim")
                    csv << name << ',' << k << ',' << nt << ',' << fmt(ok > 0 ? refim_bits / ok : 0.0) << '\n';
            }
        }
}

} // namespace

ExperimentOutput run_experiment(const NetworkConfig& base, const ExperimentSpec& spec)
{
    spec.validate();
    base.validate();
    std::ostringstream csv;
    Tally tally;

    if (!spec.dump_channels.empty()) {
        NetworkConfig cfg = base;
        cfg.gamma_db = spec.gamma_db.front();
        dump_channels(cfg, spec);
    }

    if (spec.kind == ExperimentKind::feedback) {
        run_feedback(base, spec, csv, tally);
        return {csv.str(), tally.run, tally.excluded, tally.warnings};
    }

    const std::vector<Method> methods = expand_methods(base, spec);
    switch (spec.kind) {
    case ExperimentKind::convergence: csv << "gamma_db,algo,outer,sum_rate\n"; break;
    case ExperimentKind::snr_sweep: csv << "gamma_db,algo,mean_sum_rate,trials\n"; break;
    case ExperimentKind::ref_sweep: csv << "gamma_db,algo,refs,mean_sum_rate,trials\n"; break;
    case ExperimentKind::cdf: csv << "gamma_db,algo,index,rate,cdf\n"; break;
    case ExperimentKind::feedback: break;
    }

    for (double gamma : spec.gamma_db) {
        NetworkConfig cfg = base;
        cfg.gamma_db = gamma;
        const std::vector<TrialResult> results =
            run_trials(cfg, methods, spec.init, spec.seed, spec.trials, spec.workers);
        tally.add(results, gamma);
        write_dumps(cfg, spec, gamma, results);

        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const Method& method = methods[mi];
            switch (spec.kind) {
            case ExperimentKind::convergence: {
                for (int outer = 1; outer <= cfg.outer_iters; ++outer) {
                    double total = 0.0;
                    int count = 0;
                    for (const TrialResult& tr : results) {
                        if (!tr.ok) continue;
                        const MethodResult& mr = tr.methods[mi];
                        const std::vector<double>& per_outer = mr.trace.outer_sum_rate;
                        // converged runs hold their last value for the remaining outer steps
                        if (per_outer.empty())
                            total += mr.sum_rate;
                        else
                            total += per_outer[std::min<std::size_t>(outer, per_outer.size()) - 1];
                        ++count;
                    }
                    csv << fmt(gamma) << ',' << method.name << ',' << outer << ','
                        << fmt(count > 0 ? total / count : 0.0) << '\n';
                }
                break;
            }
            case ExperimentKind::snr_sweep: {
                int count = 0;
                const double mean = mean_sum_rate(results, mi, count);
                csv << fmt(gamma) << ',' << method.name << ',' << fmt(mean) << ',' << count << '\n';
                break;
            }
            case ExperimentKind::ref_sweep: {
                int count = 0;
                const double mean = mean_sum_rate(results, mi, count);
                csv << fmt(gamma) << ',' << method.name << ',' << refs_field(method) << ',' << fmt(mean) << ','
                    << count << '\n';
                break;
            }
            case ExperimentKind::cdf: {
                std::vector<RateReport> reports;
                for (const TrialResult& tr : results)
                    if (tr.ok) reports.push_back(tr.methods[mi].report);
                const std::vector<double> samples = per_user_rate_samples(reports);
                for (std::size_t i = 0; i < samples.size(); ++i)
                    csv << fmt(gamma) << ',' << method.name << ',' << i << ',' << fmt(samples[i]) << ','
                        << fmt(static_cast<double>(i + 1) / static_cast<double>(samples.size())) << '\n';
                break;
            }
            case ExperimentKind::feedback: break;
            }
        }
    }
    return {csv.str(), tally.run, tally.excluded, tally.warnings};
}

} // namespace mcbf
