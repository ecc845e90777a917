// SPDX-License-Identifier: Apache-2.0
//
// sim <experiment> [--config FILE] [overrides...]
//
// Runs one Monte-Carlo experiment of the coordinated beamforming library and
// writes its CSV to --out (stdout by default).

#include "mcbf/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv)
{
    CLI::App app{"Coordinated multicell beamforming experiments"};
    app.set_version_flag("--version", "mcbf-sim 1.0");

    std::string experiment;
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::vector<std::string> sets;

    app.add_option("experiment", experiment, "convergence|snr_sweep|ref_sweep|cdf|feedback")->required();
    app.add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);

    auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
        app.add_option_function<std::string>(
            name, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
    };
    flag("--seed", "seed", "master RNG seed (u64)");
    flag("--trials", "trials", "number of independent realizations");
    flag("--algo", "algo", "comma list of cm,zf,mslnr,icbf,icbf_wi,cb_refim");
    flag("--init", "init", "solver starting point: cm|zf|mslnr");
    flag("--refs", "refs", "reference users per beam for cb_refim");
    flag("--gamma-db", "gamma_db", "comma list of transmit SNRs in dB");
    flag("--workers", "workers", "worker threads");
    flag("--out", "out", "output CSV path, '-' for stdout");
    flag("--dump-rates", "dump_rates", "write per-triple SINR/rate rows to this CSV");
    flag("--dump-traces", "dump_traces", "write per-iteration solver traces to this CSV");
    flag("--dump-channels", "dump_channels", "write trial-0 layout and channels into this directory");
    app.add_option("--set", sets, "extra key=value override (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        mcbf::ParsedConfig cfg;
        if (!config_path.empty()) cfg = mcbf::parse_config_file(config_path, cfg);
        mcbf::apply_setting(cfg, "experiment", experiment);
        for (const auto& [key, value] : overrides) mcbf::apply_setting(cfg, key, value);
        for (const std::string& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw mcbf::ConfigError("--set expects key=value, got '" + s + "'");
            mcbf::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
        }
        mcbf::finalize(cfg);

        const mcbf::ExperimentOutput out = mcbf::run_experiment(cfg.network, cfg.experiment);
        for (const std::string& w : out.warnings) std::cerr << "warning: " << w << '\n';
        if (out.trials_excluded > 0)
            std::cerr << out.trials_excluded << " of " << out.trials_run << " trials excluded\n";

        if (cfg.experiment.out_path == "-") {
            std::cout << out.csv;
        } else {
            std::ofstream file(cfg.experiment.out_path);
            if (!file) throw std::runtime_error("cannot open '" + cfg.experiment.out_path + "' for writing");
            file << out.csv;
            if (!file) throw std::runtime_error("write failed for '" + cfg.experiment.out_path + "'");
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
