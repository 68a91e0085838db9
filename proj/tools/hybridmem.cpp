// Copyright 2026 The hybridmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// hybridmem run <scenario> [--config PATH] [--set KEY=VALUE]... [--out DIR] [--threads N] [--print-defaults]
//
// Exit codes: 0 success, 2 configuration / I/O error, 3 numerical diagnostic breach.

#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "hybridmem/cli/scenarios.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDiagnostics = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid CBJJ / resonator / NV-ensemble quantum memory simulator"};
    app.set_version_flag("--version", hybridmem::cli::version_string());
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a scenario and write <name>.csv + <name>.meta");
    std::string scenario;
    std::optional<std::string> config_path;
    std::string out_dir = ".";
    unsigned threads = 1;
    bool print_defaults = false;
    std::vector<std::string> overrides;

    std::string names;
    for (const auto& n : hybridmem::cli::scenario_names()) names += (names.empty() ? "" : ", ") + n;
    run->add_option("scenario", scenario, "one of: " + names)->required();
    run->add_option("--config", config_path, "INI configuration file");
    run->add_option("--out", out_dir, "output directory")->capture_default_str();
    run->add_option("--threads", threads, "worker threads for sweep cells")
        ->capture_default_str()
        ->check(CLI::Range(1u, 1024u));
    run->add_option("--set", overrides, "override a key, e.g. --set rates.kappa=0.02");
    run->add_flag("--print-defaults", print_defaults, "print the scenario's keys and defaults");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    namespace cli = hybridmem::cli;
    try {
        if (print_defaults) {
            std::cout << cli::print_defaults(scenario);
            return 0;
        }
        const auto sc = cli::parse_config(scenario, config_path, overrides);
        const auto out = cli::run(sc, threads);
        const auto files = cli::write_outputs(out, sc.output_name(), out_dir);
        for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
        std::cout << "wrote " << files.csv.string() << " and " << files.meta.string() << " ("
                  << out.table.rows.size() << " rows, " << out.wall_seconds << " s)\n";
        if (!out.hygiene_ok) {
            std::cerr << "error: numerical diagnostics exceeded limits (see "
                      << files.meta.string() << ")\n";
            return kExitDiagnostics;
        }
        return 0;
    } catch (const cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const hybridmem::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitDiagnostics;
    } catch (const hybridmem::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
}
