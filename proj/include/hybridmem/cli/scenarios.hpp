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

// Scenario runner: each named scenario maps a Config onto protocol runs and
// produces one CSV table plus key = value run metadata.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "hybridmem/cli/config.hpp"
#include "hybridmem/device.hpp"
#include "hybridmem/errors.hpp"
#include "hybridmem/lindblad.hpp"
#include "hybridmem/protocols.hpp"

#ifndef HYBRIDMEM_VERSION
#define HYBRIDMEM_VERSION "0.1.0"
#endif
#ifndef HYBRIDMEM_GIT_REVISION
#define HYBRIDMEM_GIT_REVISION "unknown"
#endif

namespace hybridmem::cli {

inline std::string version_string() {
    return std::string("hybridmem ") + HYBRIDMEM_VERSION + " (git " + HYBRIDMEM_GIT_REVISION + ")";
}

using Cell = std::variant<double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    std::size_t column(const std::string& name) const {
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw std::out_of_range("no column '" + name + "'");
        return static_cast<std::size_t>(it - columns.begin());
    }

    double number(std::size_t row, const std::string& col) const {
        return std::get<double>(rows.at(row).at(column(col)));
    }

    std::vector<double> numbers(const std::string& col) const {
        const auto c = column(col);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(std::get<double>(r.at(c)));
        return out;
    }
};

/// 12 significant digits, locale independent.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
    return buf;
}

inline std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (i) out += ',';
        out += t.columns[i];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            if (const auto* d = std::get_if<double>(&row[i])) {
                out += format_number(*d);
            } else {
                out += std::get<std::string>(row[i]);
            }
        }
        out += '\n';
    }
    return out;
}

/// Acceptance-level numerical hygiene limits for every scenario.
struct HygieneLimits {
    double trace_error = 1e-9;
    double hermiticity_error = 1e-9;
    double min_eigenvalue = -1e-8;
    double top_fock_population = 1e-10;

    bool passes(const RecordDiagnostics& d) const {
        return d.trace_error <= trace_error && d.hermiticity_error <= hermiticity_error &&
               d.min_eigenvalue >= min_eigenvalue && d.top_fock_population <= top_fock_population;
    }
};

struct ScenarioOutput {
    std::string name;
    Table table;
    std::vector<std::pair<std::string, std::string>> metadata;
    RecordDiagnostics diagnostics;
    std::vector<std::string> warnings;
    bool hygiene_ok = true;
    double wall_seconds = 0.0;
};

struct Scenario {
    std::string name;
    Config config;
    std::string output_name() const { return config.raw("output.name"); }
};

// ---------------------------------------------------------------------------
// Key tables

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"fig2c", "fig2d", "fig3a", "fig3b", "fig4b",
                                                "fig4c", "params-report", "validate-dispersive",
                                                "custom"};
    return names;
}

namespace detail {

inline const std::string kSqrtHalf = "0.707106781186547524";
inline const std::string kSqrtThird = "0.577350269189625765";
inline const std::string kSqrtTwoThirds = "0.816496580927726033";

inline std::vector<KeySpec> circuit_keys() {
    return {{"model.circuit_g_tc", "5", "di-full: CBJJ-resonator coupling"},
            {"model.circuit_g_td", "5", "di-full: ensemble-resonator coupling"},
            {"model.circuit_detuning_tc", "25", "di-full: CBJJ detuning from the resonator"},
            {"model.circuit_detuning_td", "25", "di-full: ensemble detuning from the resonator"}};
}

inline std::vector<KeySpec> rate_keys(const std::string& kappa, const std::string& g10,
                                      const std::string& tun, const std::string& phi) {
    return {{"rates.kappa", kappa, "resonator decay rate (model units)"},
            {"rates.gamma10", g10, "CBJJ spontaneous emission rate"},
            {"rates.tunneling", tun, "CBJJ tunneling rate Gamma_1"},
            {"rates.dephasing", phi, "CBJJ pure dephasing rate gamma_phi"}};
}

inline std::vector<KeySpec> axis_keys(const std::string& axis, const std::string& what,
                                      const std::string& start, const std::string& stop,
                                      const std::string& points) {
    return {{"sweep." + axis + "_start", start, what + ": first value"},
            {"sweep." + axis + "_stop", stop, what + ": last value"},
            {"sweep." + axis + "_points", points, what + ": number of points (>= 2)"}};
}

inline void append(std::vector<KeySpec>& into, const std::vector<KeySpec>& more) {
    into.insert(into.end(), more.begin(), more.end());
}

}  // namespace detail

/// Known keys and defaults for a scenario; throws ConfigError for unknown names.
inline std::vector<KeySpec> scenario_keys(const std::string& name) {
    using detail::append;
    std::vector<KeySpec> k{{"output.name", name, "file stem for <name>.csv and <name>.meta"}};
    const KeySpec dt{"model.dt", "0.001", "integration step in units of 1/g0 or 1/eta"};
    const KeySpec alpha{"model.alpha", detail::kSqrtHalf,
                        "real CBJJ amplitude alpha; beta = sqrt(1 - alpha^2)"};
    const KeySpec kidx{"model.k", "0", "protocol timing index, time = (2k+1) x base time"};
    const KeySpec nmax{"model.n_max", "2", "resonator Fock cutoff"};
    const KeySpec target{"model.target", "corrected", "target phase convention: corrected|raw"};
    const KeySpec samples{"model.samples", "600", "time samples over the window"};
    const KeySpec window{"model.window", "3", "time window in multiples of the protocol time"};
    const KeySpec nnve{"model.n_nve", "3", "number of NV ensembles (2..6)"};
    const KeySpec cond{"model.conditional", "true", "also report CBJJ-projected fidelity"};
    const KeySpec renorm{"model.renorm", "off", "trace renormalization at records: off|on"};
    const KeySpec di_mode{"model.mode", "di", "dispersive model: di|di-full"};

    if (name == "fig2c") {
        append(k, {alpha, kidx, nmax, dt, target});
        append(k, detail::axis_keys("x", "kappa / g0", "0", "0.1", "41"));
        append(k, detail::axis_keys("y", "gamma / g0 (gamma = gamma_phi = gamma10 = Gamma_1)", "0",
                                    "0.1", "41"));
    } else if (name == "fig2d") {
        append(k, {alpha, kidx, dt, target, di_mode});
        append(k, detail::circuit_keys());
        append(k, detail::axis_keys("x", "gamma10 / eta (Gamma_1 = gamma10)", "0", "0.1", "41"));
        append(k, detail::axis_keys("y", "gamma_phi / eta", "0", "0.1", "41"));
    } else if (name == "fig3a") {
        append(k, {alpha, kidx, nmax, dt, target, samples, window});
        k.push_back({"sweep.deltas", "0,-0.1,0.1", "coupling mismatches (g_td - g_tc) / g0"});
        append(k, detail::rate_keys("0.01", "0.01", "0.01", "0.01"));
    } else if (name == "fig3b") {
        append(k, {kidx, dt, target, samples, window, di_mode});
        append(k, detail::circuit_keys());
        k.push_back({"sweep.alphas", detail::kSqrtHalf + "," + detail::kSqrtThird + "," +
                                         detail::kSqrtTwoThirds,
                     "CBJJ amplitudes alpha"});
        append(k, detail::rate_keys("0", "0.03", "0.015", "0.015"));
    } else if (name == "fig4b") {
        append(k, {nnve, dt, samples, window, cond, renorm});
        k.push_back({"sweep.gammas", "0.02,0.01,0.005",
                     "gamma / eta values (gamma = gamma_phi = gamma10 = Gamma_1)"});
    } else if (name == "fig4c") {
        append(k, {nnve, kidx, dt, cond, renorm});
        append(k, detail::axis_keys("x", "gamma / eta (gamma = gamma_phi = gamma10 = Gamma_1)", "0",
                                    "0.1", "41"));
    } else if (name == "params-report") {
        append(k, {{"device.critical_current_ri", "67e-6", "RI critical current I_c (A)"},
                   {"device.junction_capacitance_ri", "71.5e-12", "RI junction capacitance C_J (F)"},
                   {"device.critical_current_di", "2.177e-6", "DI critical current I_c (A)"},
                   {"device.junction_capacitance_di", "2.3e-12", "DI junction capacitance C_J (F)"},
                   {"device.bias_ratio", "0.99", "I_b / I_c"},
                   {"device.inductance", "60.7e-9", "resonator inductance F_t (H)"},
                   {"device.capacitance", "2e-12", "resonator capacitance C_t (F)"},
                   {"device.wiring_capacitance", "0", "wiring capacitance C_0 (F)"},
                   {"device.coupling_capacitance", "60e-15", "coupling capacitance C_c (F)"},
                   {"device.resonator_di_hz", "2.62e9", "DI resonator frequency (Hz)"},
                   {"device.g_dispersive_hz", "50e6", "DI couplings g_tc = g_td (Hz)"},
                   {"device.detuning_hz", "250e6", "DI detunings Delta_tc = Delta_td (Hz)"},
                   {"device.nv_count", "1e12", "NV centers in the ensemble"},
                   {"device.single_spin_coupling_hz", "10", "single-NV vacuum Rabi frequency (Hz)"}});
    } else if (name == "validate-dispersive") {
        append(k, {nmax,
                   {"model.g_over_delta", "0.04,0.2", "coupling/detuning ratios to test"},
                   {"model.duration", "1", "duration in multiples of pi / (2 eta)"}});
    } else if (name == "custom") {
        append(k, {{"model.mode", "ri", "protocol: ri|di|di-full|w"},
                   alpha, {"model.delta", "0", "(g_td - g_tc) / g0, resonant only"},
                   kidx, nmax, dt, target, samples, window, nnve, cond, renorm});
        append(k, detail::circuit_keys());
        append(k, detail::rate_keys("0", "0", "0", "0"));
    } else {
        std::string msg = "unknown scenario '" + name + "'";
        std::string best;
        std::size_t best_d = std::string::npos;
        for (const auto& n : scenario_names()) {
            const auto d = edit_distance(name, n);
            if (d < best_d) best_d = d, best = n;
        }
        throw ConfigError(msg + " (did you mean '" + best + "'?)");
    }
    return k;
}

inline Scenario make_scenario(const std::string& name) { return {name, Config(scenario_keys(name))}; }

/// Scenario defaults overlaid with an optional INI file and key=value overrides.
inline Scenario parse_config(const std::string& name, const std::optional<std::string>& path,
                             const std::vector<std::string>& overrides = {}) {
    Scenario s = make_scenario(name);
    if (path) {
        std::ifstream in(*path);
        if (!in) throw ConfigError("cannot open config file '" + *path + "'");
        s.config.apply(parse_ini(in, *path), *path);
    }
    for (const auto& o : overrides) s.config.apply_override(o);
    return s;
}

inline std::string print_defaults(const std::string& name) {
    std::ostringstream os;
    os << "# defaults for scenario '" << name << "'\n";
    std::string section;
    for (const auto& k : scenario_keys(name)) {
        const auto dot = k.key.find('.');
        const auto sec = k.key.substr(0, dot);
        if (sec != section) {
            section = sec;
            os << "\n[" << section << "]\n";
        }
        os << "# " << k.help << "\n" << k.key.substr(dot + 1) << " = " << k.default_value << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Execution helpers

/**
 * Evaluates fn(i) for i in [0, n) on up to `threads` workers. Results are
 * stored by index; if any cell throws, the exception of the lowest failing
 * index is rethrown so failures are reported deterministically.
 */
template <class Result, class Fn>
std::vector<Result> parallel_map(std::size_t n, unsigned threads, Fn&& fn) {
    std::vector<std::optional<Result>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
    }
    std::vector<Result> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

/// Tags a numerical failure with the sweep cell it came from.
template <class Fn>
auto in_cell(const std::string& cell, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const DiagnosticBreach& e) {
        throw DiagnosticBreach(std::string("cell ") + cell + ": " + e.what(), e.time());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("cell ") + cell + ": " + e.what());
    }
}

namespace detail {

inline TargetConvention target_of(const Config& c) {
    return c.choice("model.target", {"corrected", "raw"}) == "raw" ? TargetConvention::raw
                                                                   : TargetConvention::phase_corrected;
}

inline RenormPolicy renorm_of(const Config& c) {
    return c.choice("model.renorm", {"off", "on"}) == "on" ? RenormPolicy::trace_each_record
                                                           : RenormPolicy::off;
}

inline std::pair<Complex, Complex> amplitudes(double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must lie in [0, 1]");
    return {Complex(alpha, 0.0), Complex(std::sqrt(std::max(0.0, 1.0 - alpha * alpha)), 0.0)};
}

inline DecoherenceRates rates_of(const Config& c) {
    return {c.non_negative("rates.kappa"), c.non_negative("rates.gamma10"),
            c.non_negative("rates.tunneling"), c.non_negative("rates.dephasing")};
}

inline DispersiveCircuit circuit_of(const Config& c) {
    return {c.non_negative("model.circuit_g_tc"), c.non_negative("model.circuit_g_td"),
            c.number("model.circuit_detuning_tc"), c.number("model.circuit_detuning_td")};
}

inline int k_of(const Config& c) { return static_cast<int>(c.count("model.k")); }

inline Axis axis_of(const Config& c, const std::string& axis, const std::string& name) {
    Axis a{name, c.number("sweep." + axis + "_start"), c.number("sweep." + axis + "_stop"),
           c.count("sweep." + axis + "_points")};
    if (a.start < 0.0 || a.stop < 0.0) throw ConfigError("rate sweep '" + name + "' must be non-negative");
    return a;
}

inline TransferMode di_mode_of(const Config& c) {
    return c.choice("model.mode", {"di", "di-full"}) == "di-full" ? TransferMode::dispersive_full
                                                                  : TransferMode::dispersive;
}

inline std::size_t samples_of(const Config& c) {
    const auto s = c.count("model.samples");
    if (s < 2) throw ConfigError("model.samples must be >= 2");
    return s;
}

inline std::string label(const std::string& prefix, double v) { return prefix + format_number(v); }

struct Accumulator {
    RecordDiagnostics worst{0.0, 0.0, 0.0, 0.0};
    void add(const RecordDiagnostics& d) { hybridmem::detail::merge_worst(worst, d); }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Scenario bodies

namespace detail {

inline ScenarioOutput run_fig2c(const Config& c, unsigned threads) {
    const auto [alpha, beta] = amplitudes(c.number("model.alpha"));
    SweepGrid grid{{axis_of(c, "x", "kappa_over_g0"), axis_of(c, "y", "gamma_over_g0")}};
    grid.validate();
    TransferSpec base;
    base.alpha = alpha;
    base.beta = beta;
    base.mode = TransferMode::resonant;
    base.k = k_of(c);
    base.n_max = c.count("model.n_max");
    base.dt = c.positive("model.dt");
    base.target = target_of(c);
    base.samples = 0;

    const auto results = parallel_map<TransferResult>(grid.size(), threads, [&](std::size_t i) {
        const auto pt = grid.point(i);
        auto spec = base;
        spec.rates = {pt[0], pt[1], pt[1], pt[1]};
        return in_cell(std::to_string(i) + " (kappa=" + format_number(pt[0]) +
                           ", gamma=" + format_number(pt[1]) + ")",
                       [&] { return run_transfer(spec); });
    });
    ScenarioOutput out;
    out.table.columns = {"kappa_over_g0", "gamma_over_g0", "fidelity_at_tR"};
    Accumulator acc;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto pt = grid.point(i);
        out.table.rows.push_back({pt[0], pt[1], results[i].fidelity_at_protocol_time});
        acc.add(results[i].diagnostics);
    }
    out.diagnostics = acc.worst;
    out.metadata.emplace_back("protocol_time", format_number(results.front().protocol_time));
    return out;
}

inline ScenarioOutput run_fig2d(const Config& c, unsigned threads) {
    const auto [alpha, beta] = amplitudes(c.number("model.alpha"));
    SweepGrid grid{{axis_of(c, "x", "gamma10_over_eta"), axis_of(c, "y", "gamma_phi_over_eta")}};
    grid.validate();
    TransferSpec base;
    base.alpha = alpha;
    base.beta = beta;
    base.mode = di_mode_of(c);
    base.circuit = circuit_of(c);
    base.k = k_of(c);
    base.dt = c.positive("model.dt");
    base.target = target_of(c);
    base.samples = 0;

    const auto results = parallel_map<TransferResult>(grid.size(), threads, [&](std::size_t i) {
        const auto pt = grid.point(i);
        auto spec = base;
        spec.rates = {0.0, pt[0], pt[0], pt[1]};
        return in_cell(std::to_string(i) + " (gamma10=" + format_number(pt[0]) +
                           ", gamma_phi=" + format_number(pt[1]) + ")",
                       [&] { return run_transfer(spec); });
    });
    ScenarioOutput out;
    out.table.columns = {"gamma10_over_eta", "gamma_phi_over_eta", "fidelity_at_tD"};
    Accumulator acc;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto pt = grid.point(i);
        out.table.rows.push_back({pt[0], pt[1], results[i].fidelity_at_protocol_time});
        acc.add(results[i].diagnostics);
    }
    out.diagnostics = acc.worst;
    out.metadata.emplace_back("protocol_time", format_number(results.front().protocol_time));
    return out;
}

/// Shared layout of fig3a / fig3b: one time column, one fidelity column per variant.
inline ScenarioOutput time_series(const std::string& time_column,
                                  const std::vector<std::string>& names,
                                  const std::vector<TransferResult>& results) {
    ScenarioOutput out;
    out.table.columns.push_back(time_column);
    for (const auto& n : names) out.table.columns.push_back(n);
    Accumulator acc;
    for (const auto& r : results) acc.add(r.diagnostics);
    const auto& times = results.front().times;
    for (std::size_t s = 0; s < times.size(); ++s) {
        std::vector<Cell> row{times[s]};
        for (const auto& r : results) row.emplace_back(r.fidelity.at(s));
        out.table.rows.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
        out.metadata.emplace_back(names[i] + ".peak", format_number(results[i].peak_fidelity));
        out.metadata.emplace_back(names[i] + ".peak_time", format_number(results[i].peak_time));
        out.metadata.emplace_back(names[i] + ".at_protocol_time",
                                  format_number(results[i].fidelity_at_protocol_time));
    }
    out.metadata.emplace_back("protocol_time", format_number(results.front().protocol_time));
    out.diagnostics = acc.worst;
    return out;
}

inline ScenarioOutput run_fig3a(const Config& c, unsigned threads) {
    const auto [alpha, beta] = amplitudes(c.number("model.alpha"));
    const auto deltas = c.numbers("sweep.deltas");
    TransferSpec base;
    base.alpha = alpha;
    base.beta = beta;
    base.mode = TransferMode::resonant;
    base.rates = rates_of(c);
    base.k = k_of(c);
    base.n_max = c.count("model.n_max");
    base.dt = c.positive("model.dt");
    base.target = target_of(c);
    base.samples = samples_of(c);
    base.t_final = c.positive("model.window") * protocol_time(TransferMode::resonant, base.k, 1.0);
    for (double d : deltas) {
        if (d < -0.5 || d > 0.5) throw ConfigError("sweep.deltas entries must lie in [-0.5, 0.5]");
    }
    const auto results = parallel_map<TransferResult>(deltas.size(), threads, [&](std::size_t i) {
        auto spec = base;
        spec.delta = deltas[i];
        return in_cell("delta=" + format_number(deltas[i]), [&] { return run_transfer(spec); });
    });
    std::vector<std::string> names;
    for (double d : deltas) names.push_back(label("fidelity_delta_", d));
    return time_series("g0_t", names, results);
}

inline ScenarioOutput run_fig3b(const Config& c, unsigned threads) {
    const auto alphas = c.numbers("sweep.alphas");
    TransferSpec base;
    base.mode = di_mode_of(c);
    base.circuit = circuit_of(c);
    base.rates = rates_of(c);
    base.k = k_of(c);
    base.dt = c.positive("model.dt");
    base.target = target_of(c);
    base.samples = samples_of(c);
    base.t_final = c.positive("model.window") * protocol_time(TransferMode::dispersive, base.k, 1.0);
    const auto results = parallel_map<TransferResult>(alphas.size(), threads, [&](std::size_t i) {
        auto spec = base;
        std::tie(spec.alpha, spec.beta) = amplitudes(alphas[i]);
        return in_cell("alpha=" + format_number(alphas[i]), [&] { return run_transfer(spec); });
    });
    std::vector<std::string> names;
    for (double a : alphas) names.push_back(label("fidelity_alpha_", a));
    return time_series("eta_t", names, results);
}

inline WStateSpec w_base(const Config& c) {
    WStateSpec s;
    s.n_nve = c.count("model.n_nve");
    s.dt = c.positive("model.dt");
    s.conditional = c.flag("model.conditional");
    s.renorm = renorm_of(c);
    if (s.n_nve < 2 || s.n_nve > WStateSpec::kMaxEnsembles) {
        throw ConfigError("model.n_nve must lie in [2, 6]");
    }
    return s;
}

inline ScenarioOutput run_fig4b(const Config& c, unsigned threads) {
    const auto gammas = c.numbers("sweep.gammas");
    auto base = w_base(c);
    base.samples = samples_of(c);
    base.t_final = c.positive("model.window") *
                   protocol_time(TransferMode::w_state, 0, 1.0, base.n_nve);
    for (double g : gammas) {
        if (g < 0.0) throw ConfigError("sweep.gammas entries must be non-negative");
    }
    const auto results = parallel_map<WStateResult>(gammas.size(), threads, [&](std::size_t i) {
        auto spec = base;
        spec.rates = DecoherenceRates::uniform_cbjj(gammas[i]);
        return in_cell("gamma=" + format_number(gammas[i]), [&] { return w_state_prepare(spec); });
    });
    ScenarioOutput out;
    out.table.columns.push_back("eta_t");
    for (double g : gammas) {
        out.table.columns.push_back(label("fidelity_gamma_", g));
        out.table.columns.push_back(label("conditional_fidelity_gamma_", g));
        out.table.columns.push_back(label("success_probability_gamma_", g));
    }
    Accumulator acc;
    const auto& times = results.front().unconditional.times;
    for (std::size_t s = 0; s < times.size(); ++s) {
        std::vector<Cell> row{times[s]};
        for (const auto& r : results) {
            row.emplace_back(r.unconditional.fidelity.at(s));
            row.emplace_back(r.conditional_fidelity.at(s));
            row.emplace_back(r.success_probability.at(s));
        }
        out.table.rows.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        acc.add(results[i].unconditional.diagnostics);
        const auto tag = label("gamma_", gammas[i]);
        out.metadata.emplace_back(tag + ".fidelity_at_gating",
                                  format_number(results[i].unconditional.fidelity_at_protocol_time));
        out.metadata.emplace_back(tag + ".conditional_at_gating",
                                  format_number(results[i].conditional_at_gating));
        out.metadata.emplace_back(tag + ".success_probability_at_gating",
                                  format_number(results[i].success_probability_at_gating));
    }
    out.metadata.emplace_back("gating_time",
                              format_number(results.front().unconditional.protocol_time));
    out.diagnostics = acc.worst;
    return out;
}

inline ScenarioOutput run_fig4c(const Config& c, unsigned threads) {
    auto base = w_base(c);
    base.k = k_of(c);
    base.samples = 0;
    SweepGrid grid{{axis_of(c, "x", "gamma_over_eta")}};
    grid.validate();
    const auto results = parallel_map<WStateResult>(grid.size(), threads, [&](std::size_t i) {
        auto spec = base;
        const double g = grid.point(i)[0];
        spec.rates = DecoherenceRates::uniform_cbjj(g);
        return in_cell(std::to_string(i) + " (gamma=" + format_number(g) + ")",
                       [&] { return w_state_prepare(spec); });
    });
    ScenarioOutput out;
    out.table.columns = {"gamma_over_eta", "fidelity_at_gating", "conditional_fidelity_at_gating",
                         "success_probability_at_gating"};
    Accumulator acc;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        out.table.rows.push_back({grid.point(i)[0], r.unconditional.fidelity_at_protocol_time,
                                  r.conditional_at_gating, r.success_probability_at_gating});
        acc.add(r.unconditional.diagnostics);
    }
    out.metadata.emplace_back("gating_time",
                              format_number(results.front().unconditional.protocol_time));
    out.diagnostics = acc.worst;
    return out;
}

inline ScenarioOutput run_params_report(const Config& c) {
    using namespace hybridmem::device;
    ScenarioOutput out;
    out.table.columns = {"quantity", "value", "unit", "value_over_2pi_hz"};
    const auto freq = [&](const std::string& q, double w) {
        out.table.rows.push_back({q, w, std::string("rad/s"), ordinary(w)});
    };
    const auto plain = [&](const std::string& q, double v, const std::string& unit) {
        out.table.rows.push_back({q, v, unit, std::string("")});
    };

    const double ratio = c.positive("device.bias_ratio");
    const CbjjParams ri_junction{ratio * c.positive("device.critical_current_ri"),
                                 c.positive("device.critical_current_ri"),
                                 c.positive("device.junction_capacitance_ri")};
    const CbjjParams di_junction{ratio * c.positive("device.critical_current_di"),
                                 c.positive("device.critical_current_di"),
                                 c.positive("device.junction_capacitance_di")};
    TlrParams tlr{c.positive("device.inductance"), c.positive("device.capacitance"),
                  c.non_negative("device.wiring_capacitance"),
                  c.non_negative("device.coupling_capacitance"), std::nullopt};
    // Unloaded resonator: the quoted full-wave frequency corresponds to eps1 = eps2 = 0.
    TlrParams bare = tlr;
    bare.wiring_capacitance = 0.0;
    bare.coupling_capacitance = 0.0;

    try {
        const auto ri = plasma_frequency(ri_junction);
        const auto mode_bare = resonator_frequency(bare);
        const auto mode_loaded = resonator_frequency(tlr);
        const double gtc = coupling_gtc(tlr, ri_junction, mode_bare.omega_c, mode_loaded.phase);
        freq("ri.omega_p", ri.plasma);
        freq("ri.omega_10", ri.omega10);
        freq("ri.omega_21", ri.omega21);
        freq("ri.level_separation", ri.separation());
        freq("ri.omega_c_unloaded", mode_bare.omega_c);
        freq("ri.omega_c_loaded", mode_loaded.omega_c);
        plain("ri.epsilon1", tlr.epsilon1(), "1");
        plain("ri.epsilon2", tlr.epsilon2(), "1");
        plain("ri.delta0", mode_loaded.phase, "rad");
        freq("ri.g_tc", gtc);
        plain("ri.leakage", leakage_probability(gtc, ri.separation()), "1");

        const auto di = plasma_frequency(di_junction);
        freq("di.omega_p", di.plasma);
        freq("di.omega_10", di.omega10);
        freq("di.omega_c", angular(c.positive("device.resonator_di_hz")));
        const double g = angular(c.positive("device.g_dispersive_hz"));
        const double delta = angular(c.positive("device.detuning_hz"));
        const auto eta = effective_eta(g, g, delta, delta);
        freq("di.eta", eta.eta);
        plain("di.dispersive_ratio", eta.validity, "1");
        if (eta.warning) out.warnings.push_back(*eta.warning);
        plain("di.leakage", leakage_probability(g, di.separation()), "1");

        const NveParams nve{c.positive("device.nv_count"),
                            angular(c.positive("device.single_spin_coupling_hz"))};
        freq("nve.g_td", ensemble_coupling(nve));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("params-report: ") + e.what());
    }
    return out;
}

inline ScenarioOutput run_validate_dispersive(const Config& c, unsigned threads) {
    const auto ratios = c.numbers("model.g_over_delta");
    const std::size_t n_max = c.count("model.n_max");
    const double factor = c.positive("model.duration");
    for (double r : ratios) {
        if (!(r > 0.0) || r > 1.0 / 3.0) throw ConfigError("model.g_over_delta entries must be in (0, 1/3]");
    }
    const auto reports = parallel_map<DispersiveReport>(ratios.size(), threads, [&](std::size_t i) {
        // g = 1 sets the unit; Delta = g / ratio.
        const auto p = symmetric_dispersive(1.0, 1.0 / ratios[i], n_max);
        const double duration = factor * std::numbers::pi / (2.0 * p.eta());
        return validate_dispersive(p, duration);
    });
    ScenarioOutput out;
    out.table.columns = {"g_over_delta",         "eta_over_g",          "duration_g_t",
                         "max_cbjj_deviation",   "max_cbjj_deviation_dressed",
                         "max_photon_bare",      "max_photon_dressed",  "photon_bound"};
    for (const auto& r : reports) {
        out.table.rows.push_back({r.g_over_delta, r.eta, r.duration, r.max_cbjj_deviation,
                                  r.max_cbjj_deviation_dressed, r.max_photon_bare,
                                  r.max_photon_dressed, 1.1 * r.g_over_delta * r.g_over_delta});
    }
    return out;
}

inline ScenarioOutput run_custom(const Config& c, unsigned) {
    const auto mode = c.choice("model.mode", {"ri", "di", "di-full", "w"});
    if (mode == "w") {
        auto spec = w_base(c);
        spec.k = k_of(c);
        spec.samples = samples_of(c);
        spec.rates = rates_of(c);
        spec.t_final = c.positive("model.window") *
                       protocol_time(TransferMode::w_state, spec.k, 1.0, spec.n_nve);
        const auto r = w_state_prepare(spec);
        ScenarioOutput out;
        out.table.columns = {"eta_t", "fidelity", "conditional_fidelity", "success_probability"};
        for (std::size_t s = 0; s < r.unconditional.times.size(); ++s) {
            out.table.rows.push_back({r.unconditional.times[s], r.unconditional.fidelity[s],
                                      r.conditional_fidelity[s], r.success_probability[s]});
        }
        out.metadata.emplace_back("fidelity_at_gating",
                                  format_number(r.unconditional.fidelity_at_protocol_time));
        out.metadata.emplace_back("conditional_at_gating", format_number(r.conditional_at_gating));
        out.diagnostics = r.unconditional.diagnostics;
        return out;
    }
    TransferSpec spec;
    std::tie(spec.alpha, spec.beta) = amplitudes(c.number("model.alpha"));
    spec.mode = mode == "ri"   ? TransferMode::resonant
                : mode == "di" ? TransferMode::dispersive
                               : TransferMode::dispersive_full;
    spec.delta = c.number("model.delta");
    spec.rates = rates_of(c);
    spec.k = k_of(c);
    spec.n_max = c.count("model.n_max");
    spec.dt = c.positive("model.dt");
    spec.target = target_of(c);
    spec.samples = samples_of(c);
    spec.circuit = circuit_of(c);
    spec.t_final = c.positive("model.window") * protocol_time(spec.mode, spec.k, 1.0);
    const auto r = run_transfer(spec);
    return time_series(mode == "ri" ? "g0_t" : "eta_t", {"fidelity"}, {r});
}

}  // namespace detail

/// Runs a scenario; DiagnosticBreach propagates with the offending cell named.
inline ScenarioOutput run(const Scenario& s, unsigned threads = 1) {
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioOutput out;
    const auto& c = s.config;
    try {
        if (s.name == "fig2c") out = detail::run_fig2c(c, threads);
        else if (s.name == "fig2d") out = detail::run_fig2d(c, threads);
        else if (s.name == "fig3a") out = detail::run_fig3a(c, threads);
        else if (s.name == "fig3b") out = detail::run_fig3b(c, threads);
        else if (s.name == "fig4b") out = detail::run_fig4b(c, threads);
        else if (s.name == "fig4c") out = detail::run_fig4c(c, threads);
        else if (s.name == "params-report") out = detail::run_params_report(c);
        else if (s.name == "validate-dispersive") out = detail::run_validate_dispersive(c, threads);
        else if (s.name == "custom") out = detail::run_custom(c, threads);
        else scenario_keys(s.name);  // throws the unknown-name error
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    out.name = s.name;
    out.hygiene_ok = HygieneLimits{}.passes(out.diagnostics);
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<std::pair<std::string, std::string>> meta{
        {"scenario", s.name}, {"version", version_string()}, {"columns", ""}};
    std::string cols;
    for (const auto& col : out.table.columns) cols += (cols.empty() ? "" : ",") + col;
    meta[2].second = cols;
    for (const auto& [k, v] : c.entries()) meta.emplace_back("param." + k, v);
    for (auto& kv : out.metadata) meta.push_back(std::move(kv));
    meta.emplace_back("diagnostics.max_trace_error", format_number(out.diagnostics.trace_error));
    meta.emplace_back("diagnostics.max_hermiticity_error",
                      format_number(out.diagnostics.hermiticity_error));
    meta.emplace_back("diagnostics.min_eigenvalue", format_number(out.diagnostics.min_eigenvalue));
    meta.emplace_back("diagnostics.max_top_fock_population",
                      format_number(out.diagnostics.top_fock_population));
    meta.emplace_back("diagnostics.passed", out.hygiene_ok ? "true" : "false");
    for (const auto& w : out.warnings) meta.emplace_back("warning", w);
    meta.emplace_back("threads", std::to_string(threads));
    meta.emplace_back("wall_time_s", format_number(out.wall_seconds));
    out.metadata = std::move(meta);
    return out;
}

struct WrittenFiles {
    std::filesystem::path csv;
    std::filesystem::path meta;
};

inline WrittenFiles write_outputs(const ScenarioOutput& out, const std::string& stem,
                                  const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
    WrittenFiles files{dir / (stem + ".csv"), dir / (stem + ".meta")};
    {
        std::ofstream f(files.csv, std::ios::binary);
        if (!f) throw ConfigError("cannot write '" + files.csv.string() + "'");
        f << to_csv(out.table);
        if (!f) throw ConfigError("write failed for '" + files.csv.string() + "'");
    }
    {
        std::ofstream f(files.meta, std::ios::binary);
        if (!f) throw ConfigError("cannot write '" + files.meta.string() + "'");
        for (const auto& [k, v] : out.metadata) f << k << " = " << v << "\n";
    }
    return files;
}

}  // namespace hybridmem::cli
