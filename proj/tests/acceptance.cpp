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


// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Scenario outputs are archived under --out.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hybridmem/cli/scenarios.hpp"
#include "hybridmem/device.hpp"
#include "hybridmem/protocols.hpp"

namespace hm = hybridmem;
namespace cli = hybridmem::cli;
namespace dv = hybridmem::device;
using hm::TransferMode;
using std::numbers::pi;

namespace {

// Tolerances and limits, one per criterion clause.
constexpr double kOmegaCTol = 0.005;       // relative, criterion 1
constexpr double kOmega10Tol = 0.01;       // relative, criterion 1
constexpr double kGtcTol = 0.05;           // relative, criterion 1
constexpr double kEtaTol = 1e-9;           // relative, criterion 1
constexpr double kLeakageLo = 1.0e-3;
constexpr double kLeakageHi = 1.5e-3;
constexpr double kClosedTol = 1e-8;        // criteria 2 and 7
constexpr double kOracleTol = 1e-8;        // criterion 3
constexpr double kOracleRateMax = 0.05;
constexpr int kOracleSettings = 3;
constexpr double kFig3bTarget = 0.97;      // criterion 4
constexpr double kFig3bTol = 0.02;
constexpr double kFig3bSpread = 0.02;
constexpr double kFig3aFloor = 0.9;        // criterion 5
constexpr double kCornerTol = 1e-6;        // criterion 6
constexpr double kMonotoneSlack = 1e-12;
constexpr double kDominanceRate = 0.05;
constexpr double kFig2dFloor = 0.9;
constexpr double kFig2dRegion = 0.01;
constexpr double kDispersiveRatio = 1.0 / 25.0;  // criterion 8
constexpr double kDeviationMax = 0.01;
constexpr double kPhotonFactor = 1.1;
constexpr double kHalvingTol = 1e-7;       // criterion 9

constexpr double kRuntime1 = 1.0;          // seconds
constexpr double kRuntime3 = 60.0;
constexpr double kRuntime6 = 600.0;
constexpr double kRuntime7 = 60.0;
constexpr double kRuntime8 = 60.0;

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back((ok ? "" : "!") + what);
    }
};

std::string fmt(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Context {
    std::filesystem::path out_dir;
    unsigned threads = 1;
    std::map<std::string, cli::ScenarioOutput> scenarios;

    const cli::ScenarioOutput& run(const std::string& name,
                                   const std::vector<std::string>& overrides = {},
                                   const std::string& stem = "") {
        const std::string key = stem.empty() ? name : stem;
        auto sc = cli::parse_config(name, std::nullopt, overrides);
        auto out = cli::run(sc, threads);
        cli::write_outputs(out, key, out_dir);
        return scenarios[key] = std::move(out);
    }
};

double column_peak(const cli::Table& t, const std::string& col) {
    const auto v = t.numbers(col);
    return *std::max_element(v.begin(), v.end());
}

double column_peak_time(const cli::Table& t, const std::string& time_col, const std::string& col) {
    const auto v = t.numbers(col);
    const auto i = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    return t.number(i, time_col);
}

// 1 -------------------------------------------------------------------------
Outcome device_arithmetic(Context&) {
    using namespace dv::units;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const dv::CbjjParams ri{0.99 * 67.0 * uA, 67.0 * uA, 71.5 * pF};
    const dv::CbjjParams di{0.99 * 2.177 * uA, 2.177 * uA, 2.3 * pF};
    const dv::TlrParams bare{60.7 * nH, 2.0 * pF, 0.0, 0.0, std::nullopt};
    dv::TlrParams loaded = bare;
    loaded.coupling_capacitance = 60.0 * fF;

    const double wc = dv::resonator_frequency(bare).omega_c;
    const double w10_ri = dv::plasma_frequency(ri).omega10;
    const double w10_di = dv::plasma_frequency(di).omega10;
    const double gtc = dv::coupling_gtc(loaded, ri, wc, dv::resonator_frequency(loaded).phase);
    const double eta = dv::effective_eta(dv::angular(50 * MHz), dv::angular(50 * MHz),
                                         dv::angular(250 * MHz), dv::angular(250 * MHz))
                           .eta;
    const double xi = dv::angular(10 * MHz);
    const double leak = dv::leakage_probability(xi, w10_ri / 10.0);

    const auto rel = [](double v, double ref) { return std::abs(v / ref - 1.0); };
    o.check(rel(dv::ordinary(wc), 2.87 * GHz) <= kOmegaCTol,
            "omega_c/2pi=" + fmt(dv::ordinary(wc) / GHz) + "GHz");
    o.check(rel(dv::ordinary(w10_ri), 2.87 * GHz) <= kOmega10Tol,
            "RI omega_10/2pi=" + fmt(dv::ordinary(w10_ri) / GHz) + "GHz");
    o.check(rel(dv::ordinary(gtc), 10 * MHz) <= kGtcTol,
            "g_tc/2pi=" + fmt(dv::ordinary(gtc) / MHz) + "MHz");
    o.check(rel(dv::ordinary(w10_di), 2.87 * GHz) <= kOmega10Tol,
            "DI omega_10/2pi=" + fmt(dv::ordinary(w10_di) / GHz) + "GHz");
    o.check(rel(dv::ordinary(eta), 10 * MHz) <= kEtaTol,
            "eta/2pi=" + fmt(dv::ordinary(eta) / MHz, 12) + "MHz");
    o.check(leak >= kLeakageLo && leak <= kLeakageHi, "leakage=" + fmt(leak));
    const double s = seconds_since(t0);
    o.check(s < kRuntime1, "runtime " + fmt(s, 3) + "s");
    return o;
}

// 2 -------------------------------------------------------------------------
Outcome closed_exactness(Context&) {
    Outcome o;
    hm::TransferSpec ri;
    ri.samples = 0;
    const double f_ri = hm::ri_transfer(ri).fidelity_at_protocol_time;
    o.check(std::abs(f_ri - 1.0) <= kClosedTol, "F(t_R)-1=" + fmt(f_ri - 1.0, 3));

    hm::TransferSpec di = ri;
    di.mode = TransferMode::dispersive;
    const double f_di = hm::di_transfer(di).fidelity_at_protocol_time;
    o.check(std::abs(f_di - 1.0) <= kClosedTol, "F(t_D)-1=" + fmt(f_di - 1.0, 3));

    for (std::size_t n : {2u, 3u, 4u}) {
        hm::WStateSpec w;
        w.n_nve = n;
        w.t_final = 3.0;
        w.samples = 301;
        const auto r = hm::w_state_prepare(w);
        double worst = 0.0;
        for (std::size_t i = 0; i < r.unconditional.times.size(); ++i) {
            const double s = std::sin(std::sqrt(static_cast<double>(n)) * r.unconditional.times[i]);
            worst = std::max(worst, std::abs(r.unconditional.fidelity[i] - s * s));
        }
        o.check(worst <= kClosedTol, "W N=" + std::to_string(n) + " max|F-sin^2|=" + fmt(worst, 3));
    }
    return o;
}

// 3 -------------------------------------------------------------------------
Outcome oracle_equivalence(Context&) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(20261019);
    std::uniform_real_distribution<double> u(0.0, kOracleRateMax);
    for (int setting = 0; setting < kOracleSettings; ++setting) {
        const hm::DecoherenceRates r{u(rng), u(rng), u(rng), u(rng)};
        hm::DecoherenceRates r_w = r;
        r_w.kappa = 0.0;

        struct Case {
            std::string name;
            hm::Operator h;
            hm::DensityMatrix rho;
            std::vector<hm::CollapseChannel> channels;
        };
        const auto ri_layout = hm::hybrid_layout(2);
        hm::Vector psi = hm::Vector::Zero(12);
        psi(static_cast<Eigen::Index>(ri_layout.index({0, 0, 0}))) = std::sqrt(0.5);
        psi(static_cast<Eigen::Index>(ri_layout.index({1, 0, 0}))) = std::sqrt(0.5);
        std::vector<Case> cases;
        cases.push_back({"RI(12)", hm::h_resonant(1.0, 1.0, 2),
                         hm::DensityMatrix::pure(hm::Ket(psi, ri_layout)),
                         hm::cbjj_channels(r, ri_layout)});
        cases.push_back({"W(16)", hm::h_multi(1.0, 3),
                         hm::DensityMatrix::pure(hm::w_initial_state(3)),
                         hm::cbjj_channels(r_w, hm::multi_layout(3))});
        for (const auto& c : cases) {
            const auto cfg = hm::EvolutionConfig::sampled(3.0, 31, 1e-3);
            const auto traj = hm::evolve_rk4(c.rho, c.h, c.channels, cfg);
            const hm::ExactPropagator exact(c.h, c.channels);
            double worst = 0.0;
            for (std::size_t i = 0; i < traj.times.size(); ++i) {
                const auto ref = exact.apply(c.rho, traj.times[i]);
                worst = std::max(worst, (traj.states[i] - ref.matrix()).cwiseAbs().maxCoeff());
            }
            o.check(worst <= kOracleTol,
                    "set" + std::to_string(setting) + " " + c.name + " " + fmt(worst, 3));
        }
    }
    const double s = seconds_since(t0);
    o.check(s < kRuntime3, "runtime " + fmt(s, 3) + "s");
    return o;
}

// 4 -------------------------------------------------------------------------
Outcome fig3b_anchor(Context& ctx) {
    Outcome o;
    const auto& out = ctx.run("fig3b");
    const auto& t = out.table;
    double lo = 1.0, hi = 0.0;
    for (std::size_t c = 1; c < t.columns.size(); ++c) {
        const double peak = column_peak(t, t.columns[c]);
        lo = std::min(lo, peak);
        hi = std::max(hi, peak);
        if (t.columns[c] == "fidelity_alpha_" + cli::format_number(std::sqrt(0.5))) {
            o.check(std::abs(peak - kFig3bTarget) <= kFig3bTol, "peak(alpha=beta)=" + fmt(peak));
        } else {
            o.notes.push_back(t.columns[c] + " peak=" + fmt(peak));
        }
    }
    o.check(t.columns.size() == 4, "3 alpha columns");
    o.check(hi - lo < kFig3bSpread, "spread=" + fmt(hi - lo, 3));
    return o;
}

// 5 -------------------------------------------------------------------------
Outcome fig3a_anchors(Context& ctx) {
    Outcome o;
    const auto& t = ctx.run("fig3a").table;
    const auto col = [](double d) { return "fidelity_delta_" + cli::format_number(d); };
    const double t0 = column_peak_time(t, "g0_t", col(0.0));
    const double tp = column_peak_time(t, "g0_t", col(0.1));
    const double tm = column_peak_time(t, "g0_t", col(-0.1));
    o.check(tp < t0, "t_peak(+0.1)=" + fmt(tp, 4) + " < t_peak(0)=" + fmt(t0, 4));
    o.check(tm > t0, "t_peak(-0.1)=" + fmt(tm, 4) + " > t_peak(0)");
    for (double d : {0.0, -0.1, 0.1}) {
        const double p = column_peak(t, col(d));
        o.check(p > kFig3aFloor, "peak(" + fmt(d) + ")=" + fmt(p));
    }
    return o;
}

// 6 -------------------------------------------------------------------------
bool grid_monotone(const cli::Table& t, const std::string& xcol, const std::string& ycol,
                   const std::string& fcol, std::string& where) {
    const auto xs = t.numbers(xcol), ys = t.numbers(ycol), fs = t.numbers(fcol);
    std::map<std::pair<double, double>, double> f;
    std::vector<double> ux, uy;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        f[{xs[i], ys[i]}] = fs[i];
        ux.push_back(xs[i]);
        uy.push_back(ys[i]);
    }
    for (auto* v : {&ux, &uy}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
    }
    for (std::size_t i = 0; i < ux.size(); ++i) {
        for (std::size_t j = 0; j < uy.size(); ++j) {
            const double here = f.at({ux[i], uy[j]});
            if (i + 1 < ux.size() && f.at({ux[i + 1], uy[j]}) > here + kMonotoneSlack) {
                where = xcol + " at (" + fmt(ux[i]) + "," + fmt(uy[j]) + ")";
                return false;
            }
            if (j + 1 < uy.size() && f.at({ux[i], uy[j + 1]}) > here + kMonotoneSlack) {
                where = ycol + " at (" + fmt(ux[i]) + "," + fmt(uy[j]) + ")";
                return false;
            }
        }
    }
    return true;
}

Outcome fig2_surfaces(Context& ctx) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto& c = ctx.run("fig2c").table;
    const auto& d = ctx.run("fig2d").table;
    o.check(c.rows.size() == 41 * 41 && d.rows.size() == 41 * 41, "41x41 grids");

    const double corner_c = c.number(0, "fidelity_at_tR");
    const double corner_d = d.number(0, "fidelity_at_tD");
    o.check(std::abs(corner_c - 1.0) <= kCornerTol, "fig2c corner F-1=" + fmt(corner_c - 1.0, 3));
    o.check(std::abs(corner_d - 1.0) <= kCornerTol, "fig2d corner F-1=" + fmt(corner_d - 1.0, 3));

    std::string where;
    o.check(grid_monotone(c, "kappa_over_g0", "gamma_over_g0", "fidelity_at_tR", where),
            "fig2c non-increasing" + (where.empty() ? "" : " (breaks along " + where + ")"));
    where.clear();
    o.check(grid_monotone(d, "gamma10_over_eta", "gamma_phi_over_eta", "fidelity_at_tD", where),
            "fig2d non-increasing" + (where.empty() ? "" : " (breaks along " + where + ")"));

    hm::TransferSpec probe;
    probe.samples = 0;
    probe.rates = {kDominanceRate, 0.0, 0.0, 0.0};
    const double f_kappa = hm::ri_transfer(probe).fidelity_at_protocol_time;
    probe.rates = hm::DecoherenceRates::uniform_cbjj(kDominanceRate);
    const double f_gamma = hm::ri_transfer(probe).fidelity_at_protocol_time;
    o.check(f_kappa > f_gamma, "F(kappa)=" + fmt(f_kappa, 4) + " > F(gamma)=" + fmt(f_gamma, 4));

    double region_min = 1.0;
    const auto gx = d.numbers("gamma10_over_eta"), gy = d.numbers("gamma_phi_over_eta"),
               fd = d.numbers("fidelity_at_tD");
    for (std::size_t i = 0; i < fd.size(); ++i) {
        if (gx[i] <= kFig2dRegion + 1e-12 && gy[i] <= kFig2dRegion + 1e-12) {
            region_min = std::min(region_min, fd[i]);
        }
    }
    o.check(region_min >= kFig2dFloor, "fig2d min F on [0,0.01]^2=" + fmt(region_min, 4));
    const double s = seconds_since(t0);
    o.check(s <= kRuntime6, "runtime " + fmt(s, 3) + "s on " + std::to_string(ctx.threads) + " threads");
    return o;
}

// 7 -------------------------------------------------------------------------
Outcome fig4_properties(Context& ctx) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    hm::WStateSpec closed;
    closed.samples = 0;
    const double f_closed = hm::w_state_prepare(closed).unconditional.fidelity_at_protocol_time;
    o.check(std::abs(f_closed - 1.0) <= kClosedTol, "closed F-1=" + fmt(f_closed - 1.0, 3));

    double last = 2.0;
    bool ordered = true, cond_above = true;
    std::string gating;
    for (double g : {1.0 / 200.0, 1.0 / 100.0, 1.0 / 50.0}) {
        hm::WStateSpec s;
        s.rates = hm::DecoherenceRates::uniform_cbjj(g);
        const auto r = hm::w_state_prepare(s);
        const double f = r.unconditional.fidelity_at_protocol_time;
        gating += fmt(f, 5) + " ";
        ordered = ordered && f < last;
        last = f;
        for (std::size_t i = 0; i < r.conditional_fidelity.size(); ++i) {
            const double fc = r.conditional_fidelity[i];
            if (std::isnan(fc)) continue;
            cond_above = cond_above && fc > r.unconditional.fidelity[i];
        }
    }
    o.check(ordered, "F(gating) for eta/200, /100, /50: " + gating);
    o.check(cond_above, "conditional > unconditional at every sampled time");
    ctx.run("fig4b");
    ctx.run("fig4c");
    const double s = seconds_since(t0);
    o.check(s < kRuntime7, "runtime " + fmt(s, 3) + "s");
    return o;
}

// 8 -------------------------------------------------------------------------
Outcome dispersive_validation(Context& ctx) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = hm::symmetric_dispersive(kDispersiveRatio, 1.0);
    const double duration = hm::protocol_time(TransferMode::dispersive, 0, p.eta());
    const auto r = hm::validate_dispersive(p, duration);
    const double bound = kPhotonFactor * kDispersiveRatio * kDispersiveRatio;
    o.check(r.max_cbjj_deviation <= kDeviationMax,
            "CBJJ deviation (bare start)=" + fmt(r.max_cbjj_deviation, 4));
    o.check(r.max_photon_dressed <= bound,
            "photon (dressed start)=" + fmt(r.max_photon_dressed, 4) + " <= " + fmt(bound, 4));
    o.notes.push_back("photon (bare start)=" + fmt(r.max_photon_bare, 4) + " (" +
                      fmt(r.max_photon_bare / (kDispersiveRatio * kDispersiveRatio), 3) +
                      " (g/Delta)^2, not gated)");
    const auto& report = ctx.run("validate-dispersive");
    const auto ratios = report.table.numbers("g_over_delta");
    const bool archived = std::find(ratios.begin(), ratios.end(), 0.2) != ratios.end() &&
                          std::filesystem::exists(ctx.out_dir / "validate-dispersive.csv");
    o.check(archived, "g/Delta=0.2 report archived");
    const double s = seconds_since(t0);
    o.check(s < kRuntime8, "runtime " + fmt(s, 3) + "s");
    return o;
}

// 9 -------------------------------------------------------------------------
Outcome hygiene(Context& ctx) {
    Outcome o;
    // Scenarios not already produced by earlier criteria.
    ctx.run("params-report");
    ctx.run("custom");
    ctx.run("custom", {"model.mode=w", "model.n_nve=4", "rates.gamma10=0.01",
                       "rates.tunneling=0.01", "rates.dephasing=0.01"},
            "custom-w");
    const cli::HygieneLimits limits;
    for (const auto& name : cli::scenario_names()) {
        if (!ctx.scenarios.count(name)) o.check(false, name + " not run");
    }
    for (const auto& [name, out] : ctx.scenarios) {
        const auto& d = out.diagnostics;
        o.check(limits.passes(d), name + " tr=" + fmt(d.trace_error, 2) + " herm=" +
                                      fmt(d.hermiticity_error, 2) + " mineig=" +
                                      fmt(d.min_eigenvalue, 2) + " fock=" +
                                      fmt(d.top_fock_population, 2));
    }
    const auto& base = ctx.scenarios.at("fig3a").table;
    const auto& half = ctx.run("fig3a", {"model.dt=0.0005"}, "fig3a-half-dt").table;
    double shift = 0.0;
    for (std::size_t c = 1; c < base.columns.size(); ++c) {
        const auto a = base.numbers(base.columns[c]);
        const auto b = half.numbers(base.columns[c]);
        for (std::size_t i = 0; i < a.size(); ++i) shift = std::max(shift, std::abs(a[i] - b[i]));
    }
    o.check(shift <= kHalvingTol, "fig3a dt-halving shift=" + fmt(shift, 3));
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    Context ctx;
    ctx.out_dir = "acceptance_artifacts";
    ctx.threads = std::max(1u, std::thread::hardware_concurrency());
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--out" && i + 1 < argc) {
            ctx.out_dir = argv[++i];
        } else if (a == "--threads" && i + 1 < argc) {
            ctx.threads = static_cast<unsigned>(std::max(1, std::atoi(argv[++i])));
        } else {
            std::cerr << "usage: acceptance [--out DIR] [--threads N]\n";
            return 2;
        }
    }

    const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria{
        {"1 device arithmetic", device_arithmetic},
        {"2 closed-system protocol exactness", closed_exactness},
        {"3 oracle equivalence", oracle_equivalence},
        {"4 dispersive transfer peak and initial-state insensitivity", fig3b_anchor},
        {"5 coupling-mismatch peak ordering", fig3a_anchors},
        {"6 decoherence surface properties", fig2_surfaces},
        {"7 W-state properties", fig4_properties},
        {"8 dispersive validation", dispersive_validation},
        {"9 numerical hygiene", hygiene},
    };

    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn(ctx);
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        std::ostringstream line;
        line << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << " [" << fmt(seconds_since(t0), 3)
             << " s]";
        for (std::size_t k = 0; k < o.notes.size(); ++k) {
            const auto& n = o.notes[k];
            line << (k == 0 ? " : " : "; ") << (n.front() == '!' ? "FAILED " + n.substr(1) : n);
        }
        std::cout << line.str() << std::endl;
        if (!o.pass) ++failures;
    }
    std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " criteria FAILED")
              << " (artifacts in " << ctx.out_dir.string() << ")" << std::endl;
    return failures == 0 ? 0 : 1;
}
