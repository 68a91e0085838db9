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

// Circuit parameters -> angular frequencies, couplings and leakage estimates.
// Everything here is SI: currents in A, capacitances in F, inductances in H,
// frequencies in rad/s.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "hybridmem/errors.hpp"

namespace hybridmem::device {

namespace constants {
inline constexpr double flux_quantum = 2.067833848e-15;  // Wb, h / 2e
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double two_pi = 2.0 * std::numbers::pi;
}  // namespace constants

namespace units {
inline constexpr double A = 1.0;
inline constexpr double mA = 1e-3;
inline constexpr double uA = 1e-6;
inline constexpr double nA = 1e-9;
inline constexpr double F = 1.0;
inline constexpr double pF = 1e-12;
inline constexpr double fF = 1e-15;
inline constexpr double H = 1.0;
inline constexpr double nH = 1e-9;
inline constexpr double Hz = 1.0;
inline constexpr double kHz = 1e3;
inline constexpr double MHz = 1e6;
inline constexpr double GHz = 1e9;
}  // namespace units

/// rad/s from an ordinary frequency in Hz.
constexpr double angular(double hz) { return constants::two_pi * hz; }
/// Hz from rad/s.
constexpr double ordinary(double rad_per_s) { return rad_per_s / constants::two_pi; }

struct CbjjParams {
    double bias_current;      // I_b
    double critical_current;  // I_c
    double junction_capacitance;  // C_J

    void validate() const {
        if (!(critical_current > 0.0)) throw DomainError("critical current must be positive");
        if (!(junction_capacitance > 0.0)) {
            throw DomainError("junction capacitance must be positive");
        }
        if (!(bias_current > 0.0)) throw DomainError("bias current must be positive");
        if (bias_current >= critical_current) {
            throw DomainError("junction past critical bias, no bound states");
        }
    }
};

struct TlrParams {
    double inductance;            // F_t
    double capacitance;           // C_t
    double wiring_capacitance = 0.0;   // C_0
    double coupling_capacitance = 0.0; // C_c
    std::optional<double> length;      // L, only needed for mode profiles

    double epsilon1() const { return 2.0 * wiring_capacitance / capacitance; }
    double epsilon2() const { return coupling_capacitance / capacitance; }

    void validate() const {
        if (!(inductance > 0.0) || !(capacitance > 0.0)) {
            throw DomainError("resonator inductance and capacitance must be positive");
        }
        if (wiring_capacitance < 0.0 || coupling_capacitance < 0.0) {
            throw DomainError("wiring and coupling capacitances must be non-negative");
        }
        if (epsilon1() >= 0.1 || epsilon2() >= 0.1) {
            throw DomainError("capacitive renormalization outside the weak-loading regime "
                              "(epsilon1, epsilon2 must be < 0.1)");
        }
    }
};

struct NveParams {
    double count;                 // N, number of NV centers (can be ~1e12)
    double single_spin_coupling;  // g_s
    double splitting = angular(2.87 * units::GHz);  // omega_eg

    void validate() const {
        if (!(count >= 1.0)) throw DomainError("NV count must be >= 1");
        if (!(single_spin_coupling > 0.0)) throw DomainError("single-spin coupling must be positive");
    }
};

/// Bottom-of-well level structure. omega_10 = 0.9 omega_p and
/// omega_21 = 0.81 omega_p are taken as exact model definitions.
struct JunctionLevels {
    double plasma;   // omega_p
    double omega10;
    double omega21;
    /// |omega_21 - omega_10|; exactly omega_10 / 10.
    double separation() const { return std::abs(omega21 - omega10); }
};

inline JunctionLevels plasma_frequency(const CbjjParams& p) {
    p.validate();
    const double drive = constants::two_pi * p.critical_current /
                         (constants::flux_quantum * p.junction_capacitance);
    const double wp =
        std::pow((2.0 - 2.0 * p.bias_current / p.critical_current) * drive * drive, 0.25);
    return {wp, 0.9 * wp, 0.81 * wp};
}

struct ResonatorMode {
    double omega_c;
    double phase;  // delta_0, tan(delta_0) = 2 pi epsilon2
};

inline ResonatorMode resonator_frequency(const TlrParams& p) {
    p.validate();
    const double wc = constants::two_pi * (1.0 - p.epsilon1() - p.epsilon2()) /
                      std::sqrt(p.inductance * p.capacitance);
    return {wc, std::atan(constants::two_pi * p.epsilon2())};
}

/// Capacitive CBJJ-resonator coupling g_tc = omega_c C_c cos(delta_0) / sqrt(2 C_t (C_J + C_c)).
inline double coupling_gtc(const TlrParams& tlr, const CbjjParams& cbjj, double omega_c,
                           double phase) {
    const double den = 2.0 * tlr.capacitance * (cbjj.junction_capacitance + tlr.coupling_capacitance);
    if (!(den > 0.0)) throw DomainError("coupling_gtc: capacitances must be positive");
    return omega_c * tlr.coupling_capacitance * std::cos(phase) / std::sqrt(den);
}

/// Collective sqrt(N) enhancement.
inline double ensemble_coupling(const NveParams& n) {
    n.validate();
    return std::sqrt(n.count) * n.single_spin_coupling;
}

struct EffectiveCoupling {
    double eta;
    /// max(g_tc/|Delta_tc|, g_td/|Delta_td|)
    double validity;
    std::optional<std::string> warning;
};

inline constexpr double kDispersiveWarnRatio = 0.3;

inline EffectiveCoupling effective_eta(double g_tc, double g_td, double detuning_tc,
                                       double detuning_td) {
    if (detuning_tc == 0.0 || detuning_td == 0.0) {
        throw DomainError("effective_eta: zero detuning, dispersive coupling undefined");
    }
    EffectiveCoupling out;
    out.eta = g_tc * g_td * (1.0 / (2.0 * detuning_tc) + 1.0 / (2.0 * detuning_td));
    out.validity = std::max(std::abs(g_tc / detuning_tc), std::abs(g_td / detuning_td));
    if (out.validity > kDispersiveWarnRatio) {
        out.warning = "dispersive validity ratio " + std::to_string(out.validity) +
                      " exceeds " + std::to_string(kDispersiveWarnRatio);
    }
    return out;
}

/// Population leaking to |2>_C, g^2 / (g^2 + Xi^2).
inline double leakage_probability(double g_tc, double separation) {
    if (!(separation > 0.0)) throw DomainError("leakage_probability: level separation must be > 0");
    return g_tc * g_tc / (g_tc * g_tc + separation * separation);
}

struct ModeAmplitude {
    double voltage;  // V
    double current;  // A
};

/// Zero-point voltage/current envelopes of the full-wave mode at position x.
inline ModeAmplitude mode_profile(double x, const TlrParams& tlr, double omega_c, double phase) {
    if (!tlr.length) throw DomainError("mode_profile: resonator length not set");
    const double len = *tlr.length;
    if (!(len > 0.0)) throw DomainError("mode_profile: resonator length must be positive");
    if (x < 0.0 || x > len) throw DomainError("mode_profile: position outside the resonator");
    const double k = constants::two_pi / len;
    const double arg = k * x + phase;
    return {std::sqrt(constants::hbar * omega_c / tlr.capacitance) * std::cos(arg),
            std::sqrt(constants::hbar * omega_c / tlr.inductance) * std::sin(arg)};
}

struct DeviceParams {
    CbjjParams cbjj;
    TlrParams tlr;
    NveParams nve;
};

/// Everything downstream of DeviceParams, all in rad/s (phase in rad).
struct DerivedFrequencies {
    double omega_p;
    double omega10;
    double omega21;
    double separation;  // Xi
    double omega_c;
    double phase;       // delta_0
    double g_tc;
    double g_td;
    double leakage;
};

inline DerivedFrequencies derive(const DeviceParams& p) {
    const auto levels = plasma_frequency(p.cbjj);
    const auto mode = resonator_frequency(p.tlr);
    const double gtc = coupling_gtc(p.tlr, p.cbjj, mode.omega_c, mode.phase);
    return {levels.plasma,  levels.omega10, levels.omega21, levels.separation(),
            mode.omega_c,   mode.phase,     gtc,            ensemble_coupling(p.nve),
            leakage_probability(gtc, levels.separation())};
}

}  // namespace hybridmem::device
