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

// Hamiltonian builders for the CBJJ - resonator - NV-ensemble device.
//
// The ensemble is represented as an effective qubit on {|0>_D, |1>_D}
// (vacuum and single symmetric Dicke excitation), S+ = |1><0|,
// S^z = |1><1| - |0><0|. Frequencies are in whatever unit the caller picks;
// simulations use model units with g0 = 1 or eta = 1.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hybridmem/errors.hpp"
#include "hybridmem/hilbert.hpp"

namespace hybridmem {

namespace labels {
inline const std::string cbjj = "cbjj";
inline const std::string tlr = "tlr";
inline const std::string nve = "nve";
inline std::string nve_n(std::size_t i) { return "nve" + std::to_string(i + 1); }
}  // namespace labels

/// (cbjj, tlr, nve) with Fock cutoff n_max.
inline SpaceLayout hybrid_layout(std::size_t n_max) {
    if (n_max < 1) throw DomainError("Fock cutoff n_max must be >= 1");
    return SpaceLayout({2, n_max + 1, 2}, {labels::cbjj, labels::tlr, labels::nve});
}

/// (cbjj, nve): the resonator eliminated.
inline SpaceLayout exchange_layout() { return SpaceLayout({2, 2}, {labels::cbjj, labels::nve}); }

/// (cbjj, nve1, ..., nveN).
inline SpaceLayout multi_layout(std::size_t n_nve) {
    if (n_nve < 1) throw DomainError("need at least one NV ensemble");
    std::vector<std::size_t> dims(n_nve + 1, 2);
    std::vector<std::string> names{labels::cbjj};
    for (std::size_t i = 0; i < n_nve; ++i) names.push_back(labels::nve_n(i));
    return SpaceLayout(std::move(dims), std::move(names));
}

/// Parameters of the full and dispersive Hamiltonians.
struct ModelParams {
    double omega10 = 0.0;
    double omega_c = 0.0;
    double omega_eg = 0.0;
    double g_tc = 0.0;
    double g_td = 0.0;
    std::size_t n_max = 2;
    std::size_t n_nve = 1;
    /// Skip the |Delta|/g >= 3 guard in dispersive builders.
    bool allow_weak_detuning = false;

    double detuning_tc() const { return omega10 - omega_c; }
    double detuning_td() const { return omega_eg - omega_c; }

    /// g_tc g_td (1/2 Delta_tc + 1/2 Delta_td)
    double eta() const {
        return g_tc * g_td * (0.5 / detuning_tc() + 0.5 / detuning_td());
    }

    void validate() const {
        if (n_max < 1) throw DomainError("Fock cutoff n_max must be >= 1");
        if (g_tc < 0.0 || g_td < 0.0) throw DomainError("couplings must be non-negative");
    }

    void require_dispersive() const {
        validate();
        if (allow_weak_detuning) return;
        constexpr double min_ratio = 3.0;
        const auto check = [&](double g, double delta, const char* which) {
            if (g == 0.0) return;
            if (delta == 0.0 || std::abs(delta) / g < min_ratio) {
                throw DomainError(std::string("dispersive approximation invalid: |") + which +
                                  "|/g < 3");
            }
        };
        check(g_tc, detuning_tc(), "Delta_tc");
        check(g_td, detuning_td(), "Delta_td");
    }
};

namespace detail {

struct HybridOps {
    SpaceLayout layout;
    Operator sz_c, sp_c, sm_c;
    Operator a, ad, n;
    Operator sz_d, sp_d, sm_d;
};

inline HybridOps hybrid_ops(std::size_t n_max) {
    const auto layout = hybrid_layout(n_max);
    const auto q = qubit_ops();
    const auto a = annihilation(n_max + 1);
    const std::size_t c = 0, t = 1, d = 2;
    auto a_full = embed(a, t, layout);
    auto ad_full = a_full.adjoint();
    auto n_full = ad_full * a_full;
    return {layout,
            embed(q.sigma_z, c, layout),
            embed(q.sigma_plus, c, layout),
            embed(q.sigma_minus, c, layout),
            std::move(a_full),
            std::move(ad_full),
            std::move(n_full),
            embed(q.sigma_z, d, layout),
            embed(q.sigma_plus, d, layout),
            embed(q.sigma_minus, d, layout)};
}

}  // namespace detail

/// Full device Hamiltonian on (cbjj, tlr, nve):
/// (w10/2) sz + wc a'a + (weg/2) Sz + g_tc (s+ a + s- a') + g_td (S+ a + S- a').
inline Operator h_total(const ModelParams& p) {
    p.validate();
    const auto o = detail::hybrid_ops(p.n_max);
    Operator h = (0.5 * p.omega10) * o.sz_c;
    h += p.omega_c * o.n;
    h += (0.5 * p.omega_eg) * o.sz_d;
    h += p.g_tc * (o.sp_c * o.a + o.sm_c * o.ad);
    h += p.g_td * (o.sp_d * o.a + o.sm_d * o.ad);
    return h;
}

/// Resonant Hamiltonian in the frame rotating at the resonator frequency
/// (w10 = wc = weg, so no diagonal part survives).
inline Operator h_resonant(double g_tc, double g_td, std::size_t n_max) {
    if (g_tc < 0.0 || g_td < 0.0) throw DomainError("couplings must be non-negative");
    const auto o = detail::hybrid_ops(n_max);
    return g_tc * (o.sp_c * o.a + o.sm_c * o.ad) + g_td * (o.sp_d * o.a + o.sm_d * o.ad);
}

/// Excitation number |1><1|_C + a'a + |1><1|_D on the hybrid layout.
inline Operator hybrid_excitation_number(std::size_t n_max) {
    const auto o = detail::hybrid_ops(n_max);
    return o.sp_c * o.sm_c + o.n + o.sp_d * o.sm_d;
}

/// Second-order dispersive Hamiltonian.
///
/// vacuum_reduced = false: acts on (cbjj, tlr, nve) and keeps the photon-number
/// dependent Stark terms. vacuum_reduced = true: resonator in vacuum, acts on
/// (cbjj, nve) with Stark-shifted splittings.
inline Operator h_dispersive(const ModelParams& p, bool vacuum_reduced) {
    p.require_dispersive();
    const double dtc = p.detuning_tc();
    const double dtd = p.detuning_td();
    const double stark_c = dtc != 0.0 ? p.g_tc * p.g_tc / dtc : 0.0;
    const double stark_d = dtd != 0.0 ? p.g_td * p.g_td / dtd : 0.0;
    const double eta =
        (p.g_tc == 0.0 || p.g_td == 0.0) ? 0.0 : p.eta();

    if (vacuum_reduced) {
        const auto layout = exchange_layout();
        const auto q = qubit_ops();
        const auto sz_c = embed(q.sigma_z, 0, layout);
        const auto sz_d = embed(q.sigma_z, 1, layout);
        const auto sp_c = embed(q.sigma_plus, 0, layout);
        const auto sm_c = embed(q.sigma_minus, 0, layout);
        const auto sp_d = embed(q.sigma_plus, 1, layout);
        const auto sm_d = embed(q.sigma_minus, 1, layout);
        Operator h = (0.5 * p.omega10 + 0.5 * stark_c) * sz_c;
        h += (0.5 * p.omega_eg + 0.5 * stark_d) * sz_d;
        h += eta * (sp_d * sm_c + sm_d * sp_c);
        return h;
    }

    const auto o = detail::hybrid_ops(p.n_max);
    Operator h = p.omega_c * o.n;
    h += (0.5 * p.omega10) * o.sz_c;
    h += (0.5 * p.omega_eg) * o.sz_d;
    h += stark_c * (o.sp_c * o.sm_c + o.sz_c * o.n);
    h += stark_d * (o.sp_d * o.sm_d + o.sz_d * o.n);
    h += eta * (o.sp_d * o.sm_c + o.sm_d * o.sp_c);
    return h;
}

/// Effective exchange eta (S+ s- + S- s+) on (cbjj, nve).
inline Operator h_exchange(double eta) {
    const auto layout = exchange_layout();
    const auto q = qubit_ops();
    const auto sp_c = embed(q.sigma_plus, 0, layout);
    const auto sm_c = embed(q.sigma_minus, 0, layout);
    const auto sp_d = embed(q.sigma_plus, 1, layout);
    const auto sm_d = embed(q.sigma_minus, 1, layout);
    return eta * (sp_d * sm_c + sm_d * sp_c);
}

/// sum_i eta_i (S_i+ s- + S_i- s+) on (cbjj, nve1, ..., nveN).
inline Operator h_multi(std::span<const double> etas, std::size_t n_nve) {
    if (n_nve < 1) throw DomainError("h_multi: need at least one NV ensemble");
    if (etas.size() != n_nve) {
        throw DomainError("h_multi: got " + std::to_string(etas.size()) + " couplings for " +
                          std::to_string(n_nve) + " ensembles");
    }
    const auto layout = multi_layout(n_nve);
    const auto q = qubit_ops();
    const auto sp_c = embed(q.sigma_plus, 0, layout);
    const auto sm_c = embed(q.sigma_minus, 0, layout);
    Operator h = Operator::zero(layout);
    for (std::size_t i = 0; i < n_nve; ++i) {
        const auto sp_i = embed(q.sigma_plus, i + 1, layout);
        const auto sm_i = embed(q.sigma_minus, i + 1, layout);
        h += etas[i] * (sp_i * sm_c + sm_i * sp_c);
    }
    return h;
}

/// Uniform couplings.
inline Operator h_multi(double eta, std::size_t n_nve) {
    const std::vector<double> etas(n_nve, eta);
    return h_multi(etas, n_nve);
}

/// |1><1|_C + sum_i |1><1|_i, the quantity H_M conserves. A flip |0>_C|1>_i ->
/// |1>_C|0>_i trades one excitation between the CBJJ and ensemble i.
inline Operator multi_excitation_number(std::size_t n_nve) {
    const auto layout = multi_layout(n_nve);
    const auto q = qubit_ops();
    Operator n = embed(q.proj1, 0, layout);
    for (std::size_t i = 0; i < n_nve; ++i) n += embed(q.proj1, i + 1, layout);
    return n;
}

}  // namespace hybridmem
