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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hybridmem/protocols.hpp"

namespace hm = hybridmem;
using hm::TransferMode;
using std::numbers::pi;

namespace {

hm::TransferSpec endpoint_spec(TransferMode mode) {
    hm::TransferSpec s;
    s.mode = mode;
    s.samples = 0;
    return s;
}

double ri_at_tr(const hm::DecoherenceRates& r) {
    auto s = endpoint_spec(TransferMode::resonant);
    s.rates = r;
    return hm::ri_transfer(s).fidelity_at_protocol_time;
}

}  // namespace

TEST(ProtocolTime, Examples) {
    EXPECT_NEAR(hm::protocol_time(TransferMode::resonant, 0, 1.0), pi / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(hm::protocol_time(TransferMode::resonant, 0, 1.0), 2.2214, 1e-4);
    EXPECT_NEAR(hm::protocol_time(TransferMode::dispersive, 0, 1.0), pi / 2.0, 1e-15);
    EXPECT_NEAR(hm::protocol_time(TransferMode::w_state, 0, 1.0, 3), 0.9069, 1e-4);
    EXPECT_NEAR(hm::protocol_time(TransferMode::dispersive, 2, 2.0), 5.0 * pi / 4.0, 1e-15);
    EXPECT_THROW(hm::protocol_time(TransferMode::resonant, -1, 1.0), hm::DomainError);
}

TEST(TargetState, PhaseConventions) {
    const double a = std::sqrt(0.5);
    const auto ri = hm::target_state(a, a, TransferMode::resonant);
    const auto& l = ri.layout();
    EXPECT_NEAR(ri[l.index({0, 0, 1})].real(), -a, 1e-15);
    const auto di = hm::target_state(a, a, TransferMode::dispersive);
    EXPECT_NEAR(di[di.layout().index({0, 1})].imag(), -a, 1e-15);
    const auto di1 = hm::target_state(a, a, TransferMode::dispersive, 1);
    EXPECT_NEAR(di1[di1.layout().index({0, 1})].imag(), a, 1e-15);
    const auto raw = hm::target_state(a, a, TransferMode::resonant, 0, hm::TargetConvention::raw);
    EXPECT_NEAR(raw[l.index({0, 0, 1})].real(), a, 1e-15);
}

TEST(TargetState, NoExcitationIsPhaseFree) {
    const auto t = hm::target_state(1.0, 0.0, TransferMode::resonant);
    EXPECT_EQ(t[0], hm::Complex(1.0));
    EXPECT_NEAR(t.amplitudes().norm(), 1.0, 1e-15);
    EXPECT_THROW(hm::target_state(1.0, 1.0, TransferMode::resonant), hm::DomainError);
    EXPECT_THROW(hm::target_state(1.0, 0.0, TransferMode::w_state), hm::DomainError);
}

TEST(ResonantTransfer, ClosedSystemIsExact) {
    EXPECT_NEAR(ri_at_tr({}), 1.0, 1e-8);
}

TEST(ResonantTransfer, RawTargetGivesPopulationImbalance) {
    auto s = endpoint_spec(TransferMode::resonant);
    s.alpha = std::sqrt(2.0 / 3.0);
    s.beta = std::sqrt(1.0 / 3.0);
    s.target = hm::TargetConvention::raw;
    EXPECT_NEAR(hm::ri_transfer(s).fidelity_at_protocol_time, 1.0 / 9.0, 1e-8);
}

TEST(ResonantTransfer, OddMultiplesAreEquivalent) {
    auto s = endpoint_spec(TransferMode::resonant);
    const double f0 = hm::ri_transfer(s).fidelity_at_protocol_time;
    s.k = 1;
    EXPECT_NEAR(hm::ri_transfer(s).fidelity_at_protocol_time, f0, 1e-7);
}

TEST(ResonantTransfer, ClosedSystemPeriodicity) {
    hm::TransferSpec s;
    const double period = 2.0 * pi * std::sqrt(2.0);
    s.t_final = period;
    s.samples = 201;
    const auto one = hm::ri_transfer(s);
    s.t_final = 2.0 * period;
    s.samples = 401;
    const auto two = hm::ri_transfer(s);
    for (std::size_t i = 0; i < one.times.size(); ++i) {
        EXPECT_NEAR(two.fidelity[i + 200], two.fidelity[i], 1e-7);
        EXPECT_NEAR(one.fidelity[i], two.fidelity[i], 1e-10);
    }
}

TEST(ResonantTransfer, MismatchShiftsThePeak) {
    hm::TransferSpec s;
    s.rates = {0.01, 0.01, 0.01, 0.01};
    s.t_final = 4.0;
    s.samples = 401;
    const auto base = hm::ri_transfer(s);
    s.delta = 0.1;
    const auto fast = hm::ri_transfer(s);
    s.delta = -0.1;
    const auto slow = hm::ri_transfer(s);
    EXPECT_LT(fast.peak_time, base.peak_time);
    EXPECT_GT(slow.peak_time, base.peak_time);
    for (const auto* r : {&base, &fast, &slow}) EXPECT_GT(r->peak_fidelity, 0.9);
}

TEST(ResonantTransfer, FidelityNeverExceedsOne) {
    hm::TransferSpec s;
    s.rates = {0.02, 0.0, 0.01, 0.03};
    s.samples = 301;
    for (double f : hm::ri_transfer(s).fidelity) EXPECT_LE(f, 1.0 + 1e-9);
}

TEST(ResonantTransfer, MonotoneInEachRate) {
    for (int axis = 0; axis < 4; ++axis) {
        double last = 2.0;
        for (int i = 0; i <= 5; ++i) {
            hm::DecoherenceRates r;
            const double v = 0.02 * i;
            (axis == 0 ? r.kappa : axis == 1 ? r.gamma10 : axis == 2 ? r.tunneling : r.dephasing) = v;
            const double f = ri_at_tr(r);
            EXPECT_LE(f, last + 1e-12) << "axis " << axis << " value " << v;
            last = f;
        }
    }
}

TEST(ResonantTransfer, CbjjLossesDominate) {
    EXPECT_GT(ri_at_tr({0.05, 0.0, 0.0, 0.0}), ri_at_tr(hm::DecoherenceRates::uniform_cbjj(0.05)));
}

TEST(ResonantTransfer, RejectsBadSpecs) {
    hm::TransferSpec s;
    s.delta = 0.7;
    EXPECT_THROW(hm::ri_transfer(s), hm::DomainError);
    s.delta = 0.0;
    s.alpha = 1.0;
    EXPECT_THROW(hm::ri_transfer(s), hm::DomainError);
    EXPECT_THROW(hm::di_transfer(hm::TransferSpec{}), hm::DomainError);
}

TEST(DispersiveTransfer, ClosedSystemIsExact) {
    auto s = endpoint_spec(TransferMode::dispersive);
    EXPECT_NEAR(hm::di_transfer(s).fidelity_at_protocol_time, 1.0, 1e-8);
    s.k = 1;
    EXPECT_NEAR(hm::di_transfer(s).fidelity_at_protocol_time, 1.0, 1e-8);
}

TEST(DispersiveTransfer, StarkResolvedVariantMatchesUnderMatchedShifts) {
    hm::TransferSpec s;
    s.mode = TransferMode::dispersive;
    s.rates = {0.0, 0.03, 0.015, 0.015};
    s.samples = 101;
    const auto eff = hm::di_transfer(s);
    s.mode = TransferMode::dispersive_full;
    const auto full = hm::di_transfer(s);
    for (std::size_t i = 0; i < eff.fidelity.size(); ++i) {
        EXPECT_NEAR(full.fidelity[i], eff.fidelity[i], 1e-10);
    }
}

TEST(DispersiveTransfer, DecoheredPeakAndInitialStateInsensitivity) {
    hm::TransferSpec s;
    s.mode = TransferMode::dispersive;
    s.rates = {0.0, 0.03, 0.015, 0.015};
    s.t_final = 3.0;
    s.samples = 301;
    double lo = 1.0, hi = 0.0;
    for (double p : {0.5, 1.0 / 3.0, 2.0 / 3.0}) {
        s.alpha = std::sqrt(p);
        s.beta = std::sqrt(1.0 - p);
        const double peak = hm::di_transfer(s).peak_fidelity;
        EXPECT_NEAR(peak, 0.97, 0.02);
        lo = std::min(lo, peak);
        hi = std::max(hi, peak);
    }
    EXPECT_LT(hi - lo, 0.02);
}

TEST(WState, ClosedSystemGatingIsExact) {
    hm::WStateSpec s;
    s.samples = 0;
    const auto r = hm::w_state_prepare(s);
    EXPECT_NEAR(r.unconditional.fidelity_at_protocol_time, 1.0, 1e-8);
    EXPECT_NEAR(r.success_probability_at_gating, 1.0, 1e-8);
    EXPECT_NEAR(r.conditional_at_gating, 1.0, 1e-8);
}

TEST(WState, HalfWayBranch) {
    hm::WStateSpec s;
    s.t_final = pi / (4.0 * std::sqrt(3.0));
    s.samples = 2;
    const auto r = hm::w_state_prepare(s);
    EXPECT_NEAR(r.success_probability.back(), 0.5, 1e-8);
    EXPECT_NEAR(r.conditional_fidelity.back(), 1.0, 1e-8);
}

TEST(WState, UnitaryFidelityFollowsSineSquared) {
    for (std::size_t n : {2u, 3u, 4u}) {
        hm::WStateSpec s;
        s.n_nve = n;
        s.t_final = 3.0;
        s.samples = 61;
        const auto r = hm::w_state_prepare(s);
        const double w = std::sqrt(static_cast<double>(n));
        for (std::size_t i = 0; i < r.unconditional.times.size(); ++i) {
            const double sn = std::sin(w * r.unconditional.times[i]);
            EXPECT_NEAR(r.unconditional.fidelity[i], sn * sn, 1e-8);
            if (r.success_probability[i] > 1e-6) {
                EXPECT_NEAR(r.conditional_fidelity[i], 1.0, 1e-8);
            }
        }
    }
}

TEST(WState, InitialStateBranchIsEmpty) {
    hm::WStateSpec s;
    s.samples = 11;
    const auto r = hm::w_state_prepare(s);
    EXPECT_TRUE(std::isnan(r.conditional_fidelity.front()));
    EXPECT_EQ(r.success_probability.front(), 0.0);
}

TEST(WState, DecoherenceOrderingAndConditionalGain) {
    double last = 2.0;
    for (double g : {1.0 / 200.0, 1.0 / 100.0, 1.0 / 50.0}) {
        hm::WStateSpec s;
        s.rates = hm::DecoherenceRates::uniform_cbjj(g);
        s.samples = 151;
        const auto r = hm::w_state_prepare(s);
        EXPECT_LT(r.unconditional.fidelity_at_protocol_time, last);
        last = r.unconditional.fidelity_at_protocol_time;
        for (std::size_t i = 0; i < r.conditional_fidelity.size(); ++i) {
            if (std::isnan(r.conditional_fidelity[i])) continue;
            EXPECT_GT(r.conditional_fidelity[i], r.unconditional.fidelity[i]);
        }
    }
}

TEST(WState, RejectsBadSpecs) {
    hm::WStateSpec s;
    s.n_nve = 7;
    EXPECT_THROW(hm::w_state_prepare(s), hm::DomainError);
    s.n_nve = 3;
    s.rates.kappa = 0.1;
    EXPECT_THROW(hm::w_state_prepare(s), hm::DomainError);
}

TEST(DispersiveValidation, NearIdealRatio) {
    const auto p = hm::symmetric_dispersive(1.0, 25.0);
    const auto r = hm::validate_dispersive(p, hm::protocol_time(TransferMode::dispersive, 0, p.eta()));
    const double x = r.g_over_delta;
    EXPECT_NEAR(x, 0.04, 1e-15);
    EXPECT_LE(r.max_cbjj_deviation, 0.01);
    EXPECT_LE(r.max_photon_dressed, 1.1 * x * x);
    EXPECT_GT(r.max_photon_bare, r.max_photon_dressed);
}

TEST(DispersiveValidation, UncoupledHasNoDeviation) {
    auto p = hm::symmetric_dispersive(0.0, 25.0);
    const auto r = hm::validate_dispersive(p, 10.0, 101);
    EXPECT_EQ(r.max_cbjj_deviation, 0.0);
    EXPECT_EQ(r.max_photon_bare, 0.0);
}

TEST(DispersiveValidation, OperatingPointIsReported) {
    const auto p = hm::symmetric_dispersive(1.0, 5.0);
    const auto r = hm::validate_dispersive(p, hm::protocol_time(TransferMode::dispersive, 0, p.eta()));
    EXPECT_NEAR(r.g_over_delta, 0.2, 1e-15);
    EXPECT_GT(r.max_cbjj_deviation, 0.01);
    EXPECT_LT(r.max_cbjj_deviation, 0.5);
}
