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

// Storage protocols: resonant transfer through a real resonator photon,
// dispersive transfer through virtual photons, and W-state preparation of
// several ensembles through a shared CBJJ.
//
// Time is in model units: g0 t for resonant runs, eta t for dispersive and
// W-state runs.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "hybridmem/errors.hpp"
#include "hybridmem/hamiltonian.hpp"
#include "hybridmem/hilbert.hpp"
#include "hybridmem/lindblad.hpp"

namespace hybridmem {

enum class TransferMode { resonant, dispersive, dispersive_full, w_state };

inline std::string to_string(TransferMode m) {
    switch (m) {
        case TransferMode::resonant: return "ri";
        case TransferMode::dispersive: return "di";
        case TransferMode::dispersive_full: return "di-full";
        case TransferMode::w_state: return "w";
    }
    return "?";
}

/// Whether the stored branch is compared with the deterministic transfer
/// phase absorbed (-1 resonant, -i dispersive) or with the bare amplitudes.
enum class TargetConvention { phase_corrected, raw };

/// Protocol duration: (2k+1) pi / (sqrt(2) g0), (2k+1) pi / (2 eta) or
/// (2k+1) pi / (2 sqrt(N) eta).
inline double protocol_time(TransferMode mode, int k, double coupling, std::size_t n_nve = 1) {
    if (k < 0) throw DomainError("timing index k must be >= 0");
    if (!(coupling > 0.0)) throw DomainError("coupling must be positive");
    const double odd = 2.0 * k + 1.0;
    const double pi = std::numbers::pi;
    switch (mode) {
        case TransferMode::resonant: return odd * pi / (std::sqrt(2.0) * coupling);
        case TransferMode::dispersive:
        case TransferMode::dispersive_full: return odd * pi / (2.0 * coupling);
        case TransferMode::w_state:
            if (n_nve < 1) throw DomainError("need at least one NV ensemble");
            return odd * pi / (2.0 * std::sqrt(static_cast<double>(n_nve)) * coupling);
    }
    return 0.0;
}

/// Stored-state target on the full layout of the given mode.
inline Ket target_state(Complex alpha, Complex beta, TransferMode mode, int k = 0,
                        TargetConvention convention = TargetConvention::phase_corrected,
                        std::size_t n_max = 2) {
    const double norm = std::norm(alpha) + std::norm(beta);
    if (std::abs(norm - 1.0) > 1e-12) throw DomainError("amplitudes are not normalized");
    const bool corrected = convention == TargetConvention::phase_corrected;
    switch (mode) {
        case TransferMode::resonant: {
            const auto layout = hybrid_layout(n_max);
            Vector v = Vector::Zero(static_cast<Eigen::Index>(layout.dimension()));
            v(static_cast<Eigen::Index>(layout.index({0, 0, 0}))) = alpha;
            // The resonant single-excitation propagator ends on -|0,0,1> at
            // every odd multiple of pi / (sqrt(2) g0).
            v(static_cast<Eigen::Index>(layout.index({0, 0, 1}))) = corrected ? -beta : beta;
            return Ket(std::move(v), layout);
        }
        case TransferMode::dispersive:
        case TransferMode::dispersive_full: {
            const auto layout = exchange_layout();
            Vector v = Vector::Zero(4);
            v(static_cast<Eigen::Index>(layout.index({0, 0}))) = alpha;
            // exp(-i eta t X) at eta t = (2k+1) pi / 2 leaves -i (-1)^k on the swapped branch.
            const Complex phase = (k % 2 == 0) ? Complex(0.0, -1.0) : Complex(0.0, 1.0);
            v(static_cast<Eigen::Index>(layout.index({0, 1}))) = corrected ? phase * beta : beta;
            return Ket(std::move(v), layout);
        }
        case TransferMode::w_state:
            throw DomainError("use w_target for W-state preparation");
    }
    throw DomainError("unknown transfer mode");
}

/// Dispersive parameters for the Stark-shift-resolving variant, in units where eta = 1
/// when the defaults are used (g = 5, Delta = 25).
struct DispersiveCircuit {
    double g_tc = 5.0;
    double g_td = 5.0;
    double detuning_tc = 25.0;
    double detuning_td = 25.0;

    ModelParams model() const {
        // Frame: resonator at -Delta_tc, CBJJ at 0, ensemble at Delta_td - Delta_tc.
        ModelParams p;
        p.omega10 = 0.0;
        p.omega_c = -detuning_tc;
        p.omega_eg = detuning_td - detuning_tc;
        p.g_tc = g_tc;
        p.g_td = g_td;
        return p;
    }
    double eta() const { return model().eta(); }
};

struct TransferSpec {
    Complex alpha{std::numbers::sqrt2 / 2.0, 0.0};
    Complex beta{std::numbers::sqrt2 / 2.0, 0.0};
    TransferMode mode = TransferMode::resonant;
    /// (g_td - g_tc) / g0, resonant only.
    double delta = 0.0;
    DecoherenceRates rates;
    int k = 0;
    TargetConvention target = TargetConvention::phase_corrected;
    /// g0 (resonant) or eta (dispersive).
    double coupling = 1.0;
    std::size_t n_max = 2;
    /// Time window [0, t_final]; NaN means 3x the protocol time.
    double t_final = std::numeric_limits<double>::quiet_NaN();
    /// Recorded samples over the window; 0 evaluates only the protocol time.
    std::size_t samples = 600;
    /// Step in units of 1/coupling.
    double dt = 1e-3;
    DispersiveCircuit circuit;

    void validate() const {
        const double norm = std::norm(alpha) + std::norm(beta);
        if (std::abs(norm - 1.0) > 1e-12) throw DomainError("|alpha|^2 + |beta|^2 must equal 1");
        if (delta < -0.5 || delta > 0.5) throw DomainError("coupling mismatch delta outside [-0.5, 0.5]");
        if (mode != TransferMode::resonant && delta != 0.0) {
            throw DomainError("coupling mismatch delta only applies to resonant transfer");
        }
        if (mode == TransferMode::w_state) throw DomainError("use w_state_prepare for W states");
        if (k < 0) throw DomainError("timing index k must be >= 0");
        if (!(coupling > 0.0)) throw DomainError("coupling must be positive");
        if (!(dt > 0.0)) throw DomainError("dt must be positive");
        if (samples == 1) throw DomainError("samples must be 0 or >= 2");
        rates.validate();
    }
};

struct TransferResult {
    std::vector<double> times;
    std::vector<double> fidelity;
    double protocol_time = 0.0;
    double fidelity_at_protocol_time = 0.0;
    double peak_fidelity = 0.0;
    double peak_time = 0.0;
    RecordDiagnostics diagnostics;
};

namespace detail {

inline void merge_worst(RecordDiagnostics& into, const RecordDiagnostics& d) {
    into.trace_error = std::max(into.trace_error, d.trace_error);
    into.hermiticity_error = std::max(into.hermiticity_error, d.hermiticity_error);
    into.min_eigenvalue = std::min(into.min_eigenvalue, d.min_eigenvalue);
    into.top_fock_population = std::max(into.top_fock_population, d.top_fock_population);
}

struct TransferSetup {
    DensityMatrix rho0;
    MasterEquation equation;
    Ket target;
};

inline TransferSetup transfer_setup(const TransferSpec& spec) {
    const Vector cbjj_in = (Vector(2) << spec.alpha, spec.beta).finished();
    switch (spec.mode) {
        case TransferMode::resonant: {
            const auto layout = hybrid_layout(spec.n_max);
            Vector psi = Vector::Zero(static_cast<Eigen::Index>(layout.dimension()));
            psi(static_cast<Eigen::Index>(layout.index({0, 0, 0}))) = spec.alpha;
            psi(static_cast<Eigen::Index>(layout.index({1, 0, 0}))) = spec.beta;
            const Operator h = h_resonant(spec.coupling, (1.0 + spec.delta) * spec.coupling, spec.n_max);
            auto channels = cbjj_channels(spec.rates, layout);
            return {DensityMatrix::pure(Ket(psi, layout)), MasterEquation(h, channels),
                    target_state(spec.alpha, spec.beta, spec.mode, spec.k, spec.target, spec.n_max)};
        }
        case TransferMode::dispersive:
        case TransferMode::dispersive_full: {
            const auto layout = exchange_layout();
            Vector psi = Vector::Zero(4);
            psi(static_cast<Eigen::Index>(layout.index({0, 0}))) = spec.alpha;
            psi(static_cast<Eigen::Index>(layout.index({1, 0}))) = spec.beta;
            Operator h = h_exchange(spec.coupling);
            if (spec.mode == TransferMode::dispersive_full) {
                // Vacuum-reduced dispersive Hamiltonian rescaled to eta = coupling,
                // in the frame co-rotating with the Stark-shifted CBJJ.
                const auto p = spec.circuit.model();
                const double eta = p.eta();
                if (!(eta > 0.0)) throw DomainError("dispersive circuit gives non-positive eta");
                const double scale = spec.coupling / eta;
                const auto q = qubit_ops();
                const double stark_c = p.g_tc * p.g_tc / p.detuning_tc();
                const Operator frame = (0.5 * stark_c) * (embed(q.sigma_z, 0, layout) +
                                                          embed(q.sigma_z, 1, layout));
                h = scale * (h_dispersive(p, true) - frame);
            }
            auto channels = cbjj_channels(spec.rates, layout);
            return {DensityMatrix::pure(Ket(psi, layout)), MasterEquation(h, channels),
                    target_state(spec.alpha, spec.beta, spec.mode, spec.k, spec.target)};
        }
        case TransferMode::w_state: break;
    }
    throw DomainError("unsupported transfer mode");
}

}  // namespace detail

/// Resonant, dispersive and Stark-resolved dispersive transfer of the CBJJ
/// state into the ensemble.
inline TransferResult run_transfer(const TransferSpec& spec) {
    spec.validate();
    auto setup = detail::transfer_setup(spec);
    const double dt = spec.dt / spec.coupling;

    TransferResult out;
    out.protocol_time = protocol_time(spec.mode, spec.k, spec.coupling);
    out.diagnostics.min_eigenvalue = 0.0;

    // Protocol-time endpoint (exactly on the step grid).
    {
        auto cfg = EvolutionConfig::endpoint(out.protocol_time, dt);
        cfg.keep_states = false;
        const auto traj = evolve_rk4(setup.rho0, setup.equation, cfg);
        out.fidelity_at_protocol_time = fidelity(setup.target.amplitudes(), traj.final_state);
        detail::merge_worst(out.diagnostics, traj.worst());
    }

    if (spec.samples >= 2) {
        const double t_final =
            std::isnan(spec.t_final) ? 3.0 * out.protocol_time : spec.t_final;
        auto cfg = EvolutionConfig::sampled(t_final, spec.samples, dt);
        const auto traj = evolve_rk4(setup.rho0, setup.equation, cfg);
        out.times = traj.times;
        out.fidelity.reserve(traj.states.size());
        for (const auto& rho : traj.states) {
            out.fidelity.push_back(fidelity(setup.target.amplitudes(), rho));
        }
        const auto it = std::max_element(out.fidelity.begin(), out.fidelity.end());
        out.peak_fidelity = *it;
        out.peak_time = out.times[static_cast<std::size_t>(it - out.fidelity.begin())];
        detail::merge_worst(out.diagnostics, traj.worst());
    } else {
        out.peak_fidelity = out.fidelity_at_protocol_time;
        out.peak_time = out.protocol_time;
    }
    return out;
}

inline TransferResult ri_transfer(TransferSpec spec) {
    if (spec.mode != TransferMode::resonant) throw DomainError("ri_transfer needs resonant mode");
    return run_transfer(spec);
}

inline TransferResult di_transfer(TransferSpec spec) {
    if (spec.mode != TransferMode::dispersive && spec.mode != TransferMode::dispersive_full) {
        throw DomainError("di_transfer needs a dispersive mode");
    }
    return run_transfer(spec);
}

// ---------------------------------------------------------------------------
// W-state preparation

struct WStateSpec {
    std::size_t n_nve = 3;
    double eta = 1.0;
    DecoherenceRates rates;
    bool conditional = true;
    int k = 0;
    double t_final = std::numeric_limits<double>::quiet_NaN();
    std::size_t samples = 600;
    double dt = 1e-3;
    RenormPolicy renorm = RenormPolicy::off;
    double branch_threshold = kDefaultBranchThreshold;

    static constexpr std::size_t kMaxEnsembles = 6;

    void validate() const {
        if (n_nve < 1 || n_nve > kMaxEnsembles) {
            throw DomainError("W-state ensemble count must be in [1, 6]");
        }
        if (!(eta > 0.0)) throw DomainError("eta must be positive");
        if (!(dt > 0.0)) throw DomainError("dt must be positive");
        if (samples == 1) throw DomainError("samples must be 0 or >= 2");
        rates.validate();
        if (rates.kappa != 0.0) throw DomainError("W-state space has no resonator; kappa must be 0");
    }
};

/// |1>_1 ... |1>_N |0>_c, written in (cbjj, nve1..nveN) order.
inline Ket w_initial_state(std::size_t n_nve) {
    const auto layout = multi_layout(n_nve);
    std::vector<std::size_t> lv(n_nve + 1, 1);
    lv[0] = 0;
    return Ket::basis(layout, lv);
}

/// (1/sqrt N) sum_j |1..0_j..1> (x) |1>_c; with the CBJJ projected this is the W state.
inline Ket w_target(std::size_t n_nve) {
    const auto layout = multi_layout(n_nve);
    Vector v = Vector::Zero(static_cast<Eigen::Index>(layout.dimension()));
    for (std::size_t j = 0; j < n_nve; ++j) {
        std::vector<std::size_t> lv(n_nve + 1, 1);
        lv[j + 1] = 0;
        v(static_cast<Eigen::Index>(layout.index(lv))) = 1.0;
    }
    return Ket(std::move(v), layout);
}

struct WStateResult {
    TransferResult unconditional;
    /// Per sample; NaN where the |1>_c branch is below threshold.
    std::vector<double> conditional_fidelity;
    std::vector<double> success_probability;
    double conditional_at_gating = std::numeric_limits<double>::quiet_NaN();
    double success_probability_at_gating = 0.0;
};

inline WStateResult w_state_prepare(const WStateSpec& spec) {
    spec.validate();
    const auto layout = multi_layout(spec.n_nve);
    const auto rho0 = DensityMatrix::pure(w_initial_state(spec.n_nve));
    const Operator h = h_multi(spec.eta, spec.n_nve);
    const auto channels = cbjj_channels(spec.rates, layout);
    const MasterEquation eq(h, channels);
    const Ket target = w_target(spec.n_nve);
    const Operator readout = embed(qubit_ops().proj1, 0, layout);
    const double dt = spec.dt / spec.eta;

    WStateResult out;
    auto& unc = out.unconditional;
    unc.protocol_time = protocol_time(TransferMode::w_state, spec.k, spec.eta, spec.n_nve);
    unc.diagnostics.min_eigenvalue = 0.0;

    const auto conditional = [&](const Matrix& rho, double& f, double& p) {
        const double weight = (readout.matrix() * rho).trace().real();
        p = weight;
        f = std::numeric_limits<double>::quiet_NaN();
        if (!spec.conditional) return;
        try {
            const auto proj = project(DensityMatrix(rho, layout), readout, spec.branch_threshold);
            f = fidelity(target, proj.state);
            p = proj.probability;
        } catch (const MeasurementError&) {
        }
    };

    {
        auto cfg = EvolutionConfig::endpoint(unc.protocol_time, dt);
        cfg.keep_states = false;
        cfg.renorm = spec.renorm;
        const auto traj = evolve_rk4(rho0, eq, cfg);
        unc.fidelity_at_protocol_time = fidelity(target.amplitudes(), traj.final_state);
        conditional(traj.final_state, out.conditional_at_gating, out.success_probability_at_gating);
        detail::merge_worst(unc.diagnostics, traj.worst());
    }

    if (spec.samples >= 2) {
        const double t_final = std::isnan(spec.t_final) ? 3.0 * unc.protocol_time : spec.t_final;
        auto cfg = EvolutionConfig::sampled(t_final, spec.samples, dt);
        cfg.renorm = spec.renorm;
        const auto traj = evolve_rk4(rho0, eq, cfg);
        unc.times = traj.times;
        for (const auto& rho : traj.states) {
            unc.fidelity.push_back(fidelity(target.amplitudes(), rho));
            double f = 0.0, p = 0.0;
            conditional(rho, f, p);
            out.conditional_fidelity.push_back(f);
            out.success_probability.push_back(p);
        }
        const auto it = std::max_element(unc.fidelity.begin(), unc.fidelity.end());
        unc.peak_fidelity = *it;
        unc.peak_time = unc.times[static_cast<std::size_t>(it - unc.fidelity.begin())];
        detail::merge_worst(unc.diagnostics, traj.worst());
    } else {
        unc.peak_fidelity = unc.fidelity_at_protocol_time;
        unc.peak_time = unc.protocol_time;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dispersive-regime validation

enum class InitialPreparation {
    bare,     // |1_C, 0_T, 0_D> switched on suddenly
    dressed,  // same state dressed to first order by the resonator coupling
};

struct DispersiveReport {
    double g_over_delta = 0.0;
    double eta = 0.0;
    double duration = 0.0;
    std::size_t samples = 0;
    /// max_t |P_C^full(t) - P_C^eff(t)| from the bare start.
    double max_cbjj_deviation = 0.0;
    /// Same, dressed start.
    double max_cbjj_deviation_dressed = 0.0;
    double max_photon_bare = 0.0;
    double max_photon_dressed = 0.0;
};

namespace detail {

/// Closed-system propagation by Hermitian eigendecomposition.
class UnitaryPropagator {
public:
    explicit UnitaryPropagator(const Operator& h) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
        vecs_ = es.eigenvectors();
        vals_ = es.eigenvalues();
    }
    Vector apply(const Vector& psi, double t) const {
        Vector c = vecs_.adjoint() * psi;
        for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(Complex(0.0, -vals_(k) * t));
        return vecs_ * c;
    }

private:
    Matrix vecs_;
    Eigen::VectorXd vals_;
};

/// First-order perturbative dressing of basis state n by the off-diagonal part of h.
inline Vector dressed_state(const Matrix& h, Eigen::Index n, double min_gap) {
    Vector v = Vector::Zero(h.rows());
    v(n) = 1.0;
    for (Eigen::Index m = 0; m < h.rows(); ++m) {
        if (m == n || h(m, n) == Complex(0.0, 0.0)) continue;
        const double gap = (h(n, n) - h(m, m)).real();
        if (std::abs(gap) < min_gap) continue;  // degenerate partner, handled by the effective model
        v(m) = h(m, n) / gap;
    }
    return v.normalized();
}

}  // namespace detail

/**
 * Closed-system comparison of the full resonator-mediated Hamiltonian with the
 * vacuum-reduced dispersive Hamiltonian (which equals the exchange Hamiltonian
 * up to a conserved frame term when the Stark shifts match), starting with the
 * excitation on the CBJJ.
 */
inline DispersiveReport validate_dispersive(const ModelParams& p, double duration,
                                            std::size_t samples = 0) {
    p.require_dispersive();
    if (!(duration > 0.0)) throw DomainError("duration must be positive");
    const Operator full = h_total(p);
    const Operator reduced = h_dispersive(p, true);
    const auto full_layout = full.layout();
    const auto red_layout = reduced.layout();

    DispersiveReport r;
    const double g = std::max(p.g_tc, p.g_td);
    const double delta = std::min(std::abs(p.detuning_tc()), std::abs(p.detuning_td()));
    r.g_over_delta = g / delta;
    r.eta = (p.g_tc == 0.0 || p.g_td == 0.0) ? 0.0 : p.eta();
    r.duration = duration;
    if (samples == 0) {
        // ~40 samples per fastest (detuning) oscillation period.
        const double fastest = std::max(delta, 1e-12);
        samples = static_cast<std::size_t>(
            std::ceil(40.0 * fastest * duration / (2.0 * std::numbers::pi))) + 1;
        samples = std::clamp<std::size_t>(samples, 2001, 200001);
    }
    r.samples = samples;

    const detail::UnitaryPropagator uf(full);
    const detail::UnitaryPropagator ur(reduced);

    const auto start = static_cast<Eigen::Index>(full_layout.index({1, 0, 0}));
    Vector bare = Vector::Zero(full.matrix().rows());
    bare(start) = 1.0;
    const double min_gap = 0.5 * delta;
    const Vector dressed = detail::dressed_state(full.matrix(), start, min_gap);
    Vector red0 = Vector::Zero(4);
    red0(static_cast<Eigen::Index>(red_layout.index({1, 0}))) = 1.0;

    const Operator pc_full = embed(qubit_ops().proj1, 0, full_layout);
    const Operator n_full =
        embed(number_operator(p.n_max + 1), 1, full_layout);
    const Operator pc_red = embed(qubit_ops().proj1, 0, red_layout);
    const auto expect = [](const Operator& o, const Vector& v) {
        return v.dot(o.matrix() * v).real();
    };

    for (std::size_t s = 0; s < samples; ++s) {
        const double t = duration * static_cast<double>(s) / static_cast<double>(samples - 1);
        const Vector psi_b = uf.apply(bare, t);
        const Vector psi_d = uf.apply(dressed, t);
        const Vector psi_r = ur.apply(red0, t);
        const double pc_eff = expect(pc_red, psi_r);
        r.max_cbjj_deviation = std::max(r.max_cbjj_deviation, std::abs(expect(pc_full, psi_b) - pc_eff));
        r.max_cbjj_deviation_dressed =
            std::max(r.max_cbjj_deviation_dressed, std::abs(expect(pc_full, psi_d) - pc_eff));
        r.max_photon_bare = std::max(r.max_photon_bare, expect(n_full, psi_b));
        r.max_photon_dressed = std::max(r.max_photon_dressed, expect(n_full, psi_d));
    }
    return r;
}

/// Symmetric dispersive operating point: CBJJ and ensemble both detuned by
/// `detuning` above the resonator, equal couplings g. Frame rotating at the
/// resonator frequency.
inline ModelParams symmetric_dispersive(double g, double detuning, std::size_t n_max = 2) {
    ModelParams p;
    p.omega_c = 0.0;
    p.omega10 = detuning;
    p.omega_eg = detuning;
    p.g_tc = g;
    p.g_td = g;
    p.n_max = n_max;
    return p;
}

}  // namespace hybridmem
