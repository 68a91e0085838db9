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

// Phenomenological master equation
//
//   drho/dt = -i[H, rho] + sum_k c_k D[A_k] rho,
//   D[A] rho = 2 A rho A' - A'A rho - rho A'A,
//
// with c_k = rate/2, so a channel with rate r depletes <A'A> at rate r.
// Two independent integration routes: fixed-step RK4 and the exponential of
// the column-stacked superoperator.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <unsupported/Eigen/MatrixFunctions>

#include "hybridmem/errors.hpp"
#include "hybridmem/hamiltonian.hpp"
#include "hybridmem/hilbert.hpp"
#include "hybridmem/rk4.hpp"

namespace hybridmem {

/// CBJJ and resonator loss rates, in model units.
struct DecoherenceRates {
    double kappa = 0.0;      // resonator decay
    double gamma10 = 0.0;    // CBJJ spontaneous emission
    double tunneling = 0.0;  // CBJJ tunneling out of |1>, Gamma_1
    double dephasing = 0.0;  // CBJJ pure dephasing, gamma_phi

    void validate() const {
        if (kappa < 0.0 || gamma10 < 0.0 || tunneling < 0.0 || dephasing < 0.0) {
            throw DomainError("decoherence rates must be non-negative");
        }
    }

    /// gamma = gamma_phi = gamma_10 = Gamma_1, resonator untouched.
    static DecoherenceRates uniform_cbjj(double gamma, double kappa = 0.0) {
        return {kappa, gamma, gamma, gamma};
    }

    bool operator==(const DecoherenceRates&) const = default;
};

struct CollapseChannel {
    Operator op;
    double prefactor;  // multiplies D[op]; rate / 2

    CollapseChannel(Operator o, double pref) : op(std::move(o)), prefactor(pref) {
        if (prefactor < 0.0) throw DomainError("collapse prefactor must be non-negative");
    }
};

/// Channels on the CBJJ slot (always slot 0) plus the resonator when present.
/// gamma10 and Gamma_1 share sigma- and are merged into one channel.
inline std::vector<CollapseChannel> cbjj_channels(const DecoherenceRates& r,
                                                  const SpaceLayout& layout) {
    r.validate();
    std::vector<CollapseChannel> out;
    const auto q = qubit_ops();
    const std::size_t c = layout.slot(labels::cbjj);
    if (layout.has(labels::tlr) && r.kappa > 0.0) {
        const std::size_t t = layout.slot(labels::tlr);
        out.emplace_back(embed(annihilation(layout.dims()[t]), t, layout), 0.5 * r.kappa);
    }
    if (r.gamma10 + r.tunneling > 0.0) {
        out.emplace_back(embed(q.sigma_minus, c, layout), 0.5 * (r.gamma10 + r.tunneling));
    }
    if (r.dephasing > 0.0) {
        out.emplace_back(embed(q.sigma_z, c, layout), 0.5 * r.dephasing);
    }
    return out;
}

inline Matrix dissipator(const Matrix& a, const Matrix& rho) {
    const Matrix ada = a.adjoint() * a;
    return 2.0 * a * rho * a.adjoint() - ada * rho - rho * ada;
}

inline Matrix dissipator(const Operator& a, const DensityMatrix& rho) {
    require_same_layout(a.layout(), rho.layout(), "dissipator");
    return dissipator(a.matrix(), rho.matrix());
}

/**
 * Precomputed right-hand side. Uses the non-Hermitian effective Hamiltonian
 * H_eff = H - i sum c A'A so that
 *   drho/dt = -i (H_eff rho - rho H_eff') + sum 2c A rho A'.
 * Operators are kept in compressed form for the products; states stay dense.
 * Holds a scratch buffer, so one instance per thread.
 */
class MasterEquation {
public:
    using Sparse = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

    MasterEquation(const Operator& h, std::span<const CollapseChannel> channels)
        : layout_(h.layout()), h_(h.matrix()) {
        Matrix h_eff = h_;
        for (const auto& ch : channels) {
            require_same_layout(layout_, ch.op.layout(), "master equation channel");
            if (ch.prefactor == 0.0) continue;
            const Matrix& a = ch.op.matrix();
            h_eff -= Complex(0.0, ch.prefactor) * (a.adjoint() * a);
            jumps_.push_back(a.sparseView());
            adjoint_jumps_.push_back(Matrix(a.adjoint()).sparseView());
            weights_.push_back(2.0 * ch.prefactor);
            jump_norms_.push_back((a.adjoint() * a).cwiseAbs().maxCoeff());
        }
        h_eff_ = h_eff.sparseView();
        h_eff_adj_ = Matrix(h_eff.adjoint()).sparseView();
        const auto d = h_.rows();
        scratch_.resize(d, d);
    }

    const SpaceLayout& layout() const { return layout_; }
    const Matrix& hamiltonian() const { return h_; }
    std::size_t channel_count() const { return jumps_.size(); }

    void apply(const Matrix& rho, Matrix& out) const {
        const Complex minus_i(0.0, -1.0);
        out.noalias() = minus_i * (h_eff_ * rho);
        out.noalias() -= minus_i * (rho * h_eff_adj_);
        for (std::size_t k = 0; k < jumps_.size(); ++k) {
            scratch_.noalias() = jumps_[k] * rho;
            out.noalias() += weights_[k] * (scratch_ * adjoint_jumps_[k]);
        }
    }

    Matrix operator()(const Matrix& rho) const {
        Matrix out(rho.rows(), rho.cols());
        apply(rho, out);
        return out;
    }

    /// Crude bound on the generator scale: spectral radius of H plus total jump weight.
    double generator_scale() const {
        double scale = 0.0;
        if (h_.size() > 0) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h_ + h_.adjoint()),
                                                     Eigen::EigenvaluesOnly);
            scale = es.eigenvalues().cwiseAbs().maxCoeff();
        }
        for (std::size_t k = 0; k < jumps_.size(); ++k) scale += weights_[k] * jump_norms_[k];
        return scale;
    }

private:
    SpaceLayout layout_;
    Matrix h_;
    Sparse h_eff_;
    Sparse h_eff_adj_;
    std::vector<Sparse> jumps_;
    std::vector<Sparse> adjoint_jumps_;
    std::vector<double> weights_;
    std::vector<double> jump_norms_;
    mutable Matrix scratch_;
};

inline Matrix master_rhs(const Operator& h, std::span<const CollapseChannel> channels,
                         const DensityMatrix& rho) {
    require_same_layout(h.layout(), rho.layout(), "master_rhs");
    return MasterEquation(h, channels)(rho.matrix());
}

enum class RenormPolicy { off, trace_each_record };

struct EvolutionConfig {
    double dt = 1e-3;
    double t_final = 1.0;
    /// Record every `record_stride` steps (the final step is always recorded).
    std::size_t record_stride = 1;
    RenormPolicy renorm = RenormPolicy::off;
    bool keep_states = true;
    /// Upper bound on dt * generator scale.
    double max_step_scale = 0.05;

    /**
     * Step and stride so that `samples` equally spaced records span [0, t_final]
     * with a step no larger than `dt_max`.
     */
    static EvolutionConfig sampled(double t_final, std::size_t samples, double dt_max) {
        if (samples < 2) throw DomainError("need at least two samples");
        if (!(t_final > 0.0) || !(dt_max > 0.0)) throw DomainError("t_final and dt must be > 0");
        const double spacing = t_final / static_cast<double>(samples - 1);
        const auto stride = static_cast<std::size_t>(std::ceil(spacing / dt_max - 1e-9));
        EvolutionConfig c;
        c.t_final = t_final;
        c.record_stride = std::max<std::size_t>(stride, 1);
        c.dt = spacing / static_cast<double>(c.record_stride);
        return c;
    }

    /// Records only at 0 and t_final.
    static EvolutionConfig endpoint(double t_final, double dt_max) {
        auto c = sampled(t_final, 2, dt_max);
        return c;
    }

    std::size_t steps() const {
        return static_cast<std::size_t>(std::llround(std::ceil(t_final / dt - 1e-9)));
    }

    void validate() const {
        if (!(dt > 0.0)) throw DomainError("dt must be positive");
        if (!(t_final >= 0.0)) throw DomainError("t_final must be non-negative");
        if (record_stride < 1) throw DomainError("record_stride must be >= 1");
    }
};

struct RecordDiagnostics {
    double trace_error = 0.0;
    double hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
    double top_fock_population = 0.0;
};

/// Abort thresholds checked at every record.
inline constexpr double kAbortTraceError = 1e-6;
inline constexpr double kAbortMinEigenvalue = -1e-6;

struct Trajectory {
    SpaceLayout layout;
    std::vector<double> times;
    std::vector<Matrix> states;  // empty unless keep_states
    std::vector<RecordDiagnostics> diagnostics;
    Matrix final_state;
    RenormPolicy renorm = RenormPolicy::off;
    double dt = 0.0;

    RecordDiagnostics worst() const {
        RecordDiagnostics w;
        w.min_eigenvalue = diagnostics.empty() ? 0.0 : diagnostics.front().min_eigenvalue;
        for (const auto& d : diagnostics) {
            w.trace_error = std::max(w.trace_error, d.trace_error);
            w.hermiticity_error = std::max(w.hermiticity_error, d.hermiticity_error);
            w.min_eigenvalue = std::min(w.min_eigenvalue, d.min_eigenvalue);
            w.top_fock_population = std::max(w.top_fock_population, d.top_fock_population);
        }
        return w;
    }

    DensityMatrix state(std::size_t i) const { return DensityMatrix(states.at(i), layout); }
};

namespace detail {

/// Population of the highest Fock level of the resonator, 0 if there is none.
inline double top_fock_population(const Matrix& rho, const SpaceLayout& layout) {
    if (!layout.has(labels::tlr)) return 0.0;
    const std::size_t t = layout.slot(labels::tlr);
    const std::size_t top = layout.dims()[t] - 1;
    double pop = 0.0;
    for (std::size_t i = 0; i < layout.dimension(); ++i) {
        if (layout.levels(i)[t] == top) pop += rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    }
    return pop;
}

inline RecordDiagnostics record_diagnostics(const Matrix& rho, const SpaceLayout& layout,
                                            double t) {
    const auto d = diagnose(rho);
    RecordDiagnostics out{d.trace_error, d.hermiticity_error, d.min_eigenvalue,
                          top_fock_population(rho, layout)};
    if (out.trace_error > kAbortTraceError) {
        throw DiagnosticBreach("trace error " + std::to_string(out.trace_error), t);
    }
    if (out.min_eigenvalue < kAbortMinEigenvalue) {
        throw DiagnosticBreach("negative eigenvalue " + std::to_string(out.min_eigenvalue), t);
    }
    return out;
}

}  // namespace detail

inline Trajectory evolve_rk4(const DensityMatrix& rho0, const MasterEquation& eq,
                             const EvolutionConfig& config) {
    config.validate();
    require_same_layout(rho0.layout(), eq.layout(), "evolve_rk4");
    const double scale = eq.generator_scale();
    if (config.dt * scale > config.max_step_scale) {
        throw DomainError("step too large: dt * generator scale = " +
                          std::to_string(config.dt * scale) + " exceeds " +
                          std::to_string(config.max_step_scale));
    }

    Trajectory traj;
    traj.layout = rho0.layout();
    traj.renorm = config.renorm;
    traj.dt = config.dt;
    const std::size_t steps = config.steps();

    Matrix rho = rho0.matrix();
    const auto record = [&](std::size_t step) {
        const double t = static_cast<double>(step) * config.dt;
        if (config.renorm == RenormPolicy::trace_each_record) rho /= rho.trace();
        traj.diagnostics.push_back(detail::record_diagnostics(rho, traj.layout, t));
        traj.times.push_back(t);
        if (config.keep_states) traj.states.push_back(rho);
    };

    RungeKutta4<Matrix> rk;
    const auto rhs = [&eq](const Matrix& in, double, Matrix& out) { eq.apply(in, out); };
    record(0);
    for (std::size_t s = 1; s <= steps; ++s) {
        rk.step_inplace(rho, static_cast<double>(s - 1) * config.dt, config.dt, rhs);
        if (s % config.record_stride == 0 || s == steps) record(s);
    }
    traj.final_state = rho;
    return traj;
}

inline Trajectory evolve_rk4(const DensityMatrix& rho0, const Operator& h,
                             std::span<const CollapseChannel> channels,
                             const EvolutionConfig& config) {
    return evolve_rk4(rho0, MasterEquation(h, channels), config);
}

/// Kronecker product of raw matrices.
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// Column-stacking vec.
inline Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

inline Matrix unvec(const Vector& v, Eigen::Index d) {
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

inline constexpr std::size_t kMaxSuperoperatorDim = 64;

/// Superoperator L with vec(drho/dt) = L vec(rho), column stacking, so
/// vec(A X B) = (B^T (x) A) vec(X).
inline Matrix liouvillian(const Operator& h, std::span<const CollapseChannel> channels) {
    const std::size_t d = h.dimension();
    if (d > kMaxSuperoperatorDim) {
        throw DomainError("liouvillian: dimension " + std::to_string(d) + " exceeds " +
                          std::to_string(kMaxSuperoperatorDim));
    }
    const auto di = static_cast<Eigen::Index>(d);
    const Matrix id = Matrix::Identity(di, di);
    const Matrix& H = h.matrix();
    Matrix L = Complex(0.0, -1.0) * (kron(id, H) - kron(H.transpose(), id));
    for (const auto& ch : channels) {
        require_same_layout(h.layout(), ch.op.layout(), "liouvillian channel");
        const Matrix& A = ch.op.matrix();
        const Matrix ada = A.adjoint() * A;
        L += ch.prefactor *
             (2.0 * kron(A.conjugate(), A) - kron(id, ada) - kron(ada.transpose(), id));
    }
    return L;
}

enum class ExactMethod { eigendecomposition, pade };

/**
 * exp(L t) applied to vec(rho0). Diagonalizes L once; if the eigenvector
 * basis is ill-conditioned (defective or nearly defective generator) it
 * switches to scaling-and-squaring Pade per call.
 */
class ExactPropagator {
public:
    ExactPropagator(const Operator& h, std::span<const CollapseChannel> channels,
                    double max_condition = 1e8)
        : layout_(h.layout()), L_(liouvillian(h, channels)) {
        Eigen::ComplexEigenSolver<Matrix> es(L_);
        if (es.info() == Eigen::Success) {
            const Matrix& V = es.eigenvectors();
            Eigen::BDCSVD<Matrix> svd(V);
            const auto& sv = svd.singularValues();
            const double cond = sv(0) / sv(sv.size() - 1);
            if (std::isfinite(cond) && cond < max_condition) {
                Eigen::PartialPivLU<Matrix> lu(V);
                Matrix vinv = lu.inverse();
                const Matrix recon = V * es.eigenvalues().asDiagonal() * vinv;
                const double scale = std::max(1.0, L_.cwiseAbs().maxCoeff());
                if ((recon - L_).cwiseAbs().maxCoeff() <= 1e-10 * scale) {
                    eigvecs_ = V;
                    eigvals_ = es.eigenvalues();
                    inv_eigvecs_ = std::move(vinv);
                    method_ = ExactMethod::eigendecomposition;
                }
            }
        }
    }

    ExactMethod method() const { return method_; }
    const Matrix& generator() const { return L_; }

    DensityMatrix apply(const DensityMatrix& rho0, double t) const {
        require_same_layout(layout_, rho0.layout(), "evolve_exact");
        const auto d = rho0.matrix().rows();
        Vector v = vec(rho0.matrix());
        Vector out;
        if (method_ == ExactMethod::eigendecomposition) {
            Vector coeff = inv_eigvecs_ * v;
            for (Eigen::Index k = 0; k < coeff.size(); ++k) coeff(k) *= std::exp(eigvals_(k) * t);
            out = eigvecs_ * coeff;
        } else {
            const Matrix lt = L_ * Complex(t, 0.0);
            const Matrix prop = lt.exp();
            out = prop * v;
        }
        return DensityMatrix(unvec(out, d), layout_);
    }

private:
    SpaceLayout layout_;
    Matrix L_;
    Matrix eigvecs_;
    Matrix inv_eigvecs_;
    Vector eigvals_;
    ExactMethod method_ = ExactMethod::pade;
};

inline DensityMatrix evolve_exact(const DensityMatrix& rho0, const Operator& h,
                                  std::span<const CollapseChannel> channels, double t) {
    return ExactPropagator(h, channels).apply(rho0, t);
}

}  // namespace hybridmem
