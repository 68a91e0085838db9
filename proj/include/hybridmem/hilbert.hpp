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

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hybridmem/errors.hpp"

namespace hybridmem {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Ordered tensor-product structure. Subsystem order is fixed project-wide as
/// (cbjj, tlr, nve1, ..., nveN); spaces without a resonator drop the tlr slot.
class SpaceLayout {
public:
    SpaceLayout() = default;

    SpaceLayout(std::vector<std::size_t> dims, std::vector<std::string> labels)
        : dims_(std::move(dims)), labels_(std::move(labels)) {
        if (dims_.empty()) {
            throw DomainError("layout needs at least one subsystem");
        }
        if (dims_.size() != labels_.size()) {
            throw DomainError("layout dims and labels differ in length");
        }
        for (std::size_t i = 0; i < dims_.size(); ++i) {
            if (dims_[i] < 2) {
                throw DomainError("subsystem '" + labels_[i] + "' has dimension < 2");
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (labels_[i] == labels_[j]) {
                    throw DomainError("duplicate subsystem label '" + labels_[i] + "'");
                }
            }
        }
    }

    /// Single anonymous subsystem of dimension `dim`.
    static SpaceLayout single(std::size_t dim, std::string label = "q") {
        return SpaceLayout({dim}, {std::move(label)});
    }

    const std::vector<std::size_t>& dims() const { return dims_; }
    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t subsystems() const { return dims_.size(); }

    std::size_t dimension() const {
        return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1},
                               std::multiplies<>());
    }

    /// Slot index for a label, throws if absent.
    std::size_t slot(const std::string& label) const {
        auto it = std::find(labels_.begin(), labels_.end(), label);
        if (it == labels_.end()) {
            throw DomainError("no subsystem labelled '" + label + "'");
        }
        return static_cast<std::size_t>(it - labels_.begin());
    }

    bool has(const std::string& label) const {
        return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
    }

    /// Flat basis index of a product state, first subsystem most significant.
    std::size_t index(std::span<const std::size_t> levels) const {
        if (levels.size() != dims_.size()) {
            throw DomainError("basis label has wrong number of subsystems");
        }
        std::size_t idx = 0;
        for (std::size_t i = 0; i < dims_.size(); ++i) {
            if (levels[i] >= dims_[i]) {
                throw DomainError("level out of range on subsystem '" + labels_[i] + "'");
            }
            idx = idx * dims_[i] + levels[i];
        }
        return idx;
    }

    std::size_t index(std::initializer_list<std::size_t> levels) const {
        return index(std::span<const std::size_t>(levels.begin(), levels.size()));
    }

    /// Inverse of index().
    std::vector<std::size_t> levels(std::size_t idx) const {
        std::vector<std::size_t> out(dims_.size());
        for (std::size_t i = dims_.size(); i-- > 0;) {
            out[i] = idx % dims_[i];
            idx /= dims_[i];
        }
        return out;
    }

    /// Concatenation, this layout's subsystems first.
    SpaceLayout concat(const SpaceLayout& other) const {
        auto d = dims_;
        auto l = labels_;
        d.insert(d.end(), other.dims_.begin(), other.dims_.end());
        l.insert(l.end(), other.labels_.begin(), other.labels_.end());
        return SpaceLayout(std::move(d), std::move(l));
    }

    friend bool operator==(const SpaceLayout&, const SpaceLayout&) = default;

    std::string describe() const {
        std::string s = "(";
        for (std::size_t i = 0; i < dims_.size(); ++i) {
            if (i) s += ", ";
            s += labels_[i] + ":" + std::to_string(dims_[i]);
        }
        return s + ")";
    }

private:
    std::vector<std::size_t> dims_;
    std::vector<std::string> labels_;
};

inline void require_same_layout(const SpaceLayout& a, const SpaceLayout& b, const char* what) {
    if (!(a == b)) {
        throw DomainError(std::string(what) + ": layout mismatch " + a.describe() + " vs " +
                          b.describe());
    }
}

/// Max elementwise |A - A^dagger|.
inline double hermiticity_error(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

class Operator {
public:
    Operator() = default;

    Operator(Matrix matrix, SpaceLayout layout) : m_(std::move(matrix)), layout_(std::move(layout)) {
        const auto d = static_cast<Eigen::Index>(layout_.dimension());
        if (m_.rows() != d || m_.cols() != d) {
            throw DomainError("operator matrix is " + std::to_string(m_.rows()) + "x" +
                              std::to_string(m_.cols()) + ", layout " + layout_.describe() +
                              " needs " + std::to_string(d));
        }
    }

    /// Operator on a single anonymous subsystem.
    explicit Operator(Matrix matrix)
        : Operator(matrix, SpaceLayout::single(static_cast<std::size_t>(matrix.rows()))) {}

    static Operator identity(const SpaceLayout& layout) {
        const auto d = static_cast<Eigen::Index>(layout.dimension());
        return Operator(Matrix::Identity(d, d), layout);
    }

    static Operator zero(const SpaceLayout& layout) {
        const auto d = static_cast<Eigen::Index>(layout.dimension());
        return Operator(Matrix::Zero(d, d), layout);
    }

    const Matrix& matrix() const { return m_; }
    const SpaceLayout& layout() const { return layout_; }
    std::size_t dimension() const { return static_cast<std::size_t>(m_.rows()); }

    Complex operator()(std::size_t row, std::size_t col) const {
        return m_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }

    Operator adjoint() const { return Operator(m_.adjoint(), layout_); }
    double hermiticity_error() const { return hybridmem::hermiticity_error(m_); }
    bool is_hermitian(double tol = 1e-12) const { return hermiticity_error() <= tol; }

    Operator& operator+=(const Operator& o) {
        require_same_layout(layout_, o.layout_, "operator +");
        m_ += o.m_;
        return *this;
    }
    Operator& operator-=(const Operator& o) {
        require_same_layout(layout_, o.layout_, "operator -");
        m_ -= o.m_;
        return *this;
    }
    Operator& operator*=(Complex s) {
        m_ *= s;
        return *this;
    }

    friend Operator operator+(Operator a, const Operator& b) { return a += b; }
    friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
    friend Operator operator*(Complex s, Operator a) { return a *= s; }
    friend Operator operator*(Operator a, Complex s) { return a *= s; }
    friend Operator operator*(double s, Operator a) { return a *= Complex(s, 0.0); }
    friend Operator operator*(const Operator& a, const Operator& b) {
        require_same_layout(a.layout_, b.layout_, "operator *");
        return Operator(a.m_ * b.m_, a.layout_);
    }

    /// Commutator [a, b].
    friend Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

private:
    Matrix m_;
    SpaceLayout layout_;
};

/// [a, b]
Operator commutator(const Operator& a, const Operator& b);

/// Kronecker product; a's subsystems precede b's in the result layout.
inline Operator tensor(const Operator& a, const Operator& b) {
    const Matrix& A = a.matrix();
    const Matrix& B = b.matrix();
    Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
        }
    }
    // Anonymous single-subsystem operators get positional labels so the
    // concatenated layout stays unique.
    SpaceLayout la = a.layout();
    SpaceLayout lb = b.layout();
    bool clash = false;
    for (const auto& l : lb.labels()) clash = clash || la.has(l);
    if (clash) {
        std::vector<std::string> relabel;
        for (std::size_t i = 0; i < lb.subsystems(); ++i) {
            relabel.push_back(lb.labels()[i] + "_" + std::to_string(la.subsystems() + i));
        }
        lb = SpaceLayout(lb.dims(), std::move(relabel));
    }
    return Operator(std::move(out), la.concat(lb));
}

/// I (x) ... (x) op (x) ... (x) I with op in `slot`.
inline Operator embed(const Matrix& op, std::size_t slot, const SpaceLayout& layout) {
    if (slot >= layout.subsystems()) {
        throw DomainError("embed: slot " + std::to_string(slot) + " outside layout " +
                          layout.describe());
    }
    const auto want = static_cast<Eigen::Index>(layout.dims()[slot]);
    if (op.rows() != want || op.cols() != want) {
        throw DomainError("embed: operator of dimension " + std::to_string(op.rows()) +
                          " does not fit slot " + std::to_string(slot) + " ('" +
                          layout.labels()[slot] + "', dimension " + std::to_string(want) + ")");
    }
    Eigen::Index left = 1;
    Eigen::Index right = 1;
    for (std::size_t i = 0; i < slot; ++i) left *= static_cast<Eigen::Index>(layout.dims()[i]);
    for (std::size_t i = slot + 1; i < layout.subsystems(); ++i) {
        right *= static_cast<Eigen::Index>(layout.dims()[i]);
    }
    const Eigen::Index d = left * want * right;
    Matrix out = Matrix::Zero(d, d);
    // Block structure: out[(l, r, c)] = op[r, c] delta_l delta_rr.
    for (Eigen::Index l = 0; l < left; ++l) {
        for (Eigen::Index r = 0; r < want; ++r) {
            for (Eigen::Index c = 0; c < want; ++c) {
                const Complex v = op(r, c);
                if (v == Complex(0.0, 0.0)) continue;
                const Eigen::Index row0 = (l * want + r) * right;
                const Eigen::Index col0 = (l * want + c) * right;
                for (Eigen::Index k = 0; k < right; ++k) out(row0 + k, col0 + k) = v;
            }
        }
    }
    return Operator(std::move(out), layout);
}

inline Operator embed(const Operator& op, std::size_t slot, const SpaceLayout& layout) {
    return embed(op.matrix(), slot, layout);
}

inline Operator embed(const Operator& op, const std::string& label, const SpaceLayout& layout) {
    return embed(op.matrix(), layout.slot(label), layout);
}

/// Truncated bosonic lowering operator, <n-1|a|n> = sqrt(n).
inline Operator annihilation(std::size_t dim) {
    if (dim < 2) {
        throw DomainError("annihilation: Fock dimension must be >= 2, got " + std::to_string(dim));
    }
    const auto d = static_cast<Eigen::Index>(dim);
    Matrix a = Matrix::Zero(d, d);
    for (Eigen::Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return Operator(std::move(a), SpaceLayout::single(dim, "mode"));
}

inline Operator creation(std::size_t dim) { return annihilation(dim).adjoint(); }

inline Operator number_operator(std::size_t dim) {
    const Operator a = annihilation(dim);
    return a.adjoint() * a;
}

/// Two-level operators. sigma_z = |1><1| - |0><0| (excited state is |1>).
struct QubitOps {
    Operator sigma_z;
    Operator sigma_plus;
    Operator sigma_minus;
    Operator proj0;
    Operator proj1;
};

inline QubitOps qubit_ops() {
    const auto layout = SpaceLayout::single(2, "qubit");
    Matrix sz = Matrix::Zero(2, 2);
    sz(0, 0) = -1.0;
    sz(1, 1) = 1.0;
    Matrix sp = Matrix::Zero(2, 2);
    sp(1, 0) = 1.0;
    Matrix p0 = Matrix::Zero(2, 2);
    p0(0, 0) = 1.0;
    Matrix p1 = Matrix::Zero(2, 2);
    p1(1, 1) = 1.0;
    return {Operator(sz, layout), Operator(sp, layout), Operator(Matrix(sp.adjoint()), layout),
            Operator(p0, layout), Operator(p1, layout)};
}

class Ket {
public:
    Ket() = default;

    /// Normalizes on construction; zero vectors are rejected.
    Ket(Vector amplitudes, SpaceLayout layout)
        : v_(std::move(amplitudes)), layout_(std::move(layout)) {
        if (static_cast<std::size_t>(v_.size()) != layout_.dimension()) {
            throw DomainError("ket size " + std::to_string(v_.size()) + " does not match layout " +
                              layout_.describe());
        }
        const double n = v_.norm();
        if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("ket has zero or non-finite norm");
        v_ /= n;
    }

    /// Computational basis state |levels>.
    static Ket basis(const SpaceLayout& layout, std::initializer_list<std::size_t> levels) {
        return basis(layout, std::span<const std::size_t>(levels.begin(), levels.size()));
    }

    static Ket basis(const SpaceLayout& layout, std::span<const std::size_t> levels) {
        Vector v = Vector::Zero(static_cast<Eigen::Index>(layout.dimension()));
        v(static_cast<Eigen::Index>(layout.index(levels))) = 1.0;
        return Ket(std::move(v), layout);
    }

    const Vector& amplitudes() const { return v_; }
    const SpaceLayout& layout() const { return layout_; }
    Complex operator[](std::size_t i) const { return v_(static_cast<Eigen::Index>(i)); }

    Ket tensor(const Ket& other) const {
        Vector out(v_.size() * other.v_.size());
        for (Eigen::Index i = 0; i < v_.size(); ++i) {
            out.segment(i * other.v_.size(), other.v_.size()) = v_(i) * other.v_;
        }
        return Ket(std::move(out), layout_.concat(other.layout_));
    }

private:
    Vector v_;
    SpaceLayout layout_;
};

/// Tolerances asserted on every density matrix handed out by this library.
struct DensityTolerance {
    double hermiticity = 1e-10;
    double trace = 1e-9;
    double min_eigenvalue = -1e-8;
};

struct DensityDiagnostics {
    double trace_error = 0.0;
    double hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
};

inline double min_eigenvalue_hermitian(const Matrix& m) {
    const Matrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline DensityDiagnostics diagnose(const Matrix& rho) {
    return {std::abs(rho.trace() - Complex(1.0, 0.0)), hermiticity_error(rho),
            min_eigenvalue_hermitian(rho)};
}

class DensityMatrix {
public:
    DensityMatrix() = default;

    /// Validates the density-matrix invariants; positivity is checked, never repaired.
    DensityMatrix(Matrix rho, SpaceLayout layout, DensityTolerance tol = {})
        : m_(std::move(rho)), layout_(std::move(layout)) {
        const auto d = static_cast<Eigen::Index>(layout_.dimension());
        if (m_.rows() != d || m_.cols() != d) {
            throw DomainError("density matrix shape does not match layout " + layout_.describe());
        }
        const auto diag = diagnose(m_);
        if (diag.hermiticity_error > tol.hermiticity) {
            throw DomainError("density matrix not Hermitian (error " +
                              std::to_string(diag.hermiticity_error) + ")");
        }
        if (diag.trace_error > tol.trace) {
            throw DomainError("density matrix trace deviates from 1 by " +
                              std::to_string(diag.trace_error));
        }
        if (diag.min_eigenvalue < tol.min_eigenvalue) {
            throw DomainError("density matrix has eigenvalue " +
                              std::to_string(diag.min_eigenvalue));
        }
    }

    static DensityMatrix pure(const Ket& k) {
        return DensityMatrix(k.amplitudes() * k.amplitudes().adjoint(), k.layout());
    }

    static DensityMatrix maximally_mixed(const SpaceLayout& layout) {
        const auto d = static_cast<Eigen::Index>(layout.dimension());
        return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d), layout);
    }

    const Matrix& matrix() const { return m_; }
    const SpaceLayout& layout() const { return layout_; }
    DensityDiagnostics diagnostics() const { return diagnose(m_); }

    Complex operator()(std::size_t row, std::size_t col) const {
        return m_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }

    /// Real part of Tr(op rho).
    double expectation(const Operator& op) const {
        require_same_layout(layout_, op.layout(), "expectation");
        return (op.matrix() * m_).trace().real();
    }

    double population(std::size_t basis_index) const {
        const auto i = static_cast<Eigen::Index>(basis_index);
        return m_(i, i).real();
    }

private:
    Matrix m_;
    SpaceLayout layout_;
};

/// <target|rho|target>; the imaginary residue must vanish.
inline double fidelity(const Vector& target, const Matrix& rho) {
    const Complex f = target.dot(rho * target);
    if (std::abs(f.imag()) >= 1e-10) {
        throw NumericalError("fidelity has imaginary part " + std::to_string(f.imag()));
    }
    return f.real();
}

inline double fidelity(const Ket& target, const DensityMatrix& rho) {
    require_same_layout(target.layout(), rho.layout(), "fidelity");
    return fidelity(target.amplitudes(), rho.matrix());
}

struct Projection {
    DensityMatrix state;
    double probability;
};

inline constexpr double kDefaultBranchThreshold = 1e-12;

/// Ideal projective measurement outcome: (P rho P / p, p) with p = Tr(P rho P).
inline Projection project(const DensityMatrix& rho, const Operator& projector,
                          double threshold = kDefaultBranchThreshold) {
    require_same_layout(rho.layout(), projector.layout(), "project");
    const Matrix& P = projector.matrix();
    if (hermiticity_error(P) > 1e-10 || (P * P - P).cwiseAbs().maxCoeff() > 1e-10) {
        throw DomainError("project: operator is not an orthogonal projector");
    }
    Matrix branch = P * rho.matrix() * P;
    const double p = branch.trace().real();
    if (!(p > threshold)) {
        throw MeasurementError("measurement branch has negligible weight (p = " +
                               std::to_string(p) + ")");
    }
    branch /= p;
    return {DensityMatrix(std::move(branch), rho.layout()), p};
}

}  // namespace hybridmem
