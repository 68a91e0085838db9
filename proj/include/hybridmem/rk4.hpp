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

namespace hybridmem {

/**
 * Classical fixed-step fourth-order Runge-Kutta for autonomous or
 * time-dependent systems dy/dt = f(y, t).
 *
 * State must support `State + Scalar * State`. The buffered variant avoids
 * per-step allocations for Eigen matrices and calls `f(y, t, out)`.
 */
template <class State>
class RungeKutta4 {
public:
    template <class Rhs>
    State step(const State& y, double t, double dt, Rhs&& f) const {
        const State k1 = f(y, t);
        const State k2 = f(y + (0.5 * dt) * k1, t + 0.5 * dt);
        const State k3 = f(y + (0.5 * dt) * k2, t + 0.5 * dt);
        const State k4 = f(y + dt * k3, t + dt);
        return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    /// In-place step using caller-owned scratch; `f(in, t, out)` writes dy/dt into out.
    template <class Rhs>
    void step_inplace(State& y, double t, double dt, Rhs&& f) {
        f(y, t, k1_);
        tmp_ = y + (0.5 * dt) * k1_;
        f(tmp_, t + 0.5 * dt, k2_);
        tmp_ = y + (0.5 * dt) * k2_;
        f(tmp_, t + 0.5 * dt, k3_);
        tmp_ = y + dt * k3_;
        f(tmp_, t + dt, k4_);
        y += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }

private:
    State k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace hybridmem
