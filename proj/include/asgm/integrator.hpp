#pragma once

#include <cstdint>
#include <vector>

#include "asgm/dynamics.hpp"
#include "asgm/field.hpp"
#include "asgm/rng.hpp"

namespace asgm {

struct StepperConfig {
    double dt = 1e-2;
    double gamma = 1.0;     // taming exponent
    int record_every = 0;   // 0: record only the initial and final states
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Field> states;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    const Field& final_state() const { return states.back(); }
};

/// One drift-tamed Euler-Maruyama step:
///   x' = x + dt * b / (1 + dt * |b|^gamma) + sigma(t, x) dW
/// with |b| the per-channel Euclidean norm of the drift field. Throws
/// DivergenceError if the new state is non-finite or its max-abs exceeds
/// 1e6.
Field tamed_em_step(const Sde& sde, double t, const Field& x, const Field& dW,
                    const StepperConfig& cfg);

/// Simulate on the uniform grid {0, dt, ..., T}; T/dt must be within 1e-6 of
/// an integer. States are recorded at step 0, every record_every steps, and
/// at the final step.
Trajectory simulate_forward(const Sde& sde, const Field& x0, const StepperConfig& cfg,
                            RngStream& rng);

/// Drift-only flow of x0 up to time t (noise suppressed, taming active).
/// Steps with cfg.dt plus one shorter final step when t is not a multiple.
Field deterministic_flow(const Sde& sde, const Field& x0, double t, const StepperConfig& cfg);

}  // namespace asgm
