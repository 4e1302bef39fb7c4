#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "asgm/dynamics.hpp"
#include "asgm/field.hpp"
#include "asgm/integrator.hpp"
#include "asgm/score.hpp"

namespace asgm {

struct CorrectorConfig {
    int steps_per_iteration = 1;  // ULA iterations per corrector invocation
    double snr = 0.16;            // step-size rule: delta = 2 (snr |z| / |s|)^2
};

/// Time-reversed process of a forward instance under a score model.
/// Backward time t corresponds to forward time T - t.
struct BackwardInstance {
    std::shared_ptr<const Sde> forward;
    std::shared_ptr<const ScoreModel> score;
    StepperConfig cfg;

    double terminal_time() const { return forward->terminal_time(); }
};

/// Backward drift at backward time t:
///   b-(t, y) = tr D Sigma(T-t, y) + Sigma(T-t, y) s(T-t, y) - b(T-t, y)
/// with Sigma the diagonal squared diffusion. For additive noise the trace
/// term is exactly zero (no finite differencing runs).
Field backward_drift(const BackwardInstance& bi, double t, const Field& y);

/// One tamed Euler-Maruyama step of the backward SDE from backward time t
/// to t + cfg.dt, with diffusion sigma-(t, y) = sigma(T-t, y).
Field predictor_step(const BackwardInstance& bi, double t, const Field& y, const Field& dW);

/// steps_per_iteration ULA updates targeting the forward marginal at
/// forward time T - t:
///   y <- y + (delta/2) s(T-t, y) + sqrt(delta) z
/// with delta = 2 (snr |z| / |s|)^2 recomputed per update from the current
/// batch norms and clamped to [1e-8, 1]. A zero score norm skips the update
/// (logged). The single-sample overload is the batch rule with a batch of
/// one.
Field corrector_step(const BackwardInstance& bi, double t, const Field& y, RngStream& rng,
                     const CorrectorConfig& cc);

/// Batch form: one shared delta per update, pooled over all samples; noise
/// and score norms are reduced in index order, so results do not depend on
/// the thread count.
void corrector_step_batch(const BackwardInstance& bi, double t, std::vector<Field>& batch,
                          std::vector<RngStream>& rngs, const CorrectorConfig& cc,
                          int threads = 0);

/// Generative sampling: draw n prior samples and run the backward
/// predictor-corrector sweep to forward time 0. The backward grid holds
/// round(T/dt) points {0, dt, ..., T-dt}; the predictor crosses the
/// interior transitions (199 score evaluations on the default 200-point
/// grid) and one final corrector runs at forward time 0. Sample i uses
/// stream (seed, stream_offset + i); outputs are independent of the thread
/// count.
std::vector<Field> sample(const BackwardInstance& bi, const GaussianLaw& prior, int n,
                          std::uint64_t seed, std::uint64_t stream_offset,
                          const CorrectorConfig& cc, int threads = 0);

/// Stroke-guided generation: corrupt the guide with the forward process up
/// to t0 (fresh noise per output), then reverse from forward time t0 down
/// to 0. t0 must be a positive near-multiple of cfg.dt, at most T.
std::vector<Field> sdedit(const BackwardInstance& bi, const Field& guide, double t0, int n,
                          std::uint64_t seed, std::uint64_t stream_offset,
                          const CorrectorConfig& cc, int threads = 0);

}  // namespace asgm
