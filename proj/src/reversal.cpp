#include "asgm/reversal.hpp"

#include <cmath>
#include <string>

#include "asgm/errors.hpp"
#include "asgm/log.hpp"
#include "asgm/parallel.hpp"

namespace asgm {

namespace {

double field_norm(const Field& f) {
    double s = 0.0;
    for (double v : f.values()) s += v * v;
    return std::sqrt(s);
}

// Sde adapter so the backward process reuses the tamed stepper.
class BackwardSde : public Sde {
public:
    explicit BackwardSde(const BackwardInstance& bi) : bi_(bi) {}

    Field drift(double t, const Field& y) const override { return backward_drift(bi_, t, y); }

    Field apply_noise(double t, const Field& y, const Field& eta) const override {
        double tau = bi_.terminal_time() - t;
        return bi_.forward->apply_noise(tau, y, eta);
    }

    Field noise_covariance_diagonal(double t, const Field& y) const override {
        return bi_.forward->noise_covariance_diagonal(bi_.terminal_time() - t, y);
    }

    double terminal_time() const override { return bi_.terminal_time(); }

private:
    const BackwardInstance& bi_;
};

long near_integer_steps(double span, double dt, const char* what) {
    double ratio = span / dt;
    long n = std::lround(ratio);
    if (n < 0 || std::abs(ratio - static_cast<double>(n)) > 1e-6 * std::max(1.0, ratio)) {
        throw ConfigError(std::string(what) + " must be a multiple of dt");
    }
    return n;
}

// Forward-corrupt x0 up to m steps of size dt.
Field corrupt_forward(const Sde& forward, const Field& x0, long m, double dt,
                      const StepperConfig& cfg, RngStream& rng) {
    Field x = x0;
    StepperConfig step_cfg = cfg;
    step_cfg.dt = dt;
    for (long k = 0; k < m; ++k) {
        Field dW = brownian_increment(rng, x, dt);
        x = tamed_em_step(forward, static_cast<double>(k) * dt, x, dW, step_cfg);
    }
    return x;
}

// Shared backward sweep over a batch, from backward time T - span to the
// final corrector at forward time 0. Batch entries enter at forward time
// `span`; each keeps its own stream, the corrector shares one delta per
// update across the batch.
void backward_sweep_batch(const BackwardInstance& bi, std::vector<Field>& batch,
                          std::vector<RngStream>& rngs, double span, const CorrectorConfig& cc,
                          int threads) {
    const double T = bi.terminal_time();
    const double dt = bi.cfg.dt;
    const long m = near_integer_steps(span, dt, "backward horizon");
    const double t_start = T - span;
    const long n = static_cast<long>(batch.size());
    // Grid points t_j = t_start + j dt, j = 0..m-1; the interval into
    // backward time T (forward 0) is covered by the final corrector only.
    for (long j = 0; j + 1 < m; ++j) {
        double t = t_start + static_cast<double>(j) * dt;
        parallel_for(n, threads, [&](long i) {
            auto idx = static_cast<std::size_t>(i);
            Field dW = brownian_increment(rngs[idx], batch[idx], dt);
            batch[idx] = predictor_step(bi, t, batch[idx], dW);
        });
        corrector_step_batch(bi, t + dt, batch, rngs, cc, threads);
    }
    // final corrector at forward time 0
    corrector_step_batch(bi, T, batch, rngs, cc, threads);
}

}  // namespace

Field backward_drift(const BackwardInstance& bi, double t, const Field& y) {
    const double T = bi.terminal_time();
    if (t < 0.0 || t > T) throw TimeRangeError("backward time outside [0, T]");
    const double tau = T - t;
    Field out = bi.forward->drift(tau, y);
    for (double& v : out.values()) v = -v;
    Field sigma2 = bi.forward->noise_covariance_diagonal(tau, y);
    if (sigma2.max_abs() > 0.0) {
        Field score = bi.score->score(tau, y);
        if (!score.same_shape(y)) throw ShapeMismatchError("score output shape mismatch");
        Field trace = bi.forward->drift_divergence_term(tau, y);
        auto ov = out.values();
        auto sv = score.values();
        auto cv = sigma2.values();
        auto tv = trace.values();
        for (std::size_t k = 0; k < ov.size(); ++k) {
            ov[k] += tv[k] + cv[k] * sv[k];
        }
    }
    return out;
}

Field predictor_step(const BackwardInstance& bi, double t, const Field& y, const Field& dW) {
    BackwardSde backward(bi);
    return tamed_em_step(backward, t, y, dW, bi.cfg);
}

void corrector_step_batch(const BackwardInstance& bi, double t, std::vector<Field>& batch,
                          std::vector<RngStream>& rngs, const CorrectorConfig& cc, int threads) {
    if (cc.steps_per_iteration < 0) throw ConfigError("corrector steps must be >= 0");
    if (!(cc.snr > 0.0)) throw ConfigError("corrector snr must be positive");
    if (batch.size() != rngs.size()) throw ShapeMismatchError("one stream per batch entry");
    if (batch.empty()) return;
    const double tau = bi.terminal_time() - t;
    const long n = static_cast<long>(batch.size());
    std::vector<Field> noise(batch.size());
    std::vector<Field> score(batch.size());
    for (int step = 0; step < cc.steps_per_iteration; ++step) {
        parallel_for(n, threads, [&](long i) {
            auto idx = static_cast<std::size_t>(i);
            noise[idx] = standard_normal_field(rngs[idx], batch[idx].channels(),
                                               batch[idx].height(), batch[idx].width());
            score[idx] = bi.score->score(tau, batch[idx]);
        });
        // pooled norms, reduced in index order
        double noise_sq = 0.0, score_sq = 0.0;
        for (std::size_t idx = 0; idx < batch.size(); ++idx) {
            double ns = field_norm(noise[idx]);
            double ss = field_norm(score[idx]);
            noise_sq += ns * ns;
            score_sq += ss * ss;
        }
        if (score_sq == 0.0) {
            log_info("corrector skipped at forward time " + std::to_string(tau) +
                     ": zero score norm");
            continue;
        }
        double ratio_sq = cc.snr * cc.snr * noise_sq / score_sq;
        double delta = std::clamp(2.0 * ratio_sq, 1e-8, 1.0);
        double root = std::sqrt(delta);
        parallel_for(n, threads, [&](long i) {
            auto idx = static_cast<std::size_t>(i);
            auto ov = batch[idx].values();
            auto sv = score[idx].values();
            auto zv = noise[idx].values();
            for (std::size_t k = 0; k < ov.size(); ++k) {
                ov[k] += 0.5 * delta * sv[k] + root * zv[k];
            }
        });
    }
}

Field corrector_step(const BackwardInstance& bi, double t, const Field& y, RngStream& rng,
                     const CorrectorConfig& cc) {
    std::vector<Field> batch{y};
    std::vector<RngStream> rngs{rng};
    corrector_step_batch(bi, t, batch, rngs, cc, 1);
    rng = rngs.front();  // hand the advanced stream back
    return batch.front();
}

std::vector<Field> sample(const BackwardInstance& bi, const GaussianLaw& prior, int n,
                          std::uint64_t seed, std::uint64_t stream_offset,
                          const CorrectorConfig& cc, int threads) {
    if (n < 0) throw ConfigError("sample count must be >= 0");
    std::vector<Field> out(static_cast<std::size_t>(n));
    std::vector<RngStream> rngs;
    rngs.reserve(out.size());
    for (int i = 0; i < n; ++i) {
        rngs.emplace_back(seed, stream_offset + static_cast<std::uint64_t>(i));
    }
    parallel_for(n, threads, [&](long i) {
        auto idx = static_cast<std::size_t>(i);
        out[idx] = sample_from_law(prior, rngs[idx]);
    });
    backward_sweep_batch(bi, out, rngs, bi.terminal_time(), cc, threads);
    return out;
}

std::vector<Field> sdedit(const BackwardInstance& bi, const Field& guide, double t0, int n,
                          std::uint64_t seed, std::uint64_t stream_offset,
                          const CorrectorConfig& cc, int threads) {
    const double T = bi.terminal_time();
    if (!(t0 > 0.0) || t0 > T) {
        throw ConfigError("sdedit horizon t0 must be in (0, T]");
    }
    const long m = near_integer_steps(t0, bi.cfg.dt, "sdedit horizon t0");
    std::vector<Field> out(static_cast<std::size_t>(n));
    std::vector<RngStream> rngs;
    rngs.reserve(out.size());
    for (int i = 0; i < n; ++i) {
        rngs.emplace_back(seed, stream_offset + static_cast<std::uint64_t>(i));
    }
    parallel_for(n, threads, [&](long i) {
        auto idx = static_cast<std::size_t>(i);
        out[idx] = corrupt_forward(*bi.forward, guide, m, bi.cfg.dt, bi.cfg, rngs[idx]);
    });
    backward_sweep_batch(bi, out, rngs, t0, cc, threads);
    return out;
}

}  // namespace asgm
