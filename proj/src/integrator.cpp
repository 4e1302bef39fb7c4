#include "asgm/integrator.hpp"

#include <cmath>
#include <string>

#include "asgm/errors.hpp"

namespace asgm {

namespace {

constexpr double kDivergenceGuard = 1e6;

double channel_norm(const Field& f, int c) {
    double s = 0.0;
    for (double v : f.channel(c)) s += v * v;
    return std::sqrt(s);
}

void check_state(const Field& x, double t) {
    double m = x.max_abs();
    if (!std::isfinite(m) || m > kDivergenceGuard || !x.all_finite()) {
        throw DivergenceError(t, m);
    }
}

long resolve_step_count(double T, double dt) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    double ratio = T / dt;
    long n = std::lround(ratio);
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-6 * std::max(1.0, ratio)) {
        throw ConfigError("T/dt = " + std::to_string(ratio) +
                          " is not close to an integer; the uniform grid must cover [0, T]");
    }
    return n;
}

}  // namespace

Field tamed_em_step(const Sde& sde, double t, const Field& x, const Field& dW,
                    const StepperConfig& cfg) {
    if (!x.same_shape(dW)) throw ShapeMismatchError("state and increment shapes differ");
    Field b = sde.drift(t, x);
    Field noise = sde.apply_noise(t, x, dW);
    Field out = x;
    for (int c = 0; c < x.channels(); ++c) {
        double bn = channel_norm(b, c);
        double factor = cfg.dt / (1.0 + cfg.dt * std::pow(bn, cfg.gamma));
        auto xo = out.channel(c);
        auto bc = b.channel(c);
        auto nc = noise.channel(c);
        for (std::size_t k = 0; k < xo.size(); ++k) {
            xo[k] += factor * bc[k] + nc[k];
        }
    }
    check_state(out, t);
    return out;
}

Trajectory simulate_forward(const Sde& sde, const Field& x0, const StepperConfig& cfg,
                            RngStream& rng) {
    const double T = sde.terminal_time();
    const long n_steps = resolve_step_count(T, cfg.dt);
    const double dt = T / static_cast<double>(n_steps);
    StepperConfig step_cfg = cfg;
    step_cfg.dt = dt;

    Trajectory traj;
    traj.seed = rng.seed();
    traj.stream_id = rng.stream_id();
    traj.times.push_back(0.0);
    traj.states.push_back(x0);

    Field x = x0;
    for (long k = 0; k < n_steps; ++k) {
        double t = static_cast<double>(k) * dt;
        Field dW = brownian_increment(rng, x, dt);
        x = tamed_em_step(sde, t, x, dW, step_cfg);
        bool record = (cfg.record_every > 0 && (k + 1) % cfg.record_every == 0) ||
                      (k + 1 == n_steps);
        if (record) {
            traj.times.push_back(static_cast<double>(k + 1) * dt);
            traj.states.push_back(x);
        }
    }
    return traj;
}

Field deterministic_flow(const Sde& sde, const Field& x0, double t, const StepperConfig& cfg) {
    if (t < 0.0 || t > sde.terminal_time()) {
        throw TimeRangeError("flow time " + std::to_string(t) + " outside [0, T]");
    }
    if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
    Field x = x0;
    double s = 0.0;
    StepperConfig step_cfg = cfg;
    while (s < t - 1e-12) {
        double dt = std::min(cfg.dt, t - s);
        step_cfg.dt = dt;
        Field b = sde.drift(s, x);
        for (int c = 0; c < x.channels(); ++c) {
            double bn = channel_norm(b, c);
            double factor = dt / (1.0 + dt * std::pow(bn, step_cfg.gamma));
            auto xc = x.channel(c);
            auto bc = b.channel(c);
            for (std::size_t k = 0; k < xc.size(); ++k) xc[k] += factor * bc[k];
        }
        check_state(x, s);
        s += dt;
    }
    return x;
}

}  // namespace asgm
