#include "asgm/score.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "asgm/errors.hpp"
#include "asgm/quadrature.hpp"

namespace asgm {

namespace {

constexpr int kQuadraturePanels = 1000;
constexpr double kCenteredModeDecay = 1e-6;

double variance_at(const GaussianLaw& law, std::size_t index) {
    if (law.mode_variances.size() == 1) return law.mode_variances[0];
    return law.mode_variances[index];
}

void check_law_variances(const GaussianLaw& law) {
    if (law.mode_variances.empty()) throw DegenerateVarianceError("law has no variances");
    for (double v : law.mode_variances) {
        if (!(v > 0.0)) throw DegenerateVarianceError("law has a nonpositive mode variance");
    }
}

void check_white_sizes(const GaussianLaw& law) {
    if (law.mode_variances.size() != 1 &&
        law.mode_variances.size() != law.mean.pixels_per_channel()) {
        throw ShapeMismatchError("white law variance list must have 1 or npixels entries");
    }
}

// v_k(t) for every mode: var0 e^{2 A(t) mu_k} + Simpson over
// e^{2 (A(t)-A(s)) mu_k} phi2(s)^2 with shared A(s) nodes.
std::vector<double> mode_variances_at(const Schedule& schedule, const Eigen::VectorXd& mu,
                                      double t, double var0) {
    const int n = kQuadraturePanels;
    std::vector<double> v(static_cast<std::size_t>(mu.size()), 0.0);
    if (t == 0.0) {
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = var0;
        return v;
    }
    auto phi1 = [&](double s) { return eval_transition(schedule.phi1, s, schedule.terminal_time); };
    std::vector<double> A = cumulative_integral(phi1, 0.0, t, n);
    std::vector<double> f(n + 1);
    const double h = t / n;
    for (int j = 0; j <= n; ++j) {
        double p2 = eval_transition(schedule.phi2, j * h, schedule.terminal_time);
        f[j] = p2 * p2;
    }
    const double At = A[n];
    for (Eigen::Index k = 0; k < mu.size(); ++k) {
        double m = mu(k);
        double acc = f[0] * std::exp(2.0 * (At - A[0]) * m) + f[n];
        for (int j = 1; j < n; ++j) {
            acc += (j % 2 == 1 ? 4.0 : 2.0) * f[j] * std::exp(2.0 * (At - A[j]) * m);
        }
        v[static_cast<std::size_t>(k)] = var0 * std::exp(2.0 * At * m) + acc * h / 3.0;
    }
    return v;
}

GaussianLaw white_law(const Schedule& schedule, const Field& x0, double t, double var0) {
    GaussianLaw law;
    law.mean = x0;
    law.op = nullptr;
    auto phi2sq = [&](double s) {
        double v = eval_transition(schedule.phi2, s, schedule.terminal_time);
        return v * v;
    };
    double w = t == 0.0 ? 0.0 : simpson(phi2sq, 0.0, t, kQuadraturePanels);
    law.mode_variances.assign(1, var0 + w);
    return law;
}

}  // namespace

Field analytic_score(const GaussianLaw& law, const Field& x) {
    if (!x.same_shape(law.mean)) throw ShapeMismatchError("law and state shapes differ");
    check_law_variances(law);
    Field s = Field::zeros_like(x);
    if (law.op == nullptr) {
        check_white_sizes(law);
        auto xv = x.values();
        auto mv = law.mean.values();
        auto sv = s.values();
        std::size_t npix = x.pixels_per_channel();
        for (std::size_t k = 0; k < xv.size(); ++k) {
            sv[k] = (mv[k] - xv[k]) / variance_at(law, k % npix);
        }
        return s;
    }
    for (int c = 0; c < x.channels(); ++c) {
        Eigen::VectorXd coeffs = law.op->coefficients(x, c) * -1.0;
        coeffs += law.op->coefficients(law.mean, c);
        for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
            coeffs(k) /= law.mode_variances[static_cast<std::size_t>(k)];
        }
        law.op->synthesize(coeffs, s, c);
    }
    return s;
}

double log_density(const GaussianLaw& law, const Field& x) {
    if (!x.same_shape(law.mean)) throw ShapeMismatchError("law and state shapes differ");
    check_law_variances(law);
    const double log2pi = std::log(2.0 * std::numbers::pi);
    double acc = 0.0;
    if (law.op == nullptr) {
        check_white_sizes(law);
        auto xv = x.values();
        auto mv = law.mean.values();
        std::size_t npix = x.pixels_per_channel();
        for (std::size_t k = 0; k < xv.size(); ++k) {
            double v = variance_at(law, k % npix);
            double r = xv[k] - mv[k];
            acc += -0.5 * (r * r / v + std::log(v) + log2pi);
        }
        return acc;
    }
    for (int c = 0; c < x.channels(); ++c) {
        Eigen::VectorXd coeffs = law.op->coefficients(x, c) - law.op->coefficients(law.mean, c);
        for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
            double v = law.mode_variances[static_cast<std::size_t>(k)];
            acc += -0.5 * (coeffs(k) * coeffs(k) / v + std::log(v) + log2pi);
        }
    }
    return acc;
}

Field sample_from_law(const GaussianLaw& law, RngStream& rng) {
    Field x = law.mean;
    if (law.op == nullptr) {
        check_white_sizes(law);
        auto xv = x.values();
        std::size_t npix = x.pixels_per_channel();
        for (std::size_t k = 0; k < xv.size(); ++k) {
            double v = variance_at(law, k % npix);
            xv[k] += std::sqrt(std::max(v, 0.0)) * rng.normal();
        }
        return x;
    }
    const int n = law.op->modes();
    for (int c = 0; c < x.channels(); ++c) {
        Eigen::VectorXd noise(n);
        for (int k = 0; k < n; ++k) {
            noise(k) = std::sqrt(std::max(law.mode_variances[static_cast<std::size_t>(k)], 0.0)) *
                       rng.normal();
        }
        Field bump = Field::zeros_like(x);
        law.op->synthesize(noise, bump, c);
        auto xc = x.channel(c);
        auto bc = bump.channel(c);
        for (std::size_t k = 0; k < xc.size(); ++k) xc[k] += bc[k];
    }
    return x;
}

double drift_time_integral(const Schedule& schedule, double t) {
    if (t == 0.0) return 0.0;
    return simpson(
        [&](double s) { return eval_transition(schedule.phi1, s, schedule.terminal_time); }, 0.0,
        t, kQuadraturePanels);
}

double accumulated_noise_variance(const Schedule& schedule, double t) {
    if (t == 0.0) return 0.0;
    return simpson(
        [&](double s) {
            double v = eval_transition(schedule.phi2, s, schedule.terminal_time);
            return v * v;
        },
        0.0, t, kQuadraturePanels);
}

GaussianLaw linear_law(const SpdeInstance& instance, const Field& x0, double t,
                       double initial_variance) {
    if (instance.sde_class() != SdeClass::LinearAdditive) {
        throw ConfigError("linear_law requires a linear-additive instance, got " +
                          std::string(to_string(instance.sde_class())));
    }
    if (t < 0.0 || t > instance.terminal_time()) {
        throw TimeRangeError("law time outside [0, T]");
    }
    const Schedule& schedule = instance.schedule();
    if (schedule.phi1.is_zero()) {
        return white_law(schedule, x0, t, initial_variance);
    }
    if (x0.pixels_per_channel() > 4096) {
        throw ConfigError("grid too large for a dense eigendecomposition");
    }

    auto op = SpectralOperator::shared(x0.height(), x0.width());
    double At = drift_time_integral(schedule, t);

    GaussianLaw law;
    law.op = op;
    law.mean = op->flow(x0, At);
    law.mode_variances = mode_variances_at(schedule, op->eigenvalues(), t, initial_variance);
    return law;
}

GaussianLaw prior_law(const SpdeInstance& instance, int channels, int height, int width,
                      const std::vector<Field>& calibration, const PriorCalibrationConfig& cfg) {
    const double T = instance.terminal_time();
    Field mean0(channels, height, width, 0.0);
    for (const Field& f : calibration) {
        if (f.channels() != channels || f.height() != height || f.width() != width) {
            throw ShapeMismatchError("calibration images must share the requested shape");
        }
    }
    if (!calibration.empty()) {
        for (const Field& f : calibration) {
            auto mv = mean0.values();
            auto fv = f.values();
            for (std::size_t k = 0; k < mv.size(); ++k) mv[k] += fv[k];
        }
        for (double& v : mean0.values()) v /= static_cast<double>(calibration.size());
    }

    if (instance.sde_class() == SdeClass::LinearAdditive) {
        GaussianLaw law = linear_law(instance, mean0, T, 0.0);
        if (law.op != nullptr) {
            // center modes whose initial content has fully dissipated
            double At = drift_time_integral(instance.schedule(), T);
            Field centered = Field::zeros_like(mean0);
            for (int c = 0; c < channels; ++c) {
                Eigen::VectorXd coeffs = law.op->weighted_coefficients(law.mean, c);
                for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
                    if (std::exp(At * law.op->eigenvalues()(k)) < kCenteredModeDecay) {
                        coeffs(k) = 0.0;
                    }
                }
                law.op->synthesize_weighted(coeffs, centered, c);
            }
            law.mean = centered;
        }
        return law;
    }

    if (instance.sde_class() != SdeClass::QuasilinearAdditive) {
        throw UnsupportedError("prior calibration supports additive-noise instances only");
    }
    if (calibration.empty()) {
        throw ConfigError("the quasilinear prior requires a nonempty calibration set");
    }
    if (cfg.n_simulations < 256) {
        throw ConfigError("the quasilinear prior needs at least 256 forward simulations");
    }

    auto op = SpectralOperator::shared(height, width);
    const int n_modes = op->modes();
    Field mean(channels, height, width, 0.0);
    std::vector<Field> terminals;
    terminals.reserve(cfg.n_simulations);
    for (int s = 0; s < cfg.n_simulations; ++s) {
        const Field& x0 = calibration[static_cast<std::size_t>(s) % calibration.size()];
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(s));
        Trajectory traj = simulate_forward(instance, x0, cfg.stepper, rng);
        terminals.push_back(traj.final_state());
        auto mv = mean.values();
        auto tv = terminals.back().values();
        for (std::size_t k = 0; k < mv.size(); ++k) mv[k] += tv[k];
    }
    for (double& v : mean.values()) v /= static_cast<double>(cfg.n_simulations);

    std::vector<double> variances(static_cast<std::size_t>(n_modes), 0.0);
    long count = 0;
    for (const Field& x : terminals) {
        for (int c = 0; c < channels; ++c) {
            Eigen::VectorXd coeffs = op->coefficients(x, c) - op->coefficients(mean, c);
            for (int k = 0; k < n_modes; ++k) {
                variances[static_cast<std::size_t>(k)] += coeffs(k) * coeffs(k);
            }
        }
        ++count;
    }
    long denom = std::max<long>(1, count * channels - 1);
    for (double& v : variances) v /= static_cast<double>(denom);

    GaussianLaw law;
    law.mean = mean;
    law.op = op;
    law.mode_variances = std::move(variances);
    return law;
}

AnalyticGaussianScore::AnalyticGaussianScore(SpdeInstance instance, Field initial_mean,
                                             double initial_variance)
    : instance_(std::move(instance)),
      initial_mean_(std::move(initial_mean)),
      initial_variance_(initial_variance) {
    if (instance_.sde_class() != SdeClass::LinearAdditive) {
        throw ConfigError("analytic scores exist only for linear-additive instances");
    }
}

const GaussianLaw& AnalyticGaussianScore::law_at(double t) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(t);
    if (it != cache_.end()) return it->second;
    GaussianLaw law = linear_law(instance_, initial_mean_, t, initial_variance_);
    return cache_.emplace(t, std::move(law)).first->second;
}

Field AnalyticGaussianScore::score(double t, const Field& x) const {
    return analytic_score(law_at(t), x);
}

DsmTargetSampler::DsmTargetSampler(SpdeInstance instance, StepperConfig flow_config)
    : instance_(instance),
      drift_only_(instance.schedule(), true, false),
      flow_config_(flow_config),
      linear_(instance.sde_class() == SdeClass::LinearAdditive) {
    if (!instance_.schedule().lambda2.is_infinite()) {
        throw UnsupportedError(
            "score-matching targets require additive noise (lambda2 infinite)");
    }
}

double DsmTargetSampler::noise_variance(double t) const {
    return accumulated_noise_variance(instance_.schedule(), t);
}

namespace {

// x_t = mean + sqrt(w) z and target -z/sqrt(w) for a given noise draw.
DsmBatchTarget assemble_white_target(const Field& mean, const Field& z, double t, double w) {
    DsmBatchTarget out;
    out.t = t;
    out.weight = w;
    out.x_t = mean;
    out.target_score = Field::zeros_like(mean);
    double root = std::sqrt(w);
    auto xv = out.x_t.values();
    auto sv = out.target_score.values();
    auto zv = z.values();
    for (std::size_t k = 0; k < xv.size(); ++k) {
        xv[k] += root * zv[k];
        sv[k] = -zv[k] / root;
    }
    return out;
}

Field negated(const Field& f) {
    Field out = f;
    for (double& v : out.values()) v = -v;
    return out;
}

}  // namespace

DsmBatchTarget DsmTargetSampler::sample(const Field& x0, double t, RngStream& rng) const {
    DsmBatchTarget out;
    out.t = t;
    out.weight = noise_variance(t);
    if (linear_) {
        GaussianLaw law = linear_law(instance_, x0, t, 0.0);
        out.x_t = sample_from_law(law, rng);
        out.target_score = analytic_score(law, out.x_t);
        return out;
    }
    Field mean = deterministic_flow(drift_only_, x0, t, flow_config_);
    double w = out.weight;
    if (!(w > 0.0)) throw DegenerateVarianceError("zero accumulated noise variance at t=" +
                                                  std::to_string(t));
    Field z = standard_normal_field(rng, x0.channels(), x0.height(), x0.width());
    return assemble_white_target(mean, z, t, w);
}

std::pair<DsmBatchTarget, DsmBatchTarget> DsmTargetSampler::sample_antithetic(
    const Field& x0, double t, RngStream& rng) const {
    if (linear_) {
        GaussianLaw law = linear_law(instance_, x0, t, 0.0);
        Field plus = sample_from_law(law, rng);
        // mirror the draw about the mean
        Field minus = law.mean;
        auto pv = plus.values();
        auto mv = minus.values();
        auto lv = law.mean.values();
        for (std::size_t k = 0; k < pv.size(); ++k) mv[k] = 2.0 * lv[k] - pv[k];
        DsmBatchTarget a{t, plus, analytic_score(law, plus), noise_variance(t)};
        DsmBatchTarget b{t, minus, analytic_score(law, minus), noise_variance(t)};
        return {std::move(a), std::move(b)};
    }
    Field mean = deterministic_flow(drift_only_, x0, t, flow_config_);
    double w = noise_variance(t);
    if (!(w > 0.0)) throw DegenerateVarianceError("zero accumulated noise variance at t=" +
                                                  std::to_string(t));
    Field z = standard_normal_field(rng, x0.channels(), x0.height(), x0.width());
    return {assemble_white_target(mean, z, t, w),
            assemble_white_target(mean, negated(z), t, w)};
}

DsmBatchTarget conditional_gaussian_target(const SpdeInstance& instance, const Field& x0,
                                           double t, RngStream& rng) {
    DsmTargetSampler sampler(instance, StepperConfig{1e-2, 1.0, 0});
    return sampler.sample(x0, t, rng);
}

}  // namespace asgm
