#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "asgm/dynamics.hpp"
#include "asgm/field.hpp"
#include "asgm/integrator.hpp"
#include "asgm/rng.hpp"
#include "asgm/spectral.hpp"

namespace asgm {

/// Gaussian law with covariance diagonal in a fixed orthonormal mode basis.
///
/// With a spectral operator attached, the basis is its eigenbasis and
/// mode_variances has one entry per mode (shared across channels, which
/// share the schedule). Without one (white laws: no drift, or grids too
/// small for the stencil), the covariance is diagonal in the pixel basis
/// and mode_variances holds either one shared value or one value per pixel.
struct GaussianLaw {
    Field mean;
    std::shared_ptr<const SpectralOperator> op;  // null for white laws
    std::vector<double> mode_variances;
};

/// Score of the law at x: s(x) = sum_k u_k (m_k - <x, u_k>) / v_k, i.e.
/// -C^{-1}(x - mean). Throws DegenerateVarianceError if any v_k == 0.
Field analytic_score(const GaussianLaw& law, const Field& x);

/// Log-density of the law at x (additive constants included).
double log_density(const GaussianLaw& law, const Field& x);

/// Draw from the law: mean + sum_k sqrt(v_k) z_k u_k.
Field sample_from_law(const GaussianLaw& law, RngStream& rng);

/// A(t) = int_0^t phi1, by composite Simpson (1000 panels).
double drift_time_integral(const Schedule& schedule, double t);

/// w(t) = int_0^t phi2(s)^2 ds, by composite Simpson (1000 panels).
double accumulated_noise_variance(const Schedule& schedule, double t);

/// Conditional (or, with var0 > 0, marginal-from-Gaussian-data) law of a
/// linear-additive instance at time t:
///   mean   exp(A(t) L) x0 with A(t) = int_0^t phi1
///   v_k(t) var0 e^{2 A(t) mu_k} + int_0^t e^{2 (A(t)-A(s)) mu_k} phi2(s)^2 ds
/// (Simpson, 1000 panels). Instances with phi1 == 0 produce a white law on
/// any grid; otherwise the grid must be at least 3x3 and at most 4096
/// pixels per channel.
GaussianLaw linear_law(const SpdeInstance& instance, const Field& x0, double t,
                       double initial_variance = 0.0);

struct PriorCalibrationConfig {
    int n_simulations = 256;
    StepperConfig stepper{1e-2, 1.0, 0};
    std::uint64_t seed = 0;
};

/// Law of the terminal state. Linear instances use the closed form with the
/// mean averaged over the calibration set (modes whose decay e^{A(T) mu_k}
/// falls below 1e-6 are centered); no simulation happens. The quasilinear
/// instance runs cfg.n_simulations (>= 256) forward simulations of
/// calibration images and fits per-pixel means and per-mode variances.
/// The calibration set may be empty only for linear instances.
GaussianLaw prior_law(const SpdeInstance& instance, int channels, int height, int width,
                      const std::vector<Field>& calibration,
                      const PriorCalibrationConfig& cfg = {});

/// Score function interface used by the backward sampler. Implementations
/// must be safe to call concurrently.
class ScoreModel {
public:
    virtual ~ScoreModel() = default;
    virtual Field score(double t, const Field& x) const = 0;
};

/// Exact Gaussian score of a linear-additive instance, for data
/// ~ Normal(initial_mean, initial_variance * I); initial_variance = 0 is
/// the point-mass (conditional) case. Laws are memoized per time.
class AnalyticGaussianScore : public ScoreModel {
public:
    AnalyticGaussianScore(SpdeInstance instance, Field initial_mean, double initial_variance);

    Field score(double t, const Field& x) const override;
    const GaussianLaw& law_at(double t) const;
    const SpdeInstance& instance() const { return instance_; }

private:
    SpdeInstance instance_;
    Field initial_mean_;
    double initial_variance_;
    mutable std::mutex mutex_;
    mutable std::map<double, GaussianLaw> cache_;
};

/// Exact Gaussian score of a linear-additive instance, full covariance.
///
/// The mirror-boundary drift operator is only volume-weight symmetrizable,
/// so the marginal covariance is not diagonal in any fixed orthonormal
/// basis; in the weighted modal coordinates z = U^T D^{1/2} x it has the
/// closed form C_z(t) = W o G(t) (elementwise), W = U^T D U,
/// G_kj = var0 e^{A(t)(mu_k+mu_j)} + int_0^t e^{(A(t)-A(s))(mu_k+mu_j)}
/// phi2(s)^2 ds. The diagonal GaussianLaw drops the off-diagonal of W; this
/// model keeps it, which is what end-to-end distributional checks need.
class ExactLinearScore : public ScoreModel {
public:
    ExactLinearScore(SpdeInstance instance, Field initial_mean, double initial_variance);

    Field score(double t, const Field& x) const override;

    /// Draw from the marginal law at time t.
    Field sample_marginal(double t, RngStream& rng) const;

    /// Dense pixel-space covariance at time t (diagnostics and tests).
    Eigen::MatrixXd dense_covariance(double t) const;

    const SpdeInstance& instance() const { return instance_; }

private:
    struct LawEntry {
        Field mean;
        Eigen::MatrixXd cz;        // modal covariance W o G
        Eigen::LLT<Eigen::MatrixXd> llt;
    };
    const LawEntry& entry_at(double t) const;

    SpdeInstance instance_;
    Field initial_mean_;
    double initial_variance_;
    std::shared_ptr<const SpectralOperator> op_;
    Eigen::MatrixXd weight_gram_;  // W = U^T D U
    mutable std::mutex mutex_;
    mutable std::map<double, LawEntry> cache_;
};

struct DsmBatchTarget {
    double t = 0.0;
    Field x_t;
    Field target_score;
    double weight = 0.0;
};

/// Denoising-score-matching target construction for additive-noise
/// instances. Linear instances perturb with the exact conditional law and
/// the target is its analytic score; the quasilinear instance uses the
/// white conditional-Gaussian approximation around the drift-only flow:
/// x_t = m(t|x0) + sqrt(w) z, target = -z / sqrt(w), weight = w(t).
class DsmTargetSampler {
public:
    DsmTargetSampler(SpdeInstance instance, StepperConfig flow_config);

    DsmBatchTarget sample(const Field& x0, double t, RngStream& rng) const;

    /// Antithetic pair: both targets share one noise draw with opposite
    /// signs, a plain variance reduction for the regression.
    std::pair<DsmBatchTarget, DsmBatchTarget> sample_antithetic(const Field& x0, double t,
                                                                RngStream& rng) const;

    double weight(double t) const { return noise_variance(t); }
    double noise_variance(double t) const;
    const SpdeInstance& instance() const { return instance_; }

private:
    SpdeInstance instance_;
    SpdeInstance drift_only_;
    StepperConfig flow_config_;
    bool linear_;
};

/// One-shot convenience wrapper around DsmTargetSampler.
DsmBatchTarget conditional_gaussian_target(const SpdeInstance& instance, const Field& x0,
                                           double t, RngStream& rng);

}  // namespace asgm
