#pragma once

#include <cstdint>
#include <memory>

#include "asgm/field.hpp"
#include "asgm/schedules.hpp"

namespace asgm {

/// Parabolic problem class of an instance, keyed by which anisotropy
/// coefficients depend on the state gradient.
enum class SdeClass {
    QuasilinearMultiplicative,  // lambda1 and lambda2 finite
    SemilinearMultiplicative,   // lambda1 infinite, lambda2 finite
    QuasilinearAdditive,        // lambda1 finite, lambda2 infinite
    LinearAdditive              // both infinite
};

SdeClass classify(const Schedule& schedule);

const char* to_string(SdeClass c);

/// Process interface consumed by the time stepper and the time reversal: a
/// drift field, a diagonal noise operator applied to an increment, and the
/// diagonal of Sigma = sigma sigma^T with its row divergence.
class Sde {
public:
    virtual ~Sde() = default;
    virtual Field drift(double t, const Field& x) const = 0;
    virtual Field apply_noise(double t, const Field& x, const Field& eta) const = 0;
    virtual Field noise_covariance_diagonal(double t, const Field& x) const = 0;
    /// Row divergence of Sigma; the default covers state-independent noise.
    virtual Field drift_divergence_term(double t, const Field& x) const {
        (void)t;
        return Field::zeros_like(x);
    }
    virtual double terminal_time() const = 0;
};

/// The spatially discretized instance: divergence-form drift with face
/// fluxes modulated by psi1, and a diagonal diffusion operator modulated by
/// psi2 on central-difference gradients.
///
/// The drift stencil works per channel. Interior pixels accumulate four flux
/// terms psi1(t, g_face) * (neighbor - center); each face gradient has a
/// wide +-2-clamped normal component and an adjacent-row central transverse
/// component. Boundary pixels use mirror (doubled-coefficient) branches, one
/// per left/top/right/bottom sub-case, with transverse components zeroed
/// where the needed neighbors fall outside the grid.
class SpdeInstance : public Sde {
public:
    explicit SpdeInstance(Schedule schedule, bool drift_enabled = true,
                          bool noise_enabled = true);

    const Schedule& schedule() const { return schedule_; }
    SdeClass sde_class() const { return class_; }
    bool drift_enabled() const { return drift_enabled_; }
    bool noise_enabled() const { return noise_enabled_; }
    double terminal_time() const override { return schedule_.terminal_time; }

    /// b~(t, x). Returns the zero field when the drift is disabled.
    Field drift(double t, const Field& x) const override;

    /// sigma~(t, x) eta. Returns the zero field when noise is disabled.
    Field apply_noise(double t, const Field& x, const Field& eta) const override;

    /// The raw diagonal diffusion operator, ignoring the noise flag:
    /// out_i = psi2(t, g^_i) * eta_i with g^_i the central-difference
    /// gradient (componentwise zeroed on edges, (0,0) at corners).
    Field apply_diffusion(double t, const Field& x, const Field& eta) const;

    /// Row divergence of Sigma = sigma sigma^T: entry i is dSigma_ii/dx_i by
    /// central finite differences (h = 1e-4) of psi2^2. Exactly the zero
    /// field for additive noise (lambda2 infinite), without any finite
    /// differencing.
    Field drift_divergence_term(double t, const Field& x) const override;

    /// Squared diagonal of the diffusion operator: Sigma_ii = psi2(t, g^_i)^2,
    /// zero when noise is disabled.
    Field noise_covariance_diagonal(double t, const Field& x) const override;

private:
    void check_time(double t) const;
    void check_grid(const Field& x) const;

    Schedule schedule_;
    SdeClass class_;
    bool drift_enabled_;
    bool noise_enabled_;
};

/// Number of times the finite-difference divergence path has run since the
/// last reset. Additive-noise instances must never bump it.
std::uint64_t divergence_fd_call_count();
void reset_divergence_fd_call_count();

/// Dense matrix of the isotropic-limit drift operator (psi1 = 1), one
/// channel, row-major: column p holds the drift of the p-th basis field.
/// Used to expose the linear operator behind the linear-additive instances.
std::vector<double> isotropic_drift_matrix(int height, int width);

}  // namespace asgm
