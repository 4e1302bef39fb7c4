#pragma once

#include <Eigen/Dense>
#include <memory>

#include "asgm/field.hpp"

namespace asgm {

/// Eigendecomposition of the isotropic-limit drift operator L on an h x w
/// grid (one channel; channels share it).
///
/// L is not symmetric: the mirror boundary branches couple edge pixels to
/// the interior with doubled weights. It is exactly symmetrizable by the
/// half-cell volume weights d = 1 (interior), 1/2 (edge), 1/4 (corner):
/// M = D^{1/2} L D^{-1/2} is symmetric, so L has a real spectrum mu_k <= 0
/// and exp(a L) = D^{-1/2} U e^{a mu} U^T D^{1/2} with U orthonormal.
class SpectralOperator {
public:
    /// Shared, memoized per grid size. Requires h, w >= 3 and h*w <= 4096.
    static std::shared_ptr<const SpectralOperator> shared(int height, int width);

    int height() const { return height_; }
    int width() const { return width_; }
    int modes() const { return static_cast<int>(eigenvalues_.size()); }

    /// Eigenvalues of L, ascending; the largest is the simple zero mode.
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    /// Orthonormal eigenvector basis of the symmetrized operator.
    const Eigen::MatrixXd& basis() const { return basis_; }
    /// Square roots of the half-cell volume weights, pixel by pixel.
    const Eigen::VectorXd& sqrt_volume() const { return sqrt_volume_; }

    /// Exact flow exp(a L) x, per channel.
    Field flow(const Field& x, double a) const;

    /// Weighted analysis coefficients u_k . D^{1/2} x_c — the modal
    /// coordinates in which the flow is diagonal.
    Eigen::VectorXd weighted_coefficients(const Field& x, int channel) const;

    /// Synthesize a field channel from weighted coefficients:
    /// x_c = D^{-1/2} U c.
    void synthesize_weighted(const Eigen::VectorXd& coeffs, Field& out, int channel) const;

    /// Euclidean analysis coefficients U^T x_c.
    Eigen::VectorXd coefficients(const Field& x, int channel) const;

    /// x_c = U c.
    void synthesize(const Eigen::VectorXd& coeffs, Field& out, int channel) const;

private:
    SpectralOperator(int height, int width);

    int height_;
    int width_;
    Eigen::VectorXd sqrt_volume_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd basis_;
};

}  // namespace asgm
