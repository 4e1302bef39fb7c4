#include "asgm/spectral.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "asgm/dynamics.hpp"
#include "asgm/errors.hpp"

namespace asgm {

namespace {

std::mutex g_registry_mutex;
std::map<std::pair<int, int>, std::shared_ptr<const SpectralOperator>> g_registry;

}  // namespace

SpectralOperator::SpectralOperator(int height, int width) : height_(height), width_(width) {
    const int n = height * width;
    std::vector<double> L = isotropic_drift_matrix(height, width);

    sqrt_volume_.resize(n);
    for (int i = 0; i < height; ++i) {
        for (int j = 0; j < width; ++j) {
            bool edge_i = (i == 0 || i == height - 1);
            bool edge_j = (j == 0 || j == width - 1);
            double volume = edge_i && edge_j ? 0.25 : (edge_i || edge_j ? 0.5 : 1.0);
            sqrt_volume_(i * width + j) = std::sqrt(volume);
        }
    }

    Eigen::MatrixXd M(n, n);
    for (int q = 0; q < n; ++q) {
        for (int p = 0; p < n; ++p) {
            M(q, p) = sqrt_volume_(q) * L[static_cast<std::size_t>(q) * n + p] / sqrt_volume_(p);
        }
    }
    double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9) {
        throw NumericError("drift operator failed to symmetrize (defect " +
                           std::to_string(asym) + ")");
    }
    M = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
    eigenvalues_ = es.eigenvalues();
    basis_ = es.eigenvectors();
}

std::shared_ptr<const SpectralOperator> SpectralOperator::shared(int height, int width) {
    if (height < 3 || width < 3) {
        throw DimensionError("spectral operator requires a grid of at least 3x3");
    }
    if (height * width > 4096) {
        throw ConfigError("grid too large for a dense eigendecomposition (" +
                          std::to_string(height * width) + " pixels per channel, cap 4096)");
    }
    std::lock_guard<std::mutex> lock(g_registry_mutex);
    auto key = std::make_pair(height, width);
    auto it = g_registry.find(key);
    if (it != g_registry.end()) return it->second;
    auto op = std::shared_ptr<const SpectralOperator>(new SpectralOperator(height, width));
    g_registry.emplace(key, op);
    return op;
}

Field SpectralOperator::flow(const Field& x, double a) const {
    if (x.height() != height_ || x.width() != width_) {
        throw ShapeMismatchError("field shape does not match the spectral operator grid");
    }
    Field out = Field::zeros_like(x);
    Eigen::ArrayXd decay = (a * eigenvalues_.array()).exp();
    for (int c = 0; c < x.channels(); ++c) {
        Eigen::VectorXd coeffs = weighted_coefficients(x, c);
        coeffs.array() *= decay;
        synthesize_weighted(coeffs, out, c);
    }
    return out;
}

Eigen::VectorXd SpectralOperator::weighted_coefficients(const Field& x, int channel) const {
    auto ch = x.channel(channel);
    Eigen::VectorXd v(static_cast<Eigen::Index>(ch.size()));
    for (std::size_t k = 0; k < ch.size(); ++k) {
        v(static_cast<Eigen::Index>(k)) = ch[k] * sqrt_volume_(static_cast<Eigen::Index>(k));
    }
    return basis_.transpose() * v;
}

void SpectralOperator::synthesize_weighted(const Eigen::VectorXd& coeffs, Field& out,
                                           int channel) const {
    Eigen::VectorXd v = basis_ * coeffs;
    auto ch = out.channel(channel);
    for (std::size_t k = 0; k < ch.size(); ++k) {
        ch[k] = v(static_cast<Eigen::Index>(k)) / sqrt_volume_(static_cast<Eigen::Index>(k));
    }
}

Eigen::VectorXd SpectralOperator::coefficients(const Field& x, int channel) const {
    auto ch = x.channel(channel);
    Eigen::Map<const Eigen::VectorXd> v(ch.data(), static_cast<Eigen::Index>(ch.size()));
    return basis_.transpose() * v;
}

void SpectralOperator::synthesize(const Eigen::VectorXd& coeffs, Field& out, int channel) const {
    Eigen::VectorXd v = basis_ * coeffs;
    auto ch = out.channel(channel);
    for (std::size_t k = 0; k < ch.size(); ++k) ch[k] = v(static_cast<Eigen::Index>(k));
}

}  // namespace asgm
