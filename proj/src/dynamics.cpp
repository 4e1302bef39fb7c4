#include "asgm/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "asgm/errors.hpp"

namespace asgm {

namespace {

std::atomic<std::uint64_t> g_divergence_fd_calls{0};

constexpr double kIsotropicThreshold = 1e12;
constexpr double kDivergenceFdStep = 1e-4;

// psi with the time-dependent parts hoisted out of the pixel loop.
struct PsiEval {
    double phi = 0.0;
    double inv_lambda_sq = 0.0;
    bool isotropic = true;

    static PsiEval at(const Transition& phi_tr, const Transition& lambda_tr, double t, double T) {
        PsiEval p;
        p.phi = eval_transition(phi_tr, t, T);
        if (lambda_tr.is_infinite()) return p;
        double lambda = eval_transition(lambda_tr, t, T);
        if (!(lambda < kIsotropicThreshold)) return p;
        p.isotropic = false;
        p.inv_lambda_sq = 1.0 / (lambda * lambda);
        return p;
    }

    double operator()(double p1, double p2) const {
        if (isotropic) return phi;
        return phi / std::sqrt(1.0 + (p1 * p1 + p2 * p2) * inv_lambda_sq);
    }
};

// One channel of the drift stencil. H, W >= 3.
void drift_channel(const double* x, double* out, int H, int W, const PsiEval& psi) {
    auto X = [&](int i, int j) { return x[i * W + j]; };

    for (int i = 0; i < H; ++i) {
        for (int j = 0; j < W; ++j) {
            const double c = X(i, j);
            double b;
            if (i >= 1 && i <= H - 2 && j >= 1 && j <= W - 2) {
                // interior: four divergence-form fluxes
                double w1p = X(std::min(i + 2, H - 1), j) - c;
                double w1m = c - X(std::max(i - 2, 0), j);
                double w2p = X(i, std::min(j + 2, W - 1)) - c;
                double w2m = c - X(i, std::max(j - 2, 0));
                double t_i_plus = X(i + 1, j + 1) - X(i + 1, j - 1);
                double t_i_minus = X(i - 1, j + 1) - X(i - 1, j - 1);
                double t_j_plus = X(i + 1, j + 1) - X(i - 1, j + 1);
                double t_j_minus = X(i + 1, j - 1) - X(i - 1, j - 1);
                b = psi(w1p, t_i_plus) * (X(i + 1, j) - c) -
                    psi(w1m, t_i_minus) * (c - X(i - 1, j)) +
                    psi(t_j_plus, w2p) * (X(i, j + 1) - c) -
                    psi(t_j_minus, w2m) * (c - X(i, j - 1));
            } else if (i == 0 && j == 0) {
                // left corner: mirrored fluxes toward (1,0) and (0,1)
                double w1p = X(std::min(2, H - 1), 0) - c;
                double w2p = X(0, std::min(2, W - 1)) - c;
                b = (psi(w1p, 0.0) + psi(0.0, 0.0)) * (X(1, 0) - c) +
                    (psi(0.0, w2p) + psi(0.0, 0.0)) * (X(0, 1) - c);
            } else if (i == 0 && j <= W - 2) {
                // left edge
                double t2 = X(1, j + 1) - X(1, j - 1);
                double w1p = X(std::min(2, H - 1), j) - c;
                double w2p = X(0, std::min(j + 2, W - 1)) - c;
                double w2m = c - X(0, std::max(j - 2, 0));
                b = (psi(w1p, t2) + psi(0.0, t2)) * (X(1, j) - c) +
                    psi(0.0, w2p) * (X(0, j + 1) - c) - psi(0.0, w2m) * (c - X(0, j - 1));
            } else if (j == W - 1 && i == 0) {
                // top corner
                double w1p = X(std::min(2, H - 1), j) - c;
                double w2m = c - X(0, std::max(j - 2, 0));
                b = (psi(w1p, 0.0) + psi(0.0, 0.0)) * (X(1, j) - c) +
                    (psi(0.0, w2m) + psi(0.0, 0.0)) * (X(0, j - 1) - c);
            } else if (j == W - 1 && i <= H - 2) {
                // top edge. NB: the source formulation prints the first flux
                // coefficient without its (x_{i+1,j} - x_ij) factor; the
                // factor is restored here, otherwise constant fields would
                // not have zero drift.
                double w1p = X(std::min(i + 2, H - 1), j) - c;
                double w1m = c - X(std::max(i - 2, 0), j);
                double t1 = X(i + 1, j - 1) - X(i - 1, j - 1);
                double w2m = c - X(i, std::max(j - 2, 0));
                b = psi(w1p, 0.0) * (X(i + 1, j) - c) - psi(w1m, 0.0) * (c - X(i - 1, j)) +
                    (psi(t1, 0.0) + psi(t1, w2m)) * (X(i, j - 1) - c);
            } else if (i == H - 1 && j == W - 1) {
                // right corner
                double w1m = c - X(std::max(i - 2, 0), j);
                double w2m = c - X(i, std::max(j - 2, 0));
                b = (psi(w1m, 0.0) + psi(0.0, 0.0)) * (X(i - 1, j) - c) +
                    (psi(0.0, w2m) + psi(0.0, 0.0)) * (X(i, j - 1) - c);
            } else if (i == H - 1 && j >= 1) {
                // right edge
                double t2 = X(i - 1, j + 1) - X(i - 1, j - 1);
                double w1m = c - X(std::max(i - 2, 0), j);
                double w2p = X(i, std::min(j + 2, W - 1)) - c;
                double w2m = c - X(i, std::max(j - 2, 0));
                b = (psi(0.0, t2) + psi(w1m, t2)) * (X(i - 1, j) - c) +
                    psi(0.0, w2p) * (X(i, j + 1) - c) - psi(0.0, w2m) * (c - X(i, j - 1));
            } else if (j == 0 && i == H - 1) {
                // bottom corner
                double w1m = c - X(std::max(i - 2, 0), 0);
                double w2p = X(i, std::min(2, W - 1)) - c;
                b = (psi(w1m, 0.0) + psi(0.0, 0.0)) * (X(i - 1, 0) - c) +
                    (psi(0.0, w2p) + psi(0.0, 0.0)) * (X(i, 1) - c);
            } else {
                // bottom edge (j == 0, 1 <= i <= H-2)
                double w1p = X(std::min(i + 2, H - 1), 0) - c;
                double w1m = c - X(std::max(i - 2, 0), 0);
                double t1 = X(i + 1, 1) - X(i - 1, 1);
                double w2p = X(i, std::min(2, W - 1)) - c;
                b = psi(w1p, 0.0) * (X(i + 1, 0) - c) - psi(w1m, 0.0) * (c - X(i - 1, 0)) +
                    (psi(t1, w2p) + psi(t1, 0.0)) * (X(i, 1) - c);
            }
            out[i * W + j] = b;
        }
    }
}

// Central-difference gradient feeding psi2; components are zeroed where a
// neighbor would fall outside the grid (both at corners).
inline void diffusion_gradient(const double* x, int H, int W, int i, int j, double& g1,
                               double& g2) {
    g1 = (i > 0 && i < H - 1) ? x[(i + 1) * W + j] - x[(i - 1) * W + j] : 0.0;
    g2 = (j > 0 && j < W - 1) ? x[i * W + j + 1] - x[i * W + j - 1] : 0.0;
}

}  // namespace

SdeClass classify(const Schedule& schedule) {
    bool l1_inf = schedule.lambda1.is_infinite();
    bool l2_inf = schedule.lambda2.is_infinite();
    if (l1_inf && l2_inf) return SdeClass::LinearAdditive;
    if (!l1_inf && l2_inf) return SdeClass::QuasilinearAdditive;
    if (l1_inf && !l2_inf) return SdeClass::SemilinearMultiplicative;
    return SdeClass::QuasilinearMultiplicative;
}

const char* to_string(SdeClass c) {
    switch (c) {
        case SdeClass::QuasilinearMultiplicative: return "quasilinear-multiplicative";
        case SdeClass::SemilinearMultiplicative: return "semilinear-multiplicative";
        case SdeClass::QuasilinearAdditive: return "quasilinear-additive";
        case SdeClass::LinearAdditive: return "linear-additive";
    }
    return "unknown";
}

SpdeInstance::SpdeInstance(Schedule schedule, bool drift_enabled, bool noise_enabled)
    : schedule_(std::move(schedule)),
      class_(classify(schedule_)),
      drift_enabled_(drift_enabled),
      noise_enabled_(noise_enabled) {
    if (schedule_.correlation_length != 0.0) {
        throw UnsupportedError("correlated noise (epsilon > 0) is not implemented");
    }
    if (!(schedule_.terminal_time > 0.0)) {
        throw ConfigError("terminal time must be positive");
    }
}

void SpdeInstance::check_time(double t) const {
    if (t < 0.0 || t > schedule_.terminal_time) {
        throw TimeRangeError("time " + std::to_string(t) + " outside [0, " +
                             std::to_string(schedule_.terminal_time) + "]");
    }
}

void SpdeInstance::check_grid(const Field& x) const {
    if (x.height() < 3 || x.width() < 3) {
        throw DimensionError("stencil operators require a grid of at least 3x3, got " +
                             std::to_string(x.height()) + "x" + std::to_string(x.width()));
    }
}

Field SpdeInstance::drift(double t, const Field& x) const {
    check_time(t);
    Field out = Field::zeros_like(x);
    if (!drift_enabled_ || schedule_.phi1.is_zero()) return out;
    check_grid(x);
    PsiEval psi = PsiEval::at(schedule_.phi1, schedule_.lambda1, t, schedule_.terminal_time);
    for (int c = 0; c < x.channels(); ++c) {
        drift_channel(x.channel(c).data(), out.channel(c).data(), x.height(), x.width(), psi);
    }
    return out;
}

Field SpdeInstance::apply_diffusion(double t, const Field& x, const Field& eta) const {
    check_time(t);
    if (!x.same_shape(eta)) throw ShapeMismatchError("state and increment shapes differ");
    check_grid(x);
    Field out = Field::zeros_like(x);
    PsiEval psi = PsiEval::at(schedule_.phi2, schedule_.lambda2, t, schedule_.terminal_time);
    const int H = x.height(), W = x.width();
    for (int c = 0; c < x.channels(); ++c) {
        const double* xc = x.channel(c).data();
        const double* ec = eta.channel(c).data();
        double* oc = out.channel(c).data();
        for (int i = 0; i < H; ++i) {
            for (int j = 0; j < W; ++j) {
                double g1, g2;
                diffusion_gradient(xc, H, W, i, j, g1, g2);
                oc[i * W + j] = psi(g1, g2) * ec[i * W + j];
            }
        }
    }
    return out;
}

Field SpdeInstance::apply_noise(double t, const Field& x, const Field& eta) const {
    if (!noise_enabled_) {
        if (!x.same_shape(eta)) throw ShapeMismatchError("state and increment shapes differ");
        return Field::zeros_like(x);
    }
    return apply_diffusion(t, x, eta);
}

Field SpdeInstance::noise_covariance_diagonal(double t, const Field& x) const {
    check_time(t);
    Field out = Field::zeros_like(x);
    if (!noise_enabled_) return out;
    check_grid(x);
    PsiEval psi = PsiEval::at(schedule_.phi2, schedule_.lambda2, t, schedule_.terminal_time);
    const int H = x.height(), W = x.width();
    for (int c = 0; c < x.channels(); ++c) {
        const double* xc = x.channel(c).data();
        double* oc = out.channel(c).data();
        for (int i = 0; i < H; ++i) {
            for (int j = 0; j < W; ++j) {
                double g1, g2;
                diffusion_gradient(xc, H, W, i, j, g1, g2);
                double s = psi(g1, g2);
                oc[i * W + j] = s * s;
            }
        }
    }
    return out;
}

Field SpdeInstance::drift_divergence_term(double t, const Field& x) const {
    check_time(t);
    Field out = Field::zeros_like(x);
    if (!noise_enabled_ || schedule_.lambda2.is_infinite()) {
        // Sigma = phi2^2 I is state independent: exact zero, no FD.
        return out;
    }
    check_grid(x);
    g_divergence_fd_calls.fetch_add(1, std::memory_order_relaxed);
    PsiEval psi = PsiEval::at(schedule_.phi2, schedule_.lambda2, t, schedule_.terminal_time);
    const int H = x.height(), W = x.width();
    const double h = kDivergenceFdStep;
    Field work = x;
    for (int c = 0; c < x.channels(); ++c) {
        double* xc = work.channel(c).data();
        double* oc = out.channel(c).data();
        for (int i = 0; i < H; ++i) {
            for (int j = 0; j < W; ++j) {
                double saved = xc[i * W + j];
                double g1, g2;
                xc[i * W + j] = saved + h;
                diffusion_gradient(xc, H, W, i, j, g1, g2);
                double sp = psi(g1, g2);
                xc[i * W + j] = saved - h;
                diffusion_gradient(xc, H, W, i, j, g1, g2);
                double sm = psi(g1, g2);
                xc[i * W + j] = saved;
                oc[i * W + j] = (sp * sp - sm * sm) / (2.0 * h);
            }
        }
    }
    return out;
}

std::uint64_t divergence_fd_call_count() {
    return g_divergence_fd_calls.load(std::memory_order_relaxed);
}

void reset_divergence_fd_call_count() { g_divergence_fd_calls.store(0); }

std::vector<double> isotropic_drift_matrix(int height, int width) {
    if (height < 3 || width < 3) {
        throw DimensionError("isotropic drift matrix requires at least a 3x3 grid");
    }
    const int n = height * width;
    std::vector<double> mat(static_cast<std::size_t>(n) * n, 0.0);
    Schedule s;
    s.phi1 = Transition::constant(1.0);
    s.phi2 = Transition::constant(0.0);
    s.terminal_time = 1.0;
    SpdeInstance unit(s);
    Field basis(1, height, width);
    for (int p = 0; p < n; ++p) {
        basis.values()[p] = 1.0;
        Field col = unit.drift(0.0, basis);
        for (int q = 0; q < n; ++q) {
            mat[static_cast<std::size_t>(q) * n + p] = col.values()[q];
        }
        basis.values()[p] = 0.0;
    }
    return mat;
}

}  // namespace asgm
