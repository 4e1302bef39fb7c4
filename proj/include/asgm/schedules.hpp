#pragma once

#include <string>

namespace asgm {

/// Time-dependent coefficient on [0, T].
///
/// Forms (v evaluated at time t):
///   constant            v(t) = v_min
///   geometric           v(t) = v_min * (v_max / v_min)^(t/T),  0 < v_min < v_max
///   power               v(t) = v_min + (v_max - v_min) * (t/T)^k
///   exponential-blowup  v(t) = v_min * (e^{rT} - 1) / (e^{r(T-t)} - 1), finite
///                       for t < T and +inf at t = T
///   infinite            v(t) = +inf (isotropic limit for lambda)
class Transition {
public:
    enum class Kind { Constant, Geometric, Power, ExponentialBlowup, Infinite };

    static Transition constant(double value);
    static Transition geometric(double v_min, double v_max);
    static Transition power(double v_min, double v_max, double exponent);
    static Transition exponential_blowup(double v_min, double rate);
    static Transition infinite();

    Kind kind() const { return kind_; }
    double v_min() const { return v_min_; }
    double v_max() const { return v_max_; }
    double exponent() const { return exponent_; }
    bool is_infinite() const { return kind_ == Kind::Infinite; }

    /// True when the transition is identically zero (used to detect
    /// disabled drift/noise channels).
    bool is_zero() const;

private:
    Transition(Kind kind, double v_min, double v_max, double exponent)
        : kind_(kind), v_min_(v_min), v_max_(v_max), exponent_(exponent) {}

    Kind kind_;
    double v_min_;
    double v_max_;
    double exponent_;
};

/// Evaluate a transition at time t in [0, T]. Throws TimeRangeError outside
/// the interval. The exponential blowup returns +inf at t = T.
double eval_transition(const Transition& tr, double t, double terminal_time);

/// Coefficient bundle for one SDE instance.
struct Schedule {
    Transition phi1 = Transition::constant(0.0);     // drift diffusivity
    Transition phi2 = Transition::constant(0.0);     // noise intensity
    Transition lambda1 = Transition::infinite();     // drift anisotropy scale
    Transition lambda2 = Transition::infinite();     // noise anisotropy scale
    double terminal_time = 2.0;
    double correlation_length = 0.0;  // only 0 (spatially white noise) is supported
};

/// Combined coefficient psi(t, p) = phi(t) / sqrt(1 + |p/lambda(t)|^2).
struct AnisotropyCoefficient {
    Transition phi;
    Transition lambda;
};

/// Evaluate psi at time t for a 2-vector gradient p = (p1, p2). The
/// isotropic branch (lambda infinite, or a blowup value beyond 1e12)
/// returns phi(t) exactly; no division by infinity ever happens.
double eval_psi(const AnisotropyCoefficient& coef, double t, double terminal_time, double p1,
                double p2);

/// Named instances:
///   ve-noise   phi1 = 0, phi2 geometric 0.01 -> 2.0, lambda1 = lambda2 = inf
///   aniso-heat phi1 geometric 0.5 -> 2*image_size, lambda1 exponential
///              blowup (min 0.025, rate 1/2), phi2 geometric 0.01 -> 2.0,
///              lambda2 = inf
///   iso-heat   phi1 geometric 0.5 -> 2*image_size, phi2 geometric
///              0.01 -> 0.5, lambda1 = lambda2 = inf
/// image_size means max(height, width). T = 2 for all presets.
Schedule preset_schedule(const std::string& name, int image_size);

}  // namespace asgm
