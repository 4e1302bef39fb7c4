#include "asgm/schedules.hpp"

#include <cmath>
#include <limits>

#include "asgm/errors.hpp"

namespace asgm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// lambda values beyond this are indistinguishable from the isotropic limit
// at double precision for any sane gradient; short-circuiting avoids
// overflow in |p/lambda|^2 near the blowup time.
constexpr double kIsotropicThreshold = 1e12;

}  // namespace

Transition Transition::constant(double value) {
    if (value < 0.0) throw ConfigError("constant transition requires a nonnegative value");
    return Transition(Kind::Constant, value, value, 0.0);
}

Transition Transition::geometric(double v_min, double v_max) {
    if (!(0.0 < v_min && v_min < v_max)) {
        throw ConfigError("geometric transition requires 0 < v_min < v_max");
    }
    return Transition(Kind::Geometric, v_min, v_max, 0.0);
}

Transition Transition::power(double v_min, double v_max, double exponent) {
    if (v_min < 0.0 || v_max < v_min) {
        throw ConfigError("power transition requires 0 <= v_min <= v_max");
    }
    return Transition(Kind::Power, v_min, v_max, exponent);
}

Transition Transition::exponential_blowup(double v_min, double rate) {
    if (!(v_min > 0.0) || !(rate > 0.0)) {
        throw ConfigError("exponential blowup requires v_min > 0 and rate > 0");
    }
    return Transition(Kind::ExponentialBlowup, v_min, kInf, rate);
}

Transition Transition::infinite() { return Transition(Kind::Infinite, kInf, kInf, 0.0); }

bool Transition::is_zero() const {
    switch (kind_) {
        case Kind::Constant: return v_min_ == 0.0;
        case Kind::Power: return v_min_ == 0.0 && v_max_ == 0.0;
        default: return false;
    }
}

double eval_transition(const Transition& tr, double t, double terminal_time) {
    if (!(terminal_time > 0.0)) throw ConfigError("terminal time must be positive");
    if (t < 0.0 || t > terminal_time) {
        throw TimeRangeError("time " + std::to_string(t) + " outside [0, " +
                             std::to_string(terminal_time) + "]");
    }
    double u = t / terminal_time;
    switch (tr.kind()) {
        case Transition::Kind::Constant:
            return tr.v_min();
        case Transition::Kind::Geometric:
            return tr.v_min() * std::pow(tr.v_max() / tr.v_min(), u);
        case Transition::Kind::Power:
            return tr.v_min() + (tr.v_max() - tr.v_min()) * std::pow(u, tr.exponent());
        case Transition::Kind::ExponentialBlowup: {
            if (t >= terminal_time) return kInf;
            double r = tr.exponent();
            return tr.v_min() * std::expm1(r * terminal_time) /
                   std::expm1(r * (terminal_time - t));
        }
        case Transition::Kind::Infinite:
            return kInf;
    }
    throw ConfigError("unreachable transition kind");
}

double eval_psi(const AnisotropyCoefficient& coef, double t, double terminal_time, double p1,
                double p2) {
    double phi = eval_transition(coef.phi, t, terminal_time);
    if (coef.lambda.is_infinite()) return phi;
    double lambda = eval_transition(coef.lambda, t, terminal_time);
    if (!(lambda < kIsotropicThreshold)) return phi;  // blowup mapped to the isotropic branch
    double ratio2 = (p1 * p1 + p2 * p2) / (lambda * lambda);
    return phi / std::sqrt(1.0 + ratio2);
}

Schedule preset_schedule(const std::string& name, int image_size) {
    if (image_size < 1) throw ConfigError("image_size must be positive");
    Schedule s;
    s.terminal_time = 2.0;
    s.correlation_length = 0.0;
    if (name == "ve-noise") {
        s.phi1 = Transition::constant(0.0);
        s.phi2 = Transition::geometric(0.01, 2.0);
        s.lambda1 = Transition::infinite();
        s.lambda2 = Transition::infinite();
    } else if (name == "aniso-heat") {
        s.phi1 = Transition::geometric(0.5, 2.0 * image_size);
        s.phi2 = Transition::geometric(0.01, 2.0);
        s.lambda1 = Transition::exponential_blowup(0.025, 0.5);
        s.lambda2 = Transition::infinite();
    } else if (name == "iso-heat") {
        s.phi1 = Transition::geometric(0.5, 2.0 * image_size);
        s.phi2 = Transition::geometric(0.01, 0.5);
        s.lambda1 = Transition::infinite();
        s.lambda2 = Transition::infinite();
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return s;
}

}  // namespace asgm
