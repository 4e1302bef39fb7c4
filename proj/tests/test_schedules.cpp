#include <doctest.h>

#include <cmath>

#include "asgm/errors.hpp"
#include "asgm/rng.hpp"
#include "asgm/schedules.hpp"

using namespace asgm;

TEST_CASE("geometric transition endpoints and midpoint") {
    const double T = 2.0;
    auto g = Transition::geometric(0.5, 1000.0);
    CHECK(eval_transition(g, 0.0, T) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(eval_transition(g, T, T) == doctest::Approx(1000.0).epsilon(1e-12));
    CHECK(eval_transition(g, T / 2, T) == doctest::Approx(std::sqrt(0.5 * 1000.0)).epsilon(1e-12));
    CHECK(eval_transition(g, T / 2, T) == doctest::Approx(22.3607).epsilon(1e-4));
}

TEST_CASE("power transition") {
    const double T = 1.0;
    auto p = Transition::power(1.0, 100.0, 3.0);
    CHECK(eval_transition(p, 0.0, T) == doctest::Approx(1.0));
    CHECK(eval_transition(p, 1.0, T) == doctest::Approx(100.0));
    CHECK(eval_transition(p, 0.5, T) == doctest::Approx(1.0 + 99.0 * 0.125));
}

TEST_CASE("exponential blowup: finite before T, infinite at T") {
    const double T = 2.0;
    auto e = Transition::exponential_blowup(0.025, 0.5);
    CHECK(eval_transition(e, 0.0, T) == doctest::Approx(0.025).epsilon(1e-12));
    CHECK(std::isinf(eval_transition(e, T, T)));
    double near = eval_transition(e, T - 1e-9, T);
    CHECK(std::isfinite(near));
    CHECK(near > 1e6);
}

TEST_CASE("transition argument validation") {
    CHECK_THROWS_AS(Transition::geometric(1.0, 0.5), ConfigError);
    CHECK_THROWS_AS(Transition::geometric(0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(Transition::exponential_blowup(0.0, 0.5), ConfigError);
    auto g = Transition::geometric(0.5, 2.0);
    CHECK_THROWS_AS(eval_transition(g, -0.1, 1.0), TimeRangeError);
    CHECK_THROWS_AS(eval_transition(g, 1.1, 1.0), TimeRangeError);
}

TEST_CASE("psi isotropic branch and direct evaluation") {
    const double T = 2.0;
    AnisotropyCoefficient iso{Transition::constant(3.0), Transition::infinite()};
    CHECK(eval_psi(iso, 1.0, T, 123.0, -456.0) == 3.0);

    AnisotropyCoefficient unit{Transition::constant(1.0), Transition::constant(1.0)};
    CHECK(eval_psi(unit, 0.7, T, 0.0, 0.0) == doctest::Approx(1.0));
    CHECK(eval_psi(unit, 0.7, T, 3.0, 4.0) == doctest::Approx(1.0 / std::sqrt(26.0)).epsilon(1e-9));
    CHECK(eval_psi(unit, 0.7, T, 3.0, 4.0) == doctest::Approx(0.196116).epsilon(1e-5));
}

TEST_CASE("psi is radially non-increasing and converges to the isotropic value") {
    const double T = 2.0;
    AnisotropyCoefficient coef{Transition::geometric(0.5, 8.0), Transition::constant(0.7)};
    RngStream rng(21, 0);
    for (int rep = 0; rep < 50; ++rep) {
        double t = rng.uniform() * T;
        double d1 = 2.0 * rng.uniform() - 1.0;
        double d2 = 2.0 * rng.uniform() - 1.0;
        double norm = std::hypot(d1, d2);
        if (norm == 0.0) continue;
        d1 /= norm;
        d2 /= norm;
        double prev = eval_psi(coef, t, T, 0.0, 0.0);
        CHECK(prev == doctest::Approx(eval_transition(coef.phi, t, T)));
        for (double r : {0.01, 0.1, 0.5, 1.0, 5.0, 50.0, 1000.0}) {
            double cur = eval_psi(coef, t, T, r * d1, r * d2);
            CHECK(cur <= prev * (1.0 + 1e-12));
            CHECK(cur > 0.0);
            prev = cur;
        }
    }

    AnisotropyCoefficient nearly_iso{Transition::constant(2.0), Transition::constant(1e12)};
    for (double r : {0.0, 1.0, 1000.0}) {
        double v = eval_psi(nearly_iso, 0.3, T, r, 0.0);
        CHECK(std::abs(v - 2.0) <= 1e-9 * 2.0);
    }
}

TEST_CASE("presets match their stated parameters") {
    auto aniso = preset_schedule("aniso-heat", 64);
    CHECK(aniso.phi1.v_max() == doctest::Approx(128.0));
    CHECK(aniso.phi1.v_min() == doctest::Approx(0.5));
    CHECK(aniso.lambda1.kind() == Transition::Kind::ExponentialBlowup);
    CHECK(aniso.lambda1.v_min() == doctest::Approx(0.025));
    CHECK(aniso.lambda1.exponent() == doctest::Approx(0.5));
    CHECK(aniso.lambda2.is_infinite());
    CHECK(aniso.phi2.v_min() == doctest::Approx(0.01));
    CHECK(aniso.phi2.v_max() == doctest::Approx(2.0));
    CHECK(aniso.terminal_time == doctest::Approx(2.0));
    CHECK(aniso.correlation_length == 0.0);

    auto iso = preset_schedule("iso-heat", 8);
    CHECK(iso.phi1.v_max() == doctest::Approx(16.0));
    CHECK(iso.phi2.v_max() == doctest::Approx(0.5));
    CHECK(iso.lambda1.is_infinite());

    auto ve = preset_schedule("ve-noise", 8);
    CHECK(ve.phi1.is_zero());
    CHECK(ve.phi2.v_max() == doctest::Approx(2.0));
    CHECK(ve.lambda1.is_infinite());
    CHECK(ve.lambda2.is_infinite());

    CHECK_THROWS_AS(preset_schedule("no-such", 8), ConfigError);
}

TEST_CASE("aniso-heat psi1 approaches phi1 near the terminal time") {
    auto s = preset_schedule("aniso-heat", 64);
    AnisotropyCoefficient coef{s.phi1, s.lambda1};
    const double T = s.terminal_time;
    double p = 0.5;  // a strong gradient
    // early: heavy suppression across the gradient
    double early = eval_psi(coef, 0.1 * T, T, p, 0.0);
    double phi_early = eval_transition(s.phi1, 0.1 * T, T);
    CHECK(early < 0.2 * phi_early);
    // late: pointwise convergence to the isotropic value
    for (double frac : {0.9999, 0.999999}) {
        double t = frac * T;
        double phi = eval_transition(s.phi1, t, T);
        CHECK(eval_psi(coef, t, T, p, 0.0) == doctest::Approx(phi).epsilon(1e-3));
    }
    CHECK(eval_psi(coef, T, T, p, 0.0) == eval_transition(s.phi1, T, T));
}
