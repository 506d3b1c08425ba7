#include <catch2/catch_amalgamated.hpp>

#include <bdflux/bdflux.hpp>

#include <cmath>
#include <stdexcept>

using namespace bdflux;

namespace {

FluxFunction cubic_flux() {
    FluxFunction f;
    f.eval = [](double u) { return u * u * u; };
    f.deriv = [](double u) { return 3.0 * u * u; };
    f.convexity_hint = Convexity::nonconvex;
    return f;
}

FluxFunction quartic_flux() {
    FluxFunction f;
    f.eval = [](double u) { return 0.25 * u * u * u * u; };
    f.deriv = [](double u) { return u * u * u; };
    f.convexity_hint = Convexity::nonconvex;
    return f;
}

} // namespace

TEST_CASE("chord geometry of the unit Burgers jump", "[exact]") {
    FluxFunction f = make_burgers_flux();
    CHECK(wave_speed(f, 1.0, 0.0) == Catch::Approx(0.5).margin(1e-15));
    CHECK(wave_speed(f, 2.0, -1.0) == Catch::Approx(0.5).margin(1e-15));
    CHECK_THROWS_AS(wave_speed(f, 0.3, 0.3), std::invalid_argument);

    // deficit vanishes at the endpoints and dips to -1/8 at the midpoint
    CHECK(chord_deficit_at(f, 1.0, 0.0, 1.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(chord_deficit_at(f, 1.0, 0.0, 0.0) == Catch::Approx(0.0).margin(1e-15));
    ChordDeficit d = chord_deficit(f, 1.0, 0.0);
    CHECK(d.m == Catch::Approx(-0.125).margin(1e-12));
    CHECK(d.argmin == Catch::Approx(0.5).margin(1e-9));
    CHECK_THROWS_AS(chord_deficit(f, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("saturation level splits the Burgers wave classes at q_bar = 1/8",
          "[exact]") {
    // |m| = 1/8 for the (1,0) jump, so the profile stays continuous while
    // q_bar >= 1/8 and tears below.
    {
        WaveClassification wc = classify_wave(builtin_model("burgers_arctan", 0.25), 1.0, 0.0);
        CHECK(wc.wave_class == WaveClass::Continuous);
        CHECK(wc.speed == Catch::Approx(0.5).margin(1e-15));
        CHECK(wc.m == Catch::Approx(-0.125).margin(1e-12));
    }
    {
        WaveClassification wc =
            classify_wave(builtin_model("burgers_arctan", 1.0 / 16.0), 1.0, 0.0);
        CHECK(wc.wave_class == WaveClass::Discontinuous);
        // tear levels solve b^2/2 - b/2 = -1/16, i.e. b = (1 +- sqrt(1/2))/2
        CHECK(wc.b1 == Catch::Approx(0.85355339059327376).margin(1e-9));
        CHECK(wc.b2 == Catch::Approx(0.14644660940672624).margin(1e-9));
        CHECK(wc.b1 + wc.b2 == Catch::Approx(1.0).margin(1e-9));
    }
    CHECK(classify_wave(builtin_model("burgers_arctan", 0.125 + 1e-6), 1.0, 0.0).wave_class ==
          WaveClass::Continuous);
    CHECK(classify_wave(builtin_model("burgers_arctan", 0.125 - 1e-6), 1.0, 0.0).wave_class ==
          WaveClass::Discontinuous);
    CHECK(classify_wave(builtin_model("burgers_arctan", 0.25), 0.0, 1.0).wave_class ==
          WaveClass::NoWave);
}

TEST_CASE("cubic flux classification and tear levels", "[exact]") {
    ModelSpec m;
    m.name = "cubic";
    m.flux = cubic_flux();
    m.dissipation = make_arctan_dissipation(0.2);

    WaveClassification wc = classify_wave(m, 1.0, 0.0);
    CHECK(wc.speed == Catch::Approx(1.0).margin(1e-15));
    CHECK(wc.m == Catch::Approx(-0.38490017945975051).margin(1e-10));
    CHECK(wc.argmin == Catch::Approx(0.57735026918962576).margin(1e-8));
    REQUIRE(wc.wave_class == WaveClass::Discontinuous);
    // roots of b^3 - b = -0.2 on the two flanks of the deficit
    CHECK(wc.b2 == Catch::Approx(0.20914884844131658).margin(1e-9));
    CHECK(wc.b1 == Catch::Approx(0.87888506624997283).margin(1e-9));

    m.dissipation = make_arctan_dissipation(0.4);
    CHECK(classify_wave(m, 1.0, 0.0).wave_class == WaveClass::Continuous);
}

TEST_CASE("continuous profile solves the reduced wave equation", "[exact]") {
    ModelSpec m = builtin_model("burgers_arctan", 0.25);
    std::vector<double> grid = linspace(-40.0, 40.0, 801);
    WaveProfile p = wave_profile(m, 1.0, 0.0, grid);

    REQUIRE(p.b.size() == grid.size());
    // monotone decreasing between the far states
    for (std::size_t i = 0; i + 1 < p.b.size(); ++i) {
        CHECK(p.b[i] >= p.b[i + 1] - 1e-12);
        CHECK(p.b[i] <= 1.0 + 1e-12);
        CHECK(p.b[i] >= 0.0 - 1e-12);
    }
    CHECK(p.eval_b(0.0) == Catch::Approx(0.5).margin(1e-9));  // symmetric flux

    // independent residual: Q(b') - fhat(b) with a central difference slope
    const double dxi = 1e-6;
    double worst = 0.0;
    for (double xi : linspace(-6.0, 6.0, 121)) {
        double slope = (p.eval_b(xi + dxi) - p.eval_b(xi - dxi)) / (2.0 * dxi);
        double res = m.dissipation.eval(slope) -
                     chord_deficit_at(m.flux, 1.0, 0.0, p.eval_b(xi));
        worst = std::max(worst, std::abs(res));
    }
    CHECK(worst < 1e-7);

    // far-state approach and clamping beyond the computed reach
    CHECK(std::abs(p.eval_b(-35.0) - 1.0) < 1e-6);
    CHECK(std::abs(p.eval_b(35.0) - 0.0) < 1e-6);
    CHECK(p.eval_b(-1e9) == 1.0);
    CHECK(p.eval_b(1e9) == 0.0);

    // q_hat samples agree with the deficit of the sampled b
    for (std::size_t i = 0; i < p.b.size(); i += 40)
        CHECK(p.q_hat[i] ==
              Catch::Approx(chord_deficit_at(m.flux, 1.0, 0.0, p.b[i])).margin(1e-12));
}

TEST_CASE("torn profile saturates the dissipation flux at the jump", "[exact]") {
    ModelSpec m = builtin_model("burgers_arctan", 1.0 / 16.0);
    std::vector<double> grid = linspace(-30.0, 30.0, 601);
    WaveProfile p = wave_profile(m, 1.0, 0.0, grid);
    const WaveClassification& wc = p.classification();
    REQUIRE(wc.wave_class == WaveClass::Discontinuous);

    // one-sided limits at xi = 0 are the tear levels
    CHECK(p.eval_b(1e-12) == Catch::Approx(wc.b2).margin(1e-6));
    double left_limit = p.eval_b(-1e-12);
    CHECK(left_limit == Catch::Approx(wc.b1).margin(1e-6));

    // one-sided slopes blow up; their dissipation flux sits at the floor
    CHECK(p.slope_left_at_jump() < -1e3);
    CHECK(p.slope_right_at_jump() < -1e3);
    const double q_floor = m.dissipation.q_minus_inf;
    CHECK(m.dissipation.eval(p.slope_left_at_jump()) ==
          Catch::Approx(q_floor).epsilon(1e-3));
    CHECK(m.dissipation.eval(p.slope_right_at_jump()) ==
          Catch::Approx(q_floor).epsilon(1e-3));

    // the inner jump (b1, b2) passes the local chord test
    CHECK(jump_admissible_local(m.flux, wc.b1, wc.b2));

    // interior residual away from the tear
    const double dxi = 1e-6;
    for (double xi : {-4.0, -1.0, -0.1, 0.1, 1.0, 4.0}) {
        double slope = (p.eval_b(xi + dxi) - p.eval_b(xi - dxi)) / (2.0 * dxi);
        double res = m.dissipation.eval(slope) -
                     chord_deficit_at(m.flux, 1.0, 0.0, p.eval_b(xi));
        CHECK(std::abs(res) < 1e-7);
    }
}

TEST_CASE("profile construction rejects unusable state pairs", "[exact]") {
    ModelSpec m = builtin_model("burgers_arctan", 0.25);
    CHECK_THROWS_AS(wave_profile(m, 0.0, 1.0, linspace(-1.0, 1.0, 11)),
                    std::invalid_argument);
    // vanishing span: chord deficit below resolution
    CHECK_THROWS_AS(wave_profile(m, 1e-8, 0.0, linspace(-1.0, 1.0, 11)),
                    std::invalid_argument);
}

TEST_CASE("local chord test on analytic jumps", "[exact]") {
    FluxFunction burgers = make_burgers_flux();
    CHECK(jump_admissible_local(burgers, 1.0, 0.0));
    CHECK(jump_admissible_local(burgers, 0.3, -0.7));
    CHECK_THROWS_AS(jump_admissible_local(burgers, 0.0, 1.0), std::invalid_argument);

    FluxFunction cubic = cubic_flux();
    // odd jumps put the flux above the chord on the left half
    CHECK_FALSE(jump_admissible_local(cubic, 1.0, -1.0));
    CHECK_FALSE(jump_admissible_local(cubic, 0.5, -0.5));
    // jumps within the convex right branch are fine
    CHECK(jump_admissible_local(cubic, 1.0, 0.2));
    CHECK(jump_admissible_local(cubic, 1.0, 0.0));

    // u^4/4 is convex, so any decreasing jump passes
    FluxFunction quartic = quartic_flux();
    CHECK(jump_admissible_local(quartic, 1.0, 0.0));
    CHECK(jump_admissible_local(quartic, 0.5, -1.0));
}
