#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <bdflux/model.hpp>
#include <bdflux/solver.hpp>

using namespace bdflux;

TEST_CASE("arctan dissipation closed forms", "[model]") {
    DissipationFlux q = make_arctan_dissipation(1.0);
    CHECK(q.eval(0.0) == 0.0);
    CHECK(q.eval(1.0) == Catch::Approx(0.5).epsilon(1e-14));  // (2/pi) atan(1)
    CHECK(q.deriv(0.0) == Catch::Approx(0.63661977236758134).epsilon(1e-14));
    CHECK(q.eval(1e9) == Catch::Approx(1.0).epsilon(1e-8));
    CHECK(q.eval(-1e9) == Catch::Approx(-1.0).epsilon(1e-8));
    CHECK(q.inverse(q.eval(3.7)) == Catch::Approx(3.7).epsilon(1e-12));
    CHECK_THROWS_AS(q.inverse(1.0), std::invalid_argument);
    CHECK_THROWS_AS(q.inverse(-1.5), std::invalid_argument);

    DissipationFlux q16 = make_arctan_dissipation(1.0 / 16.0);
    CHECK(q16.q_minus_inf == Catch::Approx(-0.0625));
    CHECK(q16.eval(0.7) == Catch::Approx(0.38880022442842958 / 16.0).epsilon(1e-14));
}

TEST_CASE("algebraic dissipation closed forms", "[model]") {
    DissipationFlux q = make_algebraic_dissipation(1.0);
    CHECK(q.eval(1.0) == Catch::Approx(0.70710678118654752).epsilon(1e-14));
    CHECK(q.deriv(0.0) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(q.inverse(q.eval(-12.0)) == Catch::Approx(-12.0).epsilon(1e-12));
    REQUIRE(q.tail_exponent_beta.has_value());
    CHECK(*q.tail_exponent_beta == 3.0);
}

TEST_CASE("power-tail dissipation matches the algebraic model at beta = 3", "[model]") {
    DissipationFlux gen = make_power_tail_dissipation(0.5, 3.0);
    DissipationFlux alg = make_algebraic_dissipation(0.5);
    for (double s : {-20.0, -1.0, -0.01, 0.3, 2.0, 150.0})
        CHECK(gen.eval(s) == Catch::Approx(alg.eval(s)).margin(1e-15));
}

TEST_CASE("power-tail dissipation integrates its own derivative", "[model]") {
    // The tabulated primitive with Hermite evaluation must agree with direct
    // quadrature of Q' to well below solver-visible levels.
    for (double beta : {2.5, 4.0, 5.5}) {
        DissipationFlux q = make_power_tail_dissipation(1.0, beta);
        for (double s : {0.3, 1.0, 4.0, 30.0}) {
            double direct = integrate_adaptive([&](double t) { return q.deriv(t); }, 0.0, s, 1e-13);
            CHECK(q.eval(s) == Catch::Approx(direct).margin(1e-9));
        }
        CHECK(q.eval(1e8) == Catch::Approx(1.0).epsilon(1e-4));
        CHECK(q.inverse(q.eval(2.2)) == Catch::Approx(2.2).epsilon(1e-10));
        // odd symmetry
        CHECK(q.eval(-3.1) == Catch::Approx(-q.eval(3.1)).margin(1e-16));
    }
}

TEST_CASE("builtin models pass structural validation", "[model]") {
    for (const char* name : {"burgers_arctan", "burgers_alg", "zero_flux_beta"}) {
        ModelSpec m = builtin_model(name, 0.25, 3.5);
        ValidationReport rep = validate_model(m);
        INFO(name);
        for (const auto& item : rep.items) {
            INFO(item.name << ": " << item.detail);
            CHECK(item.passed);
        }
        CHECK(rep.passed());
    }
    CHECK_THROWS_AS(builtin_model("no_such_model"), std::invalid_argument);
}

TEST_CASE("validation flags a non-monotone dissipation flux", "[model]") {
    ModelSpec m = builtin_model("burgers_arctan", 1.0);
    m.dissipation.eval = [](double s) { return std::sin(s); };  // not monotone, unbounded range
    m.dissipation.deriv = [](double s) { return std::cos(s); };
    ValidationReport rep = validate_model(m);
    CHECK_FALSE(rep.passed());
}

TEST_CASE("tabulated dissipation stays monotone and invertible", "[model]") {
    std::vector<double> s_knots{-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0};
    std::vector<double> q_knots;
    for (double s : s_knots) q_knots.push_back((2.0 / M_PI) * std::atan(s));
    DissipationFlux q = make_tabulated_dissipation(s_knots, q_knots, -1.1, 1.1);
    CHECK(q.smoothness == SmoothnessClass::tabulated_c1);
    // interpolates knots, increases everywhere, approaches the declared bounds
    for (std::size_t i = 0; i < s_knots.size(); ++i)
        CHECK(q.eval(s_knots[i]) == Catch::Approx(q_knots[i]).margin(1e-14));
    double prev = q.eval(-50.0);
    for (double s : linspace(-50.0, 50.0, 2001)) {
        double v = q.eval(s);
        CHECK(v > prev - 1e-15);
        CHECK(v > -1.1);
        CHECK(v < 1.1);
        prev = v;
    }
    for (double y : {-1.05, -0.3, 0.9, 1.05})
        CHECK(q.eval(q.inverse(y)) == Catch::Approx(y).margin(1e-9));

    ModelSpec m;
    m.name = "tabulated";
    m.flux = make_zero_flux();
    m.dissipation = q;
    CHECK(validate_model(m).passed());
}

TEST_CASE("derived constants for the Burgers arctan model", "[model]") {
    ModelSpec m = builtin_model("burgers_arctan", 1.0);
    ModelConstants c = derive_constants(m, 1.0);
    CHECK(c.q_bar == Catch::Approx(1.0));
    CHECK(c.f_lip == Catch::Approx(1.0).epsilon(1e-10));          // max |u| on [-1,1]
    CHECK(c.q1 == Catch::Approx(0.63661977236758134).epsilon(1e-10));  // Q'(0)
    CHECK(c.m_bound == 1.0);

    ModelConstants c2 = derive_constants(m, 2.5);
    CHECK(c2.f_lip == Catch::Approx(2.5).epsilon(1e-10));
    CHECK_THROWS_AS(derive_constants(m, 0.0), std::invalid_argument);
}

TEST_CASE("stable_dt follows the explicit stability bound", "[model]") {
    ModelConstants c;
    c.f_lip = 1.0;
    c.q1 = 2.0 / M_PI;
    // cfl / (f_lip/dx + 2 (q1 + eps)/dx^2)
    CHECK(stable_dt(c, 0.01, 0.01, 0.4) ==
          Catch::Approx(3.0692745751609758e-05).epsilon(1e-12));
    ModelConstants z;
    z.f_lip = 0.0;
    z.q1 = 1.0;
    CHECK(stable_dt(z, 0.05, 0.0, 0.5) == Catch::Approx(6.25e-4).epsilon(1e-12));
}

TEST_CASE("Engquist-Osher flux on the Burgers model", "[model]") {
    FluxFunction f = make_burgers_flux();
    OsherFlux eo(f, -2.0, 2.0);
    REQUIRE(eo.sonic_points().size() == 1);
    CHECK(eo.sonic_points()[0] == Catch::Approx(0.0).margin(1e-10));

    // consistency and the split closed form F(a,b) = f(max(a,0)) + f(min(b,0))
    for (double a : {-1.5, -0.3, 0.0, 0.4, 1.2}) {
        CHECK(eo(a, a) == Catch::Approx(f.eval(a)).margin(1e-12));
        for (double b : {-1.0, -0.2, 0.0, 0.7, 1.5}) {
            double split = f.eval(std::max(a, 0.0)) + f.eval(std::min(b, 0.0));
            CHECK(eo(a, b) == Catch::Approx(split).margin(1e-10));
        }
    }

    // monotone: nondecreasing in the left slot, nonincreasing in the right
    for (double a : linspace(-1.0, 1.0, 11)) {
        for (double b : linspace(-1.0, 1.0, 11)) {
            double d = 1e-4;
            CHECK(eo(a + d, b) >= eo(a, b) - 1e-12);
            CHECK(eo(a, b + d) <= eo(a, b) + 1e-12);
        }
    }
}
