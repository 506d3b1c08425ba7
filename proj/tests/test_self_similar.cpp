#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <bdflux/bdflux.hpp>

using namespace bdflux;

namespace {

// Exact field of the scaling form: u = U - sqrt(t) h(-z) on the left,
// sqrt(t) h(z) on the right, with h(z) = h0 + A z^alpha close to the jump
// and a smooth decay far out (the fit only reads z <= z_hi, so the far
// shape just has to be sane).
GridField scaling_field(const Grid& g, double t, double U, double h0, double A, double alpha) {
    GridField f(g, t);
    double rt = std::sqrt(t);
    auto h = [&](double z) {
        double v = h0 + A * std::pow(z, alpha);
        return std::max(v, 0.0);
    };
    for (int i = 0; i < g.n; ++i) {
        double x = g.x(i);
        double z = std::abs(x) / rt;
        f.u[static_cast<std::size_t>(i)] = x < 0.0 ? U - rt * h(z) : rt * h(z);
    }
    return f;
}

ModelSpec selfsim_model(double beta = 3.0) { return builtin_model("zero_flux_beta", 1.0, beta); }

} // namespace

TEST_CASE("similarity exponent formula", "[selfsim]") {
    // alpha = (beta - 2)/(beta - 1)
    CHECK(selfsimilar_exponent(3.0) == Catch::Approx(0.5).margin(1e-15));
    CHECK(selfsimilar_exponent(4.0) == Catch::Approx(2.0 / 3.0).margin(1e-15));
    CHECK(selfsimilar_exponent(2.5) == Catch::Approx(1.0 / 3.0).margin(1e-15));
    CHECK_THROWS_AS(selfsimilar_exponent(2.0), std::invalid_argument);
    CHECK_THROWS_AS(selfsimilar_exponent(1.5), std::invalid_argument);
}

TEST_CASE("fit recovers exponent and jump level from exact scaling fields", "[selfsim]") {
    Grid g{-2.0, 2.0, 3201};
    const double U = 1.0, h0 = 1.2, A = -1.0, alpha = 0.5;
    std::vector<GridField> snaps;
    for (double t : {0.01, 0.02, 0.04, 0.08})
        snaps.push_back(scaling_field(g, t, U, h0, A, alpha));

    SimilarityFitOptions opt;
    opt.step_height = U;
    SelfSimilarFit fit = fit_similarity(snaps, selfsim_model(), opt);

    CHECK(fit.alpha_theory == Catch::Approx(0.5).margin(1e-15));
    CHECK(fit.alpha_est == Catch::Approx(alpha).margin(0.02));
    CHECK(fit.h0_est == Catch::Approx(h0).margin(0.01));
    CHECK(fit.amp_est == Catch::Approx(A).margin(0.05 * std::abs(A)));
    CHECK(fit.t_star_est == Catch::Approx(U * U / (4.0 * h0 * h0)).epsilon(0.02));
    CHECK(fit.collapse_error < 1e-4);
}

TEST_CASE("fit tracks a different exponent (beta = 4)", "[selfsim]") {
    Grid g{-2.0, 2.0, 3201};
    const double U = 1.0, h0 = 0.9, A = -0.8, alpha = 2.0 / 3.0;
    std::vector<GridField> snaps;
    for (double t : {0.01, 0.02, 0.04, 0.08})
        snaps.push_back(scaling_field(g, t, U, h0, A, alpha));

    SimilarityFitOptions opt;
    opt.step_height = U;
    SelfSimilarFit fit = fit_similarity(snaps, selfsim_model(4.0), opt);
    CHECK(fit.alpha_theory == Catch::Approx(alpha).margin(1e-15));
    CHECK(fit.alpha_est == Catch::Approx(alpha).margin(0.03));
    CHECK(fit.h0_est == Catch::Approx(h0).margin(0.01));
}

TEST_CASE("fit rejects models outside the zero-flux scaling regime", "[selfsim]") {
    Grid g{-2.0, 2.0, 3201};
    std::vector<GridField> snaps;
    for (double t : {0.01, 0.02, 0.04})
        snaps.push_back(scaling_field(g, t, 1.0, 1.2, -1.0, 0.5));

    SimilarityFitOptions opt;
    opt.step_height = 1.0;
    // convective flux present
    CHECK_THROWS_AS(fit_similarity(snaps, builtin_model("burgers_arctan", 1.0, 3.0), opt),
                    std::invalid_argument);
}

TEST_CASE("fit needs at least three usable snapshots", "[selfsim]") {
    Grid g{-2.0, 2.0, 3201};
    std::vector<GridField> snaps;
    snaps.push_back(scaling_field(g, 0.02, 1.0, 1.2, -1.0, 0.5));
    snaps.push_back(scaling_field(g, 0.04, 1.0, 1.2, -1.0, 0.5));
    SimilarityFitOptions opt;
    opt.step_height = 1.0;
    CHECK_THROWS(fit_similarity(snaps, selfsim_model(), opt));
}

TEST_CASE("collapse error flags inconsistent scaling", "[selfsim]") {
    Grid g{-2.0, 2.0, 3201};
    std::vector<GridField> snaps;
    for (double t : {0.01, 0.02, 0.04, 0.08})
        snaps.push_back(scaling_field(g, t, 1.0, 1.2, -1.0, 0.5));
    // corrupt one snapshot's amplitude: h is no longer shared across times
    for (auto& v : snaps[2].u) v *= 1.3;

    SimilarityFitOptions opt;
    opt.step_height = 1.0;
    SelfSimilarFit fit = fit_similarity(snaps, selfsim_model(), opt);
    CHECK(fit.collapse_error > 0.02);
}
