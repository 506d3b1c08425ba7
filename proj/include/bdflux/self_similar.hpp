#pragma once

// Pure-dissipation step release: with f = 0 and a power-tail dissipation
// flux (Q' ~ |s|^{-beta}) the step of height U relaxes self-similarly,
// u = sqrt(t) h(x/sqrt(t)) on the right half-line, with a cusp
// h(z) = h(0) + A z^alpha, alpha = (beta-2)/(beta-1), and the residual jump
// U - 2 sqrt(t) h(0) closing at t* = (U / 2h(0))^2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "grid.hpp"
#include "model.hpp"
#include "numerics.hpp"

namespace bdflux {

inline double selfsimilar_exponent(double beta) {
    if (!(beta > 2.0))
        throw std::invalid_argument("selfsimilar_exponent: requires tail exponent beta > 2");
    return (beta - 2.0) / (beta - 1.0);
}

struct SimilarityFitOptions {
    double step_height = 1.0;   // U of the released step
    double jump_location = 0.0;
    double z_hi = 0.2;          // upper end of the fit window
    double z_lo = 0.0;          // lower end; 0 means the resolution floor floor_cells dx / sqrt(t)
    double floor_cells = 4.0;   // cells to skip above the jump before trusting the cusp shape
    std::size_t max_snapshots = 3;  // use the latest usable snapshots (best z resolution)
    int min_points = 24;
};

struct SelfSimilarFit {
    double alpha_est = 0.0;
    double alpha_theory = 0.0;
    double h0_est = 0.0;
    double amp_est = 0.0;       // A in h(z) ~ h0 + A z^alpha (negative)
    double t_star_est = 0.0;    // (U / 2 h0)^2 from the fitted h0
    double collapse_error = 0.0;
    std::size_t snapshots_used = 0;
    LineFit regression;
};

namespace detail {

struct RescaledSnapshot {
    double t = 0.0;
    double z_floor = 0.0;
    PchipInterpolant h;  // h(z) = u(t, z sqrt(t)) / sqrt(t), right half-line
};

// Least squares of pooled h samples on (1, z^a); h0 and the cusp amplitude
// are linear once the exponent is fixed, so the search stays one-dimensional.
struct CuspFit {
    double sse = std::numeric_limits<double>::infinity();
    double h0 = 0.0;
    double amp = 0.0;
};

inline CuspFit cusp_fit_at(const std::vector<double>& z, const std::vector<double>& h,
                           double a) {
    double s1 = 0, sw = 0, sww = 0, sh = 0, swh = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        double w = std::pow(z[i], a);
        s1 += 1.0;
        sw += w;
        sww += w * w;
        sh += h[i];
        swh += w * h[i];
    }
    CuspFit r;
    double det = s1 * sww - sw * sw;
    if (!(std::abs(det) > 1e-300)) return r;
    r.h0 = (sh * sww - sw * swh) / det;
    r.amp = (s1 * swh - sw * sh) / det;
    r.sse = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        double e = h[i] - (r.h0 + r.amp * std::pow(z[i], a));
        r.sse += e * e;
    }
    return r;
}

} // namespace detail

// Fit the similarity exponent and cusp level from solver snapshots of a
// released step. Snapshots are rescaled to (z, h) on the right half-line;
// the cusp h(z) = h0 + A z^alpha is then fit to the pooled samples by a
// one-dimensional search over alpha with (h0, A) profiled out linearly.
// Estimating h0 jointly matters: anchoring it from near-jump cells first
// biases the exponent, because those cells sit inside the discrete layer.
inline SelfSimilarFit fit_similarity(const std::vector<GridField>& snapshots,
                                     const ModelSpec& model,
                                     const SimilarityFitOptions& opt = {}) {
    if (std::abs(model.flux.eval(1.0)) > 1e-12 || std::abs(model.flux.eval(-1.0)) > 1e-12)
        throw std::invalid_argument("fit_similarity: model must have zero convective flux");
    if (!model.dissipation.tail_exponent_beta)
        throw std::invalid_argument("fit_similarity: dissipation tail exponent unknown");
    SelfSimilarFit fit;
    fit.alpha_theory = selfsimilar_exponent(*model.dissipation.tail_exponent_beta);

    std::vector<detail::RescaledSnapshot> scaled;
    for (const GridField& f : snapshots) {
        if (!(f.t > 0.0)) continue;
        const double sq = std::sqrt(f.t);
        std::vector<double> zs, hs;
        for (int i = 0; i < f.grid.n; ++i) {
            double x = f.grid.x(i) - opt.jump_location;
            if (x <= 0.0) continue;
            zs.push_back(x / sq);
            hs.push_back(f.u[static_cast<std::size_t>(i)] / sq);
        }
        if (zs.size() < 8) continue;
        detail::RescaledSnapshot rs;
        rs.t = f.t;
        rs.z_floor = std::max(opt.z_lo, opt.floor_cells * f.grid.dx() / sq);
        // A window thinner than a factor 2 in z cannot separate the cusp
        // term from the constant; skip such snapshots entirely.
        if (rs.z_floor > 0.5 * opt.z_hi) continue;
        rs.h = PchipInterpolant(std::move(zs), std::move(hs));
        scaled.push_back(std::move(rs));
    }
    if (scaled.size() < 3)
        throw std::invalid_argument("fit_similarity: need at least 3 usable snapshots");
    fit.snapshots_used = scaled.size();

    std::sort(scaled.begin(), scaled.end(),
              [](const detail::RescaledSnapshot& a, const detail::RescaledSnapshot& b) {
                  return a.t < b.t;
              });
    std::vector<detail::RescaledSnapshot> pool_src = scaled;
    if (opt.max_snapshots > 0 && pool_src.size() > opt.max_snapshots)
        pool_src.erase(pool_src.begin(),
                       pool_src.end() - static_cast<std::ptrdiff_t>(opt.max_snapshots));

    std::vector<double> pz, ph;
    for (const auto& rs : pool_src) {
        for (int j = 0; j < 48; ++j) {
            double z = rs.z_floor * std::pow(opt.z_hi / rs.z_floor, j / 47.0);
            pz.push_back(z);
            ph.push_back(rs.h.eval(z));
        }
    }
    if (pz.size() < static_cast<std::size_t>(opt.min_points))
        throw std::invalid_argument("fit_similarity: too few points in the fit window");

    double best_a = 0.0;
    detail::CuspFit best;
    for (int i = 0; i <= 170; ++i) {
        double a = 0.05 + 0.90 * i / 170.0;
        detail::CuspFit c = detail::cusp_fit_at(pz, ph, a);
        if (c.sse < best.sse) { best = c; best_a = a; }
    }
    for (int pass = 0; pass < 40; ++pass) {
        double step = (0.90 / 170.0) * std::pow(0.8, pass);
        for (double a : {best_a - step, best_a + step}) {
            if (a <= 0.02 || a >= 0.98) continue;
            detail::CuspFit c = detail::cusp_fit_at(pz, ph, a);
            if (c.sse < best.sse) { best = c; best_a = a; }
        }
    }
    if (best_a < 0.06 || best_a > 0.94)
        throw std::invalid_argument("fit_similarity: exponent search hit the admissible boundary");
    fit.alpha_est = best_a;
    fit.h0_est = best.h0;
    fit.amp_est = best.amp;
    fit.regression.slope = best_a;
    fit.regression.intercept = std::log(std::max(std::abs(best.amp), 1e-300));
    if (!(fit.h0_est > 0.0))
        throw std::invalid_argument("fit_similarity: nonpositive fitted cusp level");
    if (!(fit.amp_est < 0.0))
        throw std::invalid_argument("fit_similarity: fitted profile does not decrease off the jump");
    fit.t_star_est = std::pow(opt.step_height / (2.0 * fit.h0_est), 2.0);

    // Collapse quality: mean pairwise L1 distance of the rescaled curves on a
    // shared window, relative to the mean curve magnitude.
    double z_lo_common = 0.0, z_hi_common = std::numeric_limits<double>::infinity();
    for (const auto& rs : scaled) {
        z_lo_common = std::max(z_lo_common, rs.z_floor);
        z_hi_common = std::min(z_hi_common, rs.h.x_back());
    }
    z_hi_common = std::min(z_hi_common, 10.0 * opt.z_hi);
    if (z_hi_common > z_lo_common) {
        std::vector<double> zc = linspace(z_lo_common, z_hi_common, 64);
        double dist_sum = 0.0, mag_sum = 0.0;
        std::size_t n_pairs = 0;
        for (std::size_t a = 0; a < scaled.size(); ++a) {
            for (double z : zc) mag_sum += std::abs(scaled[a].h.eval(z));
            for (std::size_t b2 = a + 1; b2 < scaled.size(); ++b2) {
                double d = 0.0;
                for (double z : zc) d += std::abs(scaled[a].h.eval(z) - scaled[b2].h.eval(z));
                dist_sum += d / zc.size();
                ++n_pairs;
            }
        }
        double mag = mag_sum / (scaled.size() * zc.size());
        if (n_pairs > 0 && mag > 0.0) fit.collapse_error = (dist_sum / n_pairs) / mag;
    }
    return fit;
}

} // namespace bdflux
