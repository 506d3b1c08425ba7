#pragma once

// Traveling waves u(t,x) = b(x - s t) connecting b_minus (left) to b_plus
// (right). With a bounded dissipation flux the profile ODE Q(b') = fhat(b)
// is solvable only while the chord deficit fhat stays above the saturation
// level Q(-inf); otherwise the profile tears at the level where Q saturates
// and an admissible jump with infinite one-sided slopes appears.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "model.hpp"
#include "numerics.hpp"

namespace bdflux {

// Rankine-Hugoniot speed of the (b_minus, b_plus) jump.
inline double wave_speed(const FluxFunction& f, double b_minus, double b_plus) {
    if (b_minus == b_plus)
        throw std::invalid_argument("wave_speed: states must differ");
    return (f.eval(b_plus) - f.eval(b_minus)) / (b_plus - b_minus);
}

// fhat(b) = f(b) - f(b_minus) - s (b - b_minus): flux deficit against the
// chord through the two states. Zero at both states, <= 0 between them for
// admissible decreasing jumps.
inline double chord_deficit_at(const FluxFunction& f, double b_minus, double b_plus, double b) {
    const double s = wave_speed(f, b_minus, b_plus);
    return f.eval(b) - f.eval(b_minus) - s * (b - b_minus);
}

struct ChordDeficit {
    double m = 0.0;       // min of fhat on [b_plus, b_minus] (<= 0)
    double argmin = 0.0;
};

inline ChordDeficit chord_deficit(const FluxFunction& f, double b_minus, double b_plus) {
    if (!(b_minus > b_plus))
        throw std::invalid_argument("chord_deficit: requires b_minus > b_plus");
    auto neg_fhat = [&](double b) { return -chord_deficit_at(f, b_minus, b_plus, b); };
    GridMaxResult r = grid_max_refine(neg_fhat, linspace(b_plus, b_minus, 10001), 1e-12);
    ChordDeficit d;
    d.m = -r.value;
    d.argmin = r.arg;
    if (d.m > 0.0) d.m = 0.0;  // endpoints are exact zeros of fhat
    return d;
}

enum class WaveClass { Continuous, Discontinuous, NoWave };

inline const char* to_string(WaveClass c) {
    switch (c) {
        case WaveClass::Continuous: return "continuous";
        case WaveClass::Discontinuous: return "discontinuous";
        default: return "no_wave";
    }
}

struct WaveClassification {
    WaveClass wave_class = WaveClass::NoWave;
    double b_minus = 0.0, b_plus = 0.0;
    double speed = 0.0;
    double m = 0.0;        // chord deficit minimum
    double argmin = 0.0;
    double b1 = 0.0, b2 = 0.0;  // tear levels (Discontinuous only), b2 < b1
};

// Classify the (b_minus, b_plus) connection. Increasing data admit no
// traveling wave of this type; decreasing data give a continuous profile
// while |m| <= |Q(-inf)| and a torn profile with an admissible jump once the
// deficit dips below the saturation level. The tear levels solve
// fhat(b) = Q(-inf) on the two monotone flanks of the deficit.
inline WaveClassification classify_wave(const ModelSpec& model, double b_minus, double b_plus) {
    if (b_minus == b_plus)
        throw std::invalid_argument("classify_wave: states must differ");
    WaveClassification wc;
    wc.b_minus = b_minus;
    wc.b_plus = b_plus;
    wc.speed = wave_speed(model.flux, b_minus, b_plus);
    if (b_minus < b_plus) {
        wc.wave_class = WaveClass::NoWave;
        return wc;
    }
    ChordDeficit d = chord_deficit(model.flux, b_minus, b_plus);
    wc.m = d.m;
    wc.argmin = d.argmin;
    const double q_floor = model.dissipation.q_minus_inf;  // < 0
    if (std::abs(wc.m) <= std::abs(q_floor)) {
        wc.wave_class = WaveClass::Continuous;
        return wc;
    }
    wc.wave_class = WaveClass::Discontinuous;
    auto g = [&](double b) { return chord_deficit_at(model.flux, b_minus, b_plus, b) - q_floor; };
    wc.b2 = find_root(g, b_plus, d.argmin, 1e-12 * (b_minus - b_plus));
    wc.b1 = find_root(g, d.argmin, b_minus, 1e-12 * (b_minus - b_plus));
    return wc;
}

// ----------------------------------------------------------------- profiles

namespace detail {

// One monotone flank of the profile, parametrized by tau = distance of b
// from its anchor level (the center for continuous profiles, a tear level
// for torn ones). |xi| grows from 0 with d|xi|/dtau = |1/Q^{-1}(fhat)|;
// the mesh is geometrically graded into the far state where xi diverges
// logarithmically.
struct WaveBranch {
    double anchor = 0.0;
    double endpoint = 0.0;   // far state, approached as |xi| -> inf
    double sign = 1.0;       // b = anchor + sign * tau
    std::vector<double> tau;
    std::vector<double> xi_abs;

    double b_of_tau(double t) const { return anchor + sign * t; }
    double reach() const { return xi_abs.back(); }
};

} // namespace detail

struct WaveProfileOptions {
    double endpoint_gap_rel = 1e-9;  // truncation distance from the far states
    double mesh_ratio = 0.75;        // geometric grading factor
};

// Sampled and continuously evaluable traveling-wave profile. Construction
// integrates xi(b) = int db / Q^{-1}(fhat(b)) on graded meshes; evaluation
// inverts the map with panel-local quadrature and Newton, so sampled values
// carry quadrature accuracy rather than interpolation error. Beyond the
// computed reach the profile is clamped to the far states (the remaining
// gap is below endpoint_gap_rel * jump span).
class WaveProfile {
public:
    WaveProfile(const ModelSpec& model, const WaveClassification& wc,
                const std::vector<double>& xi_grid, const WaveProfileOptions& opt = {})
        : model_(model), wc_(wc) {
        if (wc_.wave_class == WaveClass::NoWave)
            throw std::invalid_argument("WaveProfile: no traveling wave for these states");
        const double span = wc_.b_minus - wc_.b_plus;
        if (std::abs(wc_.m) < 1e-13 * (1.0 + span))
            throw std::invalid_argument("WaveProfile: degenerate wave (vanishing chord deficit)");
        const double gap = opt.endpoint_gap_rel * span;
        if (wc_.wave_class == WaveClass::Continuous) {
            const double b0 = 0.5 * (wc_.b_minus + wc_.b_plus);
            left_ = build_branch(b0, wc_.b_minus, gap, opt.mesh_ratio);
            right_ = build_branch(b0, wc_.b_plus, gap, opt.mesh_ratio);
        } else {
            left_ = build_branch(wc_.b1, wc_.b_minus, gap, opt.mesh_ratio);
            right_ = build_branch(wc_.b2, wc_.b_plus, gap, opt.mesh_ratio);
        }
        xi = xi_grid;
        b.reserve(xi.size());
        q_hat.reserve(xi.size());
        for (double x : xi) {
            double bv = eval_b(x);
            b.push_back(bv);
            q_hat.push_back(eval_q_hat_from_b(bv));
        }
        const double probe = 1e-8;
        slope_left_at_jump_ = (eval_b(0.0) - eval_b(-probe)) / probe;
        slope_right_at_jump_ = (eval_b(probe) - eval_b(0.0)) / probe;
        if (wc_.wave_class == WaveClass::Discontinuous) {
            // one-sided slopes measured from each flank of the tear
            slope_left_at_jump_ = (left_.anchor - eval_b(-probe)) / probe;
            slope_right_at_jump_ = (eval_b(probe) - right_.anchor) / probe;
        }
    }

    std::vector<double> xi, b, q_hat;

    const WaveClassification& classification() const { return wc_; }

    // b(xi); xi < 0 is the b_minus side.
    double eval_b(double x) const {
        const detail::WaveBranch& br = x < 0.0 ? left_ : right_;
        return eval_on_branch(br, std::abs(x));
    }

    double eval_q_hat(double x) const { return eval_q_hat_from_b(eval_b(x)); }

    double slope_left_at_jump() const { return slope_left_at_jump_; }
    double slope_right_at_jump() const { return slope_right_at_jump_; }

private:
    double fhat(double bb) const {
        return chord_deficit_at(model_.flux, wc_.b_minus, wc_.b_plus, bb);
    }

    // |1/Q^{-1}(fhat(b))| with guards against rounding at the exact zeros of
    // fhat (far states) and at the saturation level (tear levels).
    double abs_integrand(double bb) const {
        const double q_floor = model_.dissipation.q_minus_inf;
        double y = fhat(bb);
        if (y >= -1e-300) return std::numeric_limits<double>::infinity();
        if (y <= q_floor) return 0.0;
        double slope = model_.dissipation.inverse(y);
        return std::abs(1.0 / slope);
    }

    detail::WaveBranch build_branch(double anchor, double endpoint, double gap, double ratio) {
        detail::WaveBranch br;
        br.anchor = anchor;
        br.endpoint = endpoint;
        br.sign = endpoint > anchor ? 1.0 : -1.0;
        const double span = std::abs(endpoint - anchor);
        std::vector<double> dist{span};  // distance from endpoint
        while (dist.back() > gap) dist.push_back(std::max(gap, dist.back() * ratio));
        br.tau.reserve(dist.size());
        for (double d : dist) br.tau.push_back(span - d);
        br.xi_abs.assign(br.tau.size(), 0.0);
        auto g = [&](double t) { return abs_integrand(br.b_of_tau(t)); };
        for (std::size_t k = 1; k < br.tau.size(); ++k)
            br.xi_abs[k] = br.xi_abs[k - 1] + integrate_gl(g, br.tau[k - 1], br.tau[k], 15);
        return br;
    }

    double eval_on_branch(const detail::WaveBranch& br, double xi_target) const {
        if (xi_target >= br.reach()) return br.endpoint;
        auto it = std::upper_bound(br.xi_abs.begin(), br.xi_abs.end(), xi_target);
        std::size_t k = static_cast<std::size_t>(it - br.xi_abs.begin());
        if (k == 0) return br.anchor;
        --k;
        double lo = br.tau[k], hi = br.tau[k + 1];
        auto g = [&](double t) { return abs_integrand(br.b_of_tau(t)); };
        auto xi_from_lo = [&](double t) { return integrate_gl(g, lo, t, 15); };
        const double want = xi_target - br.xi_abs[k];
        double t = 0.5 * (lo + hi), a = lo, bb = hi;
        for (int iter = 0; iter < 60; ++iter) {
            double err = xi_from_lo(t) - want;
            if (std::abs(err) < 1e-14 * (1.0 + xi_target)) break;
            if (err > 0.0) bb = t;
            else a = t;
            double d = g(t);
            double tn = (std::isfinite(d) && d > 0.0) ? t - err / d : 0.5 * (a + bb);
            t = (tn > a && tn < bb) ? tn : 0.5 * (a + bb);
            if (bb - a < 1e-16 * (1.0 + std::abs(bb))) break;
        }
        return br.b_of_tau(t);
    }

    double eval_q_hat_from_b(double bb) const {
        double y = fhat(bb);
        double q_floor = model_.dissipation.q_minus_inf;
        return std::max(std::min(y, 0.0), q_floor);
    }

    ModelSpec model_;
    WaveClassification wc_;
    detail::WaveBranch left_, right_;
    double slope_left_at_jump_ = 0.0, slope_right_at_jump_ = 0.0;
};

inline WaveProfile wave_profile(const ModelSpec& model, double b_minus, double b_plus,
                                const std::vector<double>& xi_grid,
                                const WaveProfileOptions& opt = {}) {
    WaveClassification wc = classify_wave(model, b_minus, b_plus);
    return WaveProfile(model, wc, xi_grid, opt);
}

// --------------------------------------------------- local jump admissibility

// Chord test at a decreasing jump: the flux must stay on or below the chord
// through the two states, i.e. fhat <= 0 on [b_p0, b_m0].
inline bool jump_admissible_local(const FluxFunction& f, double b_m0, double b_p0,
                                  double tol = 1e-12) {
    if (!(b_m0 > b_p0))
        throw std::invalid_argument("jump_admissible_local: requires b_m0 > b_p0");
    auto fh = [&](double b) { return chord_deficit_at(f, b_m0, b_p0, b); };
    GridMaxResult r = grid_max_refine(fh, linspace(b_p0, b_m0, 1001), 1e-10);
    const double scale = 1.0 + std::abs(f.eval(b_m0)) + std::abs(f.eval(b_p0));
    return r.value <= tol * scale;
}

} // namespace bdflux
