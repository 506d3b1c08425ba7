#pragma once

// Model layer: a convective flux f(u) paired with a bounded, strictly
// increasing dissipation flux Q(u_x). Saturation of Q at finite values
// q_minus_inf < 0 < q_plus_inf is what allows discontinuous profiles to
// persist, so the saturation levels and the derived constants (Lipschitz
// bound of f, slope bound of Q) are first-class data here.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace bdflux {

enum class Convexity { convex, nonconvex, unknown };
enum class SmoothnessClass { closed_form, tabulated_c1 };

struct FluxFunction {
    std::function<double(double)> eval;
    std::function<double(double)> deriv;
    Convexity convexity_hint = Convexity::unknown;
    SmoothnessClass smoothness = SmoothnessClass::closed_form;
};

struct DissipationFlux {
    std::function<double(double)> eval;
    std::function<double(double)> deriv;
    std::function<double(double)> inverse;  // defined on (q_minus_inf, q_plus_inf)
    double q_minus_inf = -1.0;
    double q_plus_inf = 1.0;
    std::optional<double> tail_exponent_beta;
    SmoothnessClass smoothness = SmoothnessClass::closed_form;
};

struct ModelSpec {
    std::string name;
    FluxFunction flux;
    DissipationFlux dissipation;
};

// Constants entering stability and a priori bounds: q_bar is the larger
// saturation magnitude, f_lip the Lipschitz constant of f on [-M, M], q1 the
// global slope bound of Q, m_bound the sup-norm box [-M, M] they refer to.
struct ModelConstants {
    double q_bar = 0.0;
    double f_lip = 0.0;
    double q1 = 0.0;
    double m_bound = 0.0;
};

// ----------------------------------------------------------------- builtins

inline FluxFunction make_burgers_flux() {
    FluxFunction f;
    f.eval = [](double u) { return 0.5 * u * u; };
    f.deriv = [](double u) { return u; };
    f.convexity_hint = Convexity::convex;
    return f;
}

inline FluxFunction make_zero_flux() {
    FluxFunction f;
    f.eval = [](double) { return 0.0; };
    f.deriv = [](double) { return 0.0; };
    f.convexity_hint = Convexity::convex;
    return f;
}

inline DissipationFlux make_arctan_dissipation(double q_bar) {
    if (!(q_bar > 0.0)) throw std::invalid_argument("arctan dissipation: q_bar must be > 0");
    DissipationFlux q;
    const double a = 2.0 / M_PI * q_bar;
    q.eval = [a](double s) { return a * std::atan(s); };
    q.deriv = [a](double s) { return a / (1.0 + s * s); };
    q.inverse = [q_bar](double y) {
        if (!(std::abs(y) < q_bar))
            throw std::invalid_argument("dissipation inverse: value outside saturation range");
        return std::tan(y * M_PI / (2.0 * q_bar));
    };
    q.q_minus_inf = -q_bar;
    q.q_plus_inf = q_bar;
    q.tail_exponent_beta = 2.0;
    return q;
}

inline DissipationFlux make_algebraic_dissipation(double q_bar) {
    if (!(q_bar > 0.0)) throw std::invalid_argument("algebraic dissipation: q_bar must be > 0");
    DissipationFlux q;
    q.eval = [q_bar](double s) { return q_bar * s / std::sqrt(1.0 + s * s); };
    q.deriv = [q_bar](double s) { return q_bar * std::pow(1.0 + s * s, -1.5); };
    q.inverse = [q_bar](double y) {
        double r = y / q_bar;
        if (!(std::abs(r) < 1.0))
            throw std::invalid_argument("dissipation inverse: value outside saturation range");
        return r / std::sqrt(1.0 - r * r);
    };
    q.q_minus_inf = -q_bar;
    q.q_plus_inf = q_bar;
    q.tail_exponent_beta = 3.0;
    return q;
}

namespace detail {

// Cumulative primitive P(theta) = int_0^theta cos(t)^(beta-2) dt on [0, pi/2],
// used for the general-exponent dissipation Q(s) = c * P(arctan s) (odd in s).
// The mesh is graded into pi/2 where the integrand loses smoothness for
// non-integer beta. Node values come from panelwise Gauss quadrature;
// between nodes a cubic Hermite using the exact derivative cos(t)^(beta-2)
// keeps the evaluation cheap enough for the solver's per-face use while the
// graded mesh holds the interpolation error near roundoff.
struct CosPowerPrimitive {
    double beta;
    std::vector<double> theta;  // mesh nodes, theta[0] = 0
    std::vector<double> P;      // cumulative integral at nodes
    double total = 0.0;         // P at the last node (~ pi/2)

    explicit CosPowerPrimitive(double b) : beta(b) {
        const double half_pi = 0.5 * M_PI;
        const int n_uniform = 512;
        for (int i = 0; i <= n_uniform; ++i)
            theta.push_back((half_pi - 2e-2) * i / n_uniform);
        double gap = 2e-2;
        while (gap > 1e-13) {
            gap *= 0.5;
            theta.push_back(half_pi - gap);
        }
        P.assign(theta.size(), 0.0);
        auto integrand = [this](double t) { return std::pow(std::cos(t), beta - 2.0); };
        for (std::size_t k = 1; k < theta.size(); ++k)
            P[k] = P[k - 1] + integrate_gl(integrand, theta[k - 1], theta[k], 15);
        // Closing sliver between the last node and pi/2: cos t ~ (pi/2 - t).
        const double t_last = half_pi - theta.back();
        total = P.back() + std::pow(t_last, beta - 1.0) / (beta - 1.0);
    }

    double value(double th) const {
        const double half_pi = 0.5 * M_PI;
        if (th <= 0.0) return 0.0;
        if (th >= theta.back())
            return total - std::pow(half_pi - th, beta - 1.0) / (beta - 1.0);
        auto it = std::upper_bound(theta.begin(), theta.end(), th);
        std::size_t k = static_cast<std::size_t>(it - theta.begin()) - 1;
        const double h = theta[k + 1] - theta[k];
        const double s = (th - theta[k]) / h;
        const double s2 = s * s, s3 = s2 * s;
        return (2.0 * s3 - 3.0 * s2 + 1.0) * P[k] + (-2.0 * s3 + 3.0 * s2) * P[k + 1] +
               h * ((s3 - 2.0 * s2 + s) * slope(theta[k]) + (s3 - s2) * slope(theta[k + 1]));
    }

    double slope(double th) const { return std::pow(std::cos(th), beta - 2.0); }
};

} // namespace detail

inline DissipationFlux make_power_tail_dissipation(double q_bar, double beta) {
    if (!(q_bar > 0.0)) throw std::invalid_argument("power-tail dissipation: q_bar must be > 0");
    if (!(beta > 1.0))
        throw std::invalid_argument("power-tail dissipation: beta must exceed 1 for saturation");
    if (std::abs(beta - 3.0) < 1e-12) {
        DissipationFlux q = make_algebraic_dissipation(q_bar);
        return q;
    }
    auto prim = std::make_shared<detail::CosPowerPrimitive>(beta);
    const double c = q_bar / prim->total;
    DissipationFlux q;
    q.eval = [prim, c](double s) {
        double v = c * prim->value(std::atan(std::abs(s)));
        return s < 0.0 ? -v : v;
    };
    q.deriv = [c, beta](double s) { return c * std::pow(1.0 + s * s, -0.5 * beta); };
    q.inverse = [prim, c, q_bar](double y) {
        if (!(std::abs(y) < q_bar))
            throw std::invalid_argument("dissipation inverse: value outside saturation range");
        const double target = std::abs(y) / c;
        double lo = 0.0, hi = 0.5 * M_PI;
        for (int it = 0; it < 120; ++it) {
            double mid = 0.5 * (lo + hi);
            if (prim->value(mid) < target)
                lo = mid;
            else
                hi = mid;
            if (hi - lo < 1e-16) break;
        }
        double th = 0.5 * (lo + hi);
        for (int it = 0; it < 6; ++it) {
            double d = prim->slope(th);
            if (d <= 0.0) break;
            double step = (prim->value(th) - target) / d;
            double thn = th - step;
            if (thn <= 0.0 || thn >= 0.5 * M_PI) break;
            th = thn;
            if (std::abs(step) < 1e-17) break;
        }
        double s = std::tan(th);
        return y < 0.0 ? -s : s;
    };
    q.q_minus_inf = -q_bar;
    q.q_plus_inf = q_bar;
    q.tail_exponent_beta = beta;
    return q;
}

// Tabulated monotone data -> C^1 dissipation flux. Outside the table the
// flux continues toward the declared saturations with a slope-matched
// reciprocal approach; unlike an exponential tail this stays strictly
// inside the bounds in double precision out to huge slopes.
inline DissipationFlux make_tabulated_dissipation(const std::vector<double>& s_knots,
                                                  const std::vector<double>& q_knots,
                                                  double q_minus_inf, double q_plus_inf) {
    if (s_knots.size() < 4) throw std::invalid_argument("tabulated dissipation: need >= 4 knots");
    if (!(q_minus_inf < q_knots.front() && q_knots.back() < q_plus_inf))
        throw std::invalid_argument("tabulated dissipation: knots must lie inside saturations");
    for (std::size_t i = 0; i + 1 < q_knots.size(); ++i)
        if (!(q_knots[i + 1] > q_knots[i]))
            throw std::invalid_argument("tabulated dissipation: values must increase");
    auto interp = std::make_shared<PchipInterpolant>(s_knots, q_knots);
    const double s_lo = s_knots.front(), s_hi = s_knots.back();
    const double q_lo = q_knots.front(), q_hi = q_knots.back();
    const double d_lo = interp->deriv(s_lo), d_hi = interp->deriv(s_hi);
    if (!(d_lo > 0.0) || !(d_hi > 0.0))
        throw std::invalid_argument("tabulated dissipation: end slopes must be positive");
    const double gap_hi = q_plus_inf - q_hi;   // > 0
    const double gap_lo = q_lo - q_minus_inf;  // > 0
    DissipationFlux q;
    q.eval = [=](double s) {
        if (s > s_hi) return q_plus_inf - gap_hi / (1.0 + (s - s_hi) * d_hi / gap_hi);
        if (s < s_lo) return q_minus_inf + gap_lo / (1.0 - (s - s_lo) * d_lo / gap_lo);
        return interp->eval(s);
    };
    q.deriv = [=](double s) {
        if (s > s_hi) {
            double r = 1.0 + (s - s_hi) * d_hi / gap_hi;
            return d_hi / (r * r);
        }
        if (s < s_lo) {
            double r = 1.0 - (s - s_lo) * d_lo / gap_lo;
            return d_lo / (r * r);
        }
        return interp->deriv(s);
    };
    q.inverse = [=](double y) {
        if (!(y > q_minus_inf && y < q_plus_inf))
            throw std::invalid_argument("dissipation inverse: value outside saturation range");
        if (y > q_hi) return s_hi + (gap_hi / (q_plus_inf - y) - 1.0) * gap_hi / d_hi;
        if (y < q_lo) return s_lo - (gap_lo / (y - q_minus_inf) - 1.0) * gap_lo / d_lo;
        double lo = s_lo, hi = s_hi;
        for (int it = 0; it < 100; ++it) {
            double mid = 0.5 * (lo + hi);
            if (interp->eval(mid) < y)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    q.q_minus_inf = q_minus_inf;
    q.q_plus_inf = q_plus_inf;
    q.smoothness = SmoothnessClass::tabulated_c1;
    return q;
}

inline FluxFunction make_tabulated_flux(const std::vector<double>& u_knots,
                                        const std::vector<double>& f_knots) {
    if (u_knots.size() < 4) throw std::invalid_argument("tabulated flux: need >= 4 knots");
    auto interp = std::make_shared<PchipInterpolant>(u_knots, f_knots);
    FluxFunction f;
    f.eval = [interp](double u) { return interp->eval(u); };
    f.deriv = [interp](double u) { return interp->deriv(u); };
    f.convexity_hint = Convexity::unknown;
    f.smoothness = SmoothnessClass::tabulated_c1;
    return f;
}

// Named builtin models. "zero_flux_beta" takes the tail exponent beta.
inline ModelSpec builtin_model(const std::string& name, double q_bar = 1.0, double beta = 3.0) {
    ModelSpec m;
    m.name = name;
    if (name == "burgers_arctan") {
        m.flux = make_burgers_flux();
        m.dissipation = make_arctan_dissipation(q_bar);
    } else if (name == "burgers_alg") {
        m.flux = make_burgers_flux();
        m.dissipation = make_algebraic_dissipation(q_bar);
    } else if (name == "zero_flux_beta") {
        m.flux = make_zero_flux();
        m.dissipation = make_power_tail_dissipation(q_bar, beta);
    } else {
        throw std::invalid_argument("builtin_model: unknown model name '" + name + "'");
    }
    return m;
}

// --------------------------------------------------------------- validation

struct ValidationItem {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::string model_name;
    std::string smoothness;
    std::vector<ValidationItem> items;

    bool passed() const {
        for (const auto& it : items)
            if (!it.passed) return false;
        return true;
    }
};

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

template <class F>
void check_item(ValidationReport& rep, const std::string& name, F&& body) {
    ValidationItem item;
    item.name = name;
    try {
        auto [pass, detail] = body();
        item.passed = pass;
        item.detail = detail;
    } catch (const std::exception& e) {
        item.passed = false;
        item.detail = std::string("evaluation failed: ") + e.what();
    }
    rep.items.push_back(std::move(item));
}

} // namespace detail

// Structural checks on a model: normalization f(0)=0 and Q(0)=0, derivative
// consistency against finite differences, strict monotonicity and bounds of
// Q, saturation at large slopes, and inverse round-trip accuracy. Non-finite
// evaluations turn into failed items, not crashes.
inline ValidationReport validate_model(const ModelSpec& m) {
    using detail::check_item;
    using detail::fmt;
    ValidationReport rep;
    rep.model_name = m.name;
    rep.smoothness = (m.dissipation.smoothness == SmoothnessClass::tabulated_c1 ||
                      m.flux.smoothness == SmoothnessClass::tabulated_c1)
                         ? "tabulated_c1"
                         : "closed_form";
    const DissipationFlux& q = m.dissipation;
    const FluxFunction& f = m.flux;

    check_item(rep, "flux_zero_at_origin", [&] {
        double v = f.eval(0.0);
        bool ok = std::isfinite(v) && std::abs(v) <= 1e-12;
        return std::pair{ok, "f(0) = " + fmt(v)};
    });

    check_item(rep, "flux_deriv_consistent", [&] {
        double worst = 0.0, at = 0.0;
        for (double u : linspace(-2.0, 2.0, 81)) {
            const double h = 1e-6;
            double fd = (f.eval(u + h) - f.eval(u - h)) / (2.0 * h);
            double d = f.deriv(u);
            if (!std::isfinite(fd) || !std::isfinite(d))
                return std::pair{false, "non-finite flux value near u = " + fmt(u)};
            double err = std::abs(fd - d) / (1.0 + std::abs(d));
            if (err > worst) {
                worst = err;
                at = u;
            }
        }
        return std::pair{worst <= 1e-5, "max rel deviation " + fmt(worst) + " at u = " + fmt(at)};
    });

    check_item(rep, "saturation_sign_order", [&] {
        bool ok = q.q_minus_inf < 0.0 && 0.0 < q.q_plus_inf;
        return std::pair{ok, "q_minus_inf = " + fmt(q.q_minus_inf) +
                                 ", q_plus_inf = " + fmt(q.q_plus_inf)};
    });

    check_item(rep, "dissipation_zero_at_origin", [&] {
        double v = q.eval(0.0);
        bool ok = std::isfinite(v) && std::abs(v) <= 1e-12;
        return std::pair{ok, "Q(0) = " + fmt(v)};
    });

    const std::vector<double> probes = log_probes(1e-6, 1e6, 16);

    check_item(rep, "dissipation_strictly_increasing", [&] {
        for (double s : probes) {
            double d = q.deriv(s);
            if (!std::isfinite(d) || !(d > 0.0))
                return std::pair{false, "Q'(" + fmt(s) + ") = " + fmt(d)};
        }
        return std::pair{true, std::string("Q' > 0 at all probe slopes")};
    });

    check_item(rep, "dissipation_within_bounds", [&] {
        for (double s : probes) {
            double v = q.eval(s);
            if (!std::isfinite(v) || !(v > q.q_minus_inf) || !(v < q.q_plus_inf))
                return std::pair{false, "Q(" + fmt(s) + ") = " + fmt(v)};
        }
        return std::pair{true, std::string("bounds hold at all probe slopes")};
    });

    check_item(rep, "dissipation_saturates", [&] {
        double lo = q.eval(-1e6), hi = q.eval(1e6);
        double err_lo = std::abs(lo - q.q_minus_inf) / std::abs(q.q_minus_inf);
        double err_hi = std::abs(hi - q.q_plus_inf) / std::abs(q.q_plus_inf);
        bool ok = std::isfinite(lo) && std::isfinite(hi) && err_lo <= 1e-3 && err_hi <= 1e-3;
        return std::pair{ok, "rel gap at -1e6: " + fmt(err_lo) + ", at +1e6: " + fmt(err_hi)};
    });

    check_item(rep, "dissipation_deriv_consistent", [&] {
        double worst = 0.0, at = 0.0;
        for (double s : linspace(-20.0, 20.0, 81)) {
            const double h = 1e-6 * (1.0 + std::abs(s));
            double fd = (q.eval(s + h) - q.eval(s - h)) / (2.0 * h);
            double d = q.deriv(s);
            if (!std::isfinite(fd) || !std::isfinite(d))
                return std::pair{false, "non-finite dissipation value near s = " + fmt(s)};
            double err = std::abs(fd - d) / (1.0 + std::abs(d));
            if (err > worst) {
                worst = err;
                at = s;
            }
        }
        return std::pair{worst <= 1e-5, "max rel deviation " + fmt(worst) + " at s = " + fmt(at)};
    });

    check_item(rep, "inverse_round_trip", [&] {
        // Near saturation the slope-from-flux direction is ill-conditioned
        // (ds/dQ blows up), so the round trip is measured back in Q-space
        // where one ulp of input cannot be amplified.
        const double q_span = std::min(std::abs(q.q_minus_inf), q.q_plus_inf);
        double worst = 0.0, at = 0.0;
        for (double s : log_probes(1e-6, 1e4, 16)) {
            double y = q.eval(s);
            double back = q.inverse(y);
            if (!std::isfinite(back)) return std::pair{false, "non-finite inverse at s = " + fmt(s)};
            double err = std::abs(q.eval(back) - y) / q_span;
            if (err > worst) {
                worst = err;
                at = s;
            }
        }
        return std::pair{worst <= 1e-10, "max flux-space deviation " + fmt(worst) + " at s = " + fmt(at)};
    });

    return rep;
}

// -------------------------------------------------------- derived constants

// q_bar, the Lipschitz bound of f on [-M, M], and the global slope bound of
// Q, all obtained by dense sampling plus golden-section refinement.
inline ModelConstants derive_constants(const ModelSpec& m, double sup_norm_bound) {
    if (!(sup_norm_bound > 0.0))
        throw std::invalid_argument("derive_constants: sup-norm bound must be > 0");
    ModelConstants c;
    c.m_bound = sup_norm_bound;
    c.q_bar = std::max(std::abs(m.dissipation.q_minus_inf), std::abs(m.dissipation.q_plus_inf));

    auto abs_fprime = [&](double u) { return std::abs(m.flux.deriv(u)); };
    c.f_lip = grid_max_refine(abs_fprime, linspace(-sup_norm_bound, sup_norm_bound, 10001), 1e-10).value;

    auto qprime = [&](double s) { return m.dissipation.deriv(s); };
    c.q1 = grid_max_refine(qprime, log_probes(1e-6, 1e6, 32), 1e-10).value;
    return c;
}

// ------------------------------------------------- Engquist-Osher splitting

// Monotone numerical flux for a general C^1 convective flux. Uses the
// identity F(a,b) = (f(a) + f(b))/2 - (1/2) int_a^b |f'|, with the total
// variation of f evaluated exactly through the precomputed sonic points
// (sign changes of f') inside the working range.
class OsherFlux {
public:
    OsherFlux() = default;

    OsherFlux(const FluxFunction& flux, double lo, double hi) : f_(flux) {
        if (!(hi > lo)) throw std::invalid_argument("OsherFlux: empty state range");
        const int n = 4096;
        double prev_u = lo, prev_d = f_.deriv(lo);
        for (int i = 1; i <= n; ++i) {
            double u = lo + (hi - lo) * i / n;
            double d = f_.deriv(u);
            if (prev_d == 0.0) sonic_.push_back(prev_u);
            else if (prev_d * d < 0.0) {
                auto fp = [this](double v) { return f_.deriv(v); };
                sonic_.push_back(find_root(fp, prev_u, u, 1e-14));
            }
            prev_u = u;
            prev_d = d;
        }
        for (double s : sonic_) fsonic_.push_back(f_.eval(s));
    }

    double operator()(double a, double b) const {
        return 0.5 * (f_.eval(a) + f_.eval(b)) - 0.5 * signed_variation(a, b);
    }

    const std::vector<double>& sonic_points() const { return sonic_; }

private:
    double signed_variation(double a, double b) const {
        double sgn = 1.0;
        if (a > b) {
            std::swap(a, b);
            sgn = -1.0;
        }
        double var = 0.0;
        double prev_x = a, prev_f = f_.eval(a);
        for (std::size_t k = 0; k < sonic_.size(); ++k) {
            if (sonic_[k] <= prev_x) continue;
            if (sonic_[k] >= b) break;
            var += std::abs(fsonic_[k] - prev_f);
            prev_x = sonic_[k];
            prev_f = fsonic_[k];
        }
        var += std::abs(f_.eval(b) - prev_f);
        return sgn * var;
    }

    FluxFunction f_;
    std::vector<double> sonic_;
    std::vector<double> fsonic_;
};

} // namespace bdflux
