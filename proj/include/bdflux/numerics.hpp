#pragma once

// Small numerical toolbox shared by the model, wave and solver code:
// Gauss-Legendre quadrature, bracketed root finding, golden-section
// maximization, monotone (Fritsch-Carlson) cubic interpolation and
// least-squares line fits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bdflux {

// ---------------------------------------------------------------- quadrature

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Nodes/weights of the n-point Gauss-Legendre rule, computed once by Newton
// iteration on the Legendre recurrence (machine accurate, avoids tables).
inline const GaussRule& gauss_legendre(int n) {
    static thread_local std::vector<GaussRule> cache(64);
    if (n < 1 || n > 63) throw std::invalid_argument("gauss_legendre: order out of range");
    GaussRule& rule = cache[static_cast<std::size_t>(n)];
    if (!rule.nodes.empty()) return rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[static_cast<std::size_t>(i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

template <class F>
double integrate_gl(F&& f, double a, double b, int order = 15) {
    const GaussRule& r = gauss_legendre(order);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
        s += r.weights[i] * f(mid + half * r.nodes[i]);
    return s * half;
}

template <class F>
double integrate_composite(F&& f, double a, double b, int panels, int order = 15) {
    if (panels < 1) panels = 1;
    const double w = (b - a) / panels;
    double s = 0.0;
    for (int k = 0; k < panels; ++k)
        s += integrate_gl(f, a + k * w, a + (k + 1) * w, order);
    return s;
}

// Panel-doubling composite Gauss rule; fine for the smooth integrands used
// here (kernel normalizations, tail integrals, collocation sums).
template <class F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-12,
                          int max_panels = 1 << 14) {
    double prev = integrate_gl(f, a, b);
    for (int panels = 2; panels <= max_panels; panels *= 2) {
        double cur = integrate_composite(f, a, b, panels);
        if (std::abs(cur - prev) <= rel_tol * (1.0 + std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

// -------------------------------------------------------------- root finding

// Bisection on a bracketing interval, polished by Newton when a derivative is
// supplied. Requires f(a) and f(b) of opposite sign (or zero).
template <class F>
double find_root(F&& f, double a, double b, double tol = 1e-14,
                 const std::function<double(double)>& df = nullptr) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw std::invalid_argument("find_root: interval does not bracket");
    for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (a + b), fm = f(m);
        if (fm == 0.0 || 0.5 * (b - a) < tol) {
            a = b = m;
            break;
        }
        if (fa * fm < 0.0) {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    double x = 0.5 * (a + b);
    if (df) {
        for (int it = 0; it < 8; ++it) {
            double d = df(x);
            if (d == 0.0 || !std::isfinite(d)) break;
            double step = f(x) / d;
            double xn = x - step;
            if (xn < a - (b - a) || xn > b + (b - a)) break;
            x = xn;
            if (std::abs(step) < tol * (1.0 + std::abs(x))) break;
        }
    }
    return x;
}

// Golden-section maximization on [a, b] for unimodal f.
template <class F>
double golden_max(F&& f, double a, double b, double rel_tol = 1e-10) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > rel_tol * (1.0 + std::abs(a) + std::abs(b))) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

struct GridMaxResult {
    double arg = 0.0;
    double value = -std::numeric_limits<double>::infinity();
};

// Dense scan over given sample points followed by golden-section refinement
// around the best sample. Robust for the piecewise-unimodal profiles used by
// the constant derivations (Lipschitz bounds, dissipation-slope maxima).
template <class F>
GridMaxResult grid_max_refine(F&& f, const std::vector<double>& samples,
                              double rel_tol = 1e-10) {
    if (samples.size() < 3) throw std::invalid_argument("grid_max_refine: need >= 3 samples");
    GridMaxResult best;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double v = f(samples[i]);
        if (v > best.value) {
            best.value = v;
            best.arg = samples[i];
            best_i = i;
        }
    }
    std::size_t lo = best_i > 0 ? best_i - 1 : 0;
    std::size_t hi = std::min(best_i + 1, samples.size() - 1);
    double x = golden_max(f, samples[lo], samples[hi], rel_tol);
    double v = f(x);
    if (v > best.value) {
        best.value = v;
        best.arg = x;
    }
    return best;
}

inline std::vector<double> linspace(double a, double b, int n) {
    if (n < 2) throw std::invalid_argument("linspace: need n >= 2");
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        xs[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1.0);
    xs.back() = b;
    return xs;
}

// Symmetric probe set: 0 and +/- log-spaced magnitudes in [lo, hi].
inline std::vector<double> log_probes(double lo, double hi, int per_decade = 64) {
    std::vector<double> xs{0.0};
    const double la = std::log10(lo), lb = std::log10(hi);
    const int n = std::max(2, static_cast<int>((lb - la) * per_decade));
    for (int i = 0; i <= n; ++i) {
        double m = std::pow(10.0, la + (lb - la) * i / n);
        xs.push_back(m);
        xs.push_back(-m);
    }
    std::sort(xs.begin(), xs.end());
    return xs;
}

// --------------------------------------------- monotone cubic interpolation

// Fritsch-Carlson piecewise cubic Hermite interpolant. Preserves
// monotonicity of the data, C^1 everywhere.
class PchipInterpolant {
public:
    PchipInterpolant() = default;

    PchipInterpolant(std::vector<double> xs, std::vector<double> ys)
        : xs_(std::move(xs)), ys_(std::move(ys)) {
        const std::size_t n = xs_.size();
        if (n < 2 || ys_.size() != n)
            throw std::invalid_argument("pchip: need >= 2 points, equal lengths");
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (!(xs_[i + 1] > xs_[i]))
                throw std::invalid_argument("pchip: abscissae must be strictly increasing");
        ms_.resize(n);
        std::vector<double> h(n - 1), d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = xs_[i + 1] - xs_[i];
            d[i] = (ys_[i + 1] - ys_[i]) / h[i];
        }
        if (n == 2) {
            ms_[0] = ms_[1] = d[0];
        } else {
            for (std::size_t i = 1; i + 1 < n; ++i) {
                if (d[i - 1] * d[i] <= 0.0) {
                    ms_[i] = 0.0;
                } else {
                    double w1 = 2.0 * h[i] + h[i - 1];
                    double w2 = h[i] + 2.0 * h[i - 1];
                    ms_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
                }
            }
            ms_[0] = edge_slope(h[0], h[1], d[0], d[1]);
            ms_[n - 1] = edge_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
        }
    }

    double eval(double x) const {
        std::size_t i = segment(x);
        double h = xs_[i + 1] - xs_[i], t = (x - xs_[i]) / h;
        double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        double h10 = t * (1.0 - t) * (1.0 - t);
        double h01 = t * t * (3.0 - 2.0 * t);
        double h11 = t * t * (t - 1.0);
        return h00 * ys_[i] + h * h10 * ms_[i] + h01 * ys_[i + 1] + h * h11 * ms_[i + 1];
    }

    double deriv(double x) const {
        std::size_t i = segment(x);
        double h = xs_[i + 1] - xs_[i], t = (x - xs_[i]) / h;
        double d00 = 6.0 * t * (t - 1.0) / h;
        double d10 = (3.0 * t - 1.0) * (t - 1.0);
        double d01 = -d00;
        double d11 = t * (3.0 * t - 2.0);
        return d00 * ys_[i] + d10 * ms_[i] + d01 * ys_[i + 1] + d11 * ms_[i + 1];
    }

    double deriv2(double x) const {
        std::size_t i = segment(x);
        double h = xs_[i + 1] - xs_[i], t = (x - xs_[i]) / h;
        double s00 = (12.0 * t - 6.0) / (h * h);
        double s10 = (6.0 * t - 4.0) / h;
        double s01 = -s00;
        double s11 = (6.0 * t - 2.0) / h;
        return s00 * ys_[i] + s10 * ms_[i] + s01 * ys_[i + 1] + s11 * ms_[i + 1];
    }

    double x_front() const { return xs_.front(); }
    double x_back() const { return xs_.back(); }
    bool empty() const { return xs_.empty(); }

private:
    static double edge_slope(double h0, double h1, double d0, double d1) {
        double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0.0) return 0.0;
        if (d0 * d1 <= 0.0 && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
        return m;
    }

    std::size_t segment(double x) const {
        auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        std::size_t i = static_cast<std::size_t>(it - xs_.begin());
        if (i == 0) return 0;
        if (i >= xs_.size()) return xs_.size() - 2;
        return i - 1;
    }

    std::vector<double> xs_, ys_, ms_;
};

// ------------------------------------------------------------- line fitting

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
};

inline LineFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    if (n < 2 || ys.size() != n) throw std::invalid_argument("linear_fit: need >= 2 points");
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / n);
    return fit;
}

// ------------------------------------------------------- smooth bump shapes

// Unnormalized C-infinity bump exp(-1/(1-z^2)) on (-1,1), with derivatives.
inline double bump_value(double z) {
    if (std::abs(z) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - z * z));
}

inline double bump_deriv(double z) {
    if (std::abs(z) >= 1.0) return 0.0;
    const double g = 1.0 - z * z;
    return bump_value(z) * (-2.0 * z / (g * g));
}

inline double bump_deriv2(double z) {
    if (std::abs(z) >= 1.0) return 0.0;
    const double g = 1.0 - z * z;
    const double v1 = -2.0 * z / (g * g);                       // d/dz of -1/g
    const double v2 = -2.0 / (g * g) - 8.0 * z * z / (g * g * g);
    return bump_value(z) * (v1 * v1 + v2);
}

} // namespace bdflux
