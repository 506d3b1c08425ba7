#pragma once

// Post-processing of solver trajectories: reconstruction of the limiting
// dissipation flux from centered difference quotients, shock detection and
// tracking, the Rankine-Hugoniot speed check, Oleinik's chord condition
// (condition E), and the weak integral identity tested against a bank of
// compactly supported space-time bumps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "grid.hpp"
#include "model.hpp"
#include "numerics.hpp"

namespace bdflux {

// ------------------------------------------------------ Q_lim reconstruction

struct QLimOptions {
    // Stencil half-widths as multiples of dx, increasing. Empty -> {1,2,4,8}.
    std::vector<int> h_multiples;
    double tol_sat_rel = 1e-2;   // stabilization tolerance, relative to q_bar
    double near_bound_rel = 2e-2;  // |q| within this fraction of q_bar of a bound
};

struct QLimProfile {
    std::vector<double> x_nodes;
    std::vector<double> q_values;
    std::vector<double> h_used;
    // true where q sits within tolerance of Q_{-inf} or Q_{+inf}
    std::vector<char> saturation_flags;
    // false where no pair of successive sweep values agreed (value taken at
    // the smallest half-width regardless)
    std::vector<char> stabilized;

    bool any_unstabilized() const {
        return std::find(stabilized.begin(), stabilized.end(), char(0)) != stabilized.end();
    }
};

// Per node, Q of the symmetric difference quotient over an increasing sweep
// of half-widths; the reported value is the one at the smallest width whose
// successor agrees within tolerance. Indices clamp at the boundary (copy
// ghosts, matching the solver's outflow convention).
inline QLimProfile q_lim_profile(const GridField& state, const ModelSpec& model,
                                 const QLimOptions& opt = {}) {
    const std::size_t n = state.u.size();
    if (n < 4) throw std::invalid_argument("q_lim_profile: state too short");
    const double dx = state.grid.dx();
    std::vector<int> mult = opt.h_multiples.empty() ? std::vector<int>{1, 2, 4, 8}
                                                    : opt.h_multiples;
    for (std::size_t k = 0; k < mult.size(); ++k) {
        if (mult[k] < 1) throw std::invalid_argument("q_lim_profile: half-widths must be >= dx");
        if (k > 0 && mult[k] <= mult[k - 1])
            throw std::invalid_argument("q_lim_profile: half-widths must increase");
    }
    const auto& q = model.dissipation;
    const double q_bar = std::max(std::abs(q.q_minus_inf), std::abs(q.q_plus_inf));
    const double tol = opt.tol_sat_rel * q_bar;
    const double near_bound = opt.near_bound_rel * q_bar;

    QLimProfile prof;
    prof.x_nodes.resize(n);
    prof.q_values.resize(n);
    prof.h_used.resize(n);
    prof.saturation_flags.assign(n, 0);
    prof.stabilized.assign(n, 0);

    std::vector<double> sweep(mult.size());
    for (std::size_t i = 0; i < n; ++i) {
        prof.x_nodes[i] = state.grid.x(static_cast<int>(i));
        for (std::size_t k = 0; k < mult.size(); ++k) {
            long lo = static_cast<long>(i) - mult[k];
            long hi = static_cast<long>(i) + mult[k];
            lo = std::max(lo, 0L);
            hi = std::min(hi, static_cast<long>(n) - 1);
            double D = (state.u[static_cast<std::size_t>(hi)] -
                        state.u[static_cast<std::size_t>(lo)]) /
                       (2.0 * mult[k] * dx);
            sweep[k] = q.eval(D);
        }
        std::size_t pick = 0;
        bool ok = false;
        for (std::size_t k = 0; k + 1 < sweep.size(); ++k) {
            if (std::abs(sweep[k + 1] - sweep[k]) < tol) {
                pick = k;
                ok = true;
                break;
            }
        }
        double v = std::clamp(sweep[pick], q.q_minus_inf, q.q_plus_inf);
        prof.q_values[i] = v;
        prof.h_used[i] = mult[pick] * dx;
        prof.stabilized[i] = ok ? 1 : 0;
        prof.saturation_flags[i] =
            (std::abs(v - q.q_minus_inf) <= near_bound || std::abs(v - q.q_plus_inf) <= near_bound)
                ? 1
                : 0;
    }
    return prof;
}

// Largest node-to-node oscillation of the reconstructed flux.
inline double continuity_modulus(const QLimProfile& prof) {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < prof.q_values.size(); ++i)
        m = std::max(m, std::abs(prof.q_values[i + 1] - prof.q_values[i]));
    return m;
}

// ------------------------------------------------------------ shock detection

struct ShockSighting {
    double location = 0.0;  // mid-value crossing inside the steep run
    double u_minus = 0.0;   // plateau value on the left
    double u_plus = 0.0;    // plateau value on the right
    std::size_t first_cell = 0, last_cell = 0;  // steep-interface index range
};

// Contiguous runs of interfaces with |D| > threshold, merged into one
// sighting each. Side values are read at the first interface (walking
// outward) where |D| drops below 10% of the threshold; the location is the
// linear crossing of the mid-value between the two plateaus.
inline std::vector<ShockSighting> detect_shocks(const GridField& state, double slope_threshold) {
    const std::size_t n = state.u.size();
    const double dx = state.grid.dx();
    if (!(slope_threshold > 0.0))
        throw std::invalid_argument("detect_shocks: threshold must be > 0");
    std::vector<ShockSighting> out;
    if (n < 3) return out;

    auto slope = [&](std::size_t k) { return (state.u[k + 1] - state.u[k]) / dx; };
    const double quiet = 0.1 * slope_threshold;

    std::size_t k = 0;
    while (k + 1 < n) {
        if (std::abs(slope(k)) <= slope_threshold) {
            ++k;
            continue;
        }
        std::size_t first = k;
        std::size_t last = k;
        while (last + 2 < n && std::abs(slope(last + 1)) > slope_threshold) ++last;

        ShockSighting s;
        s.first_cell = first;
        s.last_cell = last;
        // walk outward to the plateaus
        std::size_t li = first;
        while (li > 0 && std::abs(slope(li - 1)) > quiet) --li;
        std::size_t ri = last;
        while (ri + 2 < n && std::abs(slope(ri + 1)) > quiet) ++ri;
        s.u_minus = state.u[li];
        s.u_plus = state.u[ri + 1];

        double mid = 0.5 * (s.u_minus + s.u_plus);
        s.location = state.grid.x(static_cast<int>(first));
        for (std::size_t j = li; j <= ri; ++j) {
            double a = state.u[j] - mid, b = state.u[j + 1] - mid;
            if (a == 0.0 || a * b < 0.0) {
                double frac = a / (a - b);
                s.location = state.grid.x(static_cast<int>(j)) + frac * dx;
                break;
            }
        }
        out.push_back(s);
        k = ri + 1;
    }
    return out;
}

inline double default_shock_threshold(const GridField& state) {
    return 0.2 / state.grid.dx();
}

// Threshold adapted to the dissipation scale: slopes carrying at least 70%
// of the saturation flux count as shock layers. Sub-saturation profiles
// (continuous waves) stay below this, while an epsilon-smeared viscous layer
// exceeds it even though the epsilon term keeps Q(u_x) itself short of full
// saturation.
inline double saturation_shock_threshold(const GridField& state, const ModelSpec& model) {
    const auto& q = model.dissipation;
    double target = 0.7 * std::min(std::abs(q.q_minus_inf), std::abs(q.q_plus_inf));
    double s = std::abs(q.inverse(-target));
    return std::min(s, default_shock_threshold(state));
}

// -------------------------------------------------------------- condition E

struct ConditionEVerdict {
    bool satisfied = false;
    double worst_violation = 0.0;
    double worst_state = 0.0;
};

// Oleinik's chord test on the interval between the states: the secant
// l(u) = f(u-) + (u - u-)(f(u+) - f(u-))/(u+ - u-) must lie above the graph
// for a decreasing jump and below it for an increasing one.
inline ConditionEVerdict condition_e_check(const FluxFunction& f, double u_minus, double u_plus,
                                           int n_grid = 1001, double tol = 1e-12) {
    if (u_minus == u_plus) throw std::invalid_argument("condition_e_check: equal states");
    if (n_grid < 101) throw std::invalid_argument("condition_e_check: n_grid must be >= 101");
    const double fm = f.eval(u_minus), fp = f.eval(u_plus);
    const double chord = (fp - fm) / (u_plus - u_minus);
    const double lo = std::min(u_minus, u_plus), hi = std::max(u_minus, u_plus);
    const double orient = u_minus > u_plus ? 1.0 : -1.0;  // sign of required l - f

    ConditionEVerdict v;
    double scale = std::max({std::abs(fm), std::abs(fp), 1.0});
    for (int i = 0; i < n_grid; ++i) {
        double u = lo + (hi - lo) * i / (n_grid - 1);
        double l = fm + (u - u_minus) * chord;
        double gap = orient * (l - f.eval(u));  // >= 0 when admissible
        if (-gap > v.worst_violation) {
            v.worst_violation = -gap;
            v.worst_state = u;
        }
    }
    v.satisfied = v.worst_violation <= tol * scale;
    return v;
}

// ------------------------------------------------------------ shock tracking

struct ShockPathPoint {
    double t = 0.0;
    double location = 0.0;
    double u_minus = 0.0;
    double u_plus = 0.0;
    double measured_speed = 0.0;  // central difference of location in t
};

struct ShockRecord {
    std::vector<ShockPathPoint> path;
    double hugoniot_residual = 0.0;  // max |measured - chord| over interior points
    bool condition_e_ok = true;
    double worst_e_violation = 0.0;
    bool truncated = false;  // lost before the final snapshot
};

// Associates sightings across snapshots by nearest location and compares the
// central-difference front speed with the chord slope of f between the
// tracked side values.
inline std::vector<ShockRecord> track_and_check_hugoniot(const std::vector<GridField>& snaps,
                                                         const ModelSpec& model,
                                                         double slope_threshold) {
    if (snaps.size() < 3)
        throw std::invalid_argument("track_and_check_hugoniot: need at least 3 snapshots");
    std::vector<std::vector<ShockSighting>> sightings(snaps.size());
    for (std::size_t k = 0; k < snaps.size(); ++k)
        sightings[k] = detect_shocks(snaps[k], slope_threshold);

    const double dx = snaps[0].grid.dx();
    std::vector<ShockRecord> records;
    std::vector<std::vector<char>> used(snaps.size());
    for (std::size_t k = 0; k < snaps.size(); ++k) used[k].assign(sightings[k].size(), 0);

    for (std::size_t s0 = 0; s0 < sightings[0].size(); ++s0) {
        ShockRecord rec;
        double at = sightings[0][s0].location;
        for (std::size_t k = 0; k < snaps.size(); ++k) {
            // nearest unused sighting in snapshot k
            std::size_t best = sightings[k].size();
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < sightings[k].size(); ++j) {
                if (used[k][j]) continue;
                double d = std::abs(sightings[k][j].location - at);
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            double dt_gap = k > 0 ? snaps[k].t - snaps[k - 1].t : 0.0;
            double reach = 10.0 * dx + 4.0 * dt_gap * (1.0 + sup_norm(snaps[k]));
            if (best == sightings[k].size() || best_d > reach) {
                rec.truncated = true;
                break;
            }
            used[k][best] = 1;
            const ShockSighting& s = sightings[k][best];
            at = s.location;
            ShockPathPoint p;
            p.t = snaps[k].t;
            p.location = s.location;
            p.u_minus = s.u_minus;
            p.u_plus = s.u_plus;
            rec.path.push_back(p);
        }
        if (rec.path.size() < 3) {
            if (!rec.path.empty()) {
                rec.truncated = true;
                records.push_back(rec);
            }
            continue;
        }
        for (std::size_t k = 0; k < rec.path.size(); ++k) {
            std::size_t a = k == 0 ? 0 : k - 1;
            std::size_t b = k + 1 < rec.path.size() ? k + 1 : k;
            rec.path[k].measured_speed =
                (rec.path[b].location - rec.path[a].location) / (rec.path[b].t - rec.path[a].t);
        }
        for (std::size_t k = 1; k + 1 < rec.path.size(); ++k) {
            const auto& p = rec.path[k];
            if (p.u_minus == p.u_plus) continue;
            double chord = (model.flux.eval(p.u_plus) - model.flux.eval(p.u_minus)) /
                           (p.u_plus - p.u_minus);
            rec.hugoniot_residual =
                std::max(rec.hugoniot_residual, std::abs(p.measured_speed - chord));
            ConditionEVerdict v = condition_e_check(model.flux, p.u_minus, p.u_plus);
            rec.worst_e_violation = std::max(rec.worst_e_violation, v.worst_violation);
            if (!v.satisfied) rec.condition_e_ok = false;
        }
        records.push_back(rec);
    }
    return records;
}

// --------------------------------------------------------- weak formulation

// phi(t, x) = B((x - xc)/sx) B((t - tc)/st) with B the standard C-infinity
// bump; support is the closed box [xc - sx, xc + sx] x [tc - st, tc + st].
struct SpaceTimeBump {
    double xc = 0.0, sx = 1.0;
    double tc = 0.0, st = 1.0;

    double value(double t, double x) const {
        return bump_value((x - xc) / sx) * bump_value((t - tc) / st);
    }
    double dt(double t, double x) const {
        return bump_value((x - xc) / sx) * bump_deriv((t - tc) / st) / st;
    }
    double dx(double t, double x) const {
        return bump_deriv((x - xc) / sx) * bump_value((t - tc) / st) / sx;
    }
};

// 12 bumps: 3 centers x 2 spatial scales x 2 temporal scales, all supported
// strictly inside (x_lo, x_hi) x (t_lo, t_hi).
inline std::vector<SpaceTimeBump> make_test_bank(double x_lo, double x_hi, double t_lo,
                                                 double t_hi) {
    if (!(x_hi > x_lo && t_hi > t_lo)) throw std::invalid_argument("make_test_bank: empty box");
    const double W = x_hi - x_lo;
    const double T = t_hi - t_lo;
    std::vector<SpaceTimeBump> bank;
    for (double cf : {0.35, 0.5, 0.65})
        for (double sf : {0.30, 0.18})
            for (double tf : {0.45, 0.28}) {
                SpaceTimeBump b;
                b.xc = x_lo + cf * W;
                b.sx = sf * W;
                b.tc = t_lo + 0.5 * T;
                b.st = tf * T;
                bank.push_back(b);
            }
    return bank;
}

// Discrete space-time residual of the weak identity,
//   R(phi) = int int { u phi_t + (f(u) - q_lim) phi_x } dx dt,
// trapezoid in t over the snapshots and node sums in x. Each profile must
// match its snapshot. For a generalized solution R -> 0 under refinement.
inline std::vector<double> weak_residual(const std::vector<GridField>& snaps,
                                         const ModelSpec& model,
                                         const std::vector<QLimProfile>& profiles,
                                         const std::vector<SpaceTimeBump>& bank) {
    if (snaps.size() < 2) throw std::invalid_argument("weak_residual: need >= 2 snapshots");
    if (profiles.size() != snaps.size())
        throw std::invalid_argument("weak_residual: one q-profile per snapshot required");
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        if (profiles[k].q_values.size() != snaps[k].u.size())
            throw std::invalid_argument("weak_residual: profile/snapshot size mismatch");
        if (k > 0 && !(snaps[k].t > snaps[k - 1].t))
            throw std::invalid_argument("weak_residual: snapshots must increase in t");
    }
    const Grid& g = snaps[0].grid;
    const double x_lo = g.x_left, x_hi = g.x_right;
    const double t_lo = snaps.front().t, t_hi = snaps.back().t;
    for (const auto& b : bank) {
        if (b.xc - b.sx < x_lo || b.xc + b.sx > x_hi || b.tc - b.st < t_lo || b.tc + b.st > t_hi)
            throw std::invalid_argument("weak_residual: test-function support leaves the domain");
    }

    const double dx = g.dx();
    std::vector<double> res(bank.size(), 0.0);
    std::vector<double> slab_prev(bank.size(), 0.0), slab_cur(bank.size(), 0.0);
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        const GridField& s = snaps[k];
        std::fill(slab_cur.begin(), slab_cur.end(), 0.0);
        for (std::size_t i = 0; i < s.u.size(); ++i) {
            double x = g.x(static_cast<int>(i));
            double u = s.u[i];
            double fu = model.flux.eval(u);
            double ql = profiles[k].q_values[i];
            double w = (i == 0 || i + 1 == s.u.size()) ? 0.5 * dx : dx;
            for (std::size_t j = 0; j < bank.size(); ++j) {
                const SpaceTimeBump& b = bank[j];
                if (std::abs(x - b.xc) >= b.sx) continue;
                slab_cur[j] += w * (u * b.dt(s.t, x) + (fu - ql) * b.dx(s.t, x));
            }
        }
        if (k > 0) {
            double half = 0.5 * (snaps[k].t - snaps[k - 1].t);
            for (std::size_t j = 0; j < bank.size(); ++j)
                res[j] += half * (slab_prev[j] + slab_cur[j]);
        }
        std::swap(slab_prev, slab_cur);
    }
    return res;
}

// Companion scale for judging weak residuals: the same space-time quadrature
// applied to |phi_t| + |phi_x|. An O(1) flux defect along a shock line makes
// |R(phi)| a definite fraction of this, while consistency error vanishes
// relative to it under refinement.
inline std::vector<double> test_bank_scale(const std::vector<GridField>& snaps,
                                           const std::vector<SpaceTimeBump>& bank) {
    if (snaps.size() < 2) throw std::invalid_argument("test_bank_scale: need >= 2 snapshots");
    const Grid& g = snaps[0].grid;
    const double dx = g.dx();
    std::vector<double> scale(bank.size(), 0.0);
    std::vector<double> slab_prev(bank.size(), 0.0), slab_cur(bank.size(), 0.0);
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        std::fill(slab_cur.begin(), slab_cur.end(), 0.0);
        for (std::size_t i = 0; i < snaps[k].u.size(); ++i) {
            double x = g.x(static_cast<int>(i));
            double w = (i == 0 || i + 1 == snaps[k].u.size()) ? 0.5 * dx : dx;
            for (std::size_t j = 0; j < bank.size(); ++j) {
                const SpaceTimeBump& b = bank[j];
                if (std::abs(x - b.xc) >= b.sx) continue;
                slab_cur[j] += w * (std::abs(b.dt(snaps[k].t, x)) + std::abs(b.dx(snaps[k].t, x)));
            }
        }
        if (k > 0) {
            double half = 0.5 * (snaps[k].t - snaps[k - 1].t);
            for (std::size_t j = 0; j < bank.size(); ++j)
                scale[j] += half * (slab_prev[j] + slab_cur[j]);
        }
        std::swap(slab_prev, slab_cur);
    }
    return scale;
}

// ------------------------------------------------------------- initial trace

struct TraceRow {
    double t = 0.0;
    double l1_dev = 0.0;
};

// L1 deviation from the initial field over [a, b] for every snapshot after
// the first; for a generalized solution the early entries decay to zero.
inline std::vector<TraceRow> initial_trace_check(const std::vector<GridField>& snaps, double a,
                                                 double b) {
    if (snaps.size() < 2) throw std::invalid_argument("initial_trace_check: need >= 2 snapshots");
    const Grid& g = snaps[0].grid;
    if (!(a < b) || a < g.x_left - 1e-12 || b > g.x_right + 1e-12)
        throw std::invalid_argument("initial_trace_check: window outside the grid");
    const double dx = g.dx();
    std::vector<TraceRow> rows;
    for (std::size_t k = 1; k < snaps.size(); ++k) {
        if (!(snaps[k].grid == g))
            throw std::invalid_argument("initial_trace_check: snapshot grid mismatch");
        TraceRow r;
        r.t = snaps[k].t;
        for (std::size_t i = 0; i < snaps[k].u.size(); ++i) {
            double x = g.x(static_cast<int>(i));
            if (x < a || x > b) continue;
            double w = (i == 0 || i + 1 == snaps[k].u.size()) ? 0.5 * dx : dx;
            r.l1_dev += w * std::abs(snaps[k].u[i] - snaps[0].u[i]);
        }
        rows.push_back(r);
    }
    return rows;
}

} // namespace bdflux
