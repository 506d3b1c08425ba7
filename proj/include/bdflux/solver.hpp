#pragma once

// Explicit monotone scheme for u_t + f(u)_x = Q(u_x)_x + eps u_xx:
// Engquist-Osher convective flux, central differencing of the (possibly
// vanishing-viscosity-augmented) dissipation flux, forward Euler in time
// under the parabolic-dominated stability bound. Monotonicity gives the
// discrete maximum principle, TV/L1 decay and L1 contraction that the
// a priori estimates of the continuous problem predict; the diagnostics
// series track exactly those functionals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "model.hpp"

namespace bdflux {

struct NumericFailure : std::runtime_error {
    explicit NumericFailure(const std::string& what) : std::runtime_error(what) {}
};

enum class Boundary { outflow, periodic };

struct SolverConfig {
    double epsilon = 0.0;       // extra uniformly parabolic viscosity
    double cfl_safety = 0.4;    // fraction of the stability bound, in (0, 1]
    Boundary boundary = Boundary::outflow;
    double t_end = 0.0;
    std::vector<double> snapshot_times;
    // Optional fixed time step shared between runs (L1-contraction pairs);
    // must respect the stability bound of every participating run.
    std::optional<double> fixed_dt;

    void validate() const {
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
            throw std::invalid_argument("SolverConfig: epsilon must be finite and >= 0");
        if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
            throw std::invalid_argument("SolverConfig: cfl_safety must lie in (0, 1]");
        if (!(t_end >= 0.0) || !std::isfinite(t_end))
            throw std::invalid_argument("SolverConfig: t_end must be finite and >= 0");
        if (fixed_dt && !(*fixed_dt > 0.0))
            throw std::invalid_argument("SolverConfig: fixed_dt must be > 0");
    }
};

// Largest stable explicit step times the safety factor:
// cfl / (f_lip/dx + 2 (q1 + eps)/dx^2).
inline double stable_dt(const ModelConstants& c, double dx, double epsilon, double cfl_safety) {
    if (!(dx > 0.0)) throw std::invalid_argument("stable_dt: dx must be > 0");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
        throw std::invalid_argument("stable_dt: cfl_safety must lie in (0, 1]");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("stable_dt: epsilon must be >= 0");
    double denom = c.f_lip / dx + 2.0 * (c.q1 + epsilon) / (dx * dx);
    if (!(denom > 0.0)) throw std::invalid_argument("stable_dt: degenerate model constants");
    return cfl_safety / denom;
}

// Per-state diagnostics: index 0 is the initial state, one entry per step
// after it. qflux_bv is the discrete variation of the total dissipation
// flux, sum |Q(D_{i+1/2}) - Q(D_{i-1/2})| + eps sum |D_{i+1/2} - D_{i-1/2}|.
struct DiagnosticsReport {
    std::vector<double> t, dt, sup, l1, tv, qflux_bv, mass;
    std::size_t steps() const { return t.empty() ? 0 : t.size() - 1; }
};

struct SolveResult {
    std::vector<GridField> snapshots;
    DiagnosticsReport diag;
};

namespace detail {

struct StepStats {
    double qflux_bv = 0.0;
};

// One forward-Euler update of `in` into `out`. Outflow copies the end
// states into ghosts (zero boundary slope); periodic treats the nodes as a
// ring with wraparound spacing dx.
inline StepStats advance(const ModelSpec& model, const OsherFlux* osher, double epsilon,
                         Boundary boundary, const std::vector<double>& in,
                         std::vector<double>& out, double dx, double dt) {
    const std::size_t n = in.size();
    const double r = dt / dx;
    const auto& q = model.dissipation;
    const auto& f = model.flux;
    StepStats stats;

    auto face = [&](std::size_t i, double& F, double& G, double& qd, double& D) {
        // interface between node i and node i+1 (wrapping when periodic)
        double ul, ur;
        if (i + 1 < n) {
            ul = in[i];
            ur = in[i + 1];
        } else if (boundary == Boundary::periodic) {
            ul = in[n - 1];
            ur = in[0];
        } else {
            ul = in[n - 1];
            ur = in[n - 1];
        }
        D = (ur - ul) / dx;
        qd = q.eval(D);
        G = qd + epsilon * D;
        F = osher ? (*osher)(ul, ur) : f.eval(ul);
    };

    double Fp, Gp, qdp, Dp;  // trailing interface values
    if (boundary == Boundary::periodic) {
        face(n - 1, Fp, Gp, qdp, Dp);
    } else {
        Dp = 0.0;
        qdp = q.eval(0.0);
        Gp = qdp;
        Fp = f.eval(in[0]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double F, G, qd, D;
        face(i, F, G, qd, D);
        out[i] = in[i] - r * (F - Fp) + r * (G - Gp);
        stats.qflux_bv += std::abs(qd - qdp) + epsilon * std::abs(D - Dp);
        Fp = F;
        Gp = G;
        qdp = qd;
        Dp = D;
    }
    return stats;
}

inline void record_row(DiagnosticsReport& d, const GridField& state, double dt,
                       double qflux_bv) {
    d.t.push_back(state.t);
    d.dt.push_back(dt);
    d.sup.push_back(sup_norm(state));
    d.l1.push_back(l1_norm(state));
    d.tv.push_back(total_variation(state));
    d.qflux_bv.push_back(qflux_bv);
    d.mass.push_back(mass(state));
}

inline double state_qflux_bv(const ModelSpec& model, double epsilon, Boundary boundary,
                             const std::vector<double>& u, double dx) {
    // same quantity advance() accumulates, evaluated on a single state
    std::vector<double> scratch(u.size());
    StepStats s = advance(model, nullptr, epsilon, boundary, u, scratch, dx, 0.0);
    return s.qflux_bv;
}

} // namespace detail

// Single explicit step (convenience wrapper over the solve loop's kernel).
// Aborts with NumericFailure if the update escapes the entering state's
// range by more than the monotonicity slack.
inline GridField step(const ModelSpec& model, const SolverConfig& config, const GridField& in,
                      double dt, const OsherFlux* osher = nullptr) {
    config.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
    GridField out(in.grid, in.t + dt);
    OsherFlux local;
    if (!osher) {
        double m = std::max(sup_norm(in), 1e-12);
        local = OsherFlux(model.flux, -m - 1.0, m + 1.0);
        osher = &local;
    }
    double lo0 = *std::min_element(in.u.begin(), in.u.end());
    double hi0 = *std::max_element(in.u.begin(), in.u.end());
    detail::advance(model, osher, config.epsilon, config.boundary, in.u, out.u, in.grid.dx(), dt);
    double lo1 = *std::min_element(out.u.begin(), out.u.end());
    double hi1 = *std::max_element(out.u.begin(), out.u.end());
    if (!std::isfinite(lo1) || !std::isfinite(hi1) || lo1 < lo0 - 1e-9 || hi1 > hi0 + 1e-9) {
        std::ostringstream os;
        os << "step: range escape, [" << lo0 << ", " << hi0 << "] -> [" << lo1 << ", " << hi1
           << "] at t = " << in.t << " with dt = " << dt;
        throw NumericFailure(os.str());
    }
    return out;
}

// March the field to t_end, recording snapshots at the requested times (the
// initial and final states are always included) and per-step diagnostics.
inline SolveResult solve(const ModelSpec& model, const GridField& u0, const SolverConfig& config) {
    config.validate();
    if (u0.grid.n < 16) throw std::invalid_argument("solve: grid too coarse");
    const double t0 = u0.t;
    if (!(config.t_end >= t0)) throw std::invalid_argument("solve: t_end precedes initial time");

    const double m0 = std::max(sup_norm(u0), 1e-12);
    ModelConstants constants = derive_constants(model, m0);
    const bool has_convection = constants.f_lip > 0.0;
    OsherFlux osher;
    if (has_convection) osher = OsherFlux(model.flux, -m0 - 1e-9, m0 + 1e-9);

    std::vector<double> stops = config.snapshot_times;
    stops.push_back(config.t_end);
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
    for (double ts : stops)
        if (!(ts >= t0 && ts <= config.t_end))
            throw std::invalid_argument("solve: snapshot time outside [t0, t_end]");

    const double dx = u0.grid.dx();
    const double dt_cap = config.fixed_dt
                              ? *config.fixed_dt
                              : stable_dt(constants, dx, config.epsilon, config.cfl_safety);

    SolveResult res;
    GridField cur = u0;
    GridField next(u0.grid, t0);
    const double lo_bound = *std::min_element(u0.u.begin(), u0.u.end()) - 1e-9;
    const double hi_bound = *std::max_element(u0.u.begin(), u0.u.end()) + 1e-9;

    detail::record_row(res.diag, cur, 0.0,
                       detail::state_qflux_bv(model, config.epsilon, config.boundary, cur.u, dx));
    res.snapshots.push_back(cur);
    std::size_t next_stop = 0;
    while (next_stop < stops.size() && stops[next_stop] <= t0 + 1e-15 * (1.0 + std::abs(t0)))
        ++next_stop;

    long step_count = 0;
    while (cur.t < config.t_end - 1e-14 * (1.0 + config.t_end)) {
        double target = next_stop < stops.size() ? stops[next_stop] : config.t_end;
        double dt = std::min(dt_cap, target - cur.t);
        detail::StepStats stats = detail::advance(model, has_convection ? &osher : nullptr,
                                                  config.epsilon, config.boundary, cur.u, next.u,
                                                  dx, dt);
        next.t = cur.t + dt;
        std::swap(cur.u, next.u);
        cur.t = next.t;
        ++step_count;

        double lo = cur.u[0], hi = cur.u[0];
        for (double v : cur.u) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!std::isfinite(lo) || !std::isfinite(hi) || lo < lo_bound || hi > hi_bound) {
            std::ostringstream os;
            os << "solve: maximum-principle violation at step " << step_count << ", t = " << cur.t
               << ": range [" << lo << ", " << hi << "] vs bound [" << lo_bound << ", " << hi_bound
               << "]";
            throw NumericFailure(os.str());
        }
        detail::record_row(res.diag, cur, dt, stats.qflux_bv);

        if (cur.t >= target - 1e-14 * (1.0 + target) && next_stop < stops.size() &&
            target == stops[next_stop]) {
            cur.t = target;  // land exactly on the requested time
            res.snapshots.push_back(cur);
            ++next_stop;
        }
    }
    if (res.snapshots.empty() || res.snapshots.back().t != cur.t) res.snapshots.push_back(cur);
    return res;
}

// Vanishing-viscosity sweep: rerun the same initial field for each epsilon
// in the (strictly decreasing, nonnegative) list and report the L1 distances
// between consecutive final states.
struct ContinuationResult {
    std::vector<double> epsilons;
    std::vector<GridField> finals;
    std::vector<double> pair_distance;
};

inline ContinuationResult epsilon_continuation(const ModelSpec& model, const GridField& u0,
                                               const SolverConfig& base,
                                               const std::vector<double>& eps_list) {
    if (eps_list.size() < 2)
        throw std::invalid_argument("epsilon_continuation: need at least two epsilons");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] >= 0.0))
            throw std::invalid_argument("epsilon_continuation: epsilons must be >= 0");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw std::invalid_argument("epsilon_continuation: epsilons must strictly decrease");
    }
    ContinuationResult out;
    out.epsilons = eps_list;
    for (double eps : eps_list) {
        SolverConfig cfg = base;
        cfg.epsilon = eps;
        out.finals.push_back(solve(model, u0, cfg).snapshots.back());
    }
    for (std::size_t i = 0; i + 1 < out.finals.size(); ++i)
        out.pair_distance.push_back(l1_distance(out.finals[i], out.finals[i + 1]));
    return out;
}

} // namespace bdflux
