#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bdflux {

// Uniform node-centered grid on [x_left, x_right] with n nodes.
struct Grid {
    double x_left = 0.0;
    double x_right = 1.0;
    int n = 0;

    Grid() = default;
    Grid(double xl, double xr, int nodes) : x_left(xl), x_right(xr), n(nodes) {
        if (!(xr > xl)) throw std::invalid_argument("Grid: x_right must exceed x_left");
        if (n < 16) throw std::invalid_argument("Grid: need at least 16 nodes");
    }

    double dx() const { return (x_right - x_left) / (n - 1); }
    double x(int i) const { return x_left + dx() * i; }

    bool operator==(const Grid& o) const {
        return x_left == o.x_left && x_right == o.x_right && n == o.n;
    }
};

struct GridField {
    Grid grid;
    double t = 0.0;
    std::vector<double> u;

    GridField() = default;
    GridField(const Grid& g, double time) : grid(g), t(time), u(static_cast<std::size_t>(g.n), 0.0) {}
};

inline double sup_norm(const GridField& f) {
    double m = 0.0;
    for (double v : f.u) m = std::max(m, std::abs(v));
    return m;
}

inline double l1_norm(const GridField& f) {
    double s = 0.0;
    for (double v : f.u) s += std::abs(v);
    return s * f.grid.dx();
}

inline double total_variation(const GridField& f) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < f.u.size(); ++i) s += std::abs(f.u[i + 1] - f.u[i]);
    return s;
}

inline double mass(const GridField& f) {
    double s = 0.0;
    for (double v : f.u) s += v;
    return s * f.grid.dx();
}

inline double l1_distance(const GridField& a, const GridField& b) {
    if (!(a.grid == b.grid))
        throw std::invalid_argument("l1_distance: fields live on different grids");
    double s = 0.0;
    for (std::size_t i = 0; i < a.u.size(); ++i) s += std::abs(a.u[i] - b.u[i]);
    return s * a.grid.dx();
}

} // namespace bdflux
