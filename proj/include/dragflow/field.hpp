// Periodic grid and field containers. A Grid is a small value type describing
// a uniform periodic box [0,L_1) x ... x [0,L_dim); fields store samples at
// the points x_i = i * L/N in row-major order over the axes.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "dragflow/errors.hpp"

namespace dragflow {

class Grid {
  public:
    Grid() = default;

    Grid(int dim, std::array<std::int64_t, 3> n, std::array<double, 3> length) {
        if (dim < 1 || dim > 3)
            throw ConfigError("grid dim must be 1, 2 or 3 (got " + std::to_string(dim) + ")");
        for (int a = 0; a < dim; ++a) {
            if (n[a] < 8 || n[a] % 2 != 0) {
                std::ostringstream os;
                os << "n_points must be even and >= 8 on every axis (axis " << a + 1
                   << " has " << n[a] << ")";
                throw ConfigError(os.str());
            }
            if (!(length[a] > 0.0)) {
                std::ostringstream os;
                os << "grid length must be positive on every axis (axis " << a + 1
                   << " has " << length[a] << ")";
                throw ConfigError(os.str());
            }
        }
        dim_ = dim;
        for (int a = 0; a < 3; ++a) {
            n_[a] = a < dim ? n[a] : 1;
            length_[a] = a < dim ? length[a] : 1.0;
        }
    }

    static Grid make(int dim, const std::vector<std::int64_t>& n,
                     const std::vector<double>& length) {
        if ((int)n.size() != dim)
            throw ConfigError("n_points needs one entry per axis");
        if ((int)length.size() != dim)
            throw ConfigError("length needs one entry per axis");
        std::array<std::int64_t, 3> na{1, 1, 1};
        std::array<double, 3> la{1.0, 1.0, 1.0};
        for (int a = 0; a < dim; ++a) {
            na[a] = n[a];
            la[a] = length[a];
        }
        return Grid(dim, na, la);
    }

    int dim() const { return dim_; }
    std::int64_t n(int axis) const { return n_[axis]; }
    double length(int axis) const { return length_[axis]; }
    double dx(int axis) const { return length_[axis] / (double)n_[axis]; }

    std::int64_t size() const { return n_[0] * n_[1] * n_[2]; }
    double volume() const { return length_[0] * length_[1] * length_[2]; }
    double cell_volume() const { return volume() / (double)size(); }

    double min_dx() const {
        double d = dx(0);
        for (int a = 1; a < dim_; ++a) d = std::min(d, dx(a));
        return d;
    }

    // Coordinates of the point with per-axis indices (i0,i1,i2).
    std::array<double, 3> point(std::int64_t i0, std::int64_t i1, std::int64_t i2) const {
        return {i0 * dx(0), dim_ > 1 ? i1 * dx(1) : 0.0, dim_ > 2 ? i2 * dx(2) : 0.0};
    }

    // Per-axis indices of the row-major flat index.
    std::array<std::int64_t, 3> unravel(std::int64_t flat) const {
        const std::int64_t i2 = flat % n_[2];
        const std::int64_t i1 = (flat / n_[2]) % n_[1];
        const std::int64_t i0 = flat / (n_[1] * n_[2]);
        return {i0, i1, i2};
    }

    // Coordinates of the row-major flat index.
    std::array<double, 3> coords(std::int64_t flat) const {
        const auto i = unravel(flat);
        return point(i[0], i[1], i[2]);
    }

    bool operator==(const Grid& o) const {
        return dim_ == o.dim_ && n_ == o.n_ && length_ == o.length_;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

    std::string describe() const {
        std::ostringstream os;
        os << dim_ << "d ";
        for (int a = 0; a < dim_; ++a) os << (a ? "x" : "") << n_[a];
        return os.str();
    }

  private:
    int dim_ = 0;
    std::array<std::int64_t, 3> n_{1, 1, 1};
    std::array<double, 3> length_{1.0, 1.0, 1.0};
};

struct ScalarField {
    Grid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid(g), v((std::size_t)g.size(), fill) {}

    std::int64_t size() const { return (std::int64_t)v.size(); }
    double& operator[](std::int64_t i) { return v[(std::size_t)i]; }
    double operator[](std::int64_t i) const { return v[(std::size_t)i]; }
};

struct VectorField {
    Grid grid;
    std::array<std::vector<double>, 3> comp;

    VectorField() = default;
    explicit VectorField(const Grid& g, double fill = 0.0) : grid(g) {
        for (int a = 0; a < g.dim(); ++a)
            comp[a].assign((std::size_t)g.size(), fill);
    }

    std::vector<double>& operator[](int a) { return comp[a]; }
    const std::vector<double>& operator[](int a) const { return comp[a]; }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* op) {
    if (a != b)
        throw PreconditionError(std::string(op) + ": fields live on different grids (" +
                                a.describe() + " vs " + b.describe() + ")");
}

inline void require_finite(const std::vector<double>& v, const char* op) {
    for (double x : v)
        if (!std::isfinite(x))
            throw PreconditionError(std::string(op) + ": non-finite input value");
}

inline void require_finite(const ScalarField& f, const char* op) { require_finite(f.v, op); }

inline void require_finite(const VectorField& f, const char* op) {
    for (int a = 0; a < f.grid.dim(); ++a) require_finite(f.comp[a], op);
}

// Compensated serial accumulator. Keeps long sums accurate to about one ulp
// of the total; used for every reduction so sums stay deterministic and the
// diagnostics built from near-cancelling series are not noise-limited.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

// Cell-volume-weighted quadrature. Compensated serial accumulation in index
// order, so results do not depend on threading or traversal choices elsewhere.
inline double integral(const ScalarField& f) {
    KahanSum s;
    for (double x : f.v) s.add(x);
    return s.value() * f.grid.cell_volume();
}

inline double mean(const ScalarField& f) { return integral(f) / f.grid.volume(); }

inline double min_value(const std::vector<double>& v, std::int64_t* arg = nullptr) {
    double m = v[0];
    std::int64_t mi = 0;
    for (std::int64_t i = 1; i < (std::int64_t)v.size(); ++i)
        if (v[(std::size_t)i] < m) {
            m = v[(std::size_t)i];
            mi = i;
        }
    if (arg) *arg = mi;
    return m;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace dragflow
