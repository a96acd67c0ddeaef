#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace nslab {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator*(double c, const Vec3& a) { return {c * a[0], c * a[1], c * a[2]}; }

/// Uniform node-centered grid over an axis-aligned box, dimension 2 or 3.
/// n[a] counts intervals along axis a, so there are n[a]+1 nodes per axis.
class Grid {
public:
    Grid() = default;
    Grid(int dim, std::array<int, 3> n_intervals, Vec3 origin, Vec3 lengths)
        : dim_(dim), n_(n_intervals), origin_(origin) {
        if (dim != 2 && dim != 3) throw std::invalid_argument("Grid: dim must be 2 or 3");
        for (int a = 0; a < dim; ++a) {
            if (n_[a] < 3) throw std::invalid_argument("Grid: need at least 4 nodes per axis");
            h_[a] = lengths[a] / n_[a];
        }
        if (dim == 2) { n_[2] = 0; h_[2] = 0.0; origin_[2] = 0.0; }
    }

    static Grid square2d(int n, double length = 1.0, Vec3 origin = {0, 0, 0}) {
        return Grid(2, {n, n, 0}, origin, {length, length, 0});
    }
    static Grid cube3d(int n, double length = 1.0, Vec3 origin = {0, 0, 0}) {
        return Grid(3, {n, n, n}, origin, {length, length, length});
    }

    int dim() const { return dim_; }
    int intervals(int axis) const { return n_[axis]; }
    int nodes(int axis) const { return n_[axis] + 1; }
    double h(int axis) const { return h_[axis]; }
    double origin(int axis) const { return origin_[axis]; }
    double length(int axis) const { return h_[axis] * n_[axis]; }
    double h_max() const {
        double m = 0;
        for (int a = 0; a < dim_; ++a) m = std::max(m, h_[a]);
        return m;
    }

    std::size_t num_nodes() const {
        std::size_t m = 1;
        for (int a = 0; a < dim_; ++a) m *= static_cast<std::size_t>(nodes(a));
        return m;
    }

    std::size_t index(int i, int j, int k = 0) const {
        std::size_t idx = static_cast<std::size_t>(i) + static_cast<std::size_t>(nodes(0)) * j;
        if (dim_ == 3) idx += static_cast<std::size_t>(nodes(0)) * nodes(1) * static_cast<std::size_t>(k);
        return idx;
    }

    std::array<int, 3> multi_index(std::size_t idx) const {
        int nx = nodes(0);
        int i = static_cast<int>(idx % nx);
        std::size_t r = idx / nx;
        int j, k = 0;
        if (dim_ == 3) {
            int ny = nodes(1);
            j = static_cast<int>(r % ny);
            k = static_cast<int>(r / ny);
        } else {
            j = static_cast<int>(r);
        }
        return {i, j, k};
    }

    Vec3 coord(int i, int j, int k = 0) const {
        return {origin_[0] + i * h_[0], origin_[1] + j * h_[1],
                dim_ == 3 ? origin_[2] + k * h_[2] : 0.0};
    }
    Vec3 coord(std::size_t idx) const {
        auto m = multi_index(idx);
        return coord(m[0], m[1], m[2]);
    }

    bool on_boundary(std::size_t idx) const {
        auto m = multi_index(idx);
        for (int a = 0; a < dim_; ++a)
            if (m[a] == 0 || m[a] == n_[a]) return true;
        return false;
    }

    /// Trapezoidal quadrature weight of a node (product over axes).
    double quad_weight(std::size_t idx) const {
        auto m = multi_index(idx);
        double w = 1.0;
        for (int a = 0; a < dim_; ++a) {
            double wa = (m[a] == 0 || m[a] == n_[a]) ? 0.5 : 1.0;
            w *= wa * h_[a];
        }
        return w;
    }

    bool same_layout(const Grid& o) const {
        if (dim_ != o.dim_) return false;
        for (int a = 0; a < dim_; ++a)
            if (n_[a] != o.n_[a] || h_[a] != o.h_[a] || origin_[a] != o.origin_[a]) return false;
        return true;
    }

private:
    int dim_ = 2;
    std::array<int, 3> n_ = {0, 0, 0};
    Vec3 h_ = {0, 0, 0};
    Vec3 origin_ = {0, 0, 0};
};

/// Time interval (t0 - delta, t0 + delta) sampled at nt+1 equispaced slices.
class TimeAxis {
public:
    TimeAxis() = default;
    TimeAxis(double t0, double delta, int nt) : t0_(t0), delta_(delta), nt_(nt) {
        if (delta <= 0) throw std::invalid_argument("TimeAxis: delta must be positive");
        if (nt < 2) throw std::invalid_argument("TimeAxis: need at least 3 slices");
    }

    double t0() const { return t0_; }
    double delta() const { return delta_; }
    int intervals() const { return nt_; }
    int slices() const { return nt_ + 1; }
    double dt() const { return 2.0 * delta_ / nt_; }
    double time(int k) const { return t0_ - delta_ + k * dt(); }
    double t_begin() const { return t0_ - delta_; }
    double t_end() const { return t0_ + delta_; }

    /// Slice index of t0; requires nt even so that t0 falls on a node.
    int center_slice() const {
        if (nt_ % 2 != 0) throw std::logic_error("TimeAxis: t0 is not a slice (nt odd)");
        return nt_ / 2;
    }

    double quad_weight(int k) const { return (k == 0 || k == nt_) ? 0.5 * dt() : dt(); }

    bool same_layout(const TimeAxis& o) const {
        return t0_ == o.t0_ && delta_ == o.delta_ && nt_ == o.nt_;
    }

private:
    double t0_ = 0.5;
    double delta_ = 0.25;
    int nt_ = 8;
};

}  // namespace nslab
