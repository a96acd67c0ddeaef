#include "nslab/ops.hpp"

#include <cmath>
#include <stdexcept>

namespace nslab::ops {

namespace {

// Walk all 1D lines along `axis`, calling fn(base_index, stride, count).
template <typename Fn>
void for_each_line(const Grid& g, int axis, Fn fn) {
    int nx = g.nodes(0), ny = g.nodes(1), nz = g.dim() == 3 ? g.nodes(2) : 1;
    std::size_t stride;
    switch (axis) {
        case 0: stride = 1; break;
        case 1: stride = static_cast<std::size_t>(nx); break;
        default: stride = static_cast<std::size_t>(nx) * ny; break;
    }
    if (axis == 0) {
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j < ny; ++j) fn(g.index(0, j, k), stride, nx);
    } else if (axis == 1) {
        for (int k = 0; k < nz; ++k)
            for (int i = 0; i < nx; ++i) fn(g.index(i, 0, k), stride, ny);
    } else {
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) fn(g.index(i, j, 0), stride, nz);
    }
}

void check_axis(const Field& f, int axis) {
    if (axis < 0 || axis >= f.grid().dim())
        throw std::invalid_argument("derivative: axis out of range");
    if (f.grid().nodes(axis) < 4)
        throw std::invalid_argument("derivative: need at least 4 nodes per axis");
}

}  // namespace

Field derivative(const Field& f, int axis) {
    check_axis(f, axis);
    const Grid& g = f.grid();
    const double h = g.h(axis);
    Field out(g, f.ncomp());
    for (int c = 0; c < f.ncomp(); ++c) {
        const double* in = f.data().data() + c * g.num_nodes();
        double* o = out.data().data() + c * g.num_nodes();
        for_each_line(g, axis, [&](std::size_t base, std::size_t s, int n) {
            o[base] = (-3.0 * in[base] + 4.0 * in[base + s] - in[base + 2 * s]) / (2 * h);
            for (int i = 1; i < n - 1; ++i)
                o[base + i * s] = (in[base + (i + 1) * s] - in[base + (i - 1) * s]) / (2 * h);
            std::size_t e = base + (n - 1) * s;
            o[e] = (3.0 * in[e] - 4.0 * in[e - s] + in[e - 2 * s]) / (2 * h);
        });
    }
    return out;
}

Field second_derivative(const Field& f, int axis) {
    check_axis(f, axis);
    const Grid& g = f.grid();
    const double h2 = g.h(axis) * g.h(axis);
    Field out(g, f.ncomp());
    for (int c = 0; c < f.ncomp(); ++c) {
        const double* in = f.data().data() + c * g.num_nodes();
        double* o = out.data().data() + c * g.num_nodes();
        for_each_line(g, axis, [&](std::size_t base, std::size_t s, int n) {
            o[base] = (2.0 * in[base] - 5.0 * in[base + s] + 4.0 * in[base + 2 * s] -
                       in[base + 3 * s]) / h2;
            for (int i = 1; i < n - 1; ++i)
                o[base + i * s] = (in[base + (i + 1) * s] - 2.0 * in[base + i * s] +
                                   in[base + (i - 1) * s]) / h2;
            std::size_t e = base + (n - 1) * s;
            o[e] = (2.0 * in[e] - 5.0 * in[e - s] + 4.0 * in[e - 2 * s] - in[e - 3 * s]) / h2;
        });
    }
    return out;
}

Field gradient(const Field& scalar) {
    if (scalar.ncomp() != 1) throw std::invalid_argument("gradient: scalar input expected");
    const Grid& g = scalar.grid();
    Field out(g, g.dim());
    for (int a = 0; a < g.dim(); ++a) {
        Field da = derivative(scalar, a);
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) out.at(a, idx) = da.at(0, idx);
    }
    return out;
}

Field jacobian(const Field& vec) {
    const Grid& g = vec.grid();
    int dim = g.dim();
    if (vec.ncomp() != dim) throw std::invalid_argument("jacobian: vector input expected");
    Field out(g, dim * dim);
    for (int a = 0; a < dim; ++a) {
        Field da = derivative(vec, a);
        for (int c = 0; c < dim; ++c)
            for (std::size_t idx = 0; idx < g.num_nodes(); ++idx)
                out.at(c * dim + a, idx) = da.at(c, idx);
    }
    return out;
}

Field divergence(const Field& vec) {
    const Grid& g = vec.grid();
    int dim = g.dim();
    if (vec.ncomp() != dim) throw std::invalid_argument("divergence: vector input expected");
    Field out(g, 1);
    for (int a = 0; a < dim; ++a) {
        Field da = derivative(vec, a);
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) out.at(0, idx) += da.at(a, idx);
    }
    return out;
}

Field curl(const Field& vec) {
    const Grid& g = vec.grid();
    int dim = g.dim();
    if (vec.ncomp() != dim) throw std::invalid_argument("curl: vector input expected");
    if (dim == 2) {
        Field d1 = derivative(vec, 0), d2 = derivative(vec, 1);
        Field out(g, 1);
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx)
            out.at(0, idx) = d1.at(1, idx) - d2.at(0, idx);
        return out;
    }
    Field d0 = derivative(vec, 0), d1 = derivative(vec, 1), d2 = derivative(vec, 2);
    Field out(g, 3);
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        out.at(0, idx) = d1.at(2, idx) - d2.at(1, idx);
        out.at(1, idx) = d2.at(0, idx) - d0.at(2, idx);
        out.at(2, idx) = d0.at(1, idx) - d1.at(0, idx);
    }
    return out;
}

Field vorticity_curl(const Field& w) {
    const Grid& g = w.grid();
    if (g.dim() == 2) {
        if (w.ncomp() != 1) throw std::invalid_argument("vorticity_curl: 2D expects scalar");
        Field d1 = derivative(w, 0), d2 = derivative(w, 1);
        Field out(g, 2);
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
            out.at(0, idx) = d2.at(0, idx);
            out.at(1, idx) = -d1.at(0, idx);
        }
        return out;
    }
    return curl(w);
}

Field laplacian(const Field& f) {
    const Grid& g = f.grid();
    Field out = second_derivative(f, 0);
    for (int a = 1; a < g.dim(); ++a) {
        Field da = second_derivative(f, a);
        out += da;
    }
    return out;
}

Field vector_identity_residual(const Field& w) {
    const Grid& g = w.grid();
    if (w.ncomp() != g.dim()) throw std::invalid_argument("vector_identity_residual: vector input");
    Field lap = laplacian(w);
    Field rotrot = vorticity_curl(curl(w));
    Field graddiv = gradient(divergence(w));
    Field res(g, 1);
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        double s = 0;
        for (int c = 0; c < g.dim(); ++c) {
            double r = -lap.at(c, idx) - rotrot.at(c, idx) + graddiv.at(c, idx);
            s += r * r;
        }
        res.at(0, idx) = std::sqrt(s);
    }
    return res;
}

SpaceTimeField time_derivative(const SpaceTimeField& f) {
    const TimeAxis& t = f.taxis();
    if (t.slices() < 3) throw std::invalid_argument("time_derivative: need at least 3 slices");
    double dt = t.dt();
    SpaceTimeField out(f.grid(), t, f.ncomp());
    std::size_t per_slice_len = f.num_nodes() * f.ncomp();
    const double* in = f.data().data();
    double* o = out.data().data();
    int nt = t.slices();
    for (std::size_t p = 0; p < per_slice_len; ++p) {
        auto v = [&](int k) { return in[k * per_slice_len + p]; };
        o[p] = (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2 * dt);
        for (int k = 1; k < nt - 1; ++k)
            o[k * per_slice_len + p] = (v(k + 1) - v(k - 1)) / (2 * dt);
        o[(nt - 1) * per_slice_len + p] =
            (3.0 * v(nt - 1) - 4.0 * v(nt - 2) + v(nt - 3)) / (2 * dt);
    }
    return out;
}

double max_abs_interior(const Field& f, int layers) {
    const Grid& g = f.grid();
    double m = 0;
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        auto mi = g.multi_index(idx);
        bool inner = true;
        for (int a = 0; a < g.dim(); ++a)
            if (mi[a] < layers || mi[a] > g.intervals(a) - layers) inner = false;
        if (!inner) continue;
        for (int c = 0; c < f.ncomp(); ++c) m = std::max(m, std::abs(f.at(c, idx)));
    }
    return m;
}

double l2_norm(const Field& f) {
    const Grid& g = f.grid();
    double acc = 0;
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        double w = g.quad_weight(idx), s = 0;
        for (int c = 0; c < f.ncomp(); ++c) s += f.at(c, idx) * f.at(c, idx);
        acc += w * s;
    }
    return std::sqrt(acc);
}

double l2_norm(const SpaceTimeField& f) {
    const Grid& g = f.grid();
    const TimeAxis& t = f.taxis();
    double acc = 0;
    for (int k = 0; k < t.slices(); ++k) {
        double wt = t.quad_weight(k);
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
            double w = g.quad_weight(idx), s = 0;
            for (int c = 0; c < f.ncomp(); ++c) s += f.at(k, c, idx) * f.at(k, c, idx);
            acc += wt * w * s;
        }
    }
    return std::sqrt(acc);
}

double sobolev_norm_sq(const Field& f, int order) {
    double acc = 0;
    // breadth-first over derivative multi-indices, one extra derivative per level
    std::vector<Field> level = {f};
    for (int k = 0; k <= order; ++k) {
        for (const Field& d : level) {
            double n = l2_norm(d);
            acc += n * n;
        }
        if (k == order) break;
        std::vector<Field> next;
        for (const Field& d : level)
            for (int a = 0; a < f.grid().dim(); ++a) next.push_back(derivative(d, a));
        level = std::move(next);
    }
    return acc;
}

}  // namespace nslab::ops
