#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "nslab/grid.hpp"

namespace nslab {

/// Nodal field with ncomp components (1 = scalar, dim = vector, dim*dim = jacobian).
/// Storage is component-major: data[c * num_nodes + node].
class Field {
public:
    Field() = default;
    Field(const Grid& g, int ncomp, double init = 0.0)
        : grid_(g), ncomp_(ncomp), data_(g.num_nodes() * ncomp, init) {}

    const Grid& grid() const { return grid_; }
    int ncomp() const { return ncomp_; }
    std::size_t num_nodes() const { return grid_.num_nodes(); }

    double& at(int c, std::size_t idx) { return data_[c * num_nodes() + idx]; }
    double at(int c, std::size_t idx) const { return data_[c * num_nodes() + idx]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool has_nan() const {
        for (double v : data_)
            if (!std::isfinite(v)) return true;
        return false;
    }

    double max_abs() const {
        double m = 0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    Field& operator+=(const Field& o) {
        check_compatible(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        check_compatible(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Field& operator*=(double c) {
        for (double& v : data_) v *= c;
        return *this;
    }

    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator*(double c, Field a) { return a *= c; }

    /// Fill from per-component closure f(c, x).
    static Field sample(const Grid& g, int ncomp,
                        const std::function<double(int, const Vec3&)>& f) {
        Field out(g, ncomp);
        for (int c = 0; c < ncomp; ++c)
            for (std::size_t idx = 0; idx < g.num_nodes(); ++idx)
                out.at(c, idx) = f(c, g.coord(idx));
        return out;
    }

private:
    void check_compatible(const Field& o) const {
        if (!grid_.same_layout(o.grid_) || ncomp_ != o.ncomp_)
            throw std::invalid_argument("Field: incompatible operands");
    }

    Grid grid_;
    int ncomp_ = 0;
    std::vector<double> data_;
};

/// Field over the space-time cylinder: one spatial Field per time slice.
class SpaceTimeField {
public:
    SpaceTimeField() = default;
    SpaceTimeField(const Grid& g, const TimeAxis& t, int ncomp, double init = 0.0)
        : grid_(g), taxis_(t), ncomp_(ncomp),
          data_(g.num_nodes() * ncomp * t.slices(), init) {}

    const Grid& grid() const { return grid_; }
    const TimeAxis& taxis() const { return taxis_; }
    int ncomp() const { return ncomp_; }
    std::size_t num_nodes() const { return grid_.num_nodes(); }
    int slices() const { return taxis_.slices(); }

    double& at(int k, int c, std::size_t idx) {
        return data_[(static_cast<std::size_t>(k) * ncomp_ + c) * num_nodes() + idx];
    }
    double at(int k, int c, std::size_t idx) const {
        return data_[(static_cast<std::size_t>(k) * ncomp_ + c) * num_nodes() + idx];
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    Field slice(int k) const {
        Field f(grid_, ncomp_);
        for (int c = 0; c < ncomp_; ++c)
            for (std::size_t idx = 0; idx < num_nodes(); ++idx) f.at(c, idx) = at(k, c, idx);
        return f;
    }
    void set_slice(int k, const Field& f) {
        for (int c = 0; c < ncomp_; ++c)
            for (std::size_t idx = 0; idx < num_nodes(); ++idx) at(k, c, idx) = f.at(c, idx);
    }

    bool has_nan() const {
        for (double v : data_)
            if (!std::isfinite(v)) return true;
        return false;
    }

    SpaceTimeField& operator-=(const SpaceTimeField& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    SpaceTimeField& operator*=(double c) {
        for (double& v : data_) v *= c;
        return *this;
    }
    friend SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b) { return a -= b; }
    friend SpaceTimeField operator*(double c, SpaceTimeField a) { return a *= c; }

    /// Fill from closure f(c, x, t).
    static SpaceTimeField sample(const Grid& g, const TimeAxis& t, int ncomp,
                                 const std::function<double(int, const Vec3&, double)>& f) {
        SpaceTimeField out(g, t, ncomp);
        for (int k = 0; k < t.slices(); ++k) {
            double tk = t.time(k);
            for (int c = 0; c < ncomp; ++c)
                for (std::size_t idx = 0; idx < g.num_nodes(); ++idx)
                    out.at(k, c, idx) = f(c, g.coord(idx), tk);
        }
        return out;
    }

private:
    Grid grid_;
    TimeAxis taxis_;
    int ncomp_ = 0;
    std::vector<double> data_;
};

}  // namespace nslab
