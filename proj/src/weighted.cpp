#include "nslab/weighted.hpp"

#include <cmath>
#include <limits>

namespace nslab {

double WeightedValue::ratio(const WeightedValue& a, const WeightedValue& b) {
    if (a.mantissa == 0) return 0.0;
    if (b.mantissa == 0) return std::numeric_limits<double>::infinity();
    return std::exp(a.log_value() - b.log_value());
}

std::vector<std::pair<std::size_t, double>> face_quadrature(const Grid& g, const FaceId& face) {
    std::vector<std::pair<std::size_t, double>> out;
    int dim = g.dim();
    int fixed = face.side == 0 ? 0 : g.intervals(face.axis);
    auto tangential_weight = [&](const std::array<int, 3>& m) {
        double w = 1.0;
        for (int a = 0; a < dim; ++a) {
            if (a == face.axis) continue;
            double wa = (m[a] == 0 || m[a] == g.intervals(a)) ? 0.5 : 1.0;
            w *= wa * g.h(a);
        }
        return w;
    };
    std::array<int, 3> m = {0, 0, 0};
    m[face.axis] = fixed;
    int a1 = -1, a2 = -1;
    for (int a = 0; a < dim; ++a)
        if (a != face.axis) (a1 < 0 ? a1 : a2) = a;
    for (int i = 0; i < g.nodes(a1); ++i) {
        m[a1] = i;
        if (a2 >= 0) {
            for (int j = 0; j < g.nodes(a2); ++j) {
                m[a2] = j;
                out.emplace_back(g.index(m[0], m[1], m[2]), tangential_weight(m));
            }
        } else {
            out.emplace_back(g.index(m[0], m[1], m[2]), tangential_weight(m));
        }
    }
    return out;
}

namespace {

double sq_mag(const Field& f, std::size_t idx) {
    double s = 0;
    for (int c = 0; c < f.ncomp(); ++c) s += f.at(c, idx) * f.at(c, idx);
    return s;
}

double sq_mag(const SpaceTimeField& f, int k, std::size_t idx) {
    double s = 0;
    for (int c = 0; c < f.ncomp(); ++c) s += f.at(k, c, idx) * f.at(k, c, idx);
    return s;
}

}  // namespace

WeightedValue wnorm_cylinder(const SpaceTimeField& f, const WeightFunction& w, double s,
                             double log_offset) {
    const Grid& g = f.grid();
    const TimeAxis& t = f.taxis();
    WeightedValue out{0.0, log_offset, "Q"};
    for (int k = 0; k < t.slices(); ++k) {
        double tk = t.time(k);
        double wt = t.quad_weight(k);
        double acc = 0;
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
            double sq = sq_mag(f, k, idx);
            if (sq == 0.0) continue;
            double e = std::exp(2.0 * s * w.phi(g.coord(idx), tk) - log_offset);
            acc += g.quad_weight(idx) * sq * e;
        }
        out.mantissa += wt * acc;
    }
    return out;
}

WeightedValue wnorm_slice(const Field& f, const WeightFunction& w, double s, double t_weight,
                          double log_offset) {
    const Grid& g = f.grid();
    WeightedValue out{0.0, log_offset, "Omega"};
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        double sq = sq_mag(f, idx);
        if (sq == 0.0) continue;
        double e = std::exp(2.0 * s * w.phi(g.coord(idx), t_weight) - log_offset);
        out.mantissa += g.quad_weight(idx) * sq * e;
    }
    return out;
}

WeightedValue wnorm_faces(const SpaceTimeField& f,
                          const std::vector<FaceId>& faces, const WeightFunction& w, double s,
                          double log_offset) {
    const Grid& g = f.grid();
    const TimeAxis& t = f.taxis();
    WeightedValue out{0.0, log_offset, "faces x I"};
    for (const FaceId& face : faces) {
        auto quad = face_quadrature(g, face);
        for (int k = 0; k < t.slices(); ++k) {
            double tk = t.time(k);
            double wt = t.quad_weight(k);
            double acc = 0;
            for (const auto& [idx, wq] : quad) {
                double sq = sq_mag(f, k, idx);
                if (sq == 0.0) continue;
                double e = std::exp(2.0 * s * w.phi(g.coord(idx), tk) - log_offset);
                acc += wq * sq * e;
            }
            out.mantissa += wt * acc;
        }
    }
    return out;
}

WeightedValue wnorm_faces_slice(const Field& f,
                                const std::vector<FaceId>& faces, const WeightFunction& w,
                                double s, double t_weight, double log_offset) {
    const Grid& g = f.grid();
    WeightedValue out{0.0, log_offset, "faces"};
    for (const FaceId& face : faces) {
        for (const auto& [idx, wq] : face_quadrature(g, face)) {
            double sq = sq_mag(f, idx);
            if (sq == 0.0) continue;
            double e = std::exp(2.0 * s * w.phi(g.coord(idx), t_weight) - log_offset);
            out.mantissa += wq * sq * e;
        }
    }
    return out;
}

WeightedValue wnorm_static(const Field& f, const std::function<double(const Vec3&)>& phi0,
                           double s, double log_offset) {
    const Grid& g = f.grid();
    WeightedValue out{0.0, log_offset, "static"};
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        double sq = sq_mag(f, idx);
        if (sq == 0.0) continue;
        double e = std::exp(2.0 * s * phi0(g.coord(idx)) - log_offset);
        out.mantissa += g.quad_weight(idx) * sq * e;
    }
    return out;
}

}  // namespace nslab
