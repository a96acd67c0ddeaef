#pragma once

#include <vector>

#include "nslab/domain.hpp"
#include "nslab/fields.hpp"
#include "nslab/weight.hpp"

namespace nslab {

/// Weighted integral stored as mantissa * exp(log_offset) so that large
/// Carleman parameters cannot overflow. Only like-offset values are summed;
/// ratios go through log_value().
struct WeightedValue {
    double mantissa = 0;
    double log_offset = 0;
    std::string region;

    double value() const { return mantissa * std::exp(log_offset); }
    double log_value() const { return log_offset + std::log(mantissa); }

    WeightedValue& operator+=(const WeightedValue& o) {
        if (o.mantissa == 0) return *this;
        if (mantissa == 0) {
            mantissa = o.mantissa;
            log_offset = o.log_offset;
            return *this;
        }
        if (log_offset == o.log_offset) {
            mantissa += o.mantissa;
        } else {
            // realign to the larger offset
            if (o.log_offset > log_offset) {
                mantissa = mantissa * std::exp(log_offset - o.log_offset) + o.mantissa;
                log_offset = o.log_offset;
            } else {
                mantissa += o.mantissa * std::exp(o.log_offset - log_offset);
            }
        }
        return *this;
    }
    friend WeightedValue operator+(WeightedValue a, const WeightedValue& b) { return a += b; }
    friend WeightedValue operator*(double c, WeightedValue v) {
        v.mantissa *= c;
        return v;
    }
    /// Ratio a/b via logs; 0 when a vanishes, +inf when only b vanishes.
    static double ratio(const WeightedValue& a, const WeightedValue& b);
};

/// Nodes and surface quadrature weights of one boundary face.
std::vector<std::pair<std::size_t, double>> face_quadrature(const Grid& g, const FaceId& face);

/// Integral of |f|^2 exp(2 s phi) over the space-time cylinder.
WeightedValue wnorm_cylinder(const SpaceTimeField& f, const WeightFunction& w, double s,
                             double log_offset);

/// Same over a spatial slice; the weight is evaluated at `t_weight`, which may
/// differ from the slice the field was taken at (end-slice terms).
WeightedValue wnorm_slice(const Field& f, const WeightFunction& w, double s, double t_weight,
                          double log_offset);

/// Surface integral over selected faces x time of |f|^2 exp(2 s phi).
WeightedValue wnorm_faces(const SpaceTimeField& f,
                          const std::vector<FaceId>& faces, const WeightFunction& w, double s,
                          double log_offset);

/// Surface integral at one time slice (elliptic estimates).
WeightedValue wnorm_faces_slice(const Field& f,
                                const std::vector<FaceId>& faces, const WeightFunction& w,
                                double s, double t_weight, double log_offset);

/// Integral of |f|^2 exp(2 s phi0) with a static weight closure.
WeightedValue wnorm_static(const Field& f, const std::function<double(const Vec3&)>& phi0,
                           double s, double log_offset);

}  // namespace nslab
