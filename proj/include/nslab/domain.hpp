#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nslab/grid.hpp"

namespace nslab {

/// One whole face of the box boundary: outward axis and side (0 = low, 1 = high).
struct FaceId {
    int axis;
    int side;
    bool operator==(const FaceId&) const = default;
};

struct BoxRegion {
    Vec3 lo{0, 0, 0};
    Vec3 hi{0, 0, 0};
    bool contains(const Vec3& x, int dim, double tol = 0.0) const {
        for (int a = 0; a < dim; ++a)
            if (x[a] < lo[a] - tol || x[a] > hi[a] + tol) return false;
        return true;
    }
};

struct BallRegion {
    Vec3 center{0, 0, 0};
    double radius = 0;
    bool contains(const Vec3& x, int dim, double tol = 0.0) const {
        double r2 = 0;
        for (int a = 0; a < dim; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
        return r2 <= (radius + tol) * (radius + tol);
    }
};

/// Discretized geometry: the flow box with its observed sub-boundary, the
/// recovery subdomain, the enlarged box carrying the weight profile, and the
/// interior opening that absorbs the profile's critical set.
class DomainSpec {
public:
    std::string preset;
    Grid grid;             // nodes of the flow box
    TimeAxis taxis;
    BoxRegion omega;       // the flow box itself
    BoxRegion omega0;      // recovery subdomain, closure inside omega + observed faces
    BoxRegion omega1;      // enlarged box, strictly contains omega
    BallRegion opening;    // critical-set opening, closure inside omega1 minus omega
    std::vector<FaceId> gamma_faces;       // observed part of the boundary
    std::vector<FaceId> rest_faces;        // unobserved part
    /// Corner nodes where two unobserved faces meet; the profile gradient
    /// necessarily vanishes there and grid checks skip (and surface) them.
    std::vector<std::size_t> degenerate_corner_nodes;

    int dim() const { return grid.dim(); }

    bool node_on_face(std::size_t idx, const FaceId& f) const;
    bool node_on_gamma(std::size_t idx) const;
    bool node_on_rest(std::size_t idx) const;
    /// Node lies on a gamma face away from that face's relative boundary.
    bool node_in_gamma_interior(std::size_t idx) const;
    bool node_in_omega0(std::size_t idx) const;

    std::vector<std::size_t> gamma_nodes() const;
    std::vector<std::size_t> rest_nodes() const;
    std::vector<std::size_t> omega0_nodes() const;
    std::vector<std::size_t> boundary_nodes() const;

    /// Companion grid over the enlarged box at matching spacing (profile checks).
    Grid omega1_grid() const;
};

/// Presets: rect2d_right_edge, rect2d_corner, box3d_face.
DomainSpec build_domain(const std::string& preset, int resolution, int time_intervals = 16,
                        double t0 = 0.5, double delta = 0.25);

/// Grid-level invariant violations; empty means the spec is consistent.
std::vector<std::string> check_domain(const DomainSpec& d);

nlohmann::json domain_to_json(const DomainSpec& d);

/// Run-length encoding of a boolean node mask (count pairs: value, run).
std::vector<std::size_t> rle_encode(const std::vector<bool>& mask);

}  // namespace nslab
