#include "nslab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace nslab {

bool DomainSpec::node_on_face(std::size_t idx, const FaceId& f) const {
    auto m = grid.multi_index(idx);
    return m[f.axis] == (f.side == 0 ? 0 : grid.intervals(f.axis));
}

bool DomainSpec::node_on_gamma(std::size_t idx) const {
    for (const auto& f : gamma_faces)
        if (node_on_face(idx, f)) return true;
    return false;
}

bool DomainSpec::node_on_rest(std::size_t idx) const {
    for (const auto& f : rest_faces)
        if (node_on_face(idx, f)) return true;
    return false;
}

bool DomainSpec::node_in_gamma_interior(std::size_t idx) const {
    if (!node_on_gamma(idx)) return false;
    for (const auto& f : gamma_faces) {
        if (!node_on_face(idx, f)) continue;
        auto m = grid.multi_index(idx);
        bool interior = true;
        for (int a = 0; a < dim(); ++a) {
            if (a == f.axis) continue;
            if (m[a] == 0 || m[a] == grid.intervals(a)) interior = false;
        }
        // a node on the shared edge of two gamma faces still counts as interior
        if (!interior && node_on_gamma(idx)) {
            int gamma_hits = 0;
            for (const auto& g2 : gamma_faces)
                if (node_on_face(idx, g2)) ++gamma_hits;
            bool rest_hit = node_on_rest(idx);
            if (gamma_hits >= 2 && !rest_hit) interior = true;
        }
        if (interior) return true;
    }
    return false;
}

bool DomainSpec::node_in_omega0(std::size_t idx) const {
    return omega0.contains(grid.coord(idx), dim(), 1e-12);
}

std::vector<std::size_t> DomainSpec::gamma_nodes() const {
    std::vector<std::size_t> out;
    for (std::size_t idx = 0; idx < grid.num_nodes(); ++idx)
        if (node_on_gamma(idx)) out.push_back(idx);
    return out;
}

std::vector<std::size_t> DomainSpec::rest_nodes() const {
    std::vector<std::size_t> out;
    for (std::size_t idx = 0; idx < grid.num_nodes(); ++idx)
        if (node_on_rest(idx) && !node_on_gamma(idx)) out.push_back(idx);
    return out;
}

std::vector<std::size_t> DomainSpec::omega0_nodes() const {
    std::vector<std::size_t> out;
    for (std::size_t idx = 0; idx < grid.num_nodes(); ++idx)
        if (node_in_omega0(idx)) out.push_back(idx);
    return out;
}

std::vector<std::size_t> DomainSpec::boundary_nodes() const {
    std::vector<std::size_t> out;
    for (std::size_t idx = 0; idx < grid.num_nodes(); ++idx)
        if (grid.on_boundary(idx)) out.push_back(idx);
    return out;
}

Grid DomainSpec::omega1_grid() const {
    std::array<int, 3> n = {0, 0, 0};
    Vec3 len = {0, 0, 0};
    for (int a = 0; a < dim(); ++a) {
        len[a] = omega1.hi[a] - omega1.lo[a];
        n[a] = std::max(4, static_cast<int>(std::lround(len[a] / grid.h(a))));
    }
    return Grid(dim(), n, omega1.lo, len);
}

DomainSpec build_domain(const std::string& preset, int resolution, int time_intervals,
                        double t0, double delta) {
    if (resolution < 4) throw std::invalid_argument("build_domain: resolution too coarse");
    if (time_intervals % 2 != 0)
        throw std::invalid_argument("build_domain: time_intervals must be even (t0 on a slice)");

    DomainSpec d;
    d.preset = preset;
    d.taxis = TimeAxis(t0, delta, time_intervals);

    // The enlarged box shares every unobserved face with the flow box, so the
    // profile vanishes there exactly; the bulge sticks out past the observed
    // face only.
    if (preset == "rect2d_right_edge") {
        d.grid = Grid::square2d(resolution);
        d.omega = {{0, 0, 0}, {1, 1, 0}};
        d.omega0 = {{0.5, 0.25, 0}, {1.0, 0.75, 0}};
        d.omega1 = {{0, 0, 0}, {1.4, 1, 0}};
        d.opening = {{1.2, 0.5, 0}, 0.1};
        d.gamma_faces = {{0, 1}};
        d.rest_faces = {{0, 0}, {1, 0}, {1, 1}};
    } else if (preset == "rect2d_corner") {
        d.grid = Grid::square2d(resolution);
        d.omega = {{0, 0, 0}, {1, 1, 0}};
        d.omega0 = {{0.5, 0.5, 0}, {1.0, 1.0, 0}};
        d.omega1 = {{0, 0, 0}, {1.4, 1.4, 0}};
        d.opening = {{1.2, 1.2, 0}, 0.1};
        d.gamma_faces = {{0, 1}, {1, 1}};
        d.rest_faces = {{0, 0}, {1, 0}};
    } else if (preset == "box3d_face") {
        d.grid = Grid::cube3d(resolution);
        d.omega = {{0, 0, 0}, {1, 1, 1}};
        d.omega0 = {{0.5, 0.25, 0.25}, {1.0, 0.75, 0.75}};
        d.omega1 = {{0, 0, 0}, {1.4, 1, 1}};
        d.opening = {{1.2, 0.5, 0.5}, 0.1};
        d.gamma_faces = {{0, 1}};
        d.rest_faces = {{0, 0}, {1, 0}, {1, 1}, {2, 0}, {2, 1}};
    } else {
        throw std::invalid_argument("build_domain: unknown preset '" + preset + "'");
    }

    // Nodes on two or more unobserved faces: the profile vanishes on both, so
    // its gradient is forced to zero there. A box-corner artifact; surfaced by
    // the checks rather than silently passed.
    for (std::size_t idx = 0; idx < d.grid.num_nodes(); ++idx) {
        int hits = 0;
        for (const auto& f : d.rest_faces)
            if (d.node_on_face(idx, f)) ++hits;
        if (hits >= 2) d.degenerate_corner_nodes.push_back(idx);
    }

    auto violations = check_domain(d);
    if (!violations.empty()) {
        std::string msg = "build_domain: inconsistent spec:";
        for (const auto& v : violations) msg += " " + v + ";";
        throw std::invalid_argument(msg);
    }
    return d;
}

std::vector<std::string> check_domain(const DomainSpec& d) {
    std::vector<std::string> out;
    int dim = d.dim();

    // strict containment omega < omega1 with room to spare somewhere
    double slack = 0;
    for (int a = 0; a < dim; ++a) {
        if (d.omega.lo[a] < d.omega1.lo[a] - 1e-12 || d.omega.hi[a] > d.omega1.hi[a] + 1e-12)
            out.push_back("omega not contained in omega1");
        slack += (d.omega.lo[a] - d.omega1.lo[a]) + (d.omega1.hi[a] - d.omega.hi[a]);
    }
    if (slack <= 1e-12) out.push_back("omega1 minus omega has no interior");

    // opening closure inside omega1 and outside closure of omega
    for (int a = 0; a < dim; ++a) {
        if (d.opening.center[a] - d.opening.radius < d.omega1.lo[a] - 1e-12 ||
            d.opening.center[a] + d.opening.radius > d.omega1.hi[a] + 1e-12)
            out.push_back("opening not inside omega1");
    }
    {
        // distance from the opening center to the omega box must exceed the radius
        double dist2 = 0;
        for (int a = 0; a < dim; ++a) {
            double lo = d.omega.lo[a], hi = d.omega.hi[a], c = d.opening.center[a];
            double dd = (c < lo) ? lo - c : (c > hi ? c - hi : 0.0);
            dist2 += dd * dd;
        }
        if (std::sqrt(dist2) <= d.opening.radius + 1e-12)
            out.push_back("opening closure intersects closure of omega");
    }

    // omega0 closure inside omega union gamma: every omega0 node on the boundary
    // must sit in the relative interior of an observed face
    bool omega0_nonempty = false;
    for (std::size_t idx = 0; idx < d.grid.num_nodes(); ++idx) {
        if (!d.node_in_omega0(idx)) continue;
        omega0_nonempty = true;
        if (d.grid.on_boundary(idx)) {
            if (!d.node_in_gamma_interior(idx)) {
                out.push_back("omega0 touches the boundary outside the observed interior");
                break;
            }
        }
    }
    if (!omega0_nonempty) out.push_back("resolution too coarse: omega0 has no nodes");

    // every gamma node is a boundary node (mask consistency)
    for (std::size_t idx = 0; idx < d.grid.num_nodes(); ++idx) {
        if (d.node_on_gamma(idx) && !d.grid.on_boundary(idx)) {
            out.push_back("gamma mask contains interior nodes");
            break;
        }
    }

    // faces partition the boundary
    std::size_t nfaces = d.gamma_faces.size() + d.rest_faces.size();
    if (nfaces != static_cast<std::size_t>(2 * dim)) out.push_back("faces do not cover the boundary");

    return out;
}

std::vector<std::size_t> rle_encode(const std::vector<bool>& mask) {
    std::vector<std::size_t> runs;
    if (mask.empty()) return runs;
    bool cur = false;  // encoding starts from `false`; first run may be 0
    std::size_t len = 0;
    for (bool b : mask) {
        if (b == cur) {
            ++len;
        } else {
            runs.push_back(len);
            cur = b;
            len = 1;
        }
    }
    runs.push_back(len);
    return runs;
}

nlohmann::json domain_to_json(const DomainSpec& d) {
    nlohmann::json j;
    j["preset"] = d.preset;
    j["dim"] = d.dim();
    j["resolution"] = d.grid.intervals(0);
    j["h"] = d.grid.h(0);
    j["time"] = {{"t0", d.taxis.t0()}, {"delta", d.taxis.delta()}, {"nt", d.taxis.intervals()}};
    auto mask_json = [&](auto pred) {
        std::vector<bool> m(d.grid.num_nodes());
        for (std::size_t idx = 0; idx < d.grid.num_nodes(); ++idx) m[idx] = pred(idx);
        return rle_encode(m);
    };
    j["masks"]["omega0_rle"] = mask_json([&](std::size_t i) { return d.node_in_omega0(i); });
    j["masks"]["gamma_rle"] = mask_json([&](std::size_t i) { return d.node_on_gamma(i); });
    j["masks"]["boundary_rest_rle"] =
        mask_json([&](std::size_t i) { return d.node_on_rest(i) && !d.node_on_gamma(i); });
    return j;
}

}  // namespace nslab
