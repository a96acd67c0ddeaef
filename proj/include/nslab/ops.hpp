#pragma once

#include "nslab/fields.hpp"

namespace nslab::ops {

/// Second-order first derivative along a spatial axis; one-sided 3-point stencils
/// at the two boundary layers.
Field derivative(const Field& f, int axis);

/// Second-order second derivative along a spatial axis; one-sided 4-point at boundaries.
Field second_derivative(const Field& f, int axis);

/// Gradient of a scalar field -> vector field (ncomp = dim).
Field gradient(const Field& scalar);

/// Jacobian of a vector field; component layout [c * dim + a] = d_a v_c.
Field jacobian(const Field& vec);

Field divergence(const Field& vec);

/// Curl. 2D: vector -> scalar (d1 v2 - d2 v1). 3D: vector -> vector.
Field curl(const Field& vec);

/// Curl acting on a vorticity-type field: inverse-degree rotation.
/// 2D: scalar z -> (d2 z, -d1 z). 3D: same as curl.
Field vorticity_curl(const Field& w);

/// Componentwise Laplacian via direct second-derivative stencils.
Field laplacian(const Field& f);

/// Pointwise magnitude of -Lap(w) - rot rot w + grad div w (scalar output).
Field vector_identity_residual(const Field& w);

/// Second-order time derivative of a space-time field (one-sided at the ends).
SpaceTimeField time_derivative(const SpaceTimeField& f);

/// Apply a spatial operator slice-by-slice.
template <typename Op>
SpaceTimeField per_slice(const SpaceTimeField& f, Op op) {
    Field first = op(f.slice(0));
    SpaceTimeField out(f.grid(), f.taxis(), first.ncomp());
    out.set_slice(0, first);
    for (int k = 1; k < f.slices(); ++k) out.set_slice(k, op(f.slice(k)));
    return out;
}

/// L2 norm over the grid (trapezoidal), all components.
double l2_norm(const Field& f);
/// Max magnitude over nodes at least `layers` away from the boundary
/// (composed one-sided stencils lose an order inside that band).
double max_abs_interior(const Field& f, int layers);
/// L2 norm over the cylinder (trapezoidal in space and time).
double l2_norm(const SpaceTimeField& f);

/// Discrete Sobolev seminorm surrogate: sum of squared L2 norms of all stencil
/// derivatives of order <= k (composed first-derivative stencils).
double sobolev_norm_sq(const Field& f, int order);

}  // namespace nslab::ops
