#pragma once

#include <functional>

#include "nslab/fields.hpp"
#include "nslab/linalg.hpp"
#include "nslab/manufactured.hpp"

namespace nslab {

/// Symmetric finite-volume style negative Neumann Laplacian (positive
/// semidefinite, constants in the nullspace) and the matching diagonal of
/// quadrature weights for the RHS.
SparseMatrix assemble_neumann_laplacian(const Grid& g);
std::vector<double> node_quad_weights(const Grid& g);

/// Dirichlet 5/7-point Laplacian over interior nodes. `interior_index` maps
/// grid nodes to unknown ids (SIZE_MAX on the boundary).
struct DirichletPoisson {
    SparseMatrix A;  // SPD, -Laplacian on interior unknowns
    std::vector<std::size_t> interior_index;
    std::vector<std::size_t> interior_nodes;
};
DirichletPoisson assemble_dirichlet_poisson(const Grid& g);

/// Solves -Lap u = rhs with Dirichlet boundary values; returns the full field.
Field solve_poisson_dirichlet(const Grid& g, const Field& rhs, const Field& boundary,
                              double tol = 1e-10, int max_iter = 20000,
                              SolveStats* stats = nullptr);

struct ProjectionConfig {
    bool implicit_diffusion = false;
    double poisson_tol = 1e-10;
    int poisson_max_iter = 20000;
    double helmholtz_tol = 1e-12;
};

/// Pressure-projection integrator for the linearized momentum balance.
/// Boundary values of the velocity come from the supplied closure (method of
/// manufactured solutions usage).
class ProjectionStepper {
public:
    ProjectionStepper(const Grid& g, CoefficientFields coeffs,
                      std::function<Vec3(const Vec3&, double)> forcing,
                      std::function<Vec3(const Vec3&, double)> boundary_velocity,
                      ProjectionConfig cfg = {});

    /// Advances one step from time t; explicit variant requires
    /// dt <= h^2 / (2 dim).
    Field step(const Field& v, double t, double dt);

    double last_divergence() const { return last_div_; }
    const Field& pressure() const { return pressure_; }

private:
    Grid grid_;
    CoefficientFields coeffs_;
    std::function<Vec3(const Vec3&, double)> forcing_, bc_;
    ProjectionConfig cfg_;
    SparseMatrix neumann_;
    std::vector<double> weights_;
    std::vector<double> pressure_guess_;
    Field pressure_;
    double last_div_ = 0;
};

struct MmsRunResult {
    double l2_error = 0;       // velocity error at the final time
    double max_divergence = 0; // over all steps
    double max_velocity = 0;   // for zero-forcing / obstruction bounds
};

/// Marches from t_begin to t_end with `steps` uniform steps, starting from the
/// exact solution, and reports the final-time error.
MmsRunResult run_projection_mms(const ManufacturedSolution& sol, const CoefficientFields& coeffs,
                                const Grid& g, double t_begin, double t_end, int steps,
                                ProjectionConfig cfg = {});

}  // namespace nslab
