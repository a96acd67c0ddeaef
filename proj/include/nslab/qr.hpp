#pragma once

#include <optional>

#include <nlohmann/json_fwd.hpp>

#include "nslab/cauchy.hpp"
#include "nslab/constants.hpp"
#include "nslab/linalg.hpp"
#include "nslab/manufactured.hpp"
#include "nslab/weight.hpp"

namespace nslab {

/// Weighted least-squares formulation of the continuation / source problems:
/// vorticity-velocity residual rows weighted by exp(s(phi - phi_max)),
/// boundary-data mismatch rows with penalty gamma_b, optional interior
/// snapshot rows, and a Tikhonov ridge.
struct QRProblem {
    DomainSpec dom;
    WeightFunction weight;
    double s = 2.0;
    double alpha = 1e-12;
    double gamma_b = 1.0;
    double gamma_snap = 1.0;
    CauchyDataset data;
    CoefficientFields coeffs;
    /// Continuation mode keeps the parabolic rows with zero forcing.
    bool include_parabolic = true;
    /// Source mode: the unknown forcing curl enters the parabolic rows through
    /// time-independent coefficient fields times powers of (t - t0), up to
    /// this degree (-1 disables the forcing block).
    int forcing_time_basis = -1;
};

struct QRSystem {
    SparseMatrix A;
    std::vector<double> b;
    std::size_t n_space = 0;
    int slices = 0;
    int dim = 2;
    // row-block extents for residual reporting
    std::size_t rows_parabolic = 0, rows_elliptic = 0, rows_div = 0, rows_data = 0,
                rows_snapshot = 0, rows_ridge = 0;

    int forcing_fields = 0;  // rc * (degree + 1) when the forcing block is on
    std::size_t num_unknowns() const {
        int rc = dim == 2 ? 1 : 3;
        return n_space * static_cast<std::size_t>(slices) * (rc + dim) +
               static_cast<std::size_t>(forcing_fields) * n_space;
    }
};

QRSystem assemble_qr_system(const QRProblem& p);

struct ReconstructionResult {
    SpaceTimeField z, v;
    SolveStats stats;
    double residual_parabolic = 0, residual_elliptic = 0, residual_div = 0, residual_data = 0;
    bool converged = false;
};

ReconstructionResult solve_qr(const QRProblem& p, const QRSystem& sys, double tol = 1e-8,
                              int max_iter = 8000, const std::vector<double>* warm_start = nullptr,
                              std::vector<double>* solution_out = nullptr);

/// Apply the discrete operator blocks to stacked exact fields; equals the
/// assembled matrix action (consistency hook for tests).
std::vector<double> stack_fields(const QRSystem& sys, const SpaceTimeField& z,
                                 const SpaceTimeField& v);

/// Continuation error functional over the recovery window: squared H^{1,1}
/// norms of the velocity and vorticity parts plus the laplacian terms.
struct WindowError {
    double h11_v = 0;       // velocity H^{1,1} part
    double h11_rot = 0;     // vorticity H^{1,1} part
    double lap_v = 0, lap_rot = 0;
    double total() const { return h11_v + h11_rot + lap_v + lap_rot; }
    double h11() const { return h11_v + h11_rot; }
};

WindowError window_error(const SpaceTimeField& v, const DomainSpec& dom, double eps_tilde);

nlohmann::json reconstruction_to_json(const ReconstructionResult& r);

}  // namespace nslab
