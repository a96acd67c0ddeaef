#include "nslab/projection.hpp"

#include <cmath>
#include <stdexcept>

#include "nslab/ops.hpp"

namespace nslab {

std::vector<double> node_quad_weights(const Grid& g) {
    std::vector<double> w(g.num_nodes());
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        auto m = g.multi_index(idx);
        double v = 1.0;
        for (int a = 0; a < g.dim(); ++a)
            v *= (m[a] == 0 || m[a] == g.intervals(a)) ? 0.5 : 1.0;
        w[idx] = v;
    }
    return w;
}

SparseMatrix assemble_neumann_laplacian(const Grid& g) {
    SparseMatrix L(g.num_nodes(), g.num_nodes());
    std::vector<double> w = node_quad_weights(g);
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        auto m = g.multi_index(idx);
        for (int a = 0; a < g.dim(); ++a) {
            double invh2 = 1.0 / (g.h(a) * g.h(a));
            // product of the other axes' trapezoid factors keeps the matrix symmetric
            double cross = w[idx];
            if (m[a] == 0 || m[a] == g.intervals(a)) cross *= 2.0;  // strip this axis' half

            auto nb = [&](int step) {
                auto mm = m;
                mm[a] += step;
                return g.index(mm[0], mm[1], mm[2]);
            };
            if (m[a] == 0) {
                L.add(idx, idx, cross * invh2);
                L.add(idx, nb(+1), -cross * invh2);
            } else if (m[a] == g.intervals(a)) {
                L.add(idx, idx, cross * invh2);
                L.add(idx, nb(-1), -cross * invh2);
            } else {
                L.add(idx, idx, 2.0 * cross * invh2);
                L.add(idx, nb(+1), -cross * invh2);
                L.add(idx, nb(-1), -cross * invh2);
            }
        }
    }
    L.finalize();
    return L;
}

DirichletPoisson assemble_dirichlet_poisson(const Grid& g) {
    DirichletPoisson dp;
    dp.interior_index.assign(g.num_nodes(), static_cast<std::size_t>(-1));
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        if (!g.on_boundary(idx)) {
            dp.interior_index[idx] = dp.interior_nodes.size();
            dp.interior_nodes.push_back(idx);
        }
    }
    SparseMatrix A(dp.interior_nodes.size(), dp.interior_nodes.size());
    for (std::size_t r = 0; r < dp.interior_nodes.size(); ++r) {
        std::size_t idx = dp.interior_nodes[r];
        auto m = g.multi_index(idx);
        for (int a = 0; a < g.dim(); ++a) {
            double invh2 = 1.0 / (g.h(a) * g.h(a));
            A.add(r, r, 2.0 * invh2);
            for (int step : {-1, 1}) {
                auto mm = m;
                mm[a] += step;
                std::size_t nidx = g.index(mm[0], mm[1], mm[2]);
                std::size_t c = dp.interior_index[nidx];
                if (c != static_cast<std::size_t>(-1)) A.add(r, c, -invh2);
            }
        }
    }
    A.finalize();
    dp.A = std::move(A);
    return dp;
}

Field solve_poisson_dirichlet(const Grid& g, const Field& rhs, const Field& boundary, double tol,
                              int max_iter, SolveStats* stats) {
    if (rhs.ncomp() != 1 || boundary.ncomp() != 1)
        throw std::invalid_argument("solve_poisson_dirichlet: scalar fields expected");
    DirichletPoisson dp = assemble_dirichlet_poisson(g);
    std::vector<double> b(dp.interior_nodes.size());
    for (std::size_t r = 0; r < dp.interior_nodes.size(); ++r) {
        std::size_t idx = dp.interior_nodes[r];
        auto m = g.multi_index(idx);
        double acc = rhs.at(0, idx);
        for (int a = 0; a < g.dim(); ++a) {
            double invh2 = 1.0 / (g.h(a) * g.h(a));
            for (int step : {-1, 1}) {
                auto mm = m;
                mm[a] += step;
                std::size_t nidx = g.index(mm[0], mm[1], mm[2]);
                if (dp.interior_index[nidx] == static_cast<std::size_t>(-1))
                    acc += invh2 * boundary.at(0, nidx);
            }
        }
        b[r] = acc;
    }
    std::vector<double> x;
    SolveStats st = conjugate_gradient(dp.A, b, x, tol, max_iter);
    if (stats) *stats = st;
    if (!st.converged && st.iterations >= max_iter)
        throw std::runtime_error("solve_poisson_dirichlet: CG did not converge");
    Field out = boundary;
    for (std::size_t r = 0; r < dp.interior_nodes.size(); ++r) out.at(0, dp.interior_nodes[r]) = x[r];
    return out;
}

ProjectionStepper::ProjectionStepper(const Grid& g, CoefficientFields coeffs,
                                     std::function<Vec3(const Vec3&, double)> forcing,
                                     std::function<Vec3(const Vec3&, double)> boundary_velocity,
                                     ProjectionConfig cfg)
    : grid_(g), coeffs_(std::move(coeffs)), forcing_(std::move(forcing)),
      bc_(std::move(boundary_velocity)), cfg_(cfg), neumann_(assemble_neumann_laplacian(g)),
      weights_(node_quad_weights(g)), pressure_guess_(g.num_nodes(), 0.0), pressure_(g, 1) {}

Field ProjectionStepper::step(const Field& v, double t, double dt) {
    const Grid& g = grid_;
    const int dim = g.dim();
    double t_next = t + dt;

    // advective and forcing terms at time t
    Field rhs(g, dim);
    Field jac = ops::jacobian(v);
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        Vec3 x = g.coord(idx);
        Vec3 f = forcing_(x, t);
        Vec3 a = coeffs_.trivial ? Vec3{0, 0, 0} : coeffs_.A(x, t, 0);
        Mat9 gb = coeffs_.trivial ? Mat9{} : coeffs_.gradB(x, t, 0);
        for (int c = 0; c < dim; ++c) {
            double adv = 0, vb = 0;
            for (int m = 0; m < dim; ++m) {
                adv += a[m] * jac.at(c * dim + m, idx);
                if (!coeffs_.trivial) vb += v.at(m, idx) * gb[c * 3 + m];
            }
            rhs.at(c, idx) = f[c] - adv - vb;
        }
    }

    Field star(g, dim);
    if (!cfg_.implicit_diffusion) {
        Field lap = ops::laplacian(v);
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx)
            for (int c = 0; c < dim; ++c)
                star.at(c, idx) = v.at(c, idx) + dt * (lap.at(c, idx) + rhs.at(c, idx));
    } else {
        // (I - dt Lap) u* = v + dt rhs, Dirichlet data from the boundary closure
        DirichletPoisson dp = assemble_dirichlet_poisson(g);
        SparseMatrix H(dp.A.rows(), dp.A.cols());
        for (std::size_t r = 0; r < dp.A.rows(); ++r)
            for (std::size_t k = dp.A.row_ptr()[r]; k < dp.A.row_ptr()[r + 1]; ++k)
                H.add(r, dp.A.col_idx()[k], dt * dp.A.values()[k] + (dp.A.col_idx()[k] == r ? 1.0 : 0.0));
        H.finalize();
        for (int c = 0; c < dim; ++c) {
            std::vector<double> b(dp.interior_nodes.size());
            for (std::size_t r = 0; r < dp.interior_nodes.size(); ++r) {
                std::size_t idx = dp.interior_nodes[r];
                auto m = g.multi_index(idx);
                double acc = v.at(c, idx) + dt * rhs.at(c, idx);
                for (int a = 0; a < dim; ++a) {
                    double invh2 = dt / (g.h(a) * g.h(a));
                    for (int stp : {-1, 1}) {
                        auto mm = m;
                        mm[a] += stp;
                        std::size_t nidx = g.index(mm[0], mm[1], mm[2]);
                        if (dp.interior_index[nidx] == static_cast<std::size_t>(-1))
                            acc += invh2 * bc_(g.coord(nidx), t_next)[c];
                    }
                }
                b[r] = acc;
            }
            std::vector<double> x;
            SolveStats st = conjugate_gradient(H, b, x, cfg_.helmholtz_tol, cfg_.poisson_max_iter);
            if (!st.converged)
                throw std::runtime_error("projection step: implicit diffusion solve failed");
            for (std::size_t r = 0; r < dp.interior_nodes.size(); ++r)
                star.at(c, dp.interior_nodes[r]) = x[r];
        }
    }
    // boundary values of the intermediate field from the data closure
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        if (!g.on_boundary(idx)) continue;
        Vec3 vb = bc_(g.coord(idx), t_next);
        for (int c = 0; c < dim; ++c) star.at(c, idx) = vb[c];
    }

    // pressure projection: Lap p = div(u*) / dt with natural boundary handling
    Field div_star = ops::divergence(star);
    std::vector<double> b(g.num_nodes());
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx)
        b[idx] = -weights_[idx] * div_star.at(0, idx) / dt;
    std::vector<double> p = pressure_guess_;
    SolveStats st = conjugate_gradient(neumann_, b, p, cfg_.poisson_tol, cfg_.poisson_max_iter,
                                       /*project_out_constants=*/true);
    if (!st.converged && st.iterations >= cfg_.poisson_max_iter)
        throw std::runtime_error("projection step: pressure solve did not converge");
    pressure_guess_ = p;
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) pressure_.at(0, idx) = p[idx];

    Field grad_p = ops::gradient(pressure_);
    Field next = star;
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        if (g.on_boundary(idx)) continue;  // boundary keeps the data values
        for (int c = 0; c < dim; ++c) next.at(c, idx) -= dt * grad_p.at(c, idx);
    }

    last_div_ = ops::l2_norm(ops::divergence(next));
    return next;
}

MmsRunResult run_projection_mms(const ManufacturedSolution& sol, const CoefficientFields& coeffs,
                                const Grid& g, double t_begin, double t_end, int steps,
                                ProjectionConfig cfg) {
    Forcing f = mms_forcing(sol, coeffs);
    auto forcing = [&f](const Vec3& x, double t) { return f.F(x, t, 0); };
    auto bc = [&sol](const Vec3& x, double t) { return sol.v(x, t, 0); };
    ProjectionStepper stepper(g, coeffs, forcing, bc, cfg);

    double dt = (t_end - t_begin) / steps;
    Field v(g, sol.dim());
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        Vec3 val = sol.v(g.coord(idx), t_begin, 0);
        for (int c = 0; c < sol.dim(); ++c) v.at(c, idx) = val[c];
    }
    MmsRunResult res;
    for (int n = 0; n < steps; ++n) {
        v = stepper.step(v, t_begin + n * dt, dt);
        res.max_divergence = std::max(res.max_divergence, stepper.last_divergence());
        res.max_velocity = std::max(res.max_velocity, v.max_abs());
    }
    Field exact(g, sol.dim());
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        Vec3 val = sol.v(g.coord(idx), t_end, 0);
        for (int c = 0; c < sol.dim(); ++c) exact.at(c, idx) = val[c];
    }
    res.l2_error = ops::l2_norm(v - exact);
    return res;
}

}  // namespace nslab
