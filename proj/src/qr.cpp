#include "nslab/qr.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nslab/ops.hpp"

namespace nslab {

namespace {

// stencil emitters; coefficient patterns match the field operators exactly
template <typename AddFn>
void emit_d1(const Grid& g, std::array<int, 3> m, int axis, double scale, AddFn add) {
    const double h = g.h(axis);
    const int n = g.intervals(axis);
    auto at = [&](int i) {
        auto mm = m;
        mm[axis] = i;
        return g.index(mm[0], mm[1], mm[2]);
    };
    int i = m[axis];
    if (i == 0) {
        add(at(0), -3.0 * scale / (2 * h));
        add(at(1), 4.0 * scale / (2 * h));
        add(at(2), -scale / (2 * h));
    } else if (i == n) {
        add(at(n), 3.0 * scale / (2 * h));
        add(at(n - 1), -4.0 * scale / (2 * h));
        add(at(n - 2), scale / (2 * h));
    } else {
        add(at(i + 1), scale / (2 * h));
        add(at(i - 1), -scale / (2 * h));
    }
}

template <typename AddFn>
void emit_d2(const Grid& g, std::array<int, 3> m, int axis, double scale, AddFn add) {
    const double h2 = g.h(axis) * g.h(axis);
    const int n = g.intervals(axis);
    auto at = [&](int i) {
        auto mm = m;
        mm[axis] = i;
        return g.index(mm[0], mm[1], mm[2]);
    };
    int i = m[axis];
    if (i == 0) {
        add(at(0), 2.0 * scale / h2);
        add(at(1), -5.0 * scale / h2);
        add(at(2), 4.0 * scale / h2);
        add(at(3), -scale / h2);
    } else if (i == n) {
        add(at(n), 2.0 * scale / h2);
        add(at(n - 1), -5.0 * scale / h2);
        add(at(n - 2), 4.0 * scale / h2);
        add(at(n - 3), -scale / h2);
    } else {
        add(at(i + 1), scale / h2);
        add(at(i), -2.0 * scale / h2);
        add(at(i - 1), scale / h2);
    }
}

template <typename AddFn>
void emit_dt(int slices, double dt, int k, double scale, AddFn add_slice) {
    if (k == 0) {
        add_slice(0, -3.0 * scale / (2 * dt));
        add_slice(1, 4.0 * scale / (2 * dt));
        add_slice(2, -scale / (2 * dt));
    } else if (k == slices - 1) {
        add_slice(k, 3.0 * scale / (2 * dt));
        add_slice(k - 1, -4.0 * scale / (2 * dt));
        add_slice(k - 2, scale / (2 * dt));
    } else {
        add_slice(k + 1, scale / (2 * dt));
        add_slice(k - 1, -scale / (2 * dt));
    }
}

// per-slice coupling operator rows: rot((A.grad)v) - (A.grad)(rot v) + rot((v.grad)B)
// assembled as a sparse product; 2D only (z scalar)
SparseMatrix coupling_slice_matrix(const Grid& g, const CoefficientFields& coeffs, double t) {
    const std::size_t ns = g.num_nodes();
    // D_a on scalars
    auto deriv_mat = [&](int axis) {
        SparseMatrix D(ns, ns);
        for (std::size_t idx = 0; idx < ns; ++idx)
            emit_d1(g, g.multi_index(idx), axis, 1.0,
                    [&](std::size_t c, double v) { D.add(idx, c, v); });
        D.finalize();
        return D;
    };
    SparseMatrix D0 = deriv_mat(0), D1 = deriv_mat(1);

    // Rot: (v0,v1) -> d0 v1 - d1 v0   (ns x 2ns)
    SparseMatrix Rot(ns, 2 * ns);
    for (std::size_t r = 0; r < ns; ++r) {
        for (std::size_t k = D0.row_ptr()[r]; k < D0.row_ptr()[r + 1]; ++k)
            Rot.add(r, ns + D0.col_idx()[k], D0.values()[k]);
        for (std::size_t k = D1.row_ptr()[r]; k < D1.row_ptr()[r + 1]; ++k)
            Rot.add(r, D1.col_idx()[k], -D1.values()[k]);
    }
    Rot.finalize();

    // (A.grad) on scalars with coefficients at time t
    SparseMatrix TA(ns, ns);
    for (std::size_t idx = 0; idx < ns; ++idx) {
        Vec3 a = coeffs.A(g.coord(idx), t, 0);
        for (int axis = 0; axis < 2; ++axis)
            emit_d1(g, g.multi_index(idx), axis, a[axis],
                    [&](std::size_t c, double v) { TA.add(idx, c, v); });
    }
    TA.finalize();

    // block diag (A.grad) on vectors (2ns x 2ns)
    SparseMatrix TAv(2 * ns, 2 * ns);
    for (std::size_t r = 0; r < ns; ++r)
        for (std::size_t k = TA.row_ptr()[r]; k < TA.row_ptr()[r + 1]; ++k) {
            TAv.add(r, TA.col_idx()[k], TA.values()[k]);
            TAv.add(ns + r, ns + TA.col_idx()[k], TA.values()[k]);
        }
    TAv.finalize();

    // pointwise (v.grad)B (2ns x 2ns)
    SparseMatrix SB(2 * ns, 2 * ns);
    for (std::size_t idx = 0; idx < ns; ++idx) {
        Mat9 gb = coeffs.gradB(g.coord(idx), t, 0);
        for (int c = 0; c < 2; ++c)
            for (int mcomp = 0; mcomp < 2; ++mcomp)
                SB.add(c * ns + idx, mcomp * ns + idx, gb[c * 3 + mcomp]);
    }
    SB.finalize();

    SparseMatrix part1 = Rot.product(TAv);
    SparseMatrix part2 = TA.product(Rot);
    SparseMatrix part3 = Rot.product(SB);

    SparseMatrix out(ns, 2 * ns);
    auto accum = [&](const SparseMatrix& mrows, double sc) {
        for (std::size_t r = 0; r < mrows.rows(); ++r)
            for (std::size_t k = mrows.row_ptr()[r]; k < mrows.row_ptr()[r + 1]; ++k)
                out.add(r, mrows.col_idx()[k], sc * mrows.values()[k]);
    };
    accum(part1, 1.0);
    accum(part2, -1.0);
    accum(part3, 1.0);
    out.finalize();
    return out;
}

}  // namespace

QRSystem assemble_qr_system(const QRProblem& p) {
    const Grid& g = p.dom.grid;
    const TimeAxis& ta = p.dom.taxis;
    const int dim = g.dim();
    const int rc = dim == 2 ? 1 : 3;
    if (dim == 3 && !p.coeffs.trivial)
        throw std::invalid_argument("assemble_qr_system: 3D supports drift-free problems only");
    if (p.gamma_b <= 0) throw std::invalid_argument("assemble_qr_system: gamma_b must be positive");

    QRSystem sys;
    sys.n_space = g.num_nodes();
    sys.slices = ta.slices();
    sys.dim = dim;
    const std::size_t ns = sys.n_space;
    const std::size_t N = ns * sys.slices;

    auto col_zc = [&](int c, int k, std::size_t idx) {
        return static_cast<std::size_t>(c) * N + k * ns + idx;
    };
    auto col_vc = [&](int c, int k, std::size_t idx) {
        return (static_cast<std::size_t>(rc) + c) * N + k * ns + idx;
    };
    const int basis = p.forcing_time_basis;
    sys.forcing_fields = basis >= 0 ? rc * (basis + 1) : 0;
    // forcing coefficient fields sit after the space-time blocks
    auto col_rho = [&](int c, int m, std::size_t idx) {
        return (rc + dim) * N + (static_cast<std::size_t>(m) * rc + c) * ns + idx;
    };
    const std::size_t ncols = (rc + dim) * N + sys.forcing_fields * ns;

    const double phimax = p.weight.max_phi(g);
    auto wfac = [&](int k, std::size_t idx) {
        double phi = p.weight.phi(g.coord(idx), ta.time(k));
        return std::exp(p.s * (phi - phimax)) *
               std::sqrt(g.quad_weight(idx) * ta.quad_weight(k));
    };

    std::size_t nrows_est = (rc + dim + 1) * N + 2 * (rc + dim) * N / 10 + ncols;
    SparseMatrix A(0, ncols);  // rows set later
    A.reserve(nrows_est * 8);
    std::vector<double> b;
    std::size_t row = 0;
    auto new_row = [&]() { return row++; };

    // (i) parabolic rows at half steps: trapezoidal in time so that adjacent
    // slices couple directly (a central-difference form splits time parities)
    if (p.include_parabolic) {
        std::vector<SparseMatrix> coupling(ta.slices());
        bool want_coupling = !p.coeffs.trivial && dim == 2;
        if (want_coupling)
            for (int k = 0; k < ta.slices(); ++k)
                coupling[k] = coupling_slice_matrix(g, p.coeffs, ta.time(k));
        const double dt = ta.dt();
        for (int k = 0; k + 1 < ta.slices(); ++k) {
            for (int c = 0; c < rc; ++c) {
                for (std::size_t idx = 0; idx < ns; ++idx) {
                    std::size_t r = new_row();
                    double tmid = 0.5 * (ta.time(k) + ta.time(k + 1));
                    double phi = p.weight.phi(g.coord(idx), tmid);
                    double w = std::exp(p.s * (phi - phimax)) *
                               std::sqrt(g.quad_weight(idx) * dt);
                    auto m = g.multi_index(idx);
                    A.add(r, col_zc(c, k + 1, idx), w / dt);
                    A.add(r, col_zc(c, k, idx), -w / dt);
                    for (int half = 0; half < 2; ++half) {
                        int ks = k + half;
                        double hw = 0.5 * w;
                        for (int a = 0; a < dim; ++a)
                            emit_d2(g, m, a, -hw, [&](std::size_t cidx, double val) {
                                A.add(r, col_zc(c, ks, cidx), val);
                            });
                        if (!p.coeffs.trivial) {
                            Vec3 av = p.coeffs.A(g.coord(idx), ta.time(ks), 0);
                            for (int a = 0; a < dim; ++a)
                                emit_d1(g, m, a, hw * av[a], [&](std::size_t cidx, double val) {
                                    A.add(r, col_zc(c, ks, cidx), val);
                                });
                        }
                        if (want_coupling) {
                            const SparseMatrix& C = coupling[ks];
                            for (std::size_t kk = C.row_ptr()[idx]; kk < C.row_ptr()[idx + 1];
                                 ++kk) {
                                std::size_t lc = C.col_idx()[kk];
                                int vcomp = static_cast<int>(lc / ns);
                                A.add(r, col_vc(vcomp, ks, lc % ns), -hw * C.values()[kk]);
                            }
                        }
                        if (basis >= 0) {
                            double tau = ta.time(ks) - ta.t0();
                            double tpow = 1.0;
                            for (int mdeg = 0; mdeg <= basis; ++mdeg) {
                                A.add(r, col_rho(c, mdeg, idx), -hw * tpow);
                                tpow *= tau;
                            }
                        }
                    }
                    b.push_back(0.0);
                }
            }
        }
        sys.rows_parabolic = row;
    }

    // (ii) elliptic rows: lap v + rot z = 0
    std::size_t mark = row;
    for (int k = 0; k < ta.slices(); ++k) {
        for (int c = 0; c < dim; ++c) {
            for (std::size_t idx = 0; idx < ns; ++idx) {
                std::size_t r = new_row();
                double w = wfac(k, idx);
                auto m = g.multi_index(idx);
                for (int a = 0; a < dim; ++a)
                    emit_d2(g, m, a, w, [&](std::size_t cidx, double val) {
                        A.add(r, col_vc(c, k, cidx), val);
                    });
                if (dim == 2) {
                    // rot z = (d1 z, -d0 z)
                    int axis = c == 0 ? 1 : 0;
                    double sc = c == 0 ? w : -w;
                    emit_d1(g, m, axis, sc, [&](std::size_t cidx, double val) {
                        A.add(r, col_zc(0, k, cidx), val);
                    });
                } else {
                    // [curl z]_c = eps_{cab} d_a z_b
                    int a1 = (c + 1) % 3, a2 = (c + 2) % 3;
                    emit_d1(g, m, a1, w, [&](std::size_t cidx, double val) {
                        A.add(r, col_zc(a2, k, cidx), val);
                    });
                    emit_d1(g, m, a2, -w, [&](std::size_t cidx, double val) {
                        A.add(r, col_zc(a1, k, cidx), val);
                    });
                }
                b.push_back(0.0);
            }
        }
    }
    sys.rows_elliptic = row - mark;

    // (iii) divergence rows
    mark = row;
    for (int k = 0; k < ta.slices(); ++k) {
        for (std::size_t idx = 0; idx < ns; ++idx) {
            std::size_t r = new_row();
            double w = wfac(k, idx);
            auto m = g.multi_index(idx);
            for (int a = 0; a < dim; ++a)
                emit_d1(g, m, a, w, [&](std::size_t cidx, double val) {
                    A.add(r, col_vc(a, k, cidx), val);
                });
            b.push_back(0.0);
        }
    }
    sys.rows_div = row - mark;

    // (iv) boundary data rows on the observed faces; tiers with time
    // derivative traces contribute those as stencil rows too
    mark = row;
    const auto& entries = p.data.entries;
    const auto& tr_v = p.data.traces.at("v");
    const auto& tr_z = p.data.traces.at("rot_v");
    const auto& tr_gv = p.data.traces.at("grad_v");
    const auto& tr_gz = p.data.traces.at("grad_rot_v");
    const bool has_dt = p.data.traces.count("dt_v") > 0;
    const int nsl = ta.slices();
    for (std::size_t e = 0; e < entries.size(); ++e) {
        const GammaEntry& ge = entries[e];
        auto m = g.multi_index(ge.node);
        int axis = ge.face.axis;
        int dir = ge.face.side == 1 ? -1 : 1;
        double out_sign = ge.face.side == 1 ? 1.0 : -1.0;
        for (int k = 0; k < nsl; ++k) {
            double w = p.gamma_b * std::sqrt(ge.weight * ta.quad_weight(k));
            // values
            for (int c = 0; c < dim; ++c) {
                std::size_t r = new_row();
                A.add(r, col_vc(c, k, ge.node), w);
                b.push_back(w * tr_v.values[(e * nsl + k) * dim + c]);
            }
            for (int c = 0; c < rc; ++c) {
                std::size_t r = new_row();
                A.add(r, col_zc(c, k, ge.node), w);
                b.push_back(w * tr_z.values[(e * nsl + k) * rc + c]);
            }
            // outward normal derivatives via the inward one-sided stencil
            auto emit_normal = [&](std::size_t r, auto col_of) {
                auto mm = m;
                double h = g.h(axis);
                mm[axis] = m[axis];
                A.add(r, col_of(g.index(mm[0], mm[1], mm[2])), w * 3.0 / (2 * h));
                mm[axis] = m[axis] + dir;
                A.add(r, col_of(g.index(mm[0], mm[1], mm[2])), -w * 4.0 / (2 * h));
                mm[axis] = m[axis] + 2 * dir;
                A.add(r, col_of(g.index(mm[0], mm[1], mm[2])), w * 1.0 / (2 * h));
            };
            for (int c = 0; c < dim; ++c) {
                std::size_t r = new_row();
                emit_normal(r, [&](std::size_t cidx) { return col_vc(c, k, cidx); });
                double gval = tr_gv.values[(e * nsl + k) * dim * dim + c * dim + axis];
                b.push_back(w * out_sign * gval);
            }
            for (int c = 0; c < rc; ++c) {
                std::size_t r = new_row();
                emit_normal(r, [&](std::size_t cidx) { return col_zc(c, k, cidx); });
                double gval = tr_gz.values[(e * nsl + k) * rc * dim + c * dim + axis];
                b.push_back(w * out_sign * gval);
            }
            if (has_dt) {
                const auto& tr_dtv = p.data.traces.at("dt_v");
                const auto& tr_dtz = p.data.traces.at("dt_rot_v");
                for (int c = 0; c < dim; ++c) {
                    std::size_t r = new_row();
                    emit_dt(nsl, ta.dt(), k, w, [&](int kk, double val) {
                        A.add(r, col_vc(c, kk, ge.node), val);
                    });
                    b.push_back(w * tr_dtv.values[(e * nsl + k) * dim + c]);
                }
                for (int c = 0; c < rc; ++c) {
                    std::size_t r = new_row();
                    emit_dt(nsl, ta.dt(), k, w, [&](int kk, double val) {
                        A.add(r, col_zc(c, kk, ge.node), val);
                    });
                    b.push_back(w * tr_dtz.values[(e * nsl + k) * rc + c]);
                }
            }
        }
    }
    sys.rows_data = row - mark;

    // (v) interior snapshot rows at the center time: the velocity values and
    // the derived vorticity of the snapshot anchor both unknown blocks
    mark = row;
    if (p.data.has_snapshot) {
        int k0 = ta.center_slice();
        for (int c = 0; c < dim; ++c) {
            for (std::size_t idx = 0; idx < ns; ++idx) {
                std::size_t r = new_row();
                double w = p.gamma_snap * std::sqrt(g.quad_weight(idx));
                A.add(r, col_vc(c, k0, idx), w);
                b.push_back(w * p.data.snapshot_v.at(c, idx));
            }
        }
        Field snap_rot = ops::curl(p.data.snapshot_v);
        for (int c = 0; c < rc; ++c) {
            for (std::size_t idx = 0; idx < ns; ++idx) {
                std::size_t r = new_row();
                double w = p.gamma_snap * std::sqrt(g.quad_weight(idx));
                A.add(r, col_zc(c, k0, idx), w);
                b.push_back(w * snap_rot.at(c, idx));
            }
        }
    }
    sys.rows_snapshot = row - mark;

    // (vi) ridge
    mark = row;
    if (p.alpha > 0) {
        for (std::size_t c = 0; c < ncols; ++c) {
            std::size_t r = new_row();
            A.add(r, c, p.alpha);
            b.push_back(0.0);
        }
    }
    sys.rows_ridge = row - mark;

    A.set_dims(row, ncols);
    A.finalize();
    sys.A = std::move(A);
    sys.b = std::move(b);
    return sys;
}

std::vector<double> stack_fields(const QRSystem& sys, const SpaceTimeField& z,
                                 const SpaceTimeField& v) {
    const std::size_t ns = sys.n_space;
    const std::size_t N = ns * sys.slices;
    const int rc = z.ncomp();
    std::vector<double> x(sys.num_unknowns(), 0.0);
    for (int k = 0; k < sys.slices; ++k)
        for (std::size_t idx = 0; idx < ns; ++idx) {
            for (int c = 0; c < rc; ++c) x[c * N + k * ns + idx] = z.at(k, c, idx);
            for (int c = 0; c < sys.dim; ++c) x[(rc + c) * N + k * ns + idx] = v.at(k, c, idx);
        }
    return x;
}

ReconstructionResult solve_qr(const QRProblem& p, const QRSystem& sys, double tol, int max_iter,
                              const std::vector<double>* warm_start,
                              std::vector<double>* solution_out) {
    ReconstructionResult res;
    std::vector<double> x;
    if (warm_start && warm_start->size() == sys.A.cols()) x = *warm_start;
    res.stats = normal_equations_solve(sys.A, sys.b, x, tol, max_iter);
    res.converged = res.stats.converged;
    if (solution_out) *solution_out = x;

    const Grid& g = p.dom.grid;
    const TimeAxis& ta = p.dom.taxis;
    const int rc = g.dim() == 2 ? 1 : 3;
    const std::size_t ns = sys.n_space;
    const std::size_t N = ns * sys.slices;
    res.z = SpaceTimeField(g, ta, rc);
    res.v = SpaceTimeField(g, ta, g.dim());
    for (int k = 0; k < sys.slices; ++k)
        for (std::size_t idx = 0; idx < ns; ++idx) {
            for (int c = 0; c < rc; ++c) res.z.at(k, c, idx) = x[c * N + k * ns + idx];
            for (int c = 0; c < g.dim(); ++c)
                res.v.at(k, c, idx) = x[(rc + c) * N + k * ns + idx];
        }

    // residual block norms
    std::vector<double> r(sys.A.rows());
    sys.A.multiply(x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= sys.b[i];
    auto seg_norm = [&](std::size_t begin, std::size_t len) {
        double s = 0;
        for (std::size_t i = begin; i < begin + len; ++i) s += r[i] * r[i];
        return std::sqrt(s);
    };
    std::size_t at = 0;
    res.residual_parabolic = seg_norm(at, sys.rows_parabolic);
    at += sys.rows_parabolic;
    res.residual_elliptic = seg_norm(at, sys.rows_elliptic);
    at += sys.rows_elliptic;
    res.residual_div = seg_norm(at, sys.rows_div);
    at += sys.rows_div;
    res.residual_data = seg_norm(at, sys.rows_data);
    return res;
}

WindowError window_error(const SpaceTimeField& v, const DomainSpec& dom, double eps_tilde) {
    const Grid& g = v.grid();
    const TimeAxis& ta = v.taxis();
    WindowError we;
    SpaceTimeField dtv = ops::time_derivative(v);
    for (int k = 0; k < ta.slices(); ++k) {
        if (std::abs(ta.time(k) - ta.t0()) > eps_tilde + 1e-12) continue;
        double wt = ta.quad_weight(k);
        Field vk = v.slice(k);
        Field jac = ops::jacobian(vk);
        Field lap = ops::laplacian(vk);
        Field rot = ops::curl(vk);
        Field rot_grad(g, rot.ncomp() * g.dim());
        for (int c = 0; c < rot.ncomp(); ++c) {
            Field tmp(g, 1);
            for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) tmp.at(0, idx) = rot.at(c, idx);
            Field dr = ops::gradient(tmp);
            for (int a = 0; a < g.dim(); ++a)
                for (std::size_t idx = 0; idx < g.num_nodes(); ++idx)
                    rot_grad.at(c * g.dim() + a, idx) = dr.at(a, idx);
        }
        Field lap_rot = ops::laplacian(rot);
        Field dtv_k = dtv.slice(k);
        Field dt_rot(g, rot.ncomp());
        {
            // time derivative of the vorticity from the velocity time derivative
            Field dtv_curl = ops::curl(dtv_k);
            dt_rot = dtv_curl;
        }
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
            if (!dom.node_in_omega0(idx)) continue;
            double wq = g.quad_weight(idx) * wt;
            double sv = 0, sgv = 0, sdtv = 0, srot = 0, sgrot = 0, sdtrot = 0, slv = 0, slrot = 0;
            for (int c = 0; c < g.dim(); ++c) {
                sv += vk.at(c, idx) * vk.at(c, idx);
                sdtv += dtv_k.at(c, idx) * dtv_k.at(c, idx);
                slv += lap.at(c, idx) * lap.at(c, idx);
                for (int a = 0; a < g.dim(); ++a)
                    sgv += jac.at(c * g.dim() + a, idx) * jac.at(c * g.dim() + a, idx);
            }
            for (int c = 0; c < rot.ncomp(); ++c) {
                srot += rot.at(c, idx) * rot.at(c, idx);
                sdtrot += dt_rot.at(c, idx) * dt_rot.at(c, idx);
                slrot += lap_rot.at(c, idx) * lap_rot.at(c, idx);
                for (int a = 0; a < g.dim(); ++a)
                    sgrot += rot_grad.at(c * g.dim() + a, idx) * rot_grad.at(c * g.dim() + a, idx);
            }
            we.h11_v += wq * (sv + sgv + sdtv);
            we.h11_rot += wq * (srot + sgrot + sdtrot);
            we.lap_v += wq * slv;
            we.lap_rot += wq * slrot;
        }
    }
    return we;
}

nlohmann::json reconstruction_to_json(const ReconstructionResult& r) {
    nlohmann::json j;
    j["iterations"] = r.stats.iterations;
    j["solver_residual"] = r.stats.residual;
    j["converged"] = r.converged;
    j["residual_parabolic"] = r.residual_parabolic;
    j["residual_elliptic"] = r.residual_elliptic;
    j["residual_div"] = r.residual_div;
    j["residual_data"] = r.residual_data;
    return j;
}

}  // namespace nslab
