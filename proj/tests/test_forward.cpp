#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "nslab/cauchy.hpp"
#include "nslab/manufactured.hpp"
#include "nslab/ops.hpp"
#include "nslab/projection.hpp"
#include "nslab/sources.hpp"

using namespace nslab;

namespace {

double fit_order(const std::vector<double>& hs, const std::vector<double>& errs) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = hs.size();
    for (int i = 0; i < n; ++i) {
        double x = std::log(hs[i]), y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// discrete residual of the momentum balance for sampled closures
double system_residual(const ManufacturedSolution& sol, const CoefficientFields& coeffs,
                       const Grid& g, const TimeAxis& ta) {
    Forcing f = mms_forcing(sol, coeffs);
    SpaceTimeField v = sol.sample_v(g, ta, 0);
    SpaceTimeField dtv = ops::time_derivative(v);
    SpaceTimeField F = f.sample_F(g, ta, 0);
    double m = 0;
    for (int k = 0; k < ta.slices(); ++k) {
        Field vk = v.slice(k);
        Field lap = ops::laplacian(vk);
        Field jac = ops::jacobian(vk);
        double tk = ta.time(k);
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
            auto mi = g.multi_index(idx);
            bool interior = true;
            for (int a = 0; a < g.dim(); ++a)
                if (mi[a] < 2 || mi[a] > g.intervals(a) - 2) interior = false;
            if (!interior || k == 0 || k == ta.intervals()) continue;
            Vec3 x = g.coord(idx);
            Vec3 a = coeffs.A(x, tk, 0);
            Mat9 gb = coeffs.gradB(x, tk, 0);
            Vec3 gp = sol.grad_p(x, tk, 0);
            for (int c = 0; c < g.dim(); ++c) {
                double adv = 0, vb = 0;
                for (int mm = 0; mm < g.dim(); ++mm) {
                    adv += a[mm] * jac.at(c * g.dim() + mm, idx);
                    vb += vk.at(mm, idx) * gb[c * 3 + mm];
                }
                double r = dtv.at(k, c, idx) - lap.at(c, idx) + adv + vb + gp[c] -
                           F.at(k, c, idx);
                m = std::max(m, std::abs(r));
            }
        }
    }
    return m;
}

}  // namespace

TEST_CASE("taylor-green is an exact zero-forcing solution") {
    auto sol = ManufacturedSolution::taylor_green();
    auto coeffs = CoefficientFields::zero(2);
    Forcing f = mms_forcing(sol, coeffs);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 30; ++i) {
        Vec3 x{u(rng), u(rng), 0};
        double t = u(rng);
        Vec3 F = f.F(x, t, 0);
        CHECK(std::abs(F[0]) < 1e-12);
        CHECK(std::abs(F[1]) < 1e-12);
        // divergence-free via the exact jacobian
        Mat9 gv = sol.grad_v(x, t, 0);
        CHECK(std::abs(gv[0] + gv[1 * 3 + 1]) < 1e-13);
    }
}

TEST_CASE("manufactured closures agree with stencils at random points") {
    Grid g = Grid::square2d(48);
    TimeAxis ta(0.5, 0.25, 16);
    for (auto sol : {ManufacturedSolution::taylor_green(),
                     ManufacturedSolution::stream_bump(2, {0.6, 0.5, 0}, 0.25, 6, 1.0, 0.5),
                     ManufacturedSolution::separated_eigenmode({1.0, 0.5, 0.25})}) {
        SpaceTimeField v = sol.sample_v(g, ta, 0);
        Field v0 = v.slice(8);
        Field jac = ops::jacobian(v0);
        Field rot = ops::curl(v0);
        Field lap = ops::laplacian(v0);
        double tj = ta.time(8);
        double ejac = 0, erot = 0, elap = 0, scale = 0;
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
            auto mi = g.multi_index(idx);
            if (mi[0] < 2 || mi[1] < 2 || mi[0] > g.intervals(0) - 2 ||
                mi[1] > g.intervals(1) - 2)
                continue;
            Vec3 x = g.coord(idx);
            Mat9 gv = sol.grad_v(x, tj, 0);
            Vec3 rv = sol.rot_v(x, tj, 0);
            Vec3 lv = sol.lap_v(x, tj, 0);
            scale = std::max(scale, std::abs(rv[0]));
            for (int c = 0; c < 2; ++c)
                for (int a = 0; a < 2; ++a)
                    ejac = std::max(ejac, std::abs(jac.at(c * 2 + a, idx) - gv[c * 3 + a]));
            erot = std::max(erot, std::abs(rot.at(0, idx) - rv[0]));
            for (int c = 0; c < 2; ++c)
                elap = std::max(elap, std::abs(lap.at(c, idx) - lv[c]));
        }
        double h2 = g.h(0) * g.h(0);
        // constants sized for the bump's high-order derivative scales
        CHECK(ejac < 300 * h2 * std::max(scale, 1.0));
        CHECK(erot < 300 * h2 * std::max(scale, 1.0));
        CHECK(elap < 3000 * h2 * std::max(scale, 1.0));
    }
}

TEST_CASE("system residual vanishes at truncation order") {
    auto sol = ManufacturedSolution::taylor_green();
    auto coeffs = CoefficientFields::smooth_drift(2);
    std::vector<double> hs, errs;
    for (int n : {16, 32}) {
        Grid g = Grid::square2d(n);
        TimeAxis ta(0.5, 0.25, 2 * n);
        hs.push_back(g.h(0));
        errs.push_back(system_residual(sol, coeffs, g, ta));
    }
    double order = fit_order(hs, errs);
    CHECK(order > 1.6);
}

TEST_CASE("obstruction pair: forcing is the pressure gradient, curl-free") {
    auto sol = ManufacturedSolution::pressure_bump(2, {0.5, 0.5, 0}, 0.3, 6);
    auto coeffs = CoefficientFields::zero(2);
    Forcing f = mms_forcing(sol, coeffs);
    RadialBump psi(2, {0.5, 0.5, 0}, 0.3, 6, 1.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.2, 0.8);
    for (int i = 0; i < 30; ++i) {
        Vec3 x{u(rng), u(rng), 0};
        Vec3 F = f.F(x, 0.4, 0);
        CHECK(F[0] == doctest::Approx(psi.d1(x, 0)).epsilon(1e-12));
        CHECK(F[1] == doctest::Approx(psi.d1(x, 1)).epsilon(1e-12));
        Vec3 rf = f.rotF(x, 0.4, 0);
        CHECK(std::abs(rf[0]) < 1e-12);
    }
}

TEST_CASE("linear solution with constant drifts has an exact linear forcing") {
    auto sol = ManufacturedSolution::linear_in_space(2, {1.0, 0.5});
    Mat9 bj{};
    bj[0 * 3 + 1] = 0.3;
    auto coeffs = CoefficientFields::constant_drift(2, {0.2, -0.1, 0}, bj);
    Grid g = Grid::square2d(8);
    TimeAxis ta(0.5, 0.25, 4);
    CHECK(system_residual(sol, coeffs, g, ta) < 1e-10);
}

TEST_CASE("radial bump derivatives cross-check by finite differences") {
    RadialBump chi(2, {0.4, 0.55, 0}, 0.3, 6, 2.0);
    double eps = 1e-5;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.15, 0.65);
    for (int i = 0; i < 20; ++i) {
        Vec3 x{u(rng), u(rng), 0};
        for (int a = 0; a < 2; ++a) {
            Vec3 xp = x, xm = x;
            xp[a] += eps;
            xm[a] -= eps;
            double fd = (chi.value(xp) - chi.value(xm)) / (2 * eps);
            CHECK(chi.d1(x, a) == doctest::Approx(fd).epsilon(1e-5));
            double fd2 = (chi.d1(xp, a) - chi.d1(xm, a)) / (2 * eps);
            CHECK(chi.d2(x, a, a) == doctest::Approx(fd2).epsilon(1e-5));
            double fd3 = (chi.d2(xp, a, a) - chi.d2(xm, a, a)) / (2 * eps);
            CHECK(chi.d3(x, a, a, a) == doctest::Approx(fd3).epsilon(2e-4));
            double fd4 = (chi.d3(xp, a, a, a) - chi.d3(xm, a, a, a)) / (2 * eps);
            CHECK(chi.d4(x, a, a, a, a) == doctest::Approx(fd4).epsilon(2e-3));
        }
    }
}

TEST_CASE("source families: vector potential is divergence-free, obstruction curl-free") {
    DomainSpec dom = build_domain("rect2d_right_edge", 24, 8);
    SourceParams p;
    auto vp = build_source("vector_potential", p, dom);
    // divergence of the curl vanishes: check via the t0 gradient closure
    for (std::size_t idx = 0; idx < dom.grid.num_nodes(); ++idx) {
        Mat9 gf = vp.gradF_t0(dom.grid.coord(idx));
        CHECK(std::abs(gf[0] + gf[1 * 3 + 1]) < 1e-12);
    }
    auto ob = build_source("gradient_obstruction", p, dom);
    for (std::size_t idx = 0; idx < dom.grid.num_nodes(); ++idx) {
        Vec3 r = ob.rotF(dom.grid.coord(idx), 0.4, 0);
        CHECK(std::abs(r[0]) < 1e-14);
    }
}

TEST_CASE("separated family: checker reports finite constants and the chain") {
    DomainSpec dom = build_domain("rect2d_right_edge", 24, 8);
    SourceParams p;
    p.shape = FactorShape::TrigMode;
    auto src = build_source("separated", p, dom);
    CHECK(src.r_t0 != 0.0);
    auto rep = check_conditions(src, dom);
    CHECK(rep.div_free_t0);
    CHECK(rep.rot_majorant.finite);
    CHECK(rep.rot_majorant.constant > 0);
    CHECK(rep.grad_majorant_k2.finite);
    CHECK(rep.grad_majorant_k1.finite);
    CHECK(rep.implication_chain_holds());
    // known scale: |r^(k)(t)| / |r(t0)| over the window
    CHECK(rep.rot_majorant.constant < 10.0);

    SourceParams bad = p;
    bad.r_coeffs = {-0.5, 1.0};  // r(t0) = 0 at t0 = 0.5
    CHECK_THROWS(build_source("separated", bad, dom));
}

TEST_CASE("obstruction source: vacuous majorant with zero constant") {
    DomainSpec dom = build_domain("rect2d_right_edge", 16, 8);
    SourceParams p;
    auto src = build_source("gradient_obstruction", p, dom);
    auto rep = check_conditions(src, dom);
    CHECK(rep.rot_majorant.vacuous);
    CHECK(rep.rot_majorant.constant == 0.0);
    CHECK(rep.rot_majorant.pass);
}

TEST_CASE("matrix family: determinant floor and factor recovery") {
    DomainSpec dom = build_domain("rect2d_right_edge", 24, 8);
    SourceParams p;
    p.trig_eps = 0.4;
    auto src = build_source("matrix", p, dom);
    CHECK(src.det_R_t0_min > 0.1);
    auto rep = check_conditions(src, dom);
    CHECK(rep.grad_majorant_k2.finite);
    REQUIRE(rep.factor_recovery.has_value());
    CHECK(rep.factor_recovery->finite);
    CHECK(rep.factor_recovery->pass);
    CHECK(rep.implication_chain_holds());
    auto j = condition_report_to_json(rep);
    CHECK(j["implication_chain"].get<bool>());
}

TEST_CASE("implication chain on randomized separated sources") {
    DomainSpec dom = build_domain("rect2d_right_edge", 12, 6);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int done = 0;
    while (done < 20) {
        SourceParams p;
        p.shape = (done % 2 == 0) ? FactorShape::TrigMode : FactorShape::StreamBump;
        p.r_coeffs = {u(rng) + 2.0, u(rng), u(rng)};
        SourceModel src;
        try {
            src = build_source("separated", p, dom);
        } catch (...) {
            continue;
        }
        ++done;
        auto rep = check_conditions(src, dom);
        CHECK(rep.implication_chain_holds());
        if (rep.rot_majorant.finite) CHECK(rep.grad_majorant_k2.finite);
    }
}

TEST_CASE("matrix-exponential source equals the forcing of its solution") {
    DomainSpec dom = build_domain("rect2d_right_edge", 20, 8);
    SourceParams p;
    p.trig_eps = 0;
    auto src = build_source("matrix", p, dom);
    auto sol = solution_for_source(src, p);
    Forcing f = mms_forcing(sol, CoefficientFields::zero(2));
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.3, 0.95);
    for (int i = 0; i < 25; ++i) {
        Vec3 x{u(rng), u(rng), 0};
        double t = 0.3 + 0.4 * u(rng);
        for (int k = 0; k <= 2; ++k) {
            Vec3 a = src.F(x, t, k), b = f.F(x, t, k);
            for (int c = 0; c < 2; ++c) CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-9));
            Vec3 ra = src.rotF(x, t, k), rb = f.rotF(x, t, k);
            CHECK(ra[0] == doctest::Approx(rb[0]).epsilon(1e-9));
        }
    }
}

TEST_CASE("separated source equals the forcing of its eigenmode solution") {
    DomainSpec dom = build_domain("rect2d_right_edge", 16, 8);
    SourceParams p;
    p.shape = FactorShape::TrigMode;
    p.r_coeffs = {2.5, 1.0, 0.5};
    auto src = build_source("separated", p, dom);
    auto sol = solution_for_source(src, p);
    Forcing f = mms_forcing(sol, CoefficientFields::zero(2));
    Vec3 x{0.6, 0.4, 0};
    for (double t : {0.3, 0.5, 0.7}) {
        for (int k = 0; k <= 2; ++k) {
            Vec3 a = src.F(x, t, k), b = f.F(x, t, k);
            for (int c = 0; c < 2; ++c) CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-10));
        }
    }
}

TEST_CASE("cauchy data: determinism, zero noise exactness, scaling") {
    DomainSpec dom = build_domain("rect2d_right_edge", 16, 8);
    auto sol = ManufacturedSolution::taylor_green();
    auto coeffs = CoefficientFields::zero(2);

    auto d0 = generate_cauchy_data(sol, coeffs, dom, DataTier::D1, 0.0, 7);
    auto d0b = generate_cauchy_data(sol, coeffs, dom, DataTier::D1, 0.0, 99);
    CHECK(d0.same_values(d0b));  // sigma = 0 ignores the seed
    CHECK(d0.noise_D == 0.0);
    CHECK(d0.mag_D > 0);
    CHECK(d0.mag_D1 > d0.mag_D);
    CHECK(d0.bound_M > 0);
    CHECK(d0.bound_M1 > 0);

    auto d1 = generate_cauchy_data(sol, coeffs, dom, DataTier::D1, 1e-3, 42);
    auto d1b = generate_cauchy_data(sol, coeffs, dom, DataTier::D1, 1e-3, 42);
    CHECK(d1.same_values(d1b));
    CHECK(d1.digest() == d1b.digest());
    auto d2 = generate_cauchy_data(sol, coeffs, dom, DataTier::D1, 1e-4, 42);
    CHECK(d1.noise_D / d2.noise_D == doctest::Approx(10.0).epsilon(1e-6));

    auto dz = generate_cauchy_data(ManufacturedSolution::zero(2), coeffs, dom, DataTier::D, 0.0, 1);
    CHECK(dz.mag_D == 0.0);
    CHECK(dz.bound_M == 0.0);
}

TEST_CASE("obstruction datasets: forcing by a pressure gradient leaves no trace") {
    DomainSpec dom = build_domain("rect2d_right_edge", 16, 8);
    auto coeffs = CoefficientFields::zero(2);
    auto sol_obs = ManufacturedSolution::pressure_bump(2, {0.5, 0.5, 0}, 0.28, 6);
    auto sol_zero = ManufacturedSolution::zero(2);
    auto da = generate_cauchy_data(sol_obs, coeffs, dom, DataTier::D1, 0.0, 1);
    auto db = generate_cauchy_data(sol_zero, coeffs, dom, DataTier::D1, 0.0, 1);
    CHECK(da.same_values(db));
    CHECK(da.digest() == db.digest());
}

TEST_CASE("trace extraction matches analytic traces at truncation order") {
    auto sol = ManufacturedSolution::taylor_green();
    std::vector<double> hs, errs;
    for (int n : {16, 32}) {
        DomainSpec dom = build_domain("rect2d_right_edge", n, 8);
        auto entries = gamma_entries(dom);
        SpaceTimeField v = sol.sample_v(dom.grid, dom.taxis, 0);
        TraceField nd = extract_normal_derivative(v, dom, entries);
        double m = 0;
        for (std::size_t e = 0; e < entries.size(); ++e) {
            Vec3 x = dom.grid.coord(entries[e].node);
            for (int k = 0; k < dom.taxis.slices(); ++k) {
                Mat9 gv = sol.grad_v(x, dom.taxis.time(k), 0);
                for (int c = 0; c < 2; ++c) {
                    double exact = gv[c * 3 + 0];  // outward normal is +x on gamma
                    m = std::max(m, std::abs(nd.values[(e * dom.taxis.slices() + k) * 2 + c] -
                                             exact));
                }
            }
        }
        hs.push_back(dom.grid.h(0));
        errs.push_back(m);
    }
    CHECK(fit_order(hs, errs) > 1.7);

    // zero field -> zero traces
    DomainSpec dom = build_domain("rect2d_right_edge", 12, 6);
    SpaceTimeField z(dom.grid, dom.taxis, 2);
    auto entries = gamma_entries(dom);
    TraceField tz = extract_trace(z, dom, entries);
    for (double v : tz.values) CHECK(v == 0.0);
}

TEST_CASE("projection: zero forcing and zero start stay zero") {
    Grid g = Grid::square2d(12);
    auto coeffs = CoefficientFields::zero(2);
    ProjectionStepper st(
        g, coeffs, [](const Vec3&, double) { return Vec3{0, 0, 0}; },
        [](const Vec3&, double) { return Vec3{0, 0, 0}; });
    Field v(g, 2);
    for (int n = 0; n < 5; ++n) v = st.step(v, 0.0 + n * 1e-3, 1e-3);
    CHECK(v.max_abs() == 0.0);
}

TEST_CASE("projection: first order in time on a space-exact solution") {
    auto sol = ManufacturedSolution::linear_in_space(2, {1.0, 0.7, -0.3});
    auto coeffs = CoefficientFields::zero(2);
    Grid g = Grid::square2d(8);
    ProjectionConfig cfg;
    cfg.implicit_diffusion = true;  // large steps
    std::vector<double> dts, errs;
    for (int steps : {8, 16, 32}) {
        auto res = run_projection_mms(sol, coeffs, g, 0.3, 0.5, steps, cfg);
        dts.push_back(0.2 / steps);
        errs.push_back(res.l2_error);
    }
    double order = fit_order(dts, errs);
    CHECK(order > 0.8);
    CHECK(order < 2.3);
}

TEST_CASE("projection: gradient forcing from rest is absorbed by the pressure") {
    RadialBump psi(2, {0.5, 0.5, 0}, 0.3, 6, 1.0);
    auto coeffs = CoefficientFields::zero(2);
    auto run = [&](int n) {
        Grid g = Grid::square2d(n);
        ProjectionStepper st(
            g, coeffs,
            [&psi](const Vec3& x, double) {
                return Vec3{psi.d1(x, 0), psi.d1(x, 1), 0};
            },
            [](const Vec3&, double) { return Vec3{0, 0, 0}; });
        Field v(g, 2);
        const double horizon = 0.01;
        double dt = g.h(0) * g.h(0) / 8;  // explicit stability
        int steps = static_cast<int>(std::ceil(horizon / dt));
        double vmax = 0;
        for (int it = 0; it < steps; ++it) {
            v = st.step(v, it * dt, dt);
            vmax = std::max(vmax, v.max_abs());
        }
        double fmax = 0;
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx)
            fmax = std::max(fmax, std::abs(psi.d1(g.coord(idx), 0)));
        // sanity: at least an order of magnitude below the unprojected drift
        CHECK(vmax < 0.1 * fmax * horizon);
        return vmax;
    };
    double c16 = run(16), c32 = run(32);
    // the residual velocity is a discretization defect: it vanishes under refinement
    CHECK(c16 / c32 > 2.0);
}
