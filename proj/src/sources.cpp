#include "nslab/sources.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace nslab {

namespace {

const double kPi = std::acos(-1.0);

ManufacturedSolution spatial_factor(const SourceParams& p) {
    if (p.shape == FactorShape::TrigMode)
        return ManufacturedSolution::separated_eigenmode({1.0}, p.amp);
    return ManufacturedSolution::stream_bump(p.dim, p.center, p.radius, p.power, 0.0, 0.0, p.amp);
}

double frob(const Mat9& m, int dim) {
    double s = 0;
    for (int c = 0; c < dim; ++c)
        for (int a = 0; a < dim; ++a) s += m[c * 3 + a] * m[c * 3 + a];
    return std::sqrt(s);
}

double mag(const Vec3& v, int n) {
    double s = 0;
    for (int c = 0; c < n; ++c) s += v[c] * v[c];
    return std::sqrt(s);
}

// diagonal spatial perturbation of the matrix family at the snapshot time
Vec3 diag_pert(const Vec3& x) {
    return Vec3{0.3 * std::sin(kPi * x[0]), 0.25 * std::cos(kPi * x[1]),
                0.2 * std::sin(kPi * x[2])};
}
Mat9 diag_pert_grad(const Vec3& x) {
    Mat9 g{};
    g.fill(0.0);
    g[0 * 3 + 0] = 0.3 * kPi * std::cos(kPi * x[0]);
    g[1 * 3 + 1] = -0.25 * kPi * std::sin(kPi * x[1]);
    g[2 * 3 + 2] = 0.2 * kPi * std::cos(kPi * x[2]);
    return g;
}

// off-diagonal time-slope perturbation S(x)
Mat9 slope_mat(const Vec3& x) {
    Mat9 s{};
    s.fill(0.0);
    s[0 * 3 + 0] = std::sin(kPi * x[0]) * std::cos(kPi * x[1]);
    s[0 * 3 + 1] = 0.6 * std::cos(kPi * x[0]);
    s[1 * 3 + 0] = -0.4 * std::sin(kPi * x[1]);
    s[1 * 3 + 1] = std::cos(kPi * x[0]) * std::sin(kPi * x[1]);
    s[2 * 3 + 2] = 0.5 * std::cos(kPi * x[0]);
    return s;
}
// gradS[(m,j)][l] flattened as (m*3+j)*3+l
std::array<double, 27> slope_mat_grad(const Vec3& x) {
    std::array<double, 27> g{};
    g.fill(0.0);
    auto set = [&](int m, int j, int l, double v) { g[(m * 3 + j) * 3 + l] = v; };
    set(0, 0, 0, kPi * std::cos(kPi * x[0]) * std::cos(kPi * x[1]));
    set(0, 0, 1, -kPi * std::sin(kPi * x[0]) * std::sin(kPi * x[1]));
    set(0, 1, 0, -0.6 * kPi * std::sin(kPi * x[0]));
    set(1, 0, 1, -0.4 * kPi * std::cos(kPi * x[1]));
    set(1, 1, 0, -kPi * std::sin(kPi * x[0]) * std::sin(kPi * x[1]));
    set(1, 1, 1, kPi * std::cos(kPi * x[0]) * std::cos(kPi * x[1]));
    set(2, 2, 0, -0.5 * kPi * std::sin(kPi * x[0]));
    return g;
}

// rot(M g) from M, its spatial gradient, g and grad g
Vec3 rot_matrix_apply(int dim, const Mat9& M, const std::array<double, 27>& gradM, const Vec3& g,
                      const Mat9& gradg) {
    auto dMg = [&](int c, int l) {  // d_l (M g)_c
        double s = 0;
        for (int j = 0; j < dim; ++j)
            s += gradM[(c * 3 + j) * 3 + l] * g[j] + M[c * 3 + j] * gradg[j * 3 + l];
        return s;
    };
    if (dim == 2) return Vec3{dMg(1, 0) - dMg(0, 1), 0, 0};
    return Vec3{dMg(2, 1) - dMg(1, 2), dMg(0, 2) - dMg(2, 0), dMg(1, 0) - dMg(0, 1)};
}

}  // namespace

SourceModel build_source(const std::string& family, const SourceParams& params,
                         const DomainSpec& dom) {
    SourceModel src;
    src.family = family;
    src.dim = params.dim;
    src.t0 = params.t0;
    const int dim = params.dim;
    const int rc = dim == 2 ? 1 : 3;

    if (family == "vector_potential") {
        // potential chi(x) q(t); forcing is its curl, divergence-free for all t
        ManufacturedSolution pot = ManufacturedSolution::stream_bump(
            dim, params.center, params.radius, params.power, 0.0, 0.0, params.amp);
        TimeFactor qt = time_factor_poly(params.q_coeffs);
        src.F = [pot, qt](const Vec3& x, double t, int k) { return qt(t, k) * pot.v(x, 0, 0); };
        src.rotF = [pot, qt](const Vec3& x, double t, int k) {
            return qt(t, k) * pot.rot_v(x, 0, 0);
        };
        double q0 = qt(params.t0, 0);
        src.F_t0 = [pot, q0](const Vec3& x) { return q0 * pot.v(x, 0, 0); };
        src.gradF_t0 = [pot, q0](const Vec3& x) {
            Mat9 m = pot.grad_v(x, 0, 0);
            for (double& e : m) e *= q0;
            return m;
        };
    } else if (family == "separated") {
        ManufacturedSolution fpart = spatial_factor(params);
        TimeFactor r = time_factor_poly(params.r_coeffs);
        double rt0 = r(params.t0, 0);
        if (rt0 == 0.0)
            throw std::invalid_argument("build_source: separated family needs r(t0) != 0");
        src.r_t0 = rt0;
        src.F = [fpart, r](const Vec3& x, double t, int k) { return r(t, k) * fpart.v(x, 0, 0); };
        src.rotF = [fpart, r](const Vec3& x, double t, int k) {
            return r(t, k) * fpart.rot_v(x, 0, 0);
        };
        src.F_t0 = [fpart, rt0](const Vec3& x) { return rt0 * fpart.v(x, 0, 0); };
        src.gradF_t0 = [fpart, rt0](const Vec3& x) {
            Mat9 m = fpart.grad_v(x, 0, 0);
            for (double& e : m) e *= rt0;
            return m;
        };
        src.has_factor = true;
        src.factor = [fpart](const Vec3& x) { return fpart.v(x, 0, 0); };
        src.grad_factor = [fpart](const Vec3& x) { return fpart.grad_v(x, 0, 0); };
    } else if (family == "matrix") {
        // R(x,t) = exp(kappa tau) (I + eR D(x) + tau eS S(x)), tau = t - t0,
        // applied to the divergence-free composite g = kappa f - lap f.
        ManufacturedSolution fpart = spatial_factor(params);
        const double kap = params.kappa, t0 = params.t0;
        const double eS = params.trig_eps;
        const double eR = params.trig_eps;
        auto gval = [fpart, kap](const Vec3& x) {
            Vec3 f = fpart.v(x, 0, 0), lf = fpart.lap_v(x, 0, 0);
            return Vec3{kap * f[0] - lf[0], kap * f[1] - lf[1], kap * f[2] - lf[2]};
        };
        auto ggrad = [fpart, kap](const Vec3& x) {
            Mat9 gf = fpart.grad_v(x, 0, 0), gl = fpart.grad_lap_v(x, 0, 0);
            Mat9 out;
            for (int i = 0; i < 9; ++i) out[i] = kap * gf[i] - gl[i];
            return out;
        };
        auto grotg = [fpart, kap](const Vec3& x) {
            Vec3 rf = fpart.rot_v(x, 0, 0), lrf = fpart.lap_rot_v(x, 0, 0);
            return Vec3{kap * rf[0] - lrf[0], kap * rf[1] - lrf[1], kap * rf[2] - lrf[2]};
        };

        // scalar time profiles of the identity part and the slope part
        auto alpha = [kap, t0](double t, int k) {
            return std::pow(kap, k) * std::exp(kap * (t - t0));
        };
        auto beta = [kap, t0](double t, int k) {  // d^k/dt^k of tau exp(kappa tau)
            double tau = t - t0, e = std::exp(kap * tau);
            if (k == 0) return tau * e;
            if (k == 1) return e * (1 + kap * tau);
            return e * (2 * kap + kap * kap * tau);
        };

        src.F = [=](const Vec3& x, double t, int k) {
            Vec3 g = gval(x);
            double a = alpha(t, k);
            Vec3 out{a * g[0], a * g[1], a * g[2]};
            if (eR != 0) {
                Vec3 d = diag_pert(x);
                for (int c = 0; c < dim; ++c) out[c] += a * eR * d[c] * g[c];
            }
            if (eS != 0) {
                Mat9 S = slope_mat(x);
                double b = beta(t, k);
                for (int c = 0; c < dim; ++c)
                    for (int j = 0; j < dim; ++j) out[c] += b * eS * S[c * 3 + j] * g[j];
            }
            return out;
        };
        src.rotF = [=](const Vec3& x, double t, int k) {
            Vec3 rg = grotg(x);
            double a = alpha(t, k);
            Vec3 out{a * rg[0], a * rg[1], a * rg[2]};
            if (eR != 0) {
                Mat9 D{};
                D.fill(0.0);
                std::array<double, 27> gD{};
                gD.fill(0.0);
                Vec3 dp = diag_pert(x);
                Mat9 dg = diag_pert_grad(x);
                for (int c = 0; c < 3; ++c) {
                    D[c * 3 + c] = dp[c];
                    for (int l = 0; l < 3; ++l) gD[(c * 3 + c) * 3 + l] = dg[c * 3 + l];
                }
                Vec3 extra = rot_matrix_apply(dim, D, gD, gval(x), ggrad(x));
                for (int c = 0; c < rc; ++c) out[c] += a * eR * extra[c];
            }
            if (eS != 0) {
                Vec3 extra = rot_matrix_apply(dim, slope_mat(x), slope_mat_grad(x), gval(x),
                                              ggrad(x));
                double b = beta(t, k);
                for (int c = 0; c < rc; ++c) out[c] += b * eS * extra[c];
            }
            return out;
        };
        src.F_t0 = [=](const Vec3& x) { return src.F(x, t0, 0); };
        src.gradF_t0 = [=](const Vec3& x) {
            Mat9 gg = ggrad(x);
            if (eR == 0) return gg;
            Vec3 g = gval(x), d = diag_pert(x);
            Mat9 dd = diag_pert_grad(x);
            Mat9 out = gg;
            for (int c = 0; c < dim; ++c)
                for (int a = 0; a < dim; ++a)
                    out[c * 3 + a] += eR * (d[c] * gg[c * 3 + a] + dd[c * 3 + a] * g[c]);
            return out;
        };
        src.has_factor = true;
        src.factor = gval;
        src.grad_factor = ggrad;
        // grid minimum of det R(., t0) = det(I + eR D)
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t idx = 0; idx < dom.grid.num_nodes(); ++idx) {
            Vec3 d = diag_pert(dom.grid.coord(idx));
            double det = 1.0;
            for (int c = 0; c < dim; ++c) det *= 1.0 + eR * d[c];
            dmin = std::min(dmin, det);
        }
        src.det_R_t0_min = dmin;
        if (dmin < params.det_floor)
            throw std::invalid_argument("build_source: matrix factor determinant below floor");
    } else if (family == "gradient_obstruction") {
        RadialBump psi(dim, params.center, params.radius, params.power, params.amp);
        src.F = [psi, dim](const Vec3& x, double, int k) {
            if (k > 0) return Vec3{0, 0, 0};
            Vec3 g{0, 0, 0};
            for (int a = 0; a < dim; ++a) g[a] = psi.d1(x, a);
            return g;
        };
        src.rotF = [](const Vec3&, double, int) { return Vec3{0, 0, 0}; };
        src.F_t0 = [src](const Vec3& x) { return src.F(x, 0, 0); };
        src.gradF_t0 = [psi, dim](const Vec3& x) {
            Mat9 m{};
            m.fill(0.0);
            for (int c = 0; c < dim; ++c)
                for (int a = 0; a < dim; ++a) m[c * 3 + a] = psi.d2(x, c, a);
            return m;
        };
    } else {
        throw std::invalid_argument("build_source: unknown family '" + family + "'");
    }
    return src;
}

ManufacturedSolution solution_for_source(const SourceModel& src, const SourceParams& params) {
    if (src.family == "separated" && params.shape == FactorShape::TrigMode) {
        // solve rho' + 2 rho = r for a polynomial rho
        const auto& r = params.r_coeffs;
        std::vector<double> rho(r.size(), 0.0);
        for (int k = static_cast<int>(r.size()) - 1; k >= 0; --k) {
            double next = (static_cast<std::size_t>(k + 1) < rho.size()) ? rho[k + 1] : 0.0;
            rho[k] = 0.5 * (r[k] - (k + 1) * next);
        }
        return ManufacturedSolution::separated_eigenmode(rho, params.amp);
    }
    if (src.family == "matrix" && params.trig_eps == 0.0) {
        return ManufacturedSolution::stream_bump(params.dim, params.center, params.radius,
                                                 params.power, params.kappa, params.t0,
                                                 params.amp);
    }
    if (src.family == "gradient_obstruction") {
        return ManufacturedSolution::pressure_bump(params.dim, params.center, params.radius,
                                                   params.power, params.amp);
    }
    throw std::invalid_argument("solution_for_source: no closed-form solution for this family");
}

namespace {

struct RatioAccumulator {
    double max_num = 0;
    std::vector<std::pair<double, double>> samples;  // (num, den)
    std::vector<std::size_t> nodes;                  // node of each sample

    void add(double num, double den, std::size_t node) {
        max_num = std::max(max_num, num);
        samples.emplace_back(num, den);
        nodes.push_back(node);
    }

    ConditionEntry finish(const std::string& name, double c_max) const {
        ConditionEntry e;
        e.name = name;
        double tol = 1e-12 * std::max(max_num, 1e-300);
        bool any = false;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            auto [num, den] = samples[i];
            if (num <= tol) continue;  // vacuous sample
            any = true;
            if (den <= tol) {
                e.finite = false;
                if (e.offending_nodes.size() < 20) e.offending_nodes.push_back(nodes[i]);
            } else {
                e.constant = std::max(e.constant, num / den);
            }
        }
        e.vacuous = !any;
        if (e.vacuous) e.constant = 0;
        e.pass = e.finite && e.constant <= c_max;
        return e;
    }
};

}  // namespace

bool ConditionReport::implication_chain_holds() const {
    bool a = !rot_majorant.finite || grad_majorant_k2.finite;
    bool b = !grad_majorant_k2.finite || grad_majorant_k1.finite;
    bool c = !grad_majorant_k2.finite || !grad_majorant_k1.finite ||
             grad_majorant_k1.constant <= grad_majorant_k2.constant * (1 + 1e-12);
    return a && b && c;
}

ConditionReport check_conditions(const SourceModel& src, const DomainSpec& dom,
                                 const ConditionOptions& opt) {
    ConditionReport rep;
    const Grid& g = dom.grid;
    const TimeAxis& ta = dom.taxis;
    const int dim = src.dim;
    const int rc = src.rot_comps();

    // divergence at the snapshot time from the exact gradient closure
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        Mat9 gf = src.gradF_t0(g.coord(idx));
        double div = 0;
        for (int c = 0; c < dim; ++c) div += gf[c * 3 + c];
        rep.div_F_t0_max = std::max(rep.div_F_t0_max, std::abs(div));
    }
    rep.div_free_t0 = rep.div_F_t0_max <= opt.div_tol;

    RatioAccumulator rot_acc, k2_acc, k1_acc;
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        Vec3 x = g.coord(idx);
        double den_rot = mag(src.rotF(x, src.t0, 0), rc);
        double den_grad = frob(src.gradF_t0(x), dim) + mag(src.F_t0(x), dim);
        for (int k = 0; k <= 2; ++k) {
            for (int kk = 0; kk < ta.slices(); ++kk) {
                double num = mag(src.rotF(x, ta.time(kk), k), rc);
                if (k <= 1) {
                    rot_acc.add(num, den_rot, idx);
                    k1_acc.add(num, den_grad, idx);
                }
                k2_acc.add(num, den_grad, idx);
            }
        }
    }
    rep.rot_majorant = rot_acc.finish("rot_majorant", opt.c_max);
    rep.grad_majorant_k2 = k2_acc.finish("grad_majorant_k2", opt.c_max);
    rep.grad_majorant_k1 = k1_acc.finish("grad_majorant_k1", opt.c_max);

    if (src.has_factor) {
        RatioAccumulator fac;
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
            Vec3 x = g.coord(idx);
            double num = frob(src.grad_factor(x), dim) + mag(src.factor(x), dim);
            double den = frob(src.gradF_t0(x), dim) + mag(src.F_t0(x), dim);
            fac.add(num, den, idx);
        }
        rep.factor_recovery = fac.finish("factor_recovery", opt.c_max);
    }
    return rep;
}

nlohmann::json condition_report_to_json(const ConditionReport& rep) {
    nlohmann::json j;
    j["div_F_t0_max"] = rep.div_F_t0_max;
    j["div_free_t0"] = rep.div_free_t0;
    auto entry = [](const ConditionEntry& e) {
        nlohmann::json je;
        je["constant"] = e.finite ? e.constant : -1.0;
        je["finite"] = e.finite;
        je["vacuous"] = e.vacuous;
        je["pass"] = e.pass;
        je["offending_nodes"] = e.offending_nodes;
        return je;
    };
    j["rot_majorant"] = entry(rep.rot_majorant);
    j["grad_majorant_k2"] = entry(rep.grad_majorant_k2);
    j["grad_majorant_k1"] = entry(rep.grad_majorant_k1);
    if (rep.factor_recovery) j["factor_recovery"] = entry(*rep.factor_recovery);
    j["implication_chain"] = rep.implication_chain_holds();
    return j;
}

}  // namespace nslab
