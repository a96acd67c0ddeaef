#include "nslab/weight.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace nslab {

namespace {

double smoothstep(double u) {
    if (u <= 0) return 0;
    if (u >= 1) return 1;
    return u * u * (3 - 2 * u);
}

// antiderivative of smoothstep on [0,1]
double smoothstep_int(double u) {
    if (u <= 0) return 0;
    if (u >= 1) return u - 0.5;
    return u * u * u - 0.5 * u * u * u * u;
}

}  // namespace

AxisMap::AxisMap(double length, double critical_x, double window_lo, double window_hi)
    : length_(length), wa_(window_lo), wb_(window_hi) {
    // Slope base + gain*S((x-wa)/(wb-wa)); the two integral constraints are
    // xi(critical_x) = length/2 and xi(length) = length.
    const double w = wb_ - wa_;
    auto step_integral = [&](double x) {  // integral of S over [0, x]
        return w * smoothstep_int((x - wa_) / w);
    };
    const double T1 = step_integral(critical_x);
    const double T = step_integral(length);
    // base*xc + gain*T1 = L/2 ; base*L + gain*T = L
    const double det = critical_x * T - T1 * length_;
    if (std::abs(det) < 1e-14) throw std::invalid_argument("AxisMap: singular constraints");
    base_ = (0.5 * length_ * T - T1 * length_) / det;
    gain_ = (critical_x * length_ - 0.5 * length_ * length_) / det;
    if (base_ <= 0 || base_ + gain_ <= 0)
        throw std::invalid_argument("AxisMap: slope not positive, adjust window");
}

double AxisMap::value(double x) const {
    const double w = wb_ - wa_;
    return base_ * x + gain_ * w * smoothstep_int((x - wa_) / w);
}

double AxisMap::slope(double x) const {
    return base_ + gain_ * smoothstep((x - wa_) / (wb_ - wa_));
}

WeightProfile WeightProfile::custom(std::function<double(const Vec3&)> d,
                                    std::function<Vec3(const Vec3&)> grad) {
    WeightProfile p;
    p.d_ = std::move(d);
    p.grad_ = std::move(grad);
    p.preset_ = "custom";
    return p;
}

WeightProfile WeightProfile::build(const DomainSpec& dom, double amplitude) {
    const int dim = dom.dim();
    const std::string preset = dom.preset;

    // Per-axis factors: the observed-direction axes get the remapped parabola
    // vanishing at both ends of the enlarged box with vertex pushed into the
    // opening; the remaining axes get a plain parabola.
    struct Factor {
        bool remapped;
        AxisMap map;           // if remapped
        double lo, hi;         // parabola roots in physical coordinates
    };
    std::vector<Factor> factors(dim);

    auto make_remapped = [&](int axis) {
        double L = dom.omega1.hi[axis] - dom.omega1.lo[axis];
        double xc = dom.opening.center[axis] - dom.omega1.lo[axis];
        // blend window straddles the flow-box edge and the opening
        double wa = dom.omega.hi[axis] - dom.omega1.lo[axis] + 0.05;
        double wb = std::min(L - 0.05, xc + 0.15);
        factors[axis] = {true, AxisMap(L, xc, wa, wb), dom.omega1.lo[axis], dom.omega1.hi[axis]};
    };
    auto make_plain = [&](int axis) {
        factors[axis] = {false, AxisMap(), dom.omega1.lo[axis], dom.omega1.hi[axis]};
    };

    if (preset == "rect2d_right_edge" || preset == "box3d_face") {
        make_remapped(0);
        for (int a = 1; a < dim; ++a) make_plain(a);
    } else if (preset == "rect2d_corner") {
        make_remapped(0);
        make_remapped(1);
    } else {
        throw std::invalid_argument("WeightProfile: no profile for preset '" + preset + "'");
    }

    auto factor_value = [factors](int a, double xa) {
        const Factor& f = factors[a];
        if (f.remapped) {
            double L = f.map.length();
            double xi = f.map.value(xa - f.lo);
            return xi * (L - xi);
        }
        return (xa - f.lo) * (f.hi - xa);
    };
    auto factor_slope = [factors](int a, double xa) {
        const Factor& f = factors[a];
        if (f.remapped) {
            double L = f.map.length();
            double xi = f.map.value(xa - f.lo);
            return (L - 2 * xi) * f.map.slope(xa - f.lo);
        }
        return (f.hi - f.lo) - 2 * (xa - f.lo);
    };

    // normalize so the max over the flow-box closure equals `amplitude`;
    // the in-box argmax sits at the observed face with centered cross-axes
    Vec3 peak{};
    for (int a = 0; a < dim; ++a) {
        peak[a] = factors[a].remapped ? dom.omega.hi[a]
                                      : 0.5 * (dom.omega.lo[a] + dom.omega.hi[a]);
    }
    double raw_peak = 1.0;
    for (int a = 0; a < dim; ++a) raw_peak *= factor_value(a, peak[a]);
    const double scale = amplitude / raw_peak;

    WeightProfile p;
    p.scale_ = scale;
    p.preset_ = preset;
    p.d_ = [factor_value, scale, dim](const Vec3& x) {
        double v = scale;
        for (int a = 0; a < dim; ++a) v *= factor_value(a, x[a]);
        return v;
    };
    p.grad_ = [factor_value, factor_slope, scale, dim](const Vec3& x) {
        Vec3 g{0, 0, 0};
        for (int a = 0; a < dim; ++a) {
            double v = scale;
            for (int b = 0; b < dim; ++b) v *= (b == a) ? factor_slope(b, x[b]) : factor_value(b, x[b]);
            g[a] = v;
        }
        return g;
    };
    return p;
}

double WeightProfile::min_over_omega0(const DomainSpec& dom) const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t idx : dom.omega0_nodes()) m = std::min(m, d(dom.grid.coord(idx)));
    return m;
}

double WeightProfile::max_over_omega(const DomainSpec& dom) const {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < dom.grid.num_nodes(); ++idx)
        m = std::max(m, d(dom.grid.coord(idx)));
    return m;
}

double WeightProfile::max_over_omega1(const DomainSpec& dom) const {
    Grid g1 = dom.omega1_grid();
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < g1.num_nodes(); ++idx) m = std::max(m, d(g1.coord(idx)));
    return m;
}

ProfileCheckReport validate_weight_profile(const WeightProfile& p, const DomainSpec& dom,
                                           double boundary_tol_factor) {
    ProfileCheckReport rep;
    const Grid& g = dom.grid;
    const int dim = dom.dim();
    const double h = g.h_max();
    const double tol = boundary_tol_factor * h * h;

    auto gnorm = [&](const Vec3& x) {
        Vec3 gr = p.grad_d(x);
        double s = 0;
        for (int a = 0; a < dim; ++a) s += gr[a] * gr[a];
        return std::sqrt(s);
    };

    // nonvanishing gradient over the flow-box closure
    rep.min_grad_norm_omega = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
        bool excluded = false;
        for (std::size_t d0 : dom.degenerate_corner_nodes)
            if (d0 == idx) excluded = true;
        if (excluded) {
            rep.excluded_degenerate.push_back(idx);
            continue;
        }
        double gn = gnorm(g.coord(idx));
        rep.min_grad_norm_omega = std::min(rep.min_grad_norm_omega, gn);
        if (gn <= 1e-12) rep.gradient_violations.push_back(idx);
    }

    // positivity on the recovery subdomain, vanishing on the unobserved boundary
    rep.min_d_omega0 = p.min_over_omega0(dom);
    rep.max_d_on_rest_boundary = 0;
    for (std::size_t idx : dom.rest_nodes())
        rep.max_d_on_rest_boundary =
            std::max(rep.max_d_on_rest_boundary, std::abs(p.d(g.coord(idx))));

    // enlarged-box requirements on a companion grid
    Grid g1 = dom.omega1_grid();
    rep.min_d_omega1_interior = std::numeric_limits<double>::infinity();
    rep.max_d_on_omega1_boundary = 0;
    rep.min_grad_norm_omega1_minus_opening = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < g1.num_nodes(); ++idx) {
        Vec3 x = g1.coord(idx);
        if (g1.on_boundary(idx)) {
            rep.max_d_on_omega1_boundary = std::max(rep.max_d_on_omega1_boundary, std::abs(p.d(x)));
        } else {
            rep.min_d_omega1_interior = std::min(rep.min_d_omega1_interior, p.d(x));
        }
        if (!dom.opening.contains(x, dim, h)) {
            // corners of the enlarged box are degenerate product-form points,
            // like the flow-box corner of the two-face preset
            int extreme = 0;
            auto m = g1.multi_index(idx);
            for (int a = 0; a < dim; ++a)
                if (m[a] == 0 || m[a] == g1.intervals(a)) ++extreme;
            if (extreme < 2)
                rep.min_grad_norm_omega1_minus_opening =
                    std::min(rep.min_grad_norm_omega1_minus_opening, gnorm(x));
        }
    }

    rep.ok = rep.gradient_violations.empty() && rep.min_d_omega0 > 0 &&
             rep.max_d_on_rest_boundary <= tol && rep.max_d_on_omega1_boundary <= tol &&
             rep.min_d_omega1_interior > 0 && rep.min_grad_norm_omega1_minus_opening > 1e-12;
    if (!rep.excluded_degenerate.empty())
        rep.note = "degenerate corner nodes excluded from the gradient check";
    return rep;
}

WeightProfile build_weight_profile(const DomainSpec& dom, double amplitude) {
    WeightProfile p = WeightProfile::build(dom, amplitude);
    auto rep = validate_weight_profile(p, dom);
    if (!rep.ok) {
        std::string msg = "build_weight_profile: grid checks failed";
        if (!rep.gradient_violations.empty())
            msg += " (" + std::to_string(rep.gradient_violations.size()) +
                   " nodes with vanishing gradient)";
        throw std::runtime_error(msg);
    }
    return p;
}

std::string to_string(PsiMode m) {
    return m == PsiMode::Profile ? "profile" : "profile_squared";
}

WeightFunction::WeightFunction(WeightProfile profile, PsiMode mode, double lambda, double beta,
                               double t0, double delta)
    : profile_(std::move(profile)), mode_(mode), lambda_(lambda), beta_(beta), t0_(t0),
      delta_(delta) {
    auto prof = profile_;
    if (mode == PsiMode::Profile) {
        psi_ = [prof](const Vec3& x) { return prof.d(x); };
    } else {
        psi_ = [prof](const Vec3& x) {
            double v = prof.d(x);
            return v * v;
        };
    }
}

WeightFunction WeightFunction::from_psi(std::function<double(const Vec3&)> psi, double lambda,
                                        double beta, double t0, double delta) {
    WeightFunction w;
    w.psi_ = std::move(psi);
    w.lambda_ = lambda;
    w.beta_ = beta;
    w.t0_ = t0;
    w.delta_ = delta;
    w.mode_ = PsiMode::Profile;
    return w;
}

double WeightFunction::psi(const Vec3& x) const { return psi_(x); }

double WeightFunction::phi(const Vec3& x, double t) const {
    double tau = t - t0_;
    return std::exp(lambda_ * (psi_(x) - beta_ * tau * tau));
}

double WeightFunction::max_phi(const Grid& g) const {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx)
        m = std::max(m, std::exp(lambda_ * psi_(g.coord(idx))));
    return m;
}

Field WeightFunction::sample_phi(const Grid& g, double t) const {
    Field f(g, 1);
    for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) f.at(0, idx) = phi(g.coord(idx), t);
    return f;
}

nlohmann::json weight_to_json(const WeightFunction& w, const DomainSpec& dom) {
    nlohmann::json j = domain_to_json(dom);
    j["lambda"] = w.lambda();
    j["beta"] = w.beta();
    j["t0"] = w.t0();
    j["delta"] = w.delta();
    j["psi_mode"] = to_string(w.mode());
    return j;
}

EllipticWeight build_elliptic_weight(const DomainSpec& dom, double lambda) {
    EllipticWeight w;
    w.eta = build_weight_profile(dom);
    w.lambda = lambda;
    w.inner = dom.omega;
    w.outer = dom.omega1;
    w.opening = dom.opening;
    return w;
}

ProfileCheckReport validate_elliptic_weight(const EllipticWeight& w, const DomainSpec& dom) {
    return validate_weight_profile(w.eta, dom);
}

}  // namespace nslab
