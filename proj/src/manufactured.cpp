#include "nslab/manufactured.hpp"

#include <cmath>
#include <stdexcept>

namespace nslab {

RadialBump::RadialBump(int dim, Vec3 center, double radius, int power, double amp)
    : dim_(dim), center_(center), radius_(radius), power_(power), amp_(amp) {
    if (power < 3) throw std::invalid_argument("RadialBump: power >= 3 required");
}

double RadialBump::p_deriv(double u, int k) const {
    if (u >= 1.0) return 0.0;
    double c = amp_;
    for (int j = 0; j < k; ++j) c *= -(power_ - j);
    return c * std::pow(1.0 - u, power_ - k);
}

namespace {
inline double u_of(const Vec3& x, const Vec3& c, double r, int dim) {
    double s = 0;
    for (int a = 0; a < dim; ++a) s += (x[a] - c[a]) * (x[a] - c[a]);
    return s / (r * r);
}
}  // namespace

double RadialBump::value(const Vec3& x) const { return p_deriv(u_of(x, center_, radius_, dim_), 0); }

double RadialBump::d1(const Vec3& x, int i) const {
    double u = u_of(x, center_, radius_, dim_);
    double si = 2 * (x[i] - center_[i]) / (radius_ * radius_);
    return p_deriv(u, 1) * si;
}

double RadialBump::d2(const Vec3& x, int i, int j) const {
    double u = u_of(x, center_, radius_, dim_);
    double q = 2.0 / (radius_ * radius_);
    double si = q * (x[i] - center_[i]), sj = q * (x[j] - center_[j]);
    return p_deriv(u, 2) * si * sj + p_deriv(u, 1) * (i == j ? q : 0.0);
}

double RadialBump::d3(const Vec3& x, int i, int j, int k) const {
    double u = u_of(x, center_, radius_, dim_);
    double q = 2.0 / (radius_ * radius_);
    double s[3] = {q * (x[0] - center_[0]), q * (x[1] - center_[1]), q * (x[2] - center_[2])};
    double t3 = p_deriv(u, 3) * s[i] * s[j] * s[k];
    double t2 = p_deriv(u, 2) * q *
                ((i == j ? s[k] : 0.0) + (i == k ? s[j] : 0.0) + (j == k ? s[i] : 0.0));
    return t3 + t2;
}

double RadialBump::d4(const Vec3& x, int i, int j, int k, int l) const {
    double u = u_of(x, center_, radius_, dim_);
    double q = 2.0 / (radius_ * radius_);
    double s[3] = {q * (x[0] - center_[0]), q * (x[1] - center_[1]), q * (x[2] - center_[2])};
    double t4 = p_deriv(u, 4) * s[i] * s[j] * s[k] * s[l];
    double t3 = p_deriv(u, 3) * q *
                ((i == j ? s[k] * s[l] : 0.0) + (i == k ? s[j] * s[l] : 0.0) +
                 (i == l ? s[j] * s[k] : 0.0) + (j == k ? s[i] * s[l] : 0.0) +
                 (j == l ? s[i] * s[k] : 0.0) + (k == l ? s[i] * s[j] : 0.0));
    double t2 = p_deriv(u, 2) * q * q *
                ((i == j && k == l ? 1.0 : 0.0) + (i == k && j == l ? 1.0 : 0.0) +
                 (i == l && j == k ? 1.0 : 0.0));
    return t4 + t3 + t2;
}

double RadialBump::laplacian(const Vec3& x) const {
    double s = 0;
    for (int a = 0; a < dim_; ++a) s += d2(x, a, a);
    return s;
}

double RadialBump::d_laplacian(const Vec3& x, int i) const {
    double s = 0;
    for (int a = 0; a < dim_; ++a) s += d3(x, i, a, a);
    return s;
}

double RadialBump::bilaplacian(const Vec3& x) const {
    double s = 0;
    for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b) s += d4(x, a, a, b, b);
    return s;
}

TimeFactor time_factor_exp(double rate) {
    return [rate](double t, int k) { return std::pow(rate, k) * std::exp(rate * t); };
}

TimeFactor time_factor_poly(std::vector<double> coeffs) {
    return [coeffs](double t, int k) {
        double acc = 0;
        for (std::size_t j = k; j < coeffs.size(); ++j) {
            double c = coeffs[j];
            for (std::size_t m = 0; m < static_cast<std::size_t>(k); ++m) c *= (j - m);
            acc += c * std::pow(t, j - k);
        }
        return acc;
    };
}

TimeFactor time_factor_one() {
    return [](double, int k) { return k == 0 ? 1.0 : 0.0; };
}

namespace {
TimeFactor time_factor_exp_shift(double rate, double t_ref) {
    return [rate, t_ref](double t, int k) {
        return std::pow(rate, k) * std::exp(rate * (t - t_ref));
    };
}
Mat9 zero_mat() { return Mat9{0, 0, 0, 0, 0, 0, 0, 0, 0}; }
}  // namespace

Vec3 ManufacturedSolution::v(const Vec3& x, double t, int k) const { return T_(t, k) * U_(x); }

Mat9 ManufacturedSolution::grad_v(const Vec3& x, double t, int k) const {
    Mat9 m = gradU_(x);
    double c = T_(t, k);
    for (double& e : m) e *= c;
    return m;
}

Vec3 ManufacturedSolution::lap_v(const Vec3& x, double t, int k) const {
    return T_(t, k) * lapU_(x);
}

Mat9 ManufacturedSolution::grad_lap_v(const Vec3& x, double t, int k) const {
    Mat9 m = grad_lapU_(x);
    double c = T_(t, k);
    for (double& e : m) e *= c;
    return m;
}

Vec3 ManufacturedSolution::rot_v(const Vec3& x, double t, int k) const {
    return T_(t, k) * rotU_(x);
}

Mat9 ManufacturedSolution::grad_rot_v(const Vec3& x, double t, int k) const {
    Mat9 m = grad_rotU_(x);
    double c = T_(t, k);
    for (double& e : m) e *= c;
    return m;
}

Vec3 ManufacturedSolution::lap_rot_v(const Vec3& x, double t, int k) const {
    return T_(t, k) * lap_rotU_(x);
}

double ManufacturedSolution::p(const Vec3& x, double t) const { return Tp_(t, 0) * P_(x); }

Vec3 ManufacturedSolution::grad_p(const Vec3& x, double t, int k) const {
    return Tp_(t, k) * gradP_(x);
}

SpaceTimeField ManufacturedSolution::sample_v(const Grid& g, const TimeAxis& t, int k) const {
    SpaceTimeField out(g, t, dim_);
    for (int kk = 0; kk < t.slices(); ++kk) {
        double tt = t.time(kk);
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
            Vec3 val = v(g.coord(idx), tt, k);
            for (int c = 0; c < dim_; ++c) out.at(kk, c, idx) = val[c];
        }
    }
    return out;
}

SpaceTimeField ManufacturedSolution::sample_rot_v(const Grid& g, const TimeAxis& t, int k) const {
    SpaceTimeField out(g, t, rot_comps());
    for (int kk = 0; kk < t.slices(); ++kk) {
        double tt = t.time(kk);
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
            Vec3 val = rot_v(g.coord(idx), tt, k);
            for (int c = 0; c < rot_comps(); ++c) out.at(kk, c, idx) = val[c];
        }
    }
    return out;
}

ManufacturedSolution ManufacturedSolution::taylor_green(double amp) {
    ManufacturedSolution s = separated_eigenmode({}, amp);
    s.T_ = time_factor_exp(-2.0);
    s.name_ = "taylor_green";
    return s;
}

ManufacturedSolution ManufacturedSolution::separated_eigenmode(std::vector<double> rho_coeffs,
                                                               double amp) {
    ManufacturedSolution s;
    s.dim_ = 2;
    s.name_ = "separated_eigenmode";
    s.T_ = rho_coeffs.empty() ? time_factor_one() : time_factor_poly(std::move(rho_coeffs));
    s.Tp_ = time_factor_one();
    s.U_ = [amp](const Vec3& x) {
        return Vec3{amp * std::sin(x[0]) * std::cos(x[1]), -amp * std::cos(x[0]) * std::sin(x[1]),
                    0};
    };
    s.gradU_ = [amp](const Vec3& x) {
        Mat9 m = zero_mat();
        m[0 * 3 + 0] = amp * std::cos(x[0]) * std::cos(x[1]);
        m[0 * 3 + 1] = -amp * std::sin(x[0]) * std::sin(x[1]);
        m[1 * 3 + 0] = amp * std::sin(x[0]) * std::sin(x[1]);
        m[1 * 3 + 1] = -amp * std::cos(x[0]) * std::cos(x[1]);
        return m;
    };
    s.lapU_ = [amp](const Vec3& x) {
        return Vec3{-2 * amp * std::sin(x[0]) * std::cos(x[1]),
                    2 * amp * std::cos(x[0]) * std::sin(x[1]), 0};
    };
    s.grad_lapU_ = [amp](const Vec3& x) {
        Mat9 m = zero_mat();
        m[0 * 3 + 0] = -2 * amp * std::cos(x[0]) * std::cos(x[1]);
        m[0 * 3 + 1] = 2 * amp * std::sin(x[0]) * std::sin(x[1]);
        m[1 * 3 + 0] = -2 * amp * std::sin(x[0]) * std::sin(x[1]);
        m[1 * 3 + 1] = 2 * amp * std::cos(x[0]) * std::cos(x[1]);
        return m;
    };
    s.rotU_ = [amp](const Vec3& x) {
        return Vec3{2 * amp * std::sin(x[0]) * std::sin(x[1]), 0, 0};
    };
    s.grad_rotU_ = [amp](const Vec3& x) {
        Mat9 m = zero_mat();
        m[0 * 3 + 0] = 2 * amp * std::cos(x[0]) * std::sin(x[1]);
        m[0 * 3 + 1] = 2 * amp * std::sin(x[0]) * std::cos(x[1]);
        return m;
    };
    s.lap_rotU_ = [amp](const Vec3& x) {
        return Vec3{-4 * amp * std::sin(x[0]) * std::sin(x[1]), 0, 0};
    };
    s.P_ = [](const Vec3&) { return 0.0; };
    s.gradP_ = [](const Vec3&) { return Vec3{0, 0, 0}; };
    return s;
}

ManufacturedSolution ManufacturedSolution::stream_bump(int dim, Vec3 center, double radius,
                                                       int power, double rate, double t_ref,
                                                       double amp) {
    ManufacturedSolution s;
    s.dim_ = dim;
    s.name_ = "stream_bump";
    s.T_ = time_factor_exp_shift(rate, t_ref);
    s.Tp_ = time_factor_one();
    RadialBump chi(dim, center, radius, power, amp);
    if (dim == 2) {
        s.U_ = [chi](const Vec3& x) { return Vec3{chi.d1(x, 1), -chi.d1(x, 0), 0}; };
        s.gradU_ = [chi](const Vec3& x) {
            Mat9 m = zero_mat();
            for (int a = 0; a < 2; ++a) {
                m[0 * 3 + a] = chi.d2(x, 1, a);
                m[1 * 3 + a] = -chi.d2(x, 0, a);
            }
            return m;
        };
        s.lapU_ = [chi](const Vec3& x) {
            return Vec3{chi.d_laplacian(x, 1), -chi.d_laplacian(x, 0), 0};
        };
        s.grad_lapU_ = [chi](const Vec3& x) {
            Mat9 m = zero_mat();
            for (int a = 0; a < 2; ++a) {
                double v0 = 0, v1 = 0;
                for (int b = 0; b < 2; ++b) {
                    v0 += chi.d4(x, 1, b, b, a);
                    v1 -= chi.d4(x, 0, b, b, a);
                }
                m[0 * 3 + a] = v0;
                m[1 * 3 + a] = v1;
            }
            return m;
        };
        s.rotU_ = [chi](const Vec3& x) { return Vec3{-chi.laplacian(x), 0, 0}; };
        s.grad_rotU_ = [chi](const Vec3& x) {
            Mat9 m = zero_mat();
            m[0 * 3 + 0] = -chi.d_laplacian(x, 0);
            m[0 * 3 + 1] = -chi.d_laplacian(x, 1);
            return m;
        };
        s.lap_rotU_ = [chi](const Vec3& x) { return Vec3{-chi.bilaplacian(x), 0, 0}; };
    } else {
        // vector potential (0, 0, chi)
        s.U_ = [chi](const Vec3& x) { return Vec3{chi.d1(x, 1), -chi.d1(x, 0), 0}; };
        s.gradU_ = [chi](const Vec3& x) {
            Mat9 m = zero_mat();
            for (int a = 0; a < 3; ++a) {
                m[0 * 3 + a] = chi.d2(x, 1, a);
                m[1 * 3 + a] = -chi.d2(x, 0, a);
            }
            return m;
        };
        s.lapU_ = [chi](const Vec3& x) {
            return Vec3{chi.d_laplacian(x, 1), -chi.d_laplacian(x, 0), 0};
        };
        s.grad_lapU_ = [chi](const Vec3& x) {
            Mat9 m = zero_mat();
            for (int a = 0; a < 3; ++a) {
                double v0 = 0, v1 = 0;
                for (int b = 0; b < 3; ++b) {
                    v0 += chi.d4(x, 1, b, b, a);
                    v1 -= chi.d4(x, 0, b, b, a);
                }
                m[0 * 3 + a] = v0;
                m[1 * 3 + a] = v1;
            }
            return m;
        };
        s.rotU_ = [chi](const Vec3& x) {
            return Vec3{chi.d2(x, 0, 2), chi.d2(x, 1, 2), -chi.d2(x, 0, 0) - chi.d2(x, 1, 1)};
        };
        s.grad_rotU_ = [chi](const Vec3& x) {
            Mat9 m;
            for (int a = 0; a < 3; ++a) {
                m[0 * 3 + a] = chi.d3(x, 0, 2, a);
                m[1 * 3 + a] = chi.d3(x, 1, 2, a);
                m[2 * 3 + a] = -chi.d3(x, 0, 0, a) - chi.d3(x, 1, 1, a);
            }
            return m;
        };
        s.lap_rotU_ = [chi](const Vec3& x) {
            Vec3 r{0, 0, 0};
            for (int b = 0; b < 3; ++b) {
                r[0] += chi.d4(x, 0, 2, b, b);
                r[1] += chi.d4(x, 1, 2, b, b);
                r[2] += -chi.d4(x, 0, 0, b, b) - chi.d4(x, 1, 1, b, b);
            }
            return r;
        };
    }
    s.P_ = [](const Vec3&) { return 0.0; };
    s.gradP_ = [](const Vec3&) { return Vec3{0, 0, 0}; };
    return s;
}

ManufacturedSolution ManufacturedSolution::linear_in_space(int dim,
                                                           std::vector<double> g_coeffs) {
    ManufacturedSolution s;
    s.dim_ = dim;
    s.name_ = "linear_in_space";
    s.T_ = time_factor_poly(std::move(g_coeffs));
    s.Tp_ = time_factor_one();
    if (dim == 2) {
        s.U_ = [](const Vec3& x) { return Vec3{x[1], -x[0], 0}; };
        s.gradU_ = [](const Vec3&) {
            Mat9 m = zero_mat();
            m[0 * 3 + 1] = 1;
            m[1 * 3 + 0] = -1;
            return m;
        };
        s.rotU_ = [](const Vec3&) { return Vec3{-2, 0, 0}; };
    } else {
        s.U_ = [](const Vec3& x) { return Vec3{x[1], x[2], x[0]}; };
        s.gradU_ = [](const Vec3&) {
            Mat9 m = zero_mat();
            m[0 * 3 + 1] = 1;
            m[1 * 3 + 2] = 1;
            m[2 * 3 + 0] = 1;
            return m;
        };
        s.rotU_ = [](const Vec3&) { return Vec3{-1, -1, -1}; };
    }
    s.lapU_ = [](const Vec3&) { return Vec3{0, 0, 0}; };
    s.grad_lapU_ = [](const Vec3&) { return zero_mat(); };
    s.grad_rotU_ = [](const Vec3&) { return zero_mat(); };
    s.lap_rotU_ = [](const Vec3&) { return Vec3{0, 0, 0}; };
    s.P_ = [](const Vec3&) { return 0.0; };
    s.gradP_ = [](const Vec3&) { return Vec3{0, 0, 0}; };
    return s;
}

ManufacturedSolution ManufacturedSolution::zero(int dim) {
    ManufacturedSolution s = linear_in_space(dim, {});
    s.T_ = [](double, int) { return 0.0; };
    s.name_ = "zero";
    return s;
}

ManufacturedSolution ManufacturedSolution::pressure_bump(int dim, Vec3 center, double radius,
                                                         int power, double amp) {
    ManufacturedSolution s = zero(dim);
    s.name_ = "pressure_bump";
    RadialBump psi(dim, center, radius, power, amp);
    s.Tp_ = time_factor_one();
    s.P_ = [psi](const Vec3& x) { return psi.value(x); };
    s.gradP_ = [psi, dim](const Vec3& x) {
        Vec3 g{0, 0, 0};
        for (int a = 0; a < dim; ++a) g[a] = psi.d1(x, a);
        return g;
    };
    return s;
}

CoefficientFields CoefficientFields::zero(int dim) {
    CoefficientFields c;
    c.dim = dim;
    c.trivial = true;
    auto zv = [](const Vec3&, double, int) { return Vec3{0, 0, 0}; };
    auto zm = [](const Vec3&, double, int) { return zero_mat(); };
    c.A = zv;
    c.B = zv;
    c.rotB = zv;
    c.gradA = zm;
    c.gradB = zm;
    c.grad_rotB = zm;
    return c;
}

CoefficientFields CoefficientFields::constant_drift(int dim, Vec3 a, Mat9 b_jac) {
    CoefficientFields c = zero(dim);
    c.trivial = false;
    c.A = [a](const Vec3&, double, int k) { return k == 0 ? a : Vec3{0, 0, 0}; };
    c.B = [b_jac, dim](const Vec3& x, double, int k) {
        if (k != 0) return Vec3{0, 0, 0};
        Vec3 b{0, 0, 0};
        for (int cc = 0; cc < dim; ++cc)
            for (int aa = 0; aa < dim; ++aa) b[cc] += b_jac[cc * 3 + aa] * x[aa];
        return b;
    };
    c.gradB = [b_jac](const Vec3&, double, int k) { return k == 0 ? b_jac : zero_mat(); };
    c.rotB = [b_jac, dim](const Vec3&, double, int k) {
        if (k != 0) return Vec3{0, 0, 0};
        if (dim == 2) return Vec3{b_jac[1 * 3 + 0] - b_jac[0 * 3 + 1], 0, 0};
        return Vec3{b_jac[2 * 3 + 1] - b_jac[1 * 3 + 2], b_jac[0 * 3 + 2] - b_jac[2 * 3 + 0],
                    b_jac[1 * 3 + 0] - b_jac[0 * 3 + 1]};
    };
    return c;
}

CoefficientFields CoefficientFields::smooth_drift(int dim) {
    CoefficientFields c = zero(dim);
    c.trivial = false;
    const double pi = std::acos(-1.0);
    // time factor 1 + t/2 on A
    auto ga = [](double t, int k) { return k == 0 ? 1.0 + 0.5 * t : (k == 1 ? 0.5 : 0.0); };
    c.A = [ga, pi](const Vec3& x, double t, int k) {
        double g = ga(t, k);
        return Vec3{0.3 * g * std::sin(pi * x[0]) * std::cos(pi * x[1]),
                    0.2 * g * std::cos(pi * x[0]) * std::sin(pi * x[1]), 0};
    };
    c.gradA = [ga, pi](const Vec3& x, double t, int k) {
        double g = ga(t, k);
        Mat9 m = zero_mat();
        m[0 * 3 + 0] = 0.3 * g * pi * std::cos(pi * x[0]) * std::cos(pi * x[1]);
        m[0 * 3 + 1] = -0.3 * g * pi * std::sin(pi * x[0]) * std::sin(pi * x[1]);
        m[1 * 3 + 0] = -0.2 * g * pi * std::sin(pi * x[0]) * std::sin(pi * x[1]);
        m[1 * 3 + 1] = 0.2 * g * pi * std::cos(pi * x[0]) * std::cos(pi * x[1]);
        return m;
    };
    Mat9 bj = zero_mat();
    bj[0 * 3 + 1] = 0.25;
    bj[1 * 3 + 0] = -0.15;
    CoefficientFields affine = constant_drift(dim, {0, 0, 0}, bj);
    c.B = affine.B;
    c.gradB = affine.gradB;
    c.rotB = affine.rotB;
    return c;
}

Vec3 rot_of_transport(int dim, const Vec3& a, const Mat9& grad_a, const Mat9& grad_u,
                      const Vec3& rot_u, const Mat9& grad_rot_u) {
    if (dim == 2) {
        double term1 = a[0] * grad_rot_u[0 * 3 + 0] + a[1] * grad_rot_u[0 * 3 + 1];
        double term2 = 0;
        for (int m = 0; m < 2; ++m)
            term2 += grad_a[m * 3 + 0] * grad_u[1 * 3 + m] - grad_a[m * 3 + 1] * grad_u[0 * 3 + m];
        (void)rot_u;
        return Vec3{term1 + term2, 0, 0};
    }
    auto eps = [](int i, int j, int k) {
        if (i == j || j == k || i == k) return 0;
        if ((i == 0 && j == 1 && k == 2) || (i == 1 && j == 2 && k == 0) ||
            (i == 2 && j == 0 && k == 1))
            return 1;
        return -1;
    };
    Vec3 out{0, 0, 0};
    for (int i = 0; i < 3; ++i) {
        double t1 = 0;
        for (int l = 0; l < 3; ++l) t1 += a[l] * grad_rot_u[i * 3 + l];
        double t2 = 0;
        for (int j = 0; j < 3; ++j)
            for (int l = 0; l < 3; ++l)
                for (int m = 0; m < 3; ++m)
                    t2 += eps(i, l, m) * grad_a[j * 3 + l] * grad_u[m * 3 + j];
        out[i] = t1 + t2;
    }
    (void)rot_u;
    return out;
}

SpaceTimeField Forcing::sample_F(const Grid& g, const TimeAxis& t, int k) const {
    SpaceTimeField out(g, t, dim);
    for (int kk = 0; kk < t.slices(); ++kk)
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
            Vec3 val = F(g.coord(idx), t.time(kk), k);
            for (int c = 0; c < dim; ++c) out.at(kk, c, idx) = val[c];
        }
    return out;
}

SpaceTimeField Forcing::sample_rotF(const Grid& g, const TimeAxis& t, int k) const {
    SpaceTimeField out(g, t, rot_comps);
    for (int kk = 0; kk < t.slices(); ++kk)
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
            Vec3 val = rotF(g.coord(idx), t.time(kk), k);
            for (int c = 0; c < rot_comps; ++c) out.at(kk, c, idx) = val[c];
        }
    return out;
}

Forcing mms_forcing(const ManufacturedSolution& sol, const CoefficientFields& coeffs) {
    Forcing f;
    f.dim = sol.dim();
    f.rot_comps = sol.rot_comps();
    const int dim = sol.dim();
    auto binom = [](int k, int j) { return (k == 2 && j == 1) ? 2.0 : 1.0; };

    f.F = [sol, coeffs, dim, binom](const Vec3& x, double t, int k) {
        Vec3 out = sol.v(x, t, k + 1);
        Vec3 lap = sol.lap_v(x, t, k);
        for (int c = 0; c < dim; ++c) out[c] -= lap[c];
        if (!coeffs.trivial) {
            for (int j = 0; j <= k; ++j) {
                double bc = binom(k, j);
                Vec3 a = coeffs.A(x, t, j);
                Mat9 gv = sol.grad_v(x, t, k - j);
                Vec3 vv = sol.v(x, t, k - j);
                Mat9 gb = coeffs.gradB(x, t, j);
                for (int c = 0; c < dim; ++c) {
                    double adv = 0, vb = 0;
                    for (int m = 0; m < dim; ++m) {
                        adv += a[m] * gv[c * 3 + m];
                        vb += vv[m] * gb[c * 3 + m];
                    }
                    out[c] += bc * (adv + vb);
                }
            }
        }
        Vec3 gp = sol.grad_p(x, t, k);
        for (int c = 0; c < dim; ++c) out[c] += gp[c];
        return out;
    };

    f.rotF = [sol, coeffs, dim, binom](const Vec3& x, double t, int k) {
        int rc = dim == 2 ? 1 : 3;
        Vec3 out = sol.rot_v(x, t, k + 1);
        Vec3 lap = sol.lap_rot_v(x, t, k);
        for (int c = 0; c < rc; ++c) out[c] -= lap[c];
        if (!coeffs.trivial) {
            for (int j = 0; j <= k; ++j) {
                double bc = binom(k, j);
                Vec3 a = coeffs.A(x, t, j);
                Mat9 ga = coeffs.gradA(x, t, j);
                Vec3 adv = rot_of_transport(dim, a, ga, sol.grad_v(x, t, k - j),
                                            sol.rot_v(x, t, k - j), sol.grad_rot_v(x, t, k - j));
                Vec3 vv = sol.v(x, t, k - j);
                Mat9 gv = sol.grad_v(x, t, k - j);
                Vec3 vb = rot_of_transport(dim, vv, gv, coeffs.gradB(x, t, j),
                                           coeffs.rotB(x, t, j), coeffs.grad_rotB(x, t, j));
                for (int c = 0; c < rc; ++c) out[c] += bc * (adv[c] + vb[c]);
            }
        }
        return out;
    };
    return f;
}

}  // namespace nslab
