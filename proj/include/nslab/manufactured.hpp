#pragma once

#include <functional>
#include <memory>
#include <string>

#include "nslab/fields.hpp"
#include "nslab/grid.hpp"

namespace nslab {

/// Row-major small matrix closure payload: m[c * 3 + a] = d_a (component c).
using Mat9 = std::array<double, 9>;

/// Compactly supported radial polynomial amp * (1 - |x-c|^2 / r^2)^power with
/// closed-form partial derivatives up to total order four.
class RadialBump {
public:
    RadialBump() = default;
    RadialBump(int dim, Vec3 center, double radius, int power, double amp = 1.0);

    int dim() const { return dim_; }
    double value(const Vec3& x) const;
    double d1(const Vec3& x, int i) const;
    double d2(const Vec3& x, int i, int j) const;
    double d3(const Vec3& x, int i, int j, int k) const;
    double d4(const Vec3& x, int i, int j, int k, int l) const;

    double laplacian(const Vec3& x) const;
    double d_laplacian(const Vec3& x, int i) const;    // third derivatives
    double bilaplacian(const Vec3& x) const;           // fourth derivatives

    const Vec3& center() const { return center_; }
    double radius() const { return radius_; }

private:
    double p_deriv(double u, int k) const;  // d^k/du^k of amp (1-u)^power on u<1
    int dim_ = 2;
    Vec3 center_{0.5, 0.5, 0};
    double radius_ = 0.3;
    int power_ = 5;
    double amp_ = 1.0;
};

/// Smooth scalar factor of a separable solution, with derivatives 0..4.
using TimeFactor = std::function<double(double, int)>;

TimeFactor time_factor_exp(double rate);                    // exp(rate * t)
TimeFactor time_factor_poly(std::vector<double> coeffs);    // sum c_k t^k
TimeFactor time_factor_one();

/// Divergence-free manufactured solution v = T(t) U(x) with pressure
/// p = Tp(t) P(x); all spatial derivative closures are exact.
class ManufacturedSolution {
public:
    int dim() const { return dim_; }
    int rot_comps() const { return dim_ == 2 ? 1 : 3; }
    const std::string& name() const { return name_; }

    /// kth time derivative of v (k <= 4).
    Vec3 v(const Vec3& x, double t, int k = 0) const;
    Mat9 grad_v(const Vec3& x, double t, int k = 0) const;
    Vec3 lap_v(const Vec3& x, double t, int k = 0) const;
    Mat9 grad_lap_v(const Vec3& x, double t, int k = 0) const;
    /// rot v; 2D value in component 0.
    Vec3 rot_v(const Vec3& x, double t, int k = 0) const;
    Mat9 grad_rot_v(const Vec3& x, double t, int k = 0) const;
    Vec3 lap_rot_v(const Vec3& x, double t, int k = 0) const;

    double p(const Vec3& x, double t) const;
    Vec3 grad_p(const Vec3& x, double t, int k = 0) const;

    /// Samples over a cylinder (components = dim for v, rot_comps for rot v).
    SpaceTimeField sample_v(const Grid& g, const TimeAxis& t, int k = 0) const;
    SpaceTimeField sample_rot_v(const Grid& g, const TimeAxis& t, int k = 0) const;

    // factories
    static ManufacturedSolution taylor_green(double amp = 1.0);
    /// Same spatial mode with a polynomial time factor; induces a separated
    /// forcing r(t) U(x) with r = rho' + 2 rho.
    static ManufacturedSolution separated_eigenmode(std::vector<double> rho_coeffs,
                                                    double amp = 1.0);
    /// v = exp(rate (t - t_ref)) rot(chi) with a compactly supported
    /// streamfunction bump; induces a matrix-factored forcing.
    static ManufacturedSolution stream_bump(int dim, Vec3 center, double radius, int power,
                                            double rate, double t_ref, double amp = 1.0);
    /// Space-linear divergence-free field times a polynomial in t (exact on grids).
    static ManufacturedSolution linear_in_space(int dim, std::vector<double> g_coeffs);
    static ManufacturedSolution zero(int dim);
    /// v = 0 with a compactly supported pressure bump (scalar-potential forcing).
    static ManufacturedSolution pressure_bump(int dim, Vec3 center, double radius, int power,
                                              double amp = 1.0);

private:
    int dim_ = 2;
    std::string name_;
    TimeFactor T_;       // velocity time factor
    TimeFactor Tp_;      // pressure time factor
    // spatial closures
    std::function<Vec3(const Vec3&)> U_, lapU_, rotU_, lap_rotU_;
    std::function<Mat9(const Vec3&)> gradU_, grad_rotU_, grad_lapU_;
    std::function<double(const Vec3&)> P_;
    std::function<Vec3(const Vec3&)> gradP_;
};

/// Coefficient fields of the drift terms, with the derivative closures the
/// forcing assembly needs. Constant / affine variants keep curls exact.
struct CoefficientFields {
    int dim = 2;
    bool trivial = true;  // both drifts identically zero
    std::function<Vec3(const Vec3&, double, int)> A;        // k-th time derivative
    std::function<Mat9(const Vec3&, double, int)> gradA;
    std::function<Vec3(const Vec3&, double, int)> B;
    std::function<Mat9(const Vec3&, double, int)> gradB;
    std::function<Vec3(const Vec3&, double, int)> rotB;     // rot of B
    std::function<Mat9(const Vec3&, double, int)> grad_rotB;

    static CoefficientFields zero(int dim);
    /// A constant, B affine (constant jacobian), both with zero time variation.
    static CoefficientFields constant_drift(int dim, Vec3 a, Mat9 b_jacobian);
    /// Trig-modulated A with a mild polynomial time factor; B affine.
    static CoefficientFields smooth_drift(int dim);
};

/// Forcing induced by a manufactured solution in the linearized momentum
/// balance, with curls up to second time derivatives.
struct Forcing {
    int dim = 2;
    int rot_comps = 1;
    std::function<Vec3(const Vec3&, double, int)> F;     // k <= 2
    std::function<Vec3(const Vec3&, double, int)> rotF;  // k <= 2

    SpaceTimeField sample_F(const Grid& g, const TimeAxis& t, int k = 0) const;
    SpaceTimeField sample_rotF(const Grid& g, const TimeAxis& t, int k = 0) const;
};

Forcing mms_forcing(const ManufacturedSolution& sol, const CoefficientFields& coeffs);

/// rot((a . grad) u) from closures; used by the forcing assembly and the
/// reconstruction coupling.
Vec3 rot_of_transport(int dim, const Vec3& a, const Mat9& grad_a, const Mat9& grad_u,
                      const Vec3& rot_u, const Mat9& grad_rot_u);

}  // namespace nslab
