#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nslab/domain.hpp"
#include "nslab/fields.hpp"

namespace nslab {

/// Monotone C2 reparametrization of one axis: xi(0)=0, xi(L)=L, xi(xc)=L/2,
/// built from a smoothstep-blended slope so the downstream product profile
/// puts its critical point at xc (inside the opening) with an exact gradient.
class AxisMap {
public:
    AxisMap() = default;
    AxisMap(double length, double critical_x, double window_lo, double window_hi);

    double value(double x) const;
    double slope(double x) const;
    double length() const { return length_; }

private:
    double length_ = 1.4;
    double wa_ = 1.05, wb_ = 1.35;
    double base_ = 1.0, gain_ = 0.0;  // slope = base + gain * smoothstep
};

/// Closed-form spatial profile of the weight: d > 0 inside the enlarged box,
/// d = 0 on its boundary, gradient nonvanishing away from the opening.
class WeightProfile {
public:
    double d(const Vec3& x) const { return d_(x); }
    Vec3 grad_d(const Vec3& x) const { return grad_(x); }

    double scale() const { return scale_; }
    const std::string& preset() const { return preset_; }

    /// Profile min over the recovery-subdomain nodes and max over the flow-box nodes.
    double min_over_omega0(const DomainSpec& dom) const;
    double max_over_omega(const DomainSpec& dom) const;
    double max_over_omega1(const DomainSpec& dom) const;

    static WeightProfile build(const DomainSpec& dom, double amplitude = 1.0);

    /// Custom profile (tests / auxiliary weights).
    static WeightProfile custom(std::function<double(const Vec3&)> d,
                                std::function<Vec3(const Vec3&)> grad);

private:
    std::function<double(const Vec3&)> d_;
    std::function<Vec3(const Vec3&)> grad_;
    double scale_ = 1.0;
    std::string preset_;
};

struct ProfileCheckReport {
    bool ok = true;
    std::vector<std::size_t> gradient_violations;   // nodes of the flow box
    std::vector<std::size_t> excluded_degenerate;   // surfaced but not counted
    double min_grad_norm_omega = 0;                 // over checked flow-box nodes
    double min_d_omega0 = 0;
    double max_d_on_rest_boundary = 0;              // should vanish (within tol)
    double max_d_on_omega1_boundary = 0;
    double min_d_omega1_interior = 0;
    double min_grad_norm_omega1_minus_opening = 0;
    std::string note;
};

/// Grid verification of the profile requirements on the flow box and the
/// enlarged box; tolerance for boundary vanishing defaults to 10 h^2.
ProfileCheckReport validate_weight_profile(const WeightProfile& p, const DomainSpec& dom,
                                           double boundary_tol_factor = 10.0);

/// Builds the preset profile and throws if the grid checks fail.
WeightProfile build_weight_profile(const DomainSpec& dom, double amplitude = 1.0);

enum class PsiMode { Profile, ProfileSquared };

std::string to_string(PsiMode m);

/// Space-time weight phi(x,t) = exp(lambda (psi(x) - beta (t-t0)^2)).
class WeightFunction {
public:
    WeightFunction() = default;
    WeightFunction(WeightProfile profile, PsiMode mode, double lambda, double beta,
                   double t0, double delta);

    /// Bare-psi construction for tests and auxiliary weights.
    static WeightFunction from_psi(std::function<double(const Vec3&)> psi, double lambda,
                                   double beta, double t0, double delta);

    double psi(const Vec3& x) const;
    double phi(const Vec3& x, double t) const;
    double lambda() const { return lambda_; }
    double beta() const { return beta_; }
    double t0() const { return t0_; }
    double delta() const { return delta_; }
    PsiMode mode() const { return mode_; }
    const WeightProfile& profile() const { return profile_; }

    /// Max of phi over the nodes of a grid at t = t0 (the in-time maximum).
    double max_phi(const Grid& g) const;

    Field sample_phi(const Grid& g, double t) const;

private:
    WeightProfile profile_;
    std::function<double(const Vec3&)> psi_;
    PsiMode mode_ = PsiMode::ProfileSquared;
    double lambda_ = 2.0, beta_ = 1.0, t0_ = 0.5, delta_ = 0.25;
};

nlohmann::json weight_to_json(const WeightFunction& w, const DomainSpec& dom);

/// Static elliptic weight phi0 = exp(lambda eta) on nested boxes, with eta the
/// profile of the enclosing geometry (used by the divergence-form estimate).
struct EllipticWeight {
    WeightProfile eta;
    double lambda = 2.0;
    BoxRegion inner;   // estimate domain E
    BoxRegion outer;   // enlarged domain containing E
    BallRegion opening;

    double phi0(const Vec3& x) const { return std::exp(lambda * eta.d(x)); }
};

EllipticWeight build_elliptic_weight(const DomainSpec& dom, double lambda);

/// Grid check of the nested-domain weight requirements.
ProfileCheckReport validate_elliptic_weight(const EllipticWeight& w, const DomainSpec& dom);

}  // namespace nslab
