#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nslab/domain.hpp"
#include "nslab/manufactured.hpp"

namespace nslab {

/// A forcing family with closed-form value/curl closures and, when the family
/// factors through a spatial profile, that profile for the recovery check.
struct SourceModel {
    std::string family;  // vector_potential | separated | matrix | gradient_obstruction
    int dim = 2;
    double t0 = 0.5;

    std::function<Vec3(const Vec3&, double, int)> F;     // k-th time derivative, k <= 2
    std::function<Vec3(const Vec3&, double, int)> rotF;  // k <= 2
    std::function<Vec3(const Vec3&)> F_t0;
    std::function<Mat9(const Vec3&)> gradF_t0;

    bool has_factor = false;               // separated / matrix families
    std::function<Vec3(const Vec3&)> factor;       // f(x)
    std::function<Mat9(const Vec3&)> grad_factor;  // grad f
    double r_t0 = 0;                       // separated
    double det_R_t0_min = 0;               // matrix (grid minimum)

    int rot_comps() const { return dim == 2 ? 1 : 3; }
};

/// Spatial choices for the divergence-free factor.
enum class FactorShape { TrigMode, StreamBump };

struct SourceParams {
    int dim = 2;
    double t0 = 0.5;
    FactorShape shape = FactorShape::StreamBump;
    Vec3 center{0.72, 0.5, 0.5};
    double radius = 0.22;
    int power = 6;
    double amp = 1.0;
    // separated family: r(t) polynomial coefficients
    std::vector<double> r_coeffs{1.0, 0.5, 0.25};
    // matrix family
    double kappa = 1.0;   // exponential scalar factor
    double trig_eps = 0;  // when nonzero, R = (I + tau S(x)) exp(kappa tau)
    double det_floor = 0.1;
    // vector potential
    std::vector<double> q_coeffs{1.0, 0.4};
};

/// Families: "vector_potential", "separated", "matrix", "gradient_obstruction".
SourceModel build_source(const std::string& family, const SourceParams& params,
                         const DomainSpec& dom);

/// The manufactured solution whose induced forcing is exactly this source.
/// Available for the separated family (trig factor) and the exponential matrix
/// family (stream factor); throws otherwise.
ManufacturedSolution solution_for_source(const SourceModel& src, const SourceParams& params);

struct ConditionEntry {
    std::string name;
    double constant = 0;            // smallest observed majorant constant
    bool finite = true;
    bool vacuous = false;           // numerator vanished everywhere
    bool pass = false;
    std::vector<std::size_t> offending_nodes;  // where denominator vanished
};

struct ConditionReport {
    double div_F_t0_max = 0;         // grid max of |div F(.,t0)|
    bool div_free_t0 = false;
    ConditionEntry rot_majorant;       // |dt^k rot F| <= C |rot F(t0)|, k<=1
    ConditionEntry grad_majorant_k2;   // |dt^k rot F| <= C(|grad F(t0)|+|F(t0)|), k<=2
    ConditionEntry grad_majorant_k1;   // same with k<=1
    std::optional<ConditionEntry> factor_recovery;  // |grad f|+|f| <= C(|grad F(t0)|+|F(t0)|)

    /// finite constant for the stronger condition implies one for the weaker
    bool implication_chain_holds() const;
};

struct ConditionOptions {
    double c_max = std::numeric_limits<double>::infinity();
    double div_tol = 1e-8;
};

ConditionReport check_conditions(const SourceModel& src, const DomainSpec& dom,
                                 const ConditionOptions& opt = {});

nlohmann::json condition_report_to_json(const ConditionReport& rep);

}  // namespace nslab
