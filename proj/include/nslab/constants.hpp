#pragma once

#include <nlohmann/json_fwd.hpp>

#include "nslab/weight.hpp"

namespace nslab {

/// The constants driving the conditional-stability machinery.
/// d0/d1 are extrema of psi (profile or its square, per mode).
struct StabilityConstants {
    PsiMode mode = PsiMode::ProfileSquared;
    double d0 = 0;        // min of psi over the recovery subdomain
    double d1 = 0;        // max of psi over the flow box
    int N = 0;
    double eps = 0;       // requested margin
    double eps_tilde = 0;
    double delta2 = 0;
    double eps1 = 0;      // weight floor on the recovery subdomain (snapshot route)
    double beta = 0;
    double mu1 = 0, mu2 = 0, mu0 = 0;
    double carleman_C = 0;   // empirical constant, filled by the verifiers
    double theta = 0;
};

struct NEpsSelection {
    int N;
    double eps_tilde;
    double delta2;
};

/// Smallest admissible integer N (> d1/d0 in the active mode), then the
/// nested margins eps_tilde = eps/(N-1) and delta2 = N eps_tilde.
/// Requires the resulting delta2 to fit inside the horizon: delta2 < T/2.
NEpsSelection select_N_eps(double eps, double d0, double d1, double horizon);

/// Strict-inequality chain that makes the beta interval nonempty.
bool admissibility_chain_holds(double d0, double d1, double eps_tilde, double delta2);

struct BetaSelection {
    double beta;
    double interval_lo = 0;  // continuation mode only
    double interval_hi = 0;
    double mu1 = 0, mu2 = 0, mu0 = 0;
};

enum class BetaMode { Continuation, Snapshot };

/// Continuation mode: beta at the midpoint of the admissible interval
/// ((d1-d0)/(delta2^2-eps_tilde^2), d0/eps_tilde^2) in the active psi values.
/// Snapshot mode: beta = 1.5 (||d|| - eps1)/delta^2 so the strict weight gap holds.
BetaSelection select_beta(const StabilityConstants& c, BetaMode mode, double lambda,
                          double delta = 0, double d_sup = 0);

struct MuValues {
    double mu1, mu2, mu0;
};

/// Continuation mode: mu1 = exp(lambda (d0 - beta eps_tilde^2)),
/// mu2 = max(1, exp(lambda (d1 - beta delta2^2))).
/// Snapshot mode: mu1 = exp(lambda eps1), mu2 = max(1, exp(lambda (||d|| - beta delta^2))).
/// Throws when the gap mu0 = mu1 - mu2 is not positive.
MuValues compute_mu_continuation(double lambda, double d0, double d1, double beta,
                                 double eps_tilde, double delta2);
MuValues compute_mu_snapshot(double lambda, double eps1, double d_sup, double beta, double delta);

struct SThetaSelection {
    double s;
    double theta;
    double predicted_bound;  // in squared-error units
    bool small_data_case;    // true when data < prior bound
};

/// Optimal large parameter balancing M^2 exp(-s mu0) against D^2 exp(C s):
/// s = 2 ln(M/D)/(C+mu0) when D < M, else s = 1 with an O(D^2) bound.
SThetaSelection select_s_and_theta(double M, double D, double C, double mu0);

/// Convenience: fill a StabilityConstants set for a domain/profile pair.
StabilityConstants make_constants(const DomainSpec& dom, const WeightProfile& prof, PsiMode mode,
                                  double eps, double lambda);

nlohmann::json constants_to_json(const StabilityConstants& c);

}  // namespace nslab
