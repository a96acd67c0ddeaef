#include "nslab/constants.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace nslab {

NEpsSelection select_N_eps(double eps, double d0, double d1, double horizon) {
    if (eps <= 0) throw std::invalid_argument("select_N_eps: eps must be positive");
    if (d0 <= 0 || d1 < d0) throw std::invalid_argument("select_N_eps: need 0 < d0 <= d1");
    double ratio = d1 / d0;
    int N = static_cast<int>(std::floor(ratio)) + 1;  // smallest integer strictly above
    if (N < 2) N = 2;
    double eps_tilde = eps / (N - 1);
    double delta2 = N * eps_tilde;
    if (!(delta2 < horizon - delta2))
        throw std::invalid_argument("select_N_eps: eps too large for horizon T");
    if (!admissibility_chain_holds(d0, d1, eps_tilde, delta2))
        throw std::logic_error("select_N_eps: admissibility chain failed");
    return {N, eps_tilde, delta2};
}

bool admissibility_chain_holds(double d0, double d1, double eps_tilde, double delta2) {
    return (d1 - d0) / (delta2 * delta2 - eps_tilde * eps_tilde) <
           d0 / (eps_tilde * eps_tilde) + 1e-15;
}

BetaSelection select_beta(const StabilityConstants& c, BetaMode mode, double lambda,
                          double delta, double d_sup) {
    BetaSelection out{};
    if (mode == BetaMode::Continuation) {
        double lo = (c.d1 - c.d0) / (c.delta2 * c.delta2 - c.eps_tilde * c.eps_tilde);
        double hi = c.d0 / (c.eps_tilde * c.eps_tilde);
        if (!(lo < hi)) throw std::invalid_argument("select_beta: empty interval");
        out.interval_lo = lo;
        out.interval_hi = hi;
        out.beta = 0.5 * (lo + hi);
        MuValues mu = compute_mu_continuation(lambda, c.d0, c.d1, out.beta, c.eps_tilde, c.delta2);
        out.mu1 = mu.mu1;
        out.mu2 = mu.mu2;
        out.mu0 = mu.mu0;
    } else {
        if (delta <= 0) throw std::invalid_argument("select_beta: snapshot mode needs delta");
        out.beta = 1.5 * (d_sup - c.eps1) / (delta * delta);
        if (out.beta <= 0) out.beta = 1.0 / (delta * delta);
        MuValues mu = compute_mu_snapshot(lambda, c.eps1, d_sup, out.beta, delta);
        out.mu1 = mu.mu1;
        out.mu2 = mu.mu2;
        out.mu0 = mu.mu0;
    }
    return out;
}

MuValues compute_mu_continuation(double lambda, double d0, double d1, double beta,
                                 double eps_tilde, double delta2) {
    MuValues m{};
    m.mu1 = std::exp(lambda * (d0 - beta * eps_tilde * eps_tilde));
    m.mu2 = std::max(1.0, std::exp(lambda * (d1 - beta * delta2 * delta2)));
    m.mu0 = m.mu1 - m.mu2;
    if (m.mu0 <= 0)
        throw std::invalid_argument("compute_mu: inconsistent parameter set (mu0 <= 0)");
    return m;
}

MuValues compute_mu_snapshot(double lambda, double eps1, double d_sup, double beta, double delta) {
    MuValues m{};
    m.mu1 = std::exp(lambda * eps1);
    m.mu2 = std::max(1.0, std::exp(lambda * (d_sup - beta * delta * delta)));
    m.mu0 = m.mu1 - m.mu2;
    if (m.mu0 <= 0)
        throw std::invalid_argument("compute_mu: inconsistent parameter set (mu0 <= 0)");
    return m;
}

SThetaSelection select_s_and_theta(double M, double D, double C, double mu0) {
    if (M <= 0 || D < 0 || C <= 0 || mu0 <= 0)
        throw std::invalid_argument("select_s_and_theta: positive inputs required");
    SThetaSelection out{};
    out.theta = mu0 / (C + mu0);
    if (D > 0 && D < M) {
        out.small_data_case = true;
        out.s = 2.0 / (C + mu0) * std::log(M / D);
        out.predicted_bound =
            2.0 * std::pow(M, 2.0 * C / (C + mu0)) * std::pow(D, 2.0 * out.theta);
    } else {
        out.small_data_case = false;
        out.s = 1.0;
        out.predicted_bound = D * D;
    }
    return out;
}

StabilityConstants make_constants(const DomainSpec& dom, const WeightProfile& prof, PsiMode mode,
                                  double eps, double lambda) {
    StabilityConstants c;
    c.mode = mode;
    double dmin = prof.min_over_omega0(dom);
    double dmax = prof.max_over_omega(dom);
    if (mode == PsiMode::ProfileSquared) {
        c.d0 = dmin * dmin;
        c.d1 = dmax * dmax;
    } else {
        c.d0 = dmin;
        c.d1 = dmax;
    }
    c.eps = eps;
    double horizon = 2.0 * dom.taxis.delta();
    auto sel = select_N_eps(eps, c.d0, c.d1, horizon);
    c.N = sel.N;
    c.eps_tilde = sel.eps_tilde;
    c.delta2 = sel.delta2;
    c.eps1 = 0.9 * dmin;
    auto bs = select_beta(c, BetaMode::Continuation, lambda);
    c.beta = bs.beta;
    c.mu1 = bs.mu1;
    c.mu2 = bs.mu2;
    c.mu0 = bs.mu0;
    return c;
}

nlohmann::json constants_to_json(const StabilityConstants& c) {
    nlohmann::json j;
    j["psi_mode"] = to_string(c.mode);
    j["d0"] = c.d0;
    j["d1"] = c.d1;
    j["N"] = c.N;
    j["eps"] = c.eps;
    j["eps_tilde"] = c.eps_tilde;
    j["delta2"] = c.delta2;
    j["eps1"] = c.eps1;
    j["beta"] = c.beta;
    j["mu1"] = c.mu1;
    j["mu2"] = c.mu2;
    j["mu0"] = c.mu0;
    j["carleman_C"] = c.carleman_C;
    j["theta"] = c.theta;
    return j;
}

}  // namespace nslab
