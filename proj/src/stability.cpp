#include "nslab/stability.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nslab/io.hpp"

namespace nslab {

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    if (n < 2) throw std::invalid_argument("fit_loglog: need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> lx(n), ly(n);
    for (int i = 0; i < n; ++i) {
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    SlopeFit f;
    double den = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / den;
    double intercept = (sy - f.slope * sx) / n;
    if (n > 2) {
        double ss = 0;
        for (int i = 0; i < n; ++i) {
            double r = ly[i] - (intercept + f.slope * lx[i]);
            ss += r * r;
        }
        double var = ss / (n - 2);
        double mean_x = sx / n, sxx_c = 0;
        for (int i = 0; i < n; ++i) sxx_c += (lx[i] - mean_x) * (lx[i] - mean_x);
        f.stderr_slope = std::sqrt(var / sxx_c);
    }
    return f;
}

StabilityStudy stability_sweep(const DomainSpec& dom, const ManufacturedSolution& truth,
                               const CoefficientFields& coeffs, const SweepConfig& cfg) {
    for (std::size_t i = 1; i < cfg.sigmas.size(); ++i)
        if (!(cfg.sigmas[i] < cfg.sigmas[i - 1]))
            throw std::invalid_argument("stability_sweep: noise levels must strictly decrease");
    if (cfg.sigmas.size() < 4)
        throw std::invalid_argument("stability_sweep: need at least four noise levels");
    if (cfg.seeds.size() < 3)
        throw std::invalid_argument("stability_sweep: need at least three seeds");

    StabilityStudy st;
    WeightProfile prof = build_weight_profile(dom);
    StabilityConstants consts = make_constants(dom, prof, cfg.mode, cfg.eps, cfg.lambda);
    WeightFunction weight(prof, cfg.mode, cfg.lambda, consts.beta, dom.taxis.t0(),
                          dom.taxis.delta());
    st.mu0 = consts.mu0;

    // empirical constant of the full estimate on this truth and weight
    Forcing forcing = mms_forcing(truth, coeffs);
    auto t1in = Theorem1Input::from_solution(truth, forcing, dom.grid, dom.taxis);
    CarlemanReport t1 = verify_theorem1(t1in, dom, weight, default_s_grid());
    st.C_emp = t1.C_hat;
    // the balance constant also carries the data-weight exponent scale
    st.C_used = t1.C_hat + 2.0 * (weight.max_phi(dom.grid) - consts.mu1);

    // reference window norm of the truth
    SpaceTimeField v_truth = truth.sample_v(dom.grid, dom.taxis, 0);
    double ref = std::sqrt(window_error(v_truth, dom, consts.eps_tilde).h11());
    if (ref == 0) throw std::invalid_argument("stability_sweep: trivial truth");

    CauchyDataset exact =
        generate_cauchy_data(truth, coeffs, dom, DataTier::D, 0.0, 0);
    st.M_bound = exact.bound_M;

    // the system matrix depends on (s, alpha) but not on the data values, so
    // one operator serves all seeds of a level; solutions warm-start the next
    QRProblem qp;
    qp.dom = dom;
    qp.weight = weight;
    qp.gamma_b = cfg.gamma_b;
    qp.coeffs = coeffs;
    qp.include_parabolic = true;

    std::vector<double> carry;
    double last_s = 1.0, last_alpha = cfg.alpha_floor;
    for (double sigma : cfg.sigmas) {
        StabilityLevel lv;
        lv.sigma = sigma;
        std::vector<CauchyDataset> datasets;
        for (std::uint64_t seed : cfg.seeds)
            datasets.push_back(generate_cauchy_data(truth, coeffs, dom, DataTier::D, sigma, seed));
        lv.data_size = datasets.front().noise_D;
        auto sel = select_s_and_theta(st.M_bound, lv.data_size, st.C_used, st.mu0);
        if (st.theta_pred == 0) st.theta_pred = sel.theta;
        lv.s_used = std::min(sel.s, cfg.s_max);
        double alpha = std::max(cfg.alpha_floor, cfg.alpha_scale * sigma);
        qp.s = lv.s_used;
        qp.alpha = alpha;
        qp.data = datasets.front();
        QRSystem sys = assemble_qr_system(qp);
        LsqOperator op(sys.A);
        for (std::size_t i = 0; i < datasets.size(); ++i) {
            qp.data = datasets[i];
            QRSystem s2 = i == 0 ? std::move(sys) : assemble_qr_system(qp);
            std::vector<double> x = carry;
            SolveStats stats = op.solve(s2.b, x, cfg.cg_tol, cfg.cg_max_iter);
            (void)stats;
            carry = x;
            // unpack the velocity block
            const std::size_t ns = s2.n_space;
            const std::size_t N = ns * s2.slices;
            SpaceTimeField vrec(dom.grid, dom.taxis, dom.dim());
            int rc = dom.dim() == 2 ? 1 : 3;
            for (int k = 0; k < s2.slices; ++k)
                for (std::size_t idx = 0; idx < ns; ++idx)
                    for (int c = 0; c < dom.dim(); ++c)
                        vrec.at(k, c, idx) = x[(rc + c) * N + k * ns + idx];
            SpaceTimeField diff = vrec - v_truth;
            lv.errors.push_back(std::sqrt(window_error(diff, dom, consts.eps_tilde).h11()) / ref);
        }
        double m = 0;
        for (double e : lv.errors) m += e;
        m /= lv.errors.size();
        double v = 0;
        for (double e : lv.errors) v += (e - m) * (e - m);
        lv.mean_err = m;
        lv.std_err = std::sqrt(v / lv.errors.size());
        last_s = lv.s_used;
        last_alpha = alpha;
        st.levels.push_back(lv);
    }

    if (cfg.include_floor_run) {
        qp.s = last_s;
        qp.alpha = last_alpha;
        qp.data = exact;
        QRSystem sys = assemble_qr_system(qp);
        std::vector<double> x = carry;
        ReconstructionResult rr = solve_qr(qp, sys, cfg.cg_tol, cfg.cg_max_iter, &x);
        SpaceTimeField diff = rr.v - v_truth;
        st.floor_error = std::sqrt(window_error(diff, dom, consts.eps_tilde).h11()) / ref;
    }

    // monotonicity within seed variance, in decreasing data size
    for (std::size_t i = 1; i < st.levels.size(); ++i) {
        double slack = std::max(st.levels[i - 1].std_err, st.levels[i].std_err);
        if (st.levels[i].mean_err > st.levels[i - 1].mean_err + slack + 1e-12)
            st.monotone_ok = false;
    }

    std::vector<double> ds, errs;
    for (const auto& lv : st.levels) {
        ds.push_back(lv.data_size);
        errs.push_back(lv.mean_err);
    }
    SlopeFit fit = fit_loglog(ds, errs);
    st.theta_hat = fit.slope;
    st.theta_se = fit.stderr_slope;
    return st;
}

void study_to_csv(const StabilityStudy& st, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"sigma", "data_size", "s_used", "mean_err", "std_err", "errors"});
    for (const auto& lv : st.levels) {
        std::string errs;
        for (std::size_t i = 0; i < lv.errors.size(); ++i) {
            if (i) errs += ";";
            errs += format_double(lv.errors[i]);
        }
        csv.row({format_double(lv.sigma), format_double(lv.data_size), format_double(lv.s_used),
                 format_double(lv.mean_err), format_double(lv.std_err), errs});
    }
}

nlohmann::json study_to_json(const StabilityStudy& st) {
    nlohmann::json j;
    j["theta_hat"] = st.theta_hat;
    j["theta_se"] = st.theta_se;
    j["theta_pred"] = st.theta_pred;
    j["C_used"] = st.C_used;
    j["C_emp"] = st.C_emp;
    j["mu0"] = st.mu0;
    j["M"] = st.M_bound;
    j["monotone_ok"] = st.monotone_ok;
    j["floor_error"] = st.floor_error;
    nlohmann::json lv = nlohmann::json::array();
    for (const auto& l : st.levels)
        lv.push_back({{"sigma", l.sigma},
                      {"data_size", l.data_size},
                      {"s_used", l.s_used},
                      {"mean_err", l.mean_err},
                      {"std_err", l.std_err}});
    j["levels"] = lv;
    return j;
}

}  // namespace nslab
