#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "nslab/constants.hpp"
#include "nslab/domain.hpp"
#include "nslab/weight.hpp"

using namespace nslab;

TEST_CASE("rect2d_right_edge: masks and invariants at 64x64") {
    DomainSpec d = build_domain("rect2d_right_edge", 64);
    CHECK(check_domain(d).empty());
    CHECK(d.dim() == 2);
    CHECK(d.omega.hi[0] == 1.0);
    CHECK(d.opening.center[0] == doctest::Approx(1.2));

    // every observed node is a boundary node on the x1 = 1 edge
    for (std::size_t idx : d.gamma_nodes()) {
        CHECK(d.grid.on_boundary(idx));
        CHECK(d.grid.coord(idx)[0] == doctest::Approx(1.0));
    }

    // recovery subdomain touches the boundary only inside the observed face
    for (std::size_t idx : d.omega0_nodes()) {
        if (d.grid.on_boundary(idx)) CHECK(d.node_in_gamma_interior(idx));
    }
}

TEST_CASE("all presets pass the domain invariants") {
    for (const char* p : {"rect2d_right_edge", "rect2d_corner"}) {
        DomainSpec d = build_domain(p, 32);
        CHECK(check_domain(d).empty());
    }
    DomainSpec d3 = build_domain("box3d_face", 16);
    CHECK(check_domain(d3).empty());
}

TEST_CASE("box3d_face: node counts track analytic volumes within a cell layer") {
    DomainSpec d = build_domain("box3d_face", 16);
    double h = d.grid.h(0);
    double vol = d.omega0_nodes().size() * h * h * h;
    double exact = 0.5 * 0.5 * 0.5;
    // bounding-surface layer of thickness h
    double surface = 2 * (0.5 * 0.5) * 3;
    CHECK(std::abs(vol - exact) <= surface * h + h * h);
}

TEST_CASE("unknown preset and coarse resolution are rejected") {
    CHECK_THROWS(build_domain("pentagon", 32));
    CHECK_THROWS(build_domain("rect2d_right_edge", 2));
    CHECK_THROWS(build_domain("rect2d_right_edge", 32, 7));  // t0 must fall on a slice
}

TEST_CASE("rle round-trips a mask") {
    std::vector<bool> m = {false, false, true, true, true, false, true};
    auto runs = rle_encode(m);
    // decode
    std::vector<bool> back;
    bool cur = false;
    for (std::size_t r : runs) {
        for (std::size_t i = 0; i < r; ++i) back.push_back(cur);
        cur = !cur;
    }
    CHECK(back == m);
}

TEST_CASE("domain serializes to json with masks") {
    DomainSpec d = build_domain("rect2d_right_edge", 16);
    auto j = domain_to_json(d);
    CHECK(j["preset"] == "rect2d_right_edge");
    CHECK(j["masks"].contains("gamma_rle"));
}

TEST_CASE("weight profile satisfies the profile requirements on the grid") {
    for (const char* p : {"rect2d_right_edge", "rect2d_corner"}) {
        DomainSpec d = build_domain(p, 48);
        WeightProfile prof = build_weight_profile(d);
        auto rep = validate_weight_profile(d.preset == "rect2d_corner"
                                               ? prof
                                               : WeightProfile(prof),
                                           d);
        CHECK(rep.ok);
        CHECK(rep.min_d_omega0 > 0);
        CHECK(rep.min_grad_norm_omega > 0);
        double tol = 10 * d.grid.h_max() * d.grid.h_max();
        CHECK(rep.max_d_on_rest_boundary <= tol);
        CHECK(rep.max_d_on_omega1_boundary <= tol);
    }
}

TEST_CASE("weight profile: 3d preset") {
    DomainSpec d = build_domain("box3d_face", 12);
    WeightProfile prof = build_weight_profile(d);
    auto rep = validate_weight_profile(prof, d);
    CHECK(rep.ok);
    CHECK(!rep.excluded_degenerate.empty());  // box edges are surfaced
}

TEST_CASE("profile peaks on the observed face and the opening holds the critical set") {
    DomainSpec d = build_domain("rect2d_right_edge", 64);
    WeightProfile prof = build_weight_profile(d);
    CHECK(prof.max_over_omega(d) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(prof.min_over_omega0(d) > 0.3);
    // gradient vanishes at the opening center and nowhere on the flow box
    Vec3 c = d.opening.center;
    Vec3 g = prof.grad_d(c);
    CHECK(std::abs(g[0]) < 1e-10);
    CHECK(std::abs(g[1]) < 1e-10);
    // observed-face nodes carry strictly positive profile values
    // observed-face nodes away from the shared corners carry positive values
    double dmin_gamma = 1e9;
    for (std::size_t idx : d.gamma_nodes())
        if (d.node_in_gamma_interior(idx))
            dmin_gamma = std::min(dmin_gamma, prof.d(d.grid.coord(idx)));
    CHECK(dmin_gamma > 0);
}

TEST_CASE("select_N_eps reproduces the worked example and the chain") {
    // psi values: d0^2 = 1, d1^2 = 4; margin 4 within a wide horizon
    auto sel = select_N_eps(4.0, 1.0, 4.0, 100.0);
    CHECK(sel.N == 5);
    CHECK(sel.eps_tilde == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sel.delta2 == doctest::Approx(5.0).epsilon(1e-12));
    CHECK((4.0 - 1.0) / (25.0 - 1.0) == doctest::Approx(0.125));
    CHECK(admissibility_chain_holds(1.0, 4.0, sel.eps_tilde, sel.delta2));

    // degenerate ratio: N = 2 is admissible
    auto sel2 = select_N_eps(1.0, 2.0, 2.0, 100.0);
    CHECK(sel2.N == 2);
    // delta2 = N eps_tilde > eps_tilde always
    CHECK(sel2.delta2 > sel2.eps_tilde);

    CHECK_THROWS_WITH_AS(select_N_eps(4.0, 1.0, 4.0, 9.0), doctest::Contains("eps too large"),
                         std::invalid_argument);
}

TEST_CASE("select_beta: continuation interval midpoint and snapshot rule") {
    StabilityConstants c;
    c.mode = PsiMode::ProfileSquared;
    c.d0 = 1.0;
    c.d1 = 4.0;
    c.eps_tilde = 1.0;
    c.delta2 = 5.0;
    auto bs = select_beta(c, BetaMode::Continuation, 1.0);
    CHECK(bs.interval_lo == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(bs.interval_hi == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bs.beta == doctest::Approx(0.5625).epsilon(1e-12));
    CHECK(bs.mu0 > 0);

    StabilityConstants c2;
    c2.eps1 = 0.5;
    auto bs2 = select_beta(c2, BetaMode::Snapshot, 1.0, 1.0, 2.0);
    CHECK(bs2.beta == doctest::Approx(2.25).epsilon(1e-12));
    CHECK(0.5 > 2.0 - bs2.beta * 1.0);  // strict weight gap
    CHECK(bs2.mu0 > 0);
}

TEST_CASE("compute_mu matches the worked arithmetic") {
    auto mu = compute_mu_continuation(1.0, 1.0, 4.0, 0.5, 1.0, 5.0);
    CHECK(mu.mu1 == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
    CHECK(mu.mu2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mu.mu0 == doctest::Approx(std::exp(0.5) - 1.0).epsilon(1e-9));
    CHECK(mu.mu0 == doctest::Approx(0.64872).epsilon(1e-4));

    // boundary case: snapshot floor exactly cancels -> rejected
    double lambda = 1.0;
    double eps1 = std::log(std::max(1.0, std::exp(lambda * (2.0 - 2.25)))) / lambda;  // = 0
    CHECK_THROWS(compute_mu_snapshot(lambda, eps1, 2.0, 2.25 / 1e9, 1e-9));

    // doubling lambda with fixed exponent signs increases the gap
    auto a = compute_mu_continuation(1.0, 1.0, 4.0, 0.5, 1.0, 5.0);
    auto b = compute_mu_continuation(2.0, 1.0, 4.0, 0.5, 1.0, 5.0);
    CHECK(b.mu0 > a.mu0);
}

TEST_CASE("eval of the space-time weight: symmetry, center, arithmetic") {
    auto w = WeightFunction::from_psi([](const Vec3& x) { return x[0]; }, 1.0, 0.5, 0.5, 0.25);
    Vec3 x{1.0, 0.2, 0};
    // quadratic term vanishes at the center time
    CHECK(w.phi(x, 0.5) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    // symmetric about t0
    CHECK(w.phi(x, 0.75) == doctest::Approx(w.phi(x, 0.25)).epsilon(1e-13));
    // worked value: lambda=1, psi=1, beta=0.5, |t-t0|=1
    auto w2 = WeightFunction::from_psi([](const Vec3&) { return 1.0; }, 1.0, 0.5, 0.0, 2.0);
    CHECK(w2.phi(x, 1.0) == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
    CHECK(w2.phi(x, 1.0) == doctest::Approx(1.64872).epsilon(1e-4));
    // strictly decreasing in |t - t0|, increasing in psi
    CHECK(w.phi(x, 0.6) > w.phi(x, 0.7));
    CHECK(w.phi({1.2, 0, 0}, 0.6) > w.phi({1.0, 0, 0}, 0.6));
}

TEST_CASE("select_s_and_theta: worked cases") {
    double C = 0.8, mu0 = 0.3;
    auto sel = select_s_and_theta(1.0, std::exp(-(C + mu0)), C, mu0);
    CHECK(sel.s == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(sel.small_data_case);

    auto sel2 = select_s_and_theta(1.0, 1.0, C, mu0);  // data equals the prior bound
    CHECK_FALSE(sel2.small_data_case);
    CHECK(sel2.s == 1.0);
    CHECK(sel2.predicted_bound == doctest::Approx(1.0));

    auto sel3 = select_s_and_theta(2.0, 0.5, 0.7, 0.7);
    CHECK(sel3.theta == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("theta lies in (0,1), decreasing in C, increasing in mu0") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.05, 5.0);
    for (int i = 0; i < 50; ++i) {
        double C = u(rng), mu0 = u(rng);
        auto sel = select_s_and_theta(1.0, 0.1, C, mu0);
        CHECK(sel.theta > 0.0);
        CHECK(sel.theta < 1.0);
        CHECK(select_s_and_theta(1.0, 0.1, C * 1.5, mu0).theta < sel.theta);
        CHECK(select_s_and_theta(1.0, 0.1, C, mu0 * 1.5).theta > sel.theta);
    }
}

TEST_CASE("randomized admissible tuples always give a positive weight gap") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    int tried = 0;
    while (tried < 100) {
        double d0 = u(rng);
        double d1 = d0 * (1.0 + u(rng));
        double eps = 0.5 * u(rng);
        NEpsSelection sel;
        try {
            sel = select_N_eps(eps, d0, d1, 1000.0);
        } catch (...) {
            continue;
        }
        ++tried;
        StabilityConstants c;
        c.d0 = d0;
        c.d1 = d1;
        c.eps_tilde = sel.eps_tilde;
        c.delta2 = sel.delta2;
        auto bs = select_beta(c, BetaMode::Continuation, 1.7);
        CHECK(bs.mu0 > 0);
    }
}

TEST_CASE("make_constants wires the pieces together for a preset") {
    DomainSpec d = build_domain("rect2d_right_edge", 32);
    WeightProfile prof = build_weight_profile(d);
    auto c = make_constants(d, prof, PsiMode::ProfileSquared, 0.06, 2.0);
    CHECK(c.d1 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(c.d0 > 0);
    CHECK(c.N > 1);
    CHECK(c.mu0 > 0);
    CHECK(c.delta2 < d.taxis.delta());
    auto j = constants_to_json(c);
    CHECK(j["mu0"].get<double>() > 0);
}
