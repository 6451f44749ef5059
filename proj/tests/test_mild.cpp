#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "rslab/mild.hpp"

using namespace rslab;

TEST_CASE("NonlinearitySpec: validation") {
    CHECK_THROWS_AS(NonlinearitySpec::scalar(0.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(NonlinearitySpec::scalar(-3.0, 0.0, 2.0), std::domain_error);
    CHECK_THROWS_AS(NonlinearitySpec::scalar(0.1, 0.0, 2.0), std::domain_error);
    CHECK_THROWS_AS(NonlinearitySpec::system(0.0, 0.0, 1.0, 1.0), std::domain_error);
    CHECK_NOTHROW(NonlinearitySpec::scalar(-0.5, -0.2, 2.0));
    CHECK_NOTHROW(NonlinearitySpec::system(0.0, 0.0, 3.0, 1.0));
}

TEST_CASE("admissible_q") {
    // N=1, r=1.5, p=3: 1/q = 0.5(2/3 - 1/3) = 1/6
    CHECK(admissible_q(1, 1.5, 3.0) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(admissible_q(1, 2.0, 4.0) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK_THROWS_AS(admissible_q(1, 2.0, 2.0), std::domain_error);
    CHECK_THROWS_AS(admissible_q(1, 1.0, 3.0), std::domain_error);
    // N=2, r=1.1: upper bound p < Nr/(N-2r)_+ finite? N-2r = -0.2 <= 0, no cap
    CHECK_NOTHROW(admissible_q(2, 1.1, 50.0));
}

TEST_CASE("admissible_q: 1/q < 1 exactly when p < N r/(N-2r)_+ (random property)") {
    std::mt19937 rng(7321u);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const int dim = 1 + int(uni(rng) * 3.999);
        const double r = 1.0 + 3.0 * uni(rng) + 1e-6;
        const double p = r + 6.0 * uni(rng) + 1e-6;
        const double cap = (dim - 2.0 * r) > 0.0 ? dim * r / (dim - 2.0 * r)
                                                 : std::numeric_limits<double>::infinity();
        bool threw = false;
        double q = 0.0;
        try {
            q = admissible_q(dim, r, p);
        } catch (const std::domain_error&) {
            threw = true;
        }
        CHECK(threw == !(p < cap));
        if (!threw) CHECK(1.0 / q < 1.0);
    }
}

TEST_CASE("duhamel_evolve: zero data stays zero and Global") {
    Grid g(1, 64, 10.0);
    auto nl = NonlinearitySpec::scalar(0.0, 0.0, 2.0);
    auto mesh = TimeMesh::uniform(1.0, 32);
    EvolveOptions opt;
    opt.blow_threshold = 1.0;  // zero initial norm would give a zero threshold
    auto rec = duhamel_evolve(Field::zero(g), FracParams(0.5, 1.0), nl, mesh, 2.0, 4.0, opt);
    CHECK(rec.status == EvolutionStatus::Global);
    for (double n : rec.norms_r) CHECK(n == 0.0);
}

TEST_CASE("duhamel_evolve: linear cut equals the propagator") {
    Grid g(1, 128, 15.0);
    FracParams prm(0.5, 1.0);
    auto u0 = make_gaussian(g, 1.0, 1.0);
    auto mesh = TimeMesh::uniform(2.0, 64);
    auto nl = NonlinearitySpec::scalar(0.0, 0.0, 2.0);
    EvolveOptions opt;
    opt.source_enabled = false;
    opt.store_snapshots = true;
    auto rec = duhamel_evolve(u0, prm, nl, mesh, 2.0, 4.0, opt);
    REQUIRE(rec.status == EvolutionStatus::Global);
    REQUIRE(rec.snapshots.size() == mesh.size());

    SpectralPropagator prop(g, prm, mesh);
    for (std::size_t n : {std::size_t(1), std::size_t(32), mesh.size() - 1}) {
        auto lin = prop.apply_at_node(u0, n);
        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < lin.values.size(); ++i) {
            diff = std::max(diff, std::abs(lin.values[i] - rec.snapshots[n].values[i]));
            scale = std::max(scale, std::abs(lin.values[i]));
        }
        CHECK(diff <= 1e-12 * scale);
    }
}

TEST_CASE("duhamel_evolve: classical heat blow-up with two-sided oracle") {
    // rho=2, k=0, N=1: spatially uniform ODE supersolution U' = U^2 from
    // max u0 bounds the blow-up time from below; Kaplan's eigenfunction
    // functional on a ball bounds it from above.
    Grid g(1, 256, 20.0);
    FracParams heat(0.5, 0.0);
    const double amp = 4.0, width = 1.0;
    auto u0 = make_gaussian(g, amp, width);
    auto nl = NonlinearitySpec::scalar(0.0, 0.0, 2.0);
    auto mesh = TimeMesh::uniform(1.0, 512);
    auto rec = duhamel_evolve(u0, heat, nl, mesh, 2.0, 4.0);
    REQUIRE(rec.status == EvolutionStatus::BlewUp);
    CHECK(rec.norms_r.back() >= rec.blow_threshold);  // record invariant

    const double t_lower = 1.0 / amp;  // U = A/(1-At) reaches any level just below 1/A
    CHECK(rec.t_blow >= 0.9 * t_lower);

    // Kaplan: I(t) = int u phi with phi the principal Dirichlet eigenfunction
    // of (-R_K, R_K), normalized to unit mass; I' >= I^2 - lambda1 I.
    const double R_K = 3.0;
    const double lambda1 = std::pow(std::numbers::pi / (2.0 * R_K), 2);
    double I0 = 0.0;
    for (std::size_t i = 0; i < u0.values.size(); ++i) {
        const double x = g.point(i)[0];
        if (std::abs(x) < R_K)
            I0 += u0.values[i] * std::cos(std::numbers::pi * x / (2.0 * R_K));
    }
    I0 *= g.cell_volume() * std::numbers::pi / (4.0 * R_K);
    REQUIRE(I0 > lambda1);
    const double t_upper = std::log(I0 / (I0 - lambda1)) / lambda1;
    CHECK(rec.t_blow <= 1.1 * t_upper + 2.0 * (mesh[1] - mesh[0]));
}

TEST_CASE("duhamel_evolve: status stable under mesh doubling") {
    Grid g(1, 256, 20.0);
    FracParams prm(0.5, 1.0);
    auto u0 = make_gaussian(g, 4.0, 1.0);
    auto nl = NonlinearitySpec::scalar(0.0, 0.0, 2.0);
    auto coarse = duhamel_evolve(u0, prm, nl, TimeMesh::uniform(2.0, 256), 2.0, 4.0);
    auto fine = duhamel_evolve(u0, prm, nl, TimeMesh::uniform(2.0, 512), 2.0, 4.0);
    CHECK(coarse.status == fine.status);
    if (coarse.status == EvolutionStatus::BlewUp)
        CHECK(std::abs(coarse.t_blow - fine.t_blow) <= 0.2 * fine.t_blow);
}

TEST_CASE("duhamel_evolve: monotone in the data") {
    Grid g(1, 128, 15.0);
    FracParams prm(0.3, 1.0);
    auto nl = NonlinearitySpec::scalar(0.0, 0.0, 2.0);
    auto mesh = TimeMesh::uniform(1.0, 128);
    auto lo = duhamel_evolve(make_gaussian(g, 0.5, 1.0), prm, nl, mesh, 2.0, 4.0);
    auto hi = duhamel_evolve(make_gaussian(g, 0.6, 1.0), prm, nl, mesh, 2.0, 4.0);
    REQUIRE(lo.status == EvolutionStatus::Global);
    REQUIRE(hi.status == EvolutionStatus::Global);
    for (std::size_t n = 0; n < mesh.size(); ++n)
        CHECK(lo.norms_r[n] <= hi.norms_r[n] + 1e-8);
}

TEST_CASE("duhamel_evolve: spectral ringing on sharp data raises PositivityViolation") {
    // an indicator is not resolvable spectrally: its evolved interpolant
    // dips below -1e-6 * max, which must be reported as discretization
    // breakdown rather than blow-up
    Grid g(1, 128, 10.0);
    auto u0 = make_indicator(g, 2.0);
    auto nl = NonlinearitySpec::scalar(0.0, 0.0, 2.0);
    auto mesh = TimeMesh::uniform(0.5, 64);
    CHECK_THROWS_AS(duhamel_evolve(u0, FracParams(0.5, 1.0), nl, mesh, 2.0, 4.0),
                    PositivityViolation);
}

TEST_CASE("duhamel_evolve: t^gamma weight with a graded-singularity panel") {
    // gamma < 0: the first-panel weight integrates s^gamma exactly; the run
    // must stay finite and positive
    Grid g(1, 128, 15.0);
    FracParams prm(0.5, 1.0);
    auto nl = NonlinearitySpec::scalar(-0.5, -0.25, 2.0);
    auto mesh = TimeMesh::uniform(1.0, 128);
    auto rec = duhamel_evolve(make_gaussian(g, 0.3, 1.0), prm, nl, mesh, 2.0, 4.0);
    CHECK(rec.status == EvolutionStatus::Global);
    for (double n : rec.norms_r) CHECK(std::isfinite(n));
}

TEST_CASE("duhamel_evolve_system") {
    Grid g(1, 128, 15.0);
    FracParams prm(0.5, 1.0);
    auto mesh = TimeMesh::uniform(1.0, 128);

    SUBCASE("zero data -> both zero, Global") {
        auto nl = NonlinearitySpec::system(0.0, 0.0, 3.0, 1.0);
        EvolveOptions opt;
        opt.blow_threshold = 1.0;
        auto rec = duhamel_evolve_system(Field::zero(g), Field::zero(g), prm, nl, mesh, 2.0,
                                         4.0, opt);
        CHECK(rec.status == EvolutionStatus::Global);
        for (double n : rec.norms_r) CHECK(n == 0.0);
    }

    SUBCASE("symmetric reduction: rho1 = rho2, u0 = v0 matches the scalar run") {
        auto nls = NonlinearitySpec::system(0.0, 0.0, 2.5, 2.5);
        auto nl = NonlinearitySpec::scalar(0.0, 0.0, 2.5);
        auto u0 = make_gaussian(g, 0.4, 1.0);
        EvolveOptions opt;
        opt.store_snapshots = true;
        auto sys = duhamel_evolve_system(u0, u0, prm, nls, mesh, 2.0, 4.0, opt);
        auto sca = duhamel_evolve(u0, prm, nl, mesh, 2.0, 4.0, opt);
        REQUIRE(sys.nodes_marched == sca.nodes_marched);
        std::size_t mismatches = 0;
        for (std::size_t n = 0; n < sys.nodes_marched; ++n) {
            // components identical to each other (same code path, bitwise) ...
            for (std::size_t i = 0; i < g.total_points(); ++i)
                if (sys.snapshots[n].values[i] != sys.snapshots_v[n].values[i]) ++mismatches;
            // ... and matching the scalar run within the implicit-solver
            // tolerance accumulated over the march
            CHECK(sys.norms_r[n] == doctest::Approx(sca.norms_r[n]).epsilon(1e-7));
        }
        CHECK(mismatches == 0);
    }

    SUBCASE("subcritical product blows up, stable across resolutions") {
        auto nl = NonlinearitySpec::system(0.0, 0.0, 3.0, 1.0);  // product 3 < curve 9
        auto u0 = make_gaussian(g, 1.5, 1.0);
        auto coarse =
            duhamel_evolve_system(u0, u0, prm, nl, TimeMesh::uniform(4.0, 256), 2.0, 4.0);
        auto fine =
            duhamel_evolve_system(u0, u0, prm, nl, TimeMesh::uniform(4.0, 512), 2.0, 4.0);
        CHECK(coarse.status == EvolutionStatus::BlewUp);
        CHECK(fine.status == EvolutionStatus::BlewUp);
        CHECK(std::abs(coarse.t_blow - fine.t_blow) <= 0.2 * fine.t_blow);
    }
}

TEST_CASE("contraction_radius") {
    // worked example: N=1, sigma=gamma=0, rho=4, r=3/2, p=2, q=12
    auto nl = NonlinearitySpec::scalar(0.0, 0.0, 4.0);
    auto res = contraction_radius(nl, 1, 2.0, 1.5, 12.0, 1.0);
    CHECK(res.b1 == doctest::Approx(4.651148117708087).epsilon(1e-12));
    CHECK(res.radius == doctest::Approx(0.4754847706562213).epsilon(1e-12));

    SUBCASE("homogeneity in C_op") {
        auto doubled = contraction_radius(nl, 1, 2.0, 1.5, 12.0, 2.0);
        CHECK(doubled.radius ==
              doctest::Approx(res.radius * std::pow(2.0, 1.0 / (1.0 - 4.0))).epsilon(1e-12));
    }

    SUBCASE("radius shrinks to 0 monotonically as rho decreases to 1 (base > 1)") {
        // radius = (2 C B1)^{1/(1-rho)}: for a fixed base above 1 the
        // exponent 1/(1-rho) walks from -infinity (rho -> 1+) toward 0-, so
        // the radius rises monotonically from 0 toward 1
        double prev = 0.0;
        for (double rho : {1.05, 1.5, 2.0, 4.0, 8.0}) {
            auto nlr = NonlinearitySpec::scalar(0.0, 0.0, rho);
            const double base = 2.0 * 4.651148117708087;  // 2 C_op B1 held fixed
            const double radius = std::pow(base, 1.0 / (1.0 - rho));
            CHECK(radius > prev);
            prev = radius;
        }
        CHECK(std::pow(2.0 * 4.651148117708087, 1.0 / (1.0 - 1.0001)) < 1e-300);
        CHECK(prev < 1.0);
    }

    SUBCASE("regime errors name the violated inequality") {
        CHECK_THROWS_WITH_AS(contraction_radius(nl, 1, 0.4, 1.5, 12.0, 1.0),
                             doctest::Contains("p > N(rho-1)/(2+sigma)"), std::domain_error);
        CHECK_THROWS_WITH_AS(contraction_radius(nl, 1, 2.0, 1.5, 3.0, 1.0),
                             doctest::Contains("rho/q < 1+gamma"), std::domain_error);
    }
}

TEST_CASE("local_existence_horizon") {
    // frozen by independent high-precision evaluation:
    // N=1, sigma=gamma=0, rho=2, r=2, p=3, q=12, C_op=1, ||u0|| = 1
    auto nl = NonlinearitySpec::scalar(0.0, 0.0, 2.0);
    const double h = local_existence_horizon(1.0, nl, 1, 2.0, 3.0, 12.0, 1.0);
    CHECK(h == doctest::Approx(0.09947370487829860).epsilon(1e-12));

    SUBCASE("monotone decreasing in the data norm, exact homogeneity") {
        const double h2 = local_existence_horizon(2.0, nl, 1, 2.0, 3.0, 12.0, 1.0);
        CHECK(h2 < h);
        const double expo = (2.0 - 1.0) / (1.0 * (2.0 - 1.0) / (2.0 * 2.0) - 1.0);
        CHECK(h2 == doctest::Approx(h * std::pow(2.0, expo)).epsilon(1e-12));
        CHECK(local_existence_horizon(1e-8, nl, 1, 2.0, 3.0, 12.0, 1.0) > 1e5);
    }

    SUBCASE("r <= r_c rejected") {
        // rho=4, N=1: r_c = 1.5
        auto nl4 = NonlinearitySpec::scalar(0.0, 0.0, 4.0);
        CHECK_THROWS_AS(local_existence_horizon(1.0, nl4, 1, 1.5, 3.0, 6.0, 1.0),
                        std::domain_error);
    }
}
