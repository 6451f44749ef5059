#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rslab/fractional.hpp"

using namespace rslab;

TEST_CASE("gamma_fn: pinned values") {
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(gamma_fn(0.5) == doctest::Approx(1.7724538509055160).epsilon(1e-12));
    CHECK(gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-13));
    CHECK(gamma_fn(1.5) == doctest::Approx(0.8862269254527580).epsilon(1e-12));
    CHECK_THROWS_AS(gamma_fn(0.0), std::domain_error);
    CHECK_THROWS_AS(gamma_fn(-2.5), std::domain_error);
}

TEST_CASE("gamma_fn: functional equation Gamma(x+1) = x Gamma(x) on (0.1,10)") {
    for (int i = 0; i < 100; ++i) {
        const double x = 0.1 + (10.0 - 0.1) * i / 99.0;
        CHECK(gamma_fn(x + 1.0) ==
              doctest::Approx(x * gamma_fn(x)).epsilon(1e-10));
    }
}

TEST_CASE("beta_fn: pinned values") {
    CHECK(beta_fn(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(beta_fn(2.0, 3.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
    CHECK(beta_fn(0.5, 0.5) == doctest::Approx(3.141592653589793).epsilon(1e-12));
    CHECK_THROWS_AS(beta_fn(-1.0, 2.0), std::domain_error);
    CHECK_THROWS_AS(beta_fn(1.0, 0.0), std::domain_error);
}

TEST_CASE("FracParams: construction guards") {
    CHECK_THROWS_AS(FracParams(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(FracParams(1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(FracParams(0.5, -0.1), std::domain_error);
    CHECK_NOTHROW(FracParams(0.5, 0.0));  // heat case
    CHECK_NOTHROW(FracParams(0.999, 1.0));
}

TEST_CASE("kernel_h") {
    FracParams heat(0.5, 0.0);
    CHECK(kernel_h(1.0, heat) == doctest::Approx(1.0));
    FracParams p(0.5, 1.0);
    CHECK(kernel_h(1.0, p) == doctest::Approx(1.5641895835477563).epsilon(1e-12));
    CHECK(kernel_h(1e8, p) == doctest::Approx(1.0).epsilon(1e-3));
    // strictly decreasing
    CHECK(kernel_h(0.5, p) > kernel_h(1.0, p));
    CHECK(kernel_h(1.0, p) > kernel_h(2.0, p));
    CHECK_THROWS_AS(kernel_h(0.0, p), std::domain_error);
    CHECK_THROWS_AS(kernel_h(-1.0, p), std::domain_error);
}

TEST_CASE("angle_bracket and the (1*h) bracketing inequality") {
    CHECK(angle_bracket(0.0, FracParams(0.3, 2.0)) == 0.0);
    CHECK(angle_bracket(1.0, FracParams(0.5, 1.0)) == doctest::Approx(2.0));
    CHECK(angle_bracket(4.0, FracParams(0.5, 2.0)) == doctest::Approx(8.0));

    for (double alpha : {0.3, 0.5, 0.8}) {
        for (double k : {0.0, 0.5, 1.0, 2.0}) {
            FracParams p(alpha, k);
            const double g2 = gamma_fn(2.0 - alpha);
            auto mesh = TimeMesh::graded(10.0, 64, 2.0);
            for (std::size_t i = 1; i < mesh.size(); ++i) {
                const double t = mesh[i];
                const double lhs = angle_bracket(t, p);
                const double mid = one_conv_h(t, p);
                CHECK(lhs <= mid * (1 + 1e-12));
                CHECK(mid <= lhs / g2 * (1 + 1e-12));
            }
        }
    }
}

TEST_CASE("rl_integral: closed-form oracles") {
    auto mesh = TimeMesh::graded(2.0, 128, 1.5);
    const std::size_t m = mesh.size();

    SUBCASE("zero maps to zero") {
        std::vector<double> zero(m, 0.0);
        auto out = rl_integral(zero, mesh, 0.7);
        for (double v : out) CHECK(v == 0.0);
    }

    SUBCASE("constant one -> t^a / Gamma(a+1)") {
        for (double a : {0.3, 0.5, 0.8}) {
            std::vector<double> one(m, 1.0);
            auto out = rl_integral(one, mesh, a);
            for (std::size_t i = 0; i < m; ++i) {
                const double expect = std::pow(mesh[i], a) / gamma_fn(a + 1.0);
                CHECK(out[i] == doctest::Approx(expect).epsilon(1e-12));
            }
        }
    }

    SUBCASE("identity map, order 1/2 -> 4/(3 sqrt(pi)) t^{3/2}") {
        std::vector<double> f(m);
        for (std::size_t i = 0; i < m; ++i) f[i] = mesh[i];
        auto out = rl_integral(f, mesh, 0.5);
        const double c = 4.0 / (3.0 * std::sqrt(3.141592653589793));
        for (std::size_t i = 0; i < m; ++i)
            CHECK(out[i] == doctest::Approx(c * std::pow(mesh[i], 1.5)).epsilon(1e-11));
    }

    SUBCASE("smooth f against brute-force quadrature oracle") {
        std::vector<double> f(m);
        for (std::size_t i = 0; i < m; ++i) f[i] = std::cos(1.3 * mesh[i]);
        auto out = rl_integral(f, mesh, 0.6);
        auto fn = [](double s) { return std::cos(1.3 * s); };
        const double g = gamma_fn(0.6);
        for (std::size_t i : {std::size_t(32), std::size_t(96), m - 1}) {
            const double expect = oracles::rl_integral_brute(fn, mesh[i], 0.6, g);
            CHECK(out[i] == doctest::Approx(expect).epsilon(5e-4));
        }
    }

    SUBCASE("input guards") {
        CHECK_THROWS_AS(rl_integral({1.0, 2.0, 3.0}, mesh, 0.5), std::invalid_argument);
        std::vector<double> ok(m, 1.0);
        CHECK_THROWS_AS(rl_integral(ok, mesh, 0.0), std::domain_error);
        CHECK_THROWS_AS(rl_integral(ok, mesh, 1.0), std::domain_error);
    }
}

TEST_CASE("rl_integral: semigroup property I^a I^b = I^{a+b} under refinement") {
    const double a = 0.3, b = 0.4;
    auto f = [](double t) { return std::sin(t) + 0.5 * t; };
    double prev_err = -1.0;
    for (std::size_t n : {128, 256, 512}) {
        auto mesh = TimeMesh::uniform(1.5, n);
        std::vector<double> fs(mesh.size());
        for (std::size_t i = 0; i < mesh.size(); ++i) fs[i] = f(mesh[i]);
        auto ib = rl_integral(fs, mesh, b);
        auto iab = rl_integral(ib, mesh, a);
        auto direct = rl_integral(fs, mesh, a + b);
        double err = 0.0;
        for (std::size_t i = 0; i < mesh.size(); ++i)
            err = std::max(err, std::abs(iab[i] - direct[i]));
        if (prev_err > 0.0) CHECK(err < prev_err / 1.8);  // measured order >= 1
        prev_err = err;
    }
}

TEST_CASE("rl_right_derivative: (T-t)^lambda closed form") {
    const double T = 2.0, alpha = 0.5;

    SUBCASE("zero function") {
        auto mesh = TimeMesh::uniform(T, 64);
        std::vector<double> zero(mesh.size(), 0.0);
        auto res = rl_right_derivative(zero, mesh, alpha);
        CHECK(res.warnings.empty());
        for (double v : res.values) CHECK(v == 0.0);
    }

    SUBCASE("closed form and >=1.5x convergence per doubling") {
        const double lambda = 1.6;
        const double scale = gamma_fn(lambda + 1.0) / gamma_fn(lambda + 1.0 - alpha);
        double prev_err = -1.0;
        for (std::size_t n : {128, 256, 512, 1024}) {
            auto mesh = TimeMesh::uniform(T, n);
            std::vector<double> f(mesh.size());
            for (std::size_t i = 0; i < mesh.size(); ++i)
                f[i] = std::pow(T - mesh[i], lambda);
            auto res = rl_right_derivative(f, mesh, alpha);
            CHECK(res.warnings.empty());
            double err = 0.0;
            for (std::size_t i = 0; i < mesh.size(); ++i) {
                const double expect = scale * std::pow(T - mesh[i], lambda - alpha);
                err = std::max(err, std::abs(res.values[i] - expect));
            }
            if (prev_err > 0.0) CHECK(err < prev_err / 1.5);
            prev_err = err;
        }
    }

    SUBCASE("value at T is zero for lambda > alpha") {
        auto mesh = TimeMesh::uniform(T, 256);
        std::vector<double> f(mesh.size());
        for (std::size_t i = 0; i < mesh.size(); ++i) f[i] = std::pow(T - mesh[i], 1.2);
        auto res = rl_right_derivative(f, mesh, alpha);
        CHECK(res.values.back() == 0.0);
    }

    SUBCASE("f(T) != 0 records a warning") {
        auto mesh = TimeMesh::uniform(T, 64);
        std::vector<double> f(mesh.size(), 1.0);
        auto res = rl_right_derivative(f, mesh, alpha);
        REQUIRE(!res.warnings.empty());
        CHECK(res.warnings[0].find("f(T) != 0") != std::string::npos);
    }
}

TEST_CASE("TimeMesh: construction and grading") {
    CHECK_THROWS_AS(TimeMesh({0.0}), std::invalid_argument);
    CHECK_THROWS_AS(TimeMesh({0.5, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(TimeMesh({0.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(TimeMesh::graded(1.0, 10, 0.5), std::invalid_argument);

    auto g = TimeMesh::graded(4.0, 16, 2.0);
    CHECK(g[0] == 0.0);
    CHECK(g.t_max() == 4.0);
    CHECK(!g.is_uniform());
    CHECK(TimeMesh::uniform(4.0, 16).is_uniform());

    CHECK(TimeMesh::default_grading(0.0) == 1.0);
    CHECK(TimeMesh::default_grading(-0.25) == doctest::Approx(2.0 / 0.75));
}
