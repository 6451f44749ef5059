#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rslab/spectral.hpp"

using namespace rslab;

namespace {

// heat kernel closed form: e^{tD} of A exp(-|x|^2/(2w^2))
Field heat_of_gaussian(const Grid& grid, double amplitude, double width, double t) {
    const double s2 = width * width + 2.0 * t;
    const double amp = amplitude * std::pow(width * width / s2, 0.5 * grid.dim);
    std::vector<double> v(grid.total_points());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = amp * std::exp(-grid.radius2(i) / (2.0 * s2));
    return Field(grid, std::move(v));
}

double rel_l2(const Field& a, const Field& b) {
    Field d = a;
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= b.values[i];
    return lp_norm(d, 2.0) / lp_norm(b, 2.0);
}

}  // namespace

TEST_CASE("Grid: validation and geometry") {
    CHECK_THROWS_AS(Grid(3, 64, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Grid(1, 100, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Grid(1, 32, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Grid(1, 64, 0.0), std::invalid_argument);
    Grid g(2, 64, 5.0);
    CHECK(g.total_points() == 4096);
    CHECK(g.spectral_size() == 64 * 33);
    CHECK(g.cell_volume() == doctest::Approx(g.cell_width() * g.cell_width()));
}

TEST_CASE("lp_norm: box measures") {
    Grid g(1, 128, 1.0);  // [-1,1)
    Field one(g, std::vector<double>(g.total_points(), 1.0));
    CHECK(lp_norm(one, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
    // indicator of half the box has L2 norm (volume 1)^{1/2} = 1
    Field half = make_indicator(g, 0.5);
    CHECK(lp_norm(half, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lp_norm(Field::zero(g), 2.0) == 0.0);
    Field spike = Field::zero(g);
    spike.values[7] = -3.0;
    CHECK(lp_norm(spike, std::numeric_limits<double>::infinity()) == 3.0);
    CHECK_THROWS_AS(lp_norm(one, 0.5), std::domain_error);
}

TEST_CASE("apply_S: t = 0 identity and constant-field invariance") {
    Grid g(1, 128, 10.0);
    auto u0 = make_gaussian(g, 1.0, 1.0);
    FracParams p(0.5, 1.0);
    auto id = apply_S(0.0, u0, p);
    for (std::size_t i = 0; i < u0.values.size(); ++i) CHECK(id.values[i] == u0.values[i]);

    Field c(g, std::vector<double>(g.total_points(), 0.7));
    auto ct = apply_S(1.5, c, p);
    for (double v : ct.values) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("apply_S: heat-kernel oracle at k = 0") {
    FracParams heat(0.5, 0.0);
    SUBCASE("dim 1") {
        Grid g(1, 256, 15.0);
        auto u0 = make_gaussian(g, 1.0, 1.0);
        auto ut = apply_S(1.0, u0, heat);
        auto expect = heat_of_gaussian(g, 1.0, 1.0, 1.0);
        CHECK(rel_l2(ut, expect) < 1e-3);
    }
    SUBCASE("dim 2") {
        Grid g(2, 128, 12.0);
        auto u0 = make_gaussian(g, 1.0, 1.0);
        auto ut = apply_S(1.0, u0, heat);
        auto expect = heat_of_gaussian(g, 1.0, 1.0, 1.0);
        CHECK(rel_l2(ut, expect) < 1e-3);
    }
}

TEST_CASE("apply_S: mean conservation and positivity on Gaussians") {
    Grid g(1, 256, 12.0);
    auto u0 = make_gaussian(g, 2.0, 1.5);
    FracParams p(0.3, 1.0);
    auto ut = apply_S(2.0, u0, p);
    double m0 = 0, m1 = 0, mx = 0, mn = 1e300;
    for (std::size_t i = 0; i < u0.values.size(); ++i) {
        m0 += u0.values[i];
        m1 += ut.values[i];
        mx = std::max(mx, ut.values[i]);
        mn = std::min(mn, ut.values[i]);
    }
    CHECK(m1 == doctest::Approx(m0).epsilon(1e-12));
    CHECK(mn >= -1e-8 * mx);
}

TEST_CASE("apply_S: semigroup identity holds iff k = 0") {
    Grid g(1, 128, 12.0);
    auto u0 = make_gaussian(g, 1.0, 1.0);
    SUBCASE("k = 0: composition matches to 1e-8") {
        FracParams heat(0.5, 0.0);
        auto once = apply_S(1.5, u0, heat);
        auto twice = apply_S(0.75, apply_S(0.75, u0, heat), heat);
        CHECK(rel_l2(twice, once) < 1e-8);
    }
    SUBCASE("k = 1: identity fails by a measurable margin") {
        FracParams p(0.5, 1.0);
        auto once = apply_S(1.5, u0, p);
        auto twice = apply_S(0.75, apply_S(0.75, u0, p), p);
        CHECK(rel_l2(twice, once) > 1e-3);
    }
}

TEST_CASE("measure_decay_exponent: admissibility guards") {
    Grid g(1, 128, 10.0);
    auto u0 = make_gaussian(g, 1.0, 1.0);
    FracParams heat(0.5, 0.0);
    std::vector<double> times{0.1, 0.4, 1.6, 6.4};
    CHECK_THROWS_AS(measure_decay_exponent(u0, heat, 2.0, 2.0, times), std::domain_error);
    CHECK_THROWS_AS(measure_decay_exponent(u0, heat, 1.0, 3.0, times), std::domain_error);
    CHECK_THROWS_AS(measure_decay_exponent(u0, heat, 1.5, 3.0, {0.1, 0.2, 0.3}),
                    std::invalid_argument);
}

TEST_CASE("measure_decay_exponent: heat case k=0, dim=1, r=2, p=4") {
    // the odd homogeneous profile sign(x)|x|^{-N/r} realizes the L^r -> L^p
    // decay rate exactly: slope = -N/2 (1/r - 1/p) = -0.125
    FracParams heat(0.5, 0.0);
    Grid g(1, 2048, 80.0);
    auto u0 = make_homogeneous_odd(g, -1.0 / 2.0);
    std::vector<double> times{1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
    auto fit = measure_decay_exponent(u0, heat, 2.0, 4.0, times);
    CHECK(fit.predicted_slope == doctest::Approx(-0.125));
    CHECK(std::abs(fit.fitted_slope - fit.predicted_slope) < 0.1 * std::abs(fit.predicted_slope));
    CHECK(fit.sup_ratio > 0.0);
}

TEST_CASE("measure_decay_exponent: boundary warning flags an undersized box") {
    FracParams heat(0.5, 0.0);
    Grid small(1, 64, 4.0);
    auto u0 = make_power_law(small, 0.5, -1.0 / 2.0);
    auto fit = measure_decay_exponent(u0, heat, 2.0, 4.0, {0.25, 1.0, 4.0, 16.0});
    CHECK(fit.boundary_mass_warning);  // slow tails reach the box edge
}

TEST_CASE("check_strong_continuity") {
    Grid g(1, 256, 20.0);
    FracParams p(0.5, 1.0);

    SUBCASE("constant field: zero error at every t") {
        Field c(g, std::vector<double>(g.total_points(), 1.0));
        auto rep = check_strong_continuity(c, p, {1e-1, 1e-2, 1e-3});
        for (double e : rep.rel_errors) CHECK(e < 1e-12);
    }

    SUBCASE("Gaussian: error < 0.01 at t = 1e-4") {
        auto u0 = make_gaussian(g, 1.0, 4.0);
        auto rep = check_strong_continuity(u0, p, {1e-1, 1e-2, 1e-3, 1e-4});
        CHECK(rep.monotone);
        CHECK(rep.small_at_last);
        CHECK(rep.rel_errors.back() < 0.01);
    }

    SUBCASE("injected non-convergent multiplier fails monotonicity") {
        auto u0 = make_gaussian(g, 1.0, 2.0);
        auto doubled = [&](double t, const Field& f) {
            return apply_multiplier(
                f, [&](double mu) { return mu == 0.0 ? 1.0 : 0.5 + 0.1 * std::sin(50.0 * t); });
        };
        auto rep = check_strong_continuity(u0, doubled, {1e-1, 1e-2, 1e-3, 1e-4});
        CHECK((!rep.monotone || !rep.small_at_last));
    }
}

TEST_CASE("apply_S rejects non-finite input") {
    Grid g(1, 64, 5.0);
    Field bad = Field::zero(g);
    bad.values[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(apply_S(1.0, bad, FracParams(0.5, 1.0)), std::invalid_argument);
    bad.values[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(apply_multiplier(bad, [](double) { return 1.0; }),
                    std::invalid_argument);
}

TEST_CASE("fft round trip") {
    Grid g(2, 64, 3.0);
    auto u0 = make_gaussian(g, 1.3, 0.7);
    auto back = fft_inverse(g, fft_forward(u0));
    CHECK(rel_l2(back, u0) < 1e-13);
}
