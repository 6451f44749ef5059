#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rslab/fractional.hpp"
#include "rslab/relaxation.hpp"

// Periodic pseudospectral realization of the solution operator S_alpha(t)
// as the Fourier multiplier s(t, |xi|^2) on [-L, L)^dim, dim in {1,2},
// wavenumbers xi = pi * (integer) / L.

namespace rslab {

struct Grid {
    int dim;                      // 1 or 2
    std::size_t points_per_axis;  // power of two >= 64
    double box_half_length;       // L

    Grid(int dim_, std::size_t points_per_axis_, double box_half_length_);

    std::size_t total_points() const;
    std::size_t spectral_size() const;  // r2c layout
    double cell_width() const { return 2.0 * box_half_length / double(points_per_axis); }
    double cell_volume() const;
    // coordinate of the i-th point along one axis: -L + i * dx
    double coordinate(std::size_t i) const {
        return -box_half_length + double(i) * cell_width();
    }
    std::array<double, 2> point(std::size_t flat) const;
    double radius2(std::size_t flat) const;

    // integer |m|^2 key of a spectral (r2c) index; mu = (pi/L)^2 * key
    std::int64_t mode_key(std::size_t spectral_flat) const;
    double mode_mu(std::int64_t key) const;

    bool operator==(const Grid& other) const = default;
};

struct Field {
    Grid grid;
    std::vector<double> values;

    Field(Grid grid_, std::vector<double> values_);
    static Field zero(const Grid& grid);
};

// u(x) = amplitude * exp(-|x|^2 / (2 width^2))
Field make_gaussian(const Grid& grid, double amplitude, double width);
// u(x) = (a^2 + |x|^2)^(exponent/2); exponent = -N/r saturates the L^r -> L^p
// operator decay (homogeneous profile)
Field make_power_law(const Grid& grid, double a, double exponent);
// u(x) = sign(x_1) |x|^degree, degree < 0. Exactly homogeneous and mean-free
// by parity (no stuck DC mode on the periodic box), so the L^r -> L^p decay
// rate -N/2(1/r-1/p) is realized with degree = -N/r. The x_1 = 0 plane and
// the unpaired -L face are zero.
Field make_homogeneous_odd(const Grid& grid, double degree);
// indicator of |x_0| < half_extent (first axis)
Field make_indicator(const Grid& grid, double half_extent);

// Cell-volume-weighted discrete Lebesgue norm; p = infinity gives max |u|.
double lp_norm(const Field& field, double p);

// Forward r2c transform, pointwise multiply by multiplier(mu), inverse
// transform. The test seam for injected multipliers.
Field apply_multiplier(const Field& field, const std::function<double(double)>& multiplier);

// S_alpha(t) u0 via the relaxation multiplier s(t, |xi|^2); each distinct
// eigenvalue is solved once by solve_volterra on a shared graded mesh.
Field apply_S(double t, const Field& field, const FracParams& params,
              std::size_t time_nodes = 256);

// Multiplier tables bound to an evolution mesh: s(t_l, mu_d) for every node
// lag l and every distinct eigenvalue d of the grid. Built in a single pass;
// immutable (and freely shared across threads) afterwards.
class SpectralPropagator {
  public:
    SpectralPropagator(const Grid& grid, const FracParams& params, const TimeMesh& mesh);

    const Grid& grid() const { return grid_; }
    const TimeMesh& mesh() const { return mesh_; }
    std::size_t distinct_modes() const { return table_.size(); }

    // multiply a spectrum in place by s(t_lag_node, |xi|^2)
    void multiply_lag(std::vector<std::complex<double>>& spectrum, std::size_t lag_node) const;
    Field apply_at_node(const Field& field, std::size_t node) const;

  private:
    Grid grid_;
    TimeMesh mesh_;
    std::vector<std::vector<double>> table_;  // [distinct][node]
    std::vector<std::uint32_t> mode2distinct_;
};

// FFT plumbing shared with the mild solver.
std::vector<std::complex<double>> fft_forward(const Field& field);
Field fft_inverse(const Grid& grid, std::vector<std::complex<double>> spectrum);

struct DecayFit {
    double fitted_slope;
    double predicted_slope;  // -N/2 (1/r - 1/p)
    double sup_ratio;        // sup_t <t>^{N/2(1/r-1/p)} ||S u0||_p / ||u0||_r
    bool boundary_mass_warning;
    std::vector<double> times;
    std::vector<double> brackets;
    std::vector<double> norms;
};

// Least-squares slope of log ||S_alpha(t) u0||_p against log <t>.
// Requires 1 < r < p with N/2 (1/r - 1/p) < 1 and times spanning at least
// 1.5 decades.
DecayFit measure_decay_exponent(const Field& u0, const FracParams& params, double r, double p,
                                const std::vector<double>& times);

struct ContinuityReport {
    std::vector<double> times;
    std::vector<double> rel_errors;  // ||S(t)u0 - u0||_2 / ||u0||_2
    bool monotone;
    bool small_at_last;  // < 0.01 at the smallest t
};

ContinuityReport check_strong_continuity(const Field& u0, const FracParams& params,
                                         const std::vector<double>& t_sequence);

// Overload with an arbitrary propagator, used to exercise the diagnostic on
// constructed (non-convergent) test doubles.
ContinuityReport check_strong_continuity(
    const Field& u0, const std::function<Field(double, const Field&)>& propagator,
    const std::vector<double>& t_sequence);

}  // namespace rslab
