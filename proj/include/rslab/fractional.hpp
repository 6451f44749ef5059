#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Fractional-calculus and special-function primitives shared by the rest of
// the library: Gamma/Beta, the Rayleigh-Stokes kernel h(t), the modified time
// scale <t>, and product-integration discretizations of the Riemann-Liouville
// operators on (possibly graded) time meshes.

namespace rslab {

// Pair (alpha, k) of the time-fractional equation
//   d_t u - (1 + k D^alpha_{0+}) Lap u = source.
// alpha must lie in the open interval (0,1). k = 0 is accepted and selects the
// plain heat case; negative k is rejected.
struct FracParams {
    double alpha;
    double k;

    FracParams(double alpha_, double k_);
};

// Strictly increasing time nodes t_0 = 0 < t_1 < ... < t_M = T.
// graded(T, M, g) places t_j = T (j/M)^g; grading g >= 1, g = 1 is uniform.
class TimeMesh {
  public:
    static TimeMesh graded(double t_max, std::size_t intervals, double grading);
    static TimeMesh uniform(double t_max, std::size_t intervals);
    explicit TimeMesh(std::vector<double> nodes);

    const std::vector<double>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    double operator[](std::size_t i) const { return nodes_[i]; }
    double t_max() const { return nodes_.back(); }
    bool is_uniform(double rel_tol = 1e-12) const;

    // Default grading exponent for quadratures carrying a t^gamma weight:
    // max(1, 2/(1+gamma)) when gamma < 0, otherwise 1.
    static double default_grading(double gamma);

  private:
    std::vector<double> nodes_;
};

// Deformed Bromwich contour: circular arc of radius delta joined to two rays
// at angles +-(pi - theta), theta in (0, pi/2). `panels` = quadrature
// subintervals per segment, exponentially graded along the rays.
struct ContourSpec {
    double delta;
    double theta;
    double truncation;
    int panels;

    ContourSpec(double delta_, double theta_, double truncation_, int panels_);

    // delta = 1/t, theta = pi/6, truncation sized so exp(Re z t) < 1e-16 at
    // the ray cutoff.
    static ContourSpec for_time(double t);
};

// Gamma function, Lanczos approximation with reflection below 1/2.
// Accurate to ~1e-13 relative on (0, 170). Throws std::domain_error for x <= 0.
double gamma_fn(double x);

// B(x,y) = Gamma(x)Gamma(y)/Gamma(x+y), x,y > 0.
double beta_fn(double x, double y);

// Kernel h(t) = 1 + k t^{-alpha} / Gamma(1-alpha), t > 0.
double kernel_h(double t, const FracParams& params);

// Modified time scale <t> = t + k t^{1-alpha}, t >= 0.
double angle_bracket(double t, const FracParams& params);

// (1*h)(t) = t + k t^{1-alpha} / Gamma(2-alpha), the running integral of h.
// Satisfies <t> <= (1*h)(t) <= <t>/Gamma(2-alpha).
double one_conv_h(double t, const FracParams& params);

// Left Riemann-Liouville integral I^order_{0+} f of samples on a mesh.
// Piecewise-linear interpolant integrated exactly against the singular
// kernel (t-s)^{order-1}/Gamma(order) on every panel. Node 0 maps to 0.
// order in (0,1); mesh needs at least 2 nodes.
std::vector<double> rl_integral(const std::vector<double>& samples,
                                const TimeMesh& mesh, double order);

struct RlDerivativeResult {
    std::vector<double> values;
    std::vector<std::string> warnings;  // e.g. f(T) != 0 contract breach
};

// Right Riemann-Liouville derivative D^order_{T-} f for f vanishing at T,
// via D^order_{T-} f = -(I^{1-order}_{T-} f')(t) with the piecewise-constant
// derivative of the linear interpolant. A nonzero f(T) (relative to max|f|)
// is recorded as a warning, not an error.
RlDerivativeResult rl_right_derivative(const std::vector<double>& samples,
                                       const TimeMesh& mesh, double order);

namespace detail {

// M0 = int_a^b (t-s)^{c-1} ds and M1 = int_a^b (t-s)^{c-1}(s-a) ds for
// 0 <= a < b <= t, c > 0. Uses expm1 to keep the power difference accurate
// when c is close to 0 (alpha -> 1) or the panel is narrow.
double power_moment0(double t, double a, double b, double c);
double power_moment1(double t, double a, double b, double c);

// int_a^b s^{g} ds and int_a^b s^{g}(s-a) ds for 0 <= a < b, g > -1.
double weight_moment0(double a, double b, double g);
double weight_moment1(double a, double b, double g);

}  // namespace detail

}  // namespace rslab
