#include "rslab/fractional.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rslab {

FracParams::FracParams(double alpha_, double k_) : alpha(alpha_), k(k_) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("FracParams: alpha must lie in open (0,1), got " +
                                std::to_string(alpha_));
    if (!(k >= 0.0))
        throw std::domain_error("FracParams: k must be >= 0, got " + std::to_string(k_));
}

TimeMesh::TimeMesh(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw std::invalid_argument("TimeMesh: need at least 2 nodes");
    if (nodes_.front() != 0.0) throw std::invalid_argument("TimeMesh: first node must be 0");
    for (std::size_t i = 1; i < nodes_.size(); ++i)
        if (!(nodes_[i] > nodes_[i - 1]))
            throw std::invalid_argument("TimeMesh: nodes must be strictly increasing");
}

TimeMesh TimeMesh::graded(double t_max, std::size_t intervals, double grading) {
    if (!(t_max > 0.0)) throw std::invalid_argument("TimeMesh: t_max must be positive");
    if (intervals < 1) throw std::invalid_argument("TimeMesh: need at least one interval");
    if (!(grading >= 1.0)) throw std::invalid_argument("TimeMesh: grading must be >= 1");
    std::vector<double> nodes(intervals + 1);
    for (std::size_t j = 0; j <= intervals; ++j)
        nodes[j] = t_max * std::pow(double(j) / double(intervals), grading);
    nodes[intervals] = t_max;
    return TimeMesh(std::move(nodes));
}

TimeMesh TimeMesh::uniform(double t_max, std::size_t intervals) {
    return graded(t_max, intervals, 1.0);
}

bool TimeMesh::is_uniform(double rel_tol) const {
    const double h = nodes_[1] - nodes_[0];
    for (std::size_t i = 1; i + 1 < nodes_.size(); ++i)
        if (std::abs((nodes_[i + 1] - nodes_[i]) - h) > rel_tol * h) return false;
    return true;
}

double TimeMesh::default_grading(double gamma) {
    if (gamma >= 0.0) return 1.0;
    return std::max(1.0, 2.0 / (1.0 + gamma));
}

ContourSpec::ContourSpec(double delta_, double theta_, double truncation_, int panels_)
    : delta(delta_), theta(theta_), truncation(truncation_), panels(panels_) {
    if (!(delta > 0.0)) throw std::invalid_argument("ContourSpec: delta must be positive");
    if (!(theta > 0.0 && theta < std::numbers::pi / 2))
        throw std::invalid_argument("ContourSpec: theta must lie in (0, pi/2)");
    if (!(truncation > delta))
        throw std::invalid_argument("ContourSpec: truncation must exceed delta");
    if (panels < 1) throw std::invalid_argument("ContourSpec: panels must be positive");
}

ContourSpec ContourSpec::for_time(double t) {
    if (!(t > 0.0)) throw std::invalid_argument("ContourSpec::for_time: t must be positive");
    const double theta = std::numbers::pi / 6.0;
    const double delta = 1.0 / t;
    const double cutoff = std::max(4.0 * delta, 40.0 / (t * std::cos(theta)));
    return ContourSpec(delta, theta, cutoff, 400);
}

namespace {

// Lanczos, g = 7, 9 coefficients (Boost/GSL-class accuracy).
double gamma_positive(double x) {
    static const double coeff[9] = {
        0.99999999999980993,    676.5203681218851,      -1259.1392167224028,
        771.32342877765313,     -176.61502916214059,    12.507343278686905,
        -0.13857109526572012,   9.9843695780195716e-6,  1.5056327351493116e-7};
    if (x < 0.5) {
        // reflection: Gamma(x) = pi / (sin(pi x) Gamma(1-x))
        return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma_positive(1.0 - x));
    }
    const double z = x - 1.0;
    double a = coeff[0];
    for (int i = 1; i < 9; ++i) a += coeff[i] / (z + i);
    const double t = z + 7.5;
    return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, z + 0.5) * std::exp(-t) * a;
}

}  // namespace

double gamma_fn(double x) {
    if (!(x > 0.0)) throw std::domain_error("gamma_fn: argument must be positive");
    return gamma_positive(x);
}

double beta_fn(double x, double y) {
    if (!(x > 0.0) || !(y > 0.0))
        throw std::domain_error("beta_fn: both arguments must be positive");
    return gamma_fn(x) * gamma_fn(y) / gamma_fn(x + y);
}

double kernel_h(double t, const FracParams& params) {
    if (!(t > 0.0)) throw std::domain_error("kernel_h: t must be positive (h is singular at 0)");
    return 1.0 + params.k * std::pow(t, -params.alpha) / gamma_fn(1.0 - params.alpha);
}

double angle_bracket(double t, const FracParams& params) {
    if (t < 0.0) throw std::domain_error("angle_bracket: t must be nonnegative");
    if (t == 0.0) return 0.0;
    return t + params.k * std::pow(t, 1.0 - params.alpha);
}

double one_conv_h(double t, const FracParams& params) {
    if (t < 0.0) throw std::domain_error("one_conv_h: t must be nonnegative");
    if (t == 0.0) return 0.0;
    return t + params.k * std::pow(t, 1.0 - params.alpha) / gamma_fn(2.0 - params.alpha);
}

namespace detail {

// (x^c - y^c)/c with x >= y >= 0, written around expm1 so that nearly equal
// powers (c -> 0 or x ~ y) do not cancel.
static double power_diff_over_c(double x, double y, double c) {
    if (y == 0.0) return std::pow(x, c) / c;
    return std::pow(y, c) * std::expm1(c * std::log(x / y)) / c;
}

double power_moment0(double t, double a, double b, double c) {
    const double x = t - a, y = t - b;
    return power_diff_over_c(x, y, c);
}

double power_moment1(double t, double a, double b, double c) {
    const double x = t - a, y = t - b;
    return x * power_diff_over_c(x, y, c) - power_diff_over_c(x, y, c + 1.0);
}

double weight_moment0(double a, double b, double g) {
    if (a == 0.0) return std::pow(b, g + 1.0) / (g + 1.0);
    return std::pow(a, g + 1.0) * std::expm1((g + 1.0) * std::log(b / a)) / (g + 1.0);
}

double weight_moment1(double a, double b, double g) {
    return weight_moment0(a, b, g + 1.0) - a * weight_moment0(a, b, g);
}

}  // namespace detail

std::vector<double> rl_integral(const std::vector<double>& samples, const TimeMesh& mesh,
                                double order) {
    if (!(order > 0.0 && order < 1.0))
        throw std::domain_error("rl_integral: order must lie in (0,1)");
    if (samples.size() != mesh.size())
        throw std::invalid_argument("rl_integral: samples/mesh size mismatch");
    if (mesh.size() < 2) throw std::invalid_argument("rl_integral: mesh too small");

    const auto& t = mesh.nodes();
    const std::size_t m = t.size();
    std::vector<double> out(m, 0.0);
    const double inv_gamma = 1.0 / gamma_fn(order);

    for (std::size_t n = 1; n < m; ++n) {
        double acc = 0.0;
        for (std::size_t j = 0; j + 1 <= n; ++j) {
            const double a = t[j], b = t[j + 1], dt = b - a;
            const double m0 = detail::power_moment0(t[n], a, b, order);
            const double m1 = detail::power_moment1(t[n], a, b, order);
            acc += samples[j] * (m0 - m1 / dt) + samples[j + 1] * (m1 / dt);
        }
        out[n] = inv_gamma * acc;
    }
    return out;
}

RlDerivativeResult rl_right_derivative(const std::vector<double>& samples, const TimeMesh& mesh,
                                       double order) {
    if (!(order > 0.0 && order < 1.0))
        throw std::domain_error("rl_right_derivative: order must lie in (0,1)");
    if (samples.size() != mesh.size())
        throw std::invalid_argument("rl_right_derivative: samples/mesh size mismatch");
    if (mesh.size() < 2) throw std::invalid_argument("rl_right_derivative: mesh too small");

    RlDerivativeResult res;
    const auto& t = mesh.nodes();
    const std::size_t m = t.size();

    double scale = 0.0;
    for (double v : samples) scale = std::max(scale, std::abs(v));
    if (scale > 0.0 && std::abs(samples.back()) > 1e-10 * scale)
        res.warnings.push_back("f(T) != 0: right-derivative contract breached, |f(T)|/max|f| = " +
                               std::to_string(std::abs(samples.back()) / scale));

    // D^a_{T-} f(t_i) = -(1/Gamma(1-a)) sum_j f'_j int (s - t_i)^{-a} ds,
    // with f' piecewise constant on panels right of t_i.
    std::vector<double> out(m, 0.0);
    const double c = 1.0 - order;
    const double inv_gamma = 1.0 / gamma_fn(c);
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = i; j + 1 < m; ++j) {
            const double a = t[j], b = t[j + 1];
            const double df = (samples[j + 1] - samples[j]) / (b - a);
            // int_a^b (s - t_i)^{-order} ds = ((b-ti)^c - (a-ti)^c)/c
            const double x = b - t[i], y = a - t[i];
            double seg;
            if (y <= 0.0)
                seg = std::pow(x, c) / c;
            else
                seg = std::pow(y, c) * std::expm1(c * std::log(x / y)) / c;
            acc += df * seg;
        }
        out[i] = -inv_gamma * acc;
    }
    res.values = std::move(out);
    return res;
}

}  // namespace rslab
