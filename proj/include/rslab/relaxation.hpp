#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "rslab/fractional.hpp"

// Relaxation function s(t, mu): the scalar solution of
//   s' + mu (1 + k D^alpha_{0+}) s = 0,  s(0) = 1,
// equivalently of the Volterra equation s + mu (h * s) = 1. Two independent
// evaluation routes are provided: implicit product integration of the
// Volterra form, and quadrature of the inverse Laplace transform
//   s(t,mu) = (1/2 pi i) int_{Gamma} e^{zt} / (z + mu (1 + k z^alpha)) dz
// over a deformed sectorial contour.

namespace rslab {

// Raised when a numerical-accuracy contract is violated (e.g. an
// under-resolved contour).
class AccuracyError : public std::runtime_error {
  public:
    explicit AccuracyError(const std::string& what) : std::runtime_error(what) {}
};

enum class RelaxationMethod { Volterra, Contour, ClosedFormOracle };

struct RelaxationCurve {
    TimeMesh mesh;
    double mu;
    std::vector<double> values;
    RelaxationMethod method;

    // Internal solve mesh when the initial layer needed sub-resolution
    // (stiff mu); equal to (mesh, values) otherwise. The discrete Volterra
    // identity holds on these nodes.
    std::vector<double> detail_nodes;
    std::vector<double> detail_values;

    // Enforces s(0) = 1, range [0,1] and monotone decrease within 1e-9.
    RelaxationCurve(TimeMesh mesh_, double mu_, std::vector<double> values_,
                    RelaxationMethod method_);
};

// Implicit product integration of s + mu (h*s) = 1 on the mesh. The singular
// part of h uses exact panel moments against the piecewise-linear
// interpolant; the constant part uses exponentially fitted panel weights
// (trapezoid in the smooth limit, hard-damped in the stiff limit, exact for
// k = 0 on any mesh).
RelaxationCurve solve_volterra(double mu, const FracParams& params, const TimeMesh& mesh);

struct ContourResult {
    double value;
    double imag_residue;
    double effective_truncation;
};

// Contour quadrature of the Laplace inversion integral at a single time.
// The ray cutoff is extended to at least 40/(t cos theta) so the integrand
// underflows at the truncation point. An imaginary residue above 1e-6
// signals an under-resolved contour and throws AccuracyError.
ContourResult solve_contour(double mu, double t, const FracParams& params,
                            const ContourSpec& contour);

// Convenience overload with ContourSpec::for_time(t).
ContourResult solve_contour(double mu, double t, const FracParams& params);

// Volterra solves for a family of eigenvalues on one shared internally
// refined mesh (refinement sized by the stiffest member), returning values at
// the caller's nodes. Sharing the mesh keeps the family smooth in mu, which
// the spectral multiplier needs to stay a positive kernel.
std::vector<std::vector<double>> solve_volterra_family(const std::vector<double>& mus,
                                                       const FracParams& params,
                                                       const TimeMesh& mesh);

struct OdeResidualReport {
    double max_residual;
    double l1_residual;
    std::vector<double> residuals;  // interior nodes 1..M-1
};

// Discrete residual of s' + mu s + mu k D^alpha_{0+} s at interior nodes.
OdeResidualReport check_relaxation_ode(const RelaxationCurve& curve, const FracParams& params);

struct MonotonicityReport {
    struct Order {
        bool pass;
        std::size_t first_violation;  // index into checked nodes, npos if pass
        double worst;                 // most negative signed value of (-1)^m dd_m
    };
    std::vector<Order> orders;  // orders 0..max_order
    bool all_pass;
    std::vector<std::size_t> node_indices;  // log-uniform subset of mesh nodes
};

// Alternating-sign check of divided differences up to max_order (<= 3) on a
// log-uniformly selected subset of the curve's nodes, slack 1e-9 * scale.
MonotonicityReport check_complete_monotonicity(const RelaxationCurve& curve, int max_order);

struct DecayBoundReport {
    double c_obs;     // max over nodes of s (1 + mu <t>)
    bool applicable;  // false for mu = 0 (bound trivial)
};

DecayBoundReport check_decay_bound(const RelaxationCurve& curve, const FracParams& params);

// max_n | s_n + mu (h*s)_n - 1 | with the same discrete convolution weights
// used by solve_volterra; round-off for curves produced by it.
double volterra_identity_residual(const RelaxationCurve& curve, const FracParams& params);

}  // namespace rslab
