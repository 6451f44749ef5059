#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rslab/fractional.hpp"
#include "rslab/spectral.hpp"

// Mild solutions of
//   d_t u - (1 + k D^alpha_{0+}) Lap u = |x|^sigma t^gamma u^rho
// and the two-component cross-coupled system, evolved by time-marching the
// Duhamel formula u(t) = S(t) u0 + int_0^t S(t-s) N(u(s)) ds with an
// implicit (Picard) last panel, plus the contraction-map diagnostics of the
// small-data theory.

namespace rslab {

// Signals a discretization breakdown: evolved field dipped below
// -1e-6 * max. Distinct from blow-up.
class PositivityViolation : public std::runtime_error {
  public:
    explicit PositivityViolation(const std::string& what) : std::runtime_error(what) {}
};

struct NonlinearitySpec {
    double sigma = 0.0;
    double gamma = 0.0;
    double rho = 0.0;   // scalar exponent, > 1
    double rho1 = 0.0;  // system exponents, >= 1 with rho1*rho2 > 1
    double rho2 = 0.0;
    bool is_system = false;
    double weight_epsilon = 0.0;  // |x|^sigma -> (|x|^2 + eps^2)^{sigma/2}

    static NonlinearitySpec scalar(double sigma, double gamma, double rho, double eps = 0.0);
    static NonlinearitySpec system(double sigma, double gamma, double rho1, double rho2,
                                   double eps = 0.0);
};

enum class EvolutionStatus { Global, BlewUp, Inconclusive };

const char* to_string(EvolutionStatus s);

struct EvolutionRecord {
    TimeMesh mesh;              // full requested mesh
    std::size_t nodes_marched;  // marched prefix (== mesh.size() unless stopped)
    std::vector<double> norms_r;
    std::vector<double> norms_p;
    EvolutionStatus status;
    double t_blow = -1.0;  // valid when status == BlewUp
    double blow_threshold;
    int components;
    double r, p;
    bool source_enabled = true;
    std::vector<std::string> warnings;
    // present when requested via EvolveOptions::store_snapshots
    std::vector<Field> snapshots;
    std::vector<Field> snapshots_v;
};

struct EvolveOptions {
    double blow_threshold_factor = 1e6;
    std::optional<double> blow_threshold;  // overrides the factor
    double picard_tol = 1e-10;
    int picard_max_iters = 50;
    bool source_enabled = true;
    bool store_snapshots = false;
};

// q of the admissible triplet (q,p,r): 1/q = N/2 (1/r - 1/p), requiring
// 1 < r < p < N r/(N-2r)_+.
double admissible_q(int dim, double r, double p);

EvolutionRecord duhamel_evolve(const Field& u0, const FracParams& params,
                               const NonlinearitySpec& nl, const TimeMesh& mesh, double r,
                               double p, const EvolveOptions& options = {});

EvolutionRecord duhamel_evolve_system(const Field& u0, const Field& v0,
                                      const FracParams& params, const NonlinearitySpec& nl,
                                      const TimeMesh& mesh, double r, double p,
                                      const EvolveOptions& options = {});

struct RadiusResult {
    double radius;  // (2 C_op B1)^{1/(1-rho)}
    double b1;
};

// Contraction-ball radius of the small-data global theory. Beta arguments
// must be positive; violations name the offending inequality.
RadiusResult contraction_radius(const NonlinearitySpec& nl, int dim, double p, double r,
                                double q, double c_op);

// Bound on <T> below which the local contraction argument closes:
// (2^rho C^rho B1 ||u0||^{rho-1})^{1/(N(rho-1)/(2r) - sigma/2 - gamma - 1)},
// defined for r > r_c (negative exponent).
double local_existence_horizon(double norm_u0_r, const NonlinearitySpec& nl, int dim, double r,
                               double p, double q, double c_op);

}  // namespace rslab
