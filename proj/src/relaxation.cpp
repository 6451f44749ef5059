#include "rslab/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace rslab {

RelaxationCurve::RelaxationCurve(TimeMesh mesh_, double mu_, std::vector<double> values_,
                                 RelaxationMethod method_)
    : mesh(std::move(mesh_)), mu(mu_), values(std::move(values_)), method(method_) {
    if (mu < 0.0) throw std::domain_error("RelaxationCurve: mu must be >= 0");
    if (values.size() != mesh.size())
        throw std::invalid_argument("RelaxationCurve: values/mesh size mismatch");
    if (values[0] != 1.0) throw std::logic_error("RelaxationCurve: s(0) must equal 1");
    const double tol = 1e-9;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < -tol || values[i] > 1.0 + tol)
            throw std::logic_error("RelaxationCurve: value outside [0,1] at node " +
                                   std::to_string(i));
        if (i > 0 && values[i] > values[i - 1] + tol)
            throw std::logic_error("RelaxationCurve: increase at node " + std::to_string(i));
    }
}

namespace {

// Exponentially fitted implicit weight: theta(z) = (z - 1 + e^{-z}) / (z(1 - e^{-z})).
// theta(0+) = 1/2 (trapezoid), theta(inf) = 1 (backward Euler); makes the
// k = 0 recursion reproduce e^{-mu dt} exactly per panel.
double fitted_theta(double z) {
    if (z < 1e-4) return 0.5 + z / 12.0;
    if (z > 700.0) return (z - 1.0) / z;
    const double em = std::expm1(-z);  // e^{-z} - 1
    return (z + em) / (-z * em);
}

struct ConvWeights {
    // Per-panel hat-function weights of the kernel h(t_n - tau) for a fixed
    // node n: panel p contributes left[p] to s_p and right[p] to s_{p+1}.
    std::vector<double> left, right;
};

// Assemble the discrete convolution weights (h * .)(t_n) for node n.
// pw/pw1 are scratch arrays of size >= n+1.
void conv_weights_at(const TimeMesh& mesh, const FracParams& params, double mu, std::size_t n,
                     std::vector<double>& pw, std::vector<double>& pw1, ConvWeights& w) {
    const auto& t = mesh.nodes();
    const double c = 1.0 - params.alpha;
    const double kg = params.k > 0.0 ? params.k / gamma_fn(c) : 0.0;
    w.left.assign(n, 0.0);
    w.right.assign(n, 0.0);

    if (kg > 0.0) {
        for (std::size_t j = 0; j <= n; ++j) {
            const double x = t[n] - t[j];
            pw[j] = std::pow(x, c);
            pw1[j] = pw[j] * x;
        }
        for (std::size_t p = 0; p < n; ++p) {
            const double dt = t[p + 1] - t[p];
            const double x = t[n] - t[p];
            double m0, m1;
            if (dt < 1e-4 * x) {
                // panel narrow relative to the lag: direct power differences
                // cancel, midpoint form is exact to O((dt/x)^2)
                const double mid = std::pow(x - 0.5 * dt, c - 1.0);
                m0 = dt * mid;
                m1 = 0.5 * dt * dt * mid;
            } else {
                m0 = (pw[p] - pw[p + 1]) / c;
                m1 = x * m0 - (pw1[p] - pw1[p + 1]) / (c + 1.0);
            }
            w.left[p] += kg * (m0 - m1 / dt);
            w.right[p] += kg * (m1 / dt);
        }
    }
    for (std::size_t p = 0; p < n; ++p) {
        const double dt = t[p + 1] - t[p];
        const double th = fitted_theta(mu * dt);
        w.left[p] += dt * (1.0 - th);
        w.right[p] += dt * th;
    }
}

}  // namespace

namespace {

struct RefinedMesh {
    std::vector<double> nodes;
    std::vector<std::size_t> caller_pos;  // position of each caller node
};

// The exact solution relaxes over the scale where mu (1*h) ~ 1. Meshes whose
// panels are coarse relative to that scale cannot track the drop, so the
// solve runs on an internally refined mesh: the first panel is subdivided
// geometrically down to mu (1*h) <= 0.25, and panels inside the active decay
// zone (mu (1*h) <= 20) are kept log-uniform with ratio <= 1.5. The caller's
// nodes are extracted afterwards.
RefinedMesh layer_refined_nodes(double mu, const FracParams& params, const TimeMesh& mesh) {
    const double z_layer = 0.25, z_zone = 20.0, ratio = 1.5;
    const std::size_t cap = 700;

    RefinedMesh out;
    out.nodes.push_back(0.0);
    out.caller_pos.push_back(0);
    // descend into the first panel
    {
        std::vector<double> extra;
        double t = mesh[1] / ratio;
        while (t > 0.0 && mu * one_conv_h(t, params) > z_layer && extra.size() < cap / 2) {
            extra.push_back(t);
            t /= ratio;
        }
        for (auto it = extra.rbegin(); it != extra.rend(); ++it) out.nodes.push_back(*it);
    }
    // log-uniform subdivision of active-zone panels
    std::size_t added = out.nodes.size() - 1;
    for (std::size_t j = 1; j < mesh.size(); ++j) {
        const double a = mesh[j - 1] > 0.0 ? mesh[j - 1] : out.nodes.back();
        const double b = mesh[j];
        if (j > 1 && a > 0.0 && b / a > ratio && mu * one_conv_h(a, params) < z_zone &&
            added < cap) {
            const int pieces = int(std::ceil(std::log(b / a) / std::log(ratio)));
            for (int q = 1; q < pieces && added < cap; ++q) {
                out.nodes.push_back(a * std::pow(b / a, double(q) / pieces));
                ++added;
            }
        }
        out.nodes.push_back(b);
        out.caller_pos.push_back(out.nodes.size() - 1);
    }
    return out;
}

std::vector<double> volterra_on_nodes(double mu, const FracParams& params,
                                      const TimeMesh& mesh) {
    const std::size_t m = mesh.size();
    std::vector<double> s(m, 1.0);
    std::vector<double> pw(m), pw1(m);
    ConvWeights w;
    for (std::size_t n = 1; n < m; ++n) {
        conv_weights_at(mesh, params, mu, n, pw, pw1, w);
        double acc = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) acc += w.left[p] * s[p] + w.right[p] * s[p + 1];
        acc += w.left[n - 1] * s[n - 1];
        const double diag = w.right[n - 1];
        if (!(1.0 + mu * diag > 0.0))
            throw std::logic_error("solve_volterra: nonpositive implicit pivot");
        s[n] = (1.0 - mu * acc) / (1.0 + mu * diag);
        if (s[n] < 0.0 && s[n] > -1e-12) s[n] = 0.0;
    }
    return s;
}

}  // namespace

std::vector<std::vector<double>> solve_volterra_family(const std::vector<double>& mus,
                                                       const FracParams& params,
                                                       const TimeMesh& mesh) {
    double mu_max = 0.0;
    for (double mu : mus) {
        if (mu < 0.0) throw std::domain_error("solve_volterra_family: mu must be >= 0");
        mu_max = std::max(mu_max, mu);
    }
    std::vector<std::vector<double>> out(mus.size());
    if (mu_max == 0.0) {
        for (auto& v : out) v.assign(mesh.size(), 1.0);
        return out;
    }
    auto refined = layer_refined_nodes(mu_max, params, mesh);
    TimeMesh fine{refined.nodes};
    for (std::size_t i = 0; i < mus.size(); ++i) {
        if (mus[i] == 0.0) {
            out[i].assign(mesh.size(), 1.0);
            continue;
        }
        auto s_fine = volterra_on_nodes(mus[i], params, fine);
        out[i].resize(mesh.size());
        for (std::size_t j = 0; j < mesh.size(); ++j) out[i][j] = s_fine[refined.caller_pos[j]];
        // same contract as RelaxationCurve
        const double tol = 1e-9;
        for (std::size_t j = 0; j < mesh.size(); ++j) {
            if (out[i][j] < -tol || out[i][j] > 1.0 + tol ||
                (j > 0 && out[i][j] > out[i][j - 1] + tol))
                throw std::logic_error("solve_volterra_family: invariant breach at mu = " +
                                       std::to_string(mus[i]));
        }
    }
    return out;
}

RelaxationCurve solve_volterra(double mu, const FracParams& params, const TimeMesh& mesh) {
    if (mu < 0.0) throw std::domain_error("solve_volterra: mu must be >= 0");
    if (mu == 0.0)
        return RelaxationCurve(mesh, mu, std::vector<double>(mesh.size(), 1.0),
                               RelaxationMethod::Volterra);

    auto refined = layer_refined_nodes(mu, params, mesh);
    if (refined.nodes.size() == mesh.size()) {
        auto s = volterra_on_nodes(mu, params, mesh);
        return RelaxationCurve(mesh, mu, std::move(s), RelaxationMethod::Volterra);
    }
    TimeMesh fine(refined.nodes);
    auto s_fine = volterra_on_nodes(mu, params, fine);
    std::vector<double> s(mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i) s[i] = s_fine[refined.caller_pos[i]];
    RelaxationCurve curve(mesh, mu, std::move(s), RelaxationMethod::Volterra);
    curve.detail_nodes = std::move(refined.nodes);
    curve.detail_values = std::move(s_fine);
    return curve;
}

double volterra_identity_residual(const RelaxationCurve& curve, const FracParams& params) {
    const bool refined = !curve.detail_values.empty();
    const TimeMesh mesh = refined ? TimeMesh(curve.detail_nodes) : curve.mesh;
    const auto& vals = refined ? curve.detail_values : curve.values;
    const std::size_t m = mesh.size();
    std::vector<double> pw(m), pw1(m);
    ConvWeights w;
    double worst = std::abs(vals[0] - 1.0);
    for (std::size_t n = 1; n < m; ++n) {
        conv_weights_at(mesh, params, curve.mu, n, pw, pw1, w);
        double conv = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            conv += w.left[p] * vals[p] + w.right[p] * vals[p + 1];
        worst = std::max(worst, std::abs(vals[n] + curve.mu * conv - 1.0));
    }
    return worst;
}

namespace {

using cplx = std::complex<double>;

cplx integrand(const cplx& z, double t, double mu, const FracParams& params) {
    // principal branch z^alpha
    const cplx za = std::pow(z, params.alpha);
    return std::exp(z * t) / (z + mu * (1.0 + params.k * za));
}

// Composite 8-point Gauss-Legendre of a complex integrand over [a,b].
template <typename F>
cplx gl_segment(F&& f, double a, double b, int subintervals) {
    static const double xs[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                 0.9602898564975363};
    static const double ws[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                 0.1012285362903763};
    cplx total = 0.0;
    const double h = (b - a) / subintervals;
    for (int s = 0; s < subintervals; ++s) {
        const double mid = a + (s + 0.5) * h, half = 0.5 * h;
        cplx acc = 0.0;
        for (int i = 0; i < 4; ++i)
            acc += ws[i] * (f(mid + half * xs[i]) + f(mid - half * xs[i]));
        total += half * acc;
    }
    return total;
}

}  // namespace

ContourResult solve_contour(double mu, double t, const FracParams& params,
                            const ContourSpec& contour) {
    if (mu < 0.0) throw std::domain_error("solve_contour: mu must be >= 0");
    if (!(t > 0.0)) throw std::domain_error("solve_contour: t must be positive");

    const double phi = std::numbers::pi - contour.theta;  // ray angle
    const double r_min = contour.delta;
    const double r_max = std::max(contour.truncation, 40.0 / (t * std::cos(contour.theta)));
    const int sub = std::max(1, contour.panels / 8);

    // Arc z = delta e^{i psi}, psi in [-phi, phi], counterclockwise.
    auto arc = [&](double psi) {
        const cplx z = std::polar(r_min, psi);
        return integrand(z, t, mu, params) * cplx(0.0, 1.0) * z;
    };
    // Rays z = r e^{+-i phi}; exponential grading r = delta e^u.
    const double u_max = std::log(r_max / r_min);
    auto ray_up = [&](double u) {
        const double r = r_min * std::exp(u);
        const cplx z = std::polar(r, phi);
        return integrand(z, t, mu, params) * std::polar(r, phi);  // dz = e^{i phi} r du
    };
    auto ray_down = [&](double u) {
        const double r = r_min * std::exp(u);
        const cplx z = std::polar(r, -phi);
        return integrand(z, t, mu, params) * std::polar(r, -phi);
    };

    // Orientation: up the lower ray (from r_max to delta), around the arc,
    // out the upper ray.
    cplx total = -gl_segment(ray_down, 0.0, u_max, sub);
    total += gl_segment(arc, -phi, phi, sub);
    total += gl_segment(ray_up, 0.0, u_max, sub);
    total /= cplx(0.0, 2.0 * std::numbers::pi);

    ContourResult res{total.real(), std::abs(total.imag()), r_max};
    if (res.imag_residue > 1e-6)
        throw AccuracyError("solve_contour: imaginary residue " +
                            std::to_string(res.imag_residue) + " exceeds 1e-6 at t=" +
                            std::to_string(t) + ", mu=" + std::to_string(mu));
    return res;
}

ContourResult solve_contour(double mu, double t, const FracParams& params) {
    return solve_contour(mu, t, params, ContourSpec::for_time(t));
}

OdeResidualReport check_relaxation_ode(const RelaxationCurve& curve, const FracParams& params) {
    const auto& t = curve.mesh.nodes();
    const auto& s = curve.values;
    const std::size_t m = t.size();
    if (m < 64) throw std::invalid_argument("check_relaxation_ode: need >= 64 nodes");

    // Nonuniform 3-point derivative at every node.
    std::vector<double> ds(m);
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double hm = t[i] - t[i - 1], hp = t[i + 1] - t[i];
        ds[i] = -hp / (hm * (hm + hp)) * s[i - 1] + (hp - hm) / (hm * hp) * s[i] +
                hm / (hp * (hm + hp)) * s[i + 1];
    }
    {
        const double h0 = t[1] - t[0], h1 = t[2] - t[1];
        ds[0] = -(2 * h0 + h1) / (h0 * (h0 + h1)) * s[0] + (h0 + h1) / (h0 * h1) * s[1] -
                h0 / (h1 * (h0 + h1)) * s[2];
        const double hn = t[m - 1] - t[m - 2], hn1 = t[m - 2] - t[m - 3];
        ds[m - 1] = (2 * hn + hn1) / (hn * (hn + hn1)) * s[m - 1] -
                    (hn + hn1) / (hn * hn1) * s[m - 2] + hn / (hn1 * (hn + hn1)) * s[m - 3];
    }

    // D^alpha_{0+} s = s(0) t^{-alpha}/Gamma(1-alpha) + I^{1-alpha} s'.
    std::vector<double> dfrac(m, 0.0);
    if (params.k > 0.0) {
        auto ifrac = rl_integral(ds, curve.mesh, 1.0 - params.alpha);
        const double g1 = gamma_fn(1.0 - params.alpha);
        for (std::size_t i = 1; i < m; ++i)
            dfrac[i] = s[0] * std::pow(t[i], -params.alpha) / g1 + ifrac[i];
    }

    OdeResidualReport rep{0.0, 0.0, {}};
    rep.residuals.reserve(m - 2);
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double r = ds[i] + curve.mu * s[i] + curve.mu * params.k * dfrac[i];
        rep.residuals.push_back(r);
        rep.max_residual = std::max(rep.max_residual, std::abs(r));
        rep.l1_residual += std::abs(r) * 0.5 * (t[i + 1] - t[i - 1]);
    }
    return rep;
}

MonotonicityReport check_complete_monotonicity(const RelaxationCurve& curve, int max_order) {
    if (max_order < 0 || max_order > 3)
        throw std::invalid_argument("check_complete_monotonicity: max_order must be in [0,3]");
    const auto& t = curve.mesh.nodes();
    const auto& s = curve.values;

    // Log-uniform subset of existing nodes over (0, T].
    MonotonicityReport rep;
    const double t_lo = t[1], t_hi = t.back();
    const std::size_t targets = 33;
    std::size_t prev = 0;
    rep.node_indices.push_back(0);
    for (std::size_t i = 0; i < targets; ++i) {
        const double goal =
            t_lo * std::pow(t_hi / t_lo, double(i) / double(targets - 1));
        auto it = std::lower_bound(t.begin(), t.end(), goal);
        std::size_t idx = std::min<std::size_t>(it - t.begin(), t.size() - 1);
        if (idx > prev) {
            rep.node_indices.push_back(idx);
            prev = idx;
        }
    }

    const std::size_t npts = rep.node_indices.size();
    std::vector<double> xs(npts), dd(npts);
    for (std::size_t i = 0; i < npts; ++i) {
        xs[i] = t[rep.node_indices[i]];
        dd[i] = s[rep.node_indices[i]];
    }

    rep.all_pass = true;
    for (int order = 0; order <= max_order; ++order) {
        if (order > 0) {
            for (std::size_t i = 0; i + order < npts; ++i)
                dd[i] = (dd[i + 1] - dd[i]) / (xs[i + order] - xs[i]);
        }
        const std::size_t count = npts - order;
        double scale = 0.0;
        for (std::size_t i = 0; i < count; ++i) scale = std::max(scale, std::abs(dd[i]));
        const double slack = 1e-9 * std::max(scale, 1.0);
        const double sign = (order % 2 == 0) ? 1.0 : -1.0;
        MonotonicityReport::Order o{true, std::numeric_limits<std::size_t>::max(), 0.0};
        for (std::size_t i = 0; i < count; ++i) {
            const double v = sign * dd[i];
            o.worst = std::min(o.worst, v);
            if (v < -slack && o.pass) {
                o.pass = false;
                o.first_violation = i;
            }
        }
        rep.all_pass = rep.all_pass && o.pass;
        rep.orders.push_back(o);
    }
    return rep;
}

DecayBoundReport check_decay_bound(const RelaxationCurve& curve, const FracParams& params) {
    DecayBoundReport rep{0.0, curve.mu > 0.0};
    for (std::size_t i = 0; i < curve.mesh.size(); ++i) {
        const double t = curve.mesh[i];
        rep.c_obs = std::max(rep.c_obs,
                             curve.values[i] * (1.0 + curve.mu * angle_bracket(t, params)));
    }
    return rep;
}

}  // namespace rslab
