#include "rslab/mild.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace rslab {

const char* to_string(EvolutionStatus s) {
    switch (s) {
        case EvolutionStatus::Global: return "Global";
        case EvolutionStatus::BlewUp: return "BlewUp";
        case EvolutionStatus::Inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

void validate_common(double sigma, double gamma) {
    if (sigma > 0.0) throw std::domain_error("NonlinearitySpec: sigma must be <= 0");
    if (gamma > 0.0) throw std::domain_error("NonlinearitySpec: gamma must be <= 0");
    if (!(sigma + 2.0 * (gamma + 1.0) > 0.0))
        throw std::domain_error("NonlinearitySpec: sigma+2(gamma+1)>0 violated");
}

}  // namespace

NonlinearitySpec NonlinearitySpec::scalar(double sigma, double gamma, double rho, double eps) {
    validate_common(sigma, gamma);
    if (!(rho > 1.0)) throw std::domain_error("NonlinearitySpec: scalar rho must exceed 1");
    if (eps < 0.0) throw std::domain_error("NonlinearitySpec: weight epsilon must be >= 0");
    NonlinearitySpec nl;
    nl.sigma = sigma;
    nl.gamma = gamma;
    nl.rho = rho;
    nl.weight_epsilon = eps;
    return nl;
}

NonlinearitySpec NonlinearitySpec::system(double sigma, double gamma, double rho1, double rho2,
                                          double eps) {
    validate_common(sigma, gamma);
    if (!(rho1 >= 1.0 && rho2 >= 1.0))
        throw std::domain_error("NonlinearitySpec: system exponents must be >= 1");
    if (!(rho1 * rho2 > 1.0))
        throw std::domain_error("NonlinearitySpec: rho1*rho2 must exceed 1");
    if (eps < 0.0) throw std::domain_error("NonlinearitySpec: weight epsilon must be >= 0");
    NonlinearitySpec nl;
    nl.sigma = sigma;
    nl.gamma = gamma;
    nl.rho1 = rho1;
    nl.rho2 = rho2;
    nl.is_system = true;
    nl.weight_epsilon = eps;
    return nl;
}

double admissible_q(int dim, double r, double p) {
    if (!(r > 1.0)) throw std::domain_error("admissible triplet requires r > 1");
    if (!(p > r)) throw std::domain_error("admissible triplet requires p > r");
    const double inv_q = 0.5 * dim * (1.0 / r - 1.0 / p);
    if (!(inv_q < 1.0))
        throw std::domain_error(
            "admissible triplet requires p < N r/(N-2r)_+ (i.e. N/2(1/r-1/p) < 1)");
    return 1.0 / inv_q;
}

namespace {

using Spectrum = std::vector<std::complex<double>>;

std::vector<double> sigma_weight(const Grid& grid, const NonlinearitySpec& nl) {
    std::vector<double> w(grid.total_points(), 1.0);
    if (nl.sigma == 0.0) return w;
    double eps = nl.weight_epsilon;
    if (eps == 0.0) eps = grid.cell_width();  // default regularization: one cell
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = std::pow(grid.radius2(i) + eps * eps, 0.5 * nl.sigma);
    return w;
}

// int_{t_{j-1}}^{t_j} s^gamma ds, exact moments (gamma in (-1, 0])
std::vector<double> gamma_panel_weights(const TimeMesh& mesh, double gamma) {
    std::vector<double> w(mesh.size(), 0.0);
    for (std::size_t j = 1; j < mesh.size(); ++j)
        w[j] = detail::weight_moment0(mesh[j - 1], mesh[j], gamma);
    return w;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double pos_pow(double v, double rho) { return v <= 0.0 ? 0.0 : std::pow(v, rho); }

struct MarchState {
    EvolutionStatus status = EvolutionStatus::Global;
    double t_blow = -1.0;
    bool stopped = false;
};

}  // namespace

EvolutionRecord duhamel_evolve(const Field& u0, const FracParams& params,
                               const NonlinearitySpec& nl, const TimeMesh& mesh, double r,
                               double p, const EvolveOptions& options) {
    if (nl.is_system)
        throw std::invalid_argument("duhamel_evolve: scalar solver given a system spec");
    if (!mesh.is_uniform())
        throw std::invalid_argument(
            "duhamel_evolve: mesh must be uniform (lags must align with nodes)");
    const Grid& grid = u0.grid;
    const std::size_t npts = grid.total_points();
    {
        double mx = max_abs(u0.values);
        for (double v : u0.values)
            if (v < -1e-12 * std::max(mx, 1.0))
                throw std::invalid_argument("duhamel_evolve: u0 must be nonnegative");
    }
    admissible_q(grid.dim, r, p);

    const std::size_t m = mesh.size();
    EvolutionRecord rec{mesh, 0,  {}, {}, EvolutionStatus::Global, -1.0, 0.0, 1, r, p,
                        true, {}, {}, {}};
    rec.source_enabled = options.source_enabled;
    rec.blow_threshold =
        options.blow_threshold.value_or(options.blow_threshold_factor * lp_norm(u0, r));

    SpectralPropagator prop(grid, params, mesh);
    const auto wsig = sigma_weight(grid, nl);
    const auto wgam = gamma_panel_weights(mesh, nl.gamma);

    const Spectrum u0_hat = fft_forward(u0);
    std::vector<Spectrum> history;  // spectra of w_sigma u^rho at nodes 1..n
    history.reserve(m);

    Field u = u0;
    rec.norms_r.push_back(lp_norm(u0, r));
    rec.norms_p.push_back(lp_norm(u0, p));
    if (options.store_snapshots) rec.snapshots.push_back(u0);
    rec.nodes_marched = 1;

    MarchState st;
    for (std::size_t n = 1; n < m && !st.stopped; ++n) {
        // explicit part: S(t_n) u0 + sum_{j<n} w_j S(t_n - t_j) N_j
        Spectrum acc(u0_hat);
        prop.multiply_lag(acc, n);
        for (std::size_t j = 1; j < n && j <= history.size(); ++j) {
            Spectrum term(history[j - 1]);
            prop.multiply_lag(term, n - j);
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += wgam[j] * term[i];
        }
        Field base = fft_inverse(grid, std::move(acc));

        if (!options.source_enabled) {
            u = std::move(base);
        } else {
            // Implicit last panel: u = b + lam u^rho, pointwise decoupled.
            // F(u) = u - b - lam u^rho is concave with F(b) <= 0, so Newton
            // from b climbs monotonically to the smallest root; hitting
            // F' <= 0 with F < 0 certifies the root is gone (the point
            // escapes to blow-up within this step).
            u = base;
            bool any_escape = false, newton_stuck = false;
            for (std::size_t i = 0; i < npts; ++i) {
                const double lam = wgam[n] * wsig[i];
                const double b = base.values[i];
                if (lam == 0.0 || b <= 0.0) continue;  // root is b itself
                double x = b;
                bool solved = false;
                for (int it = 0; it < 60; ++it) {
                    const double xp = pos_pow(x, nl.rho - 1.0);
                    const double fval = x - b - lam * xp * x;
                    const double fprime = 1.0 - lam * nl.rho * xp;
                    if (std::abs(fval) <= options.picard_tol * std::max(1.0, x)) {
                        solved = true;
                        break;
                    }
                    if (fprime <= 1e-12) break;  // past the tangency: no root
                    x -= fval / fprime;
                }
                if (solved) {
                    u.values[i] = x;
                } else if (std::isfinite(x)) {
                    u.values[i] = x;
                    any_escape = true;
                } else {
                    newton_stuck = true;
                    break;
                }
            }
            if (newton_stuck) {
                st.status = EvolutionStatus::Inconclusive;
                st.stopped = true;
            } else if (any_escape || lp_norm(u, r) >= rec.blow_threshold) {
                // iterate the (pointwise monotone) map until the norm
                // certifies the threshold crossing
                bool crossed = lp_norm(u, r) >= rec.blow_threshold;
                for (int it = 0; it < 2000 && !crossed; ++it) {
                    bool finite = true;
                    for (std::size_t i = 0; i < npts; ++i) {
                        u.values[i] =
                            base.values[i] + wgam[n] * wsig[i] * pos_pow(u.values[i], nl.rho);
                        if (!std::isfinite(u.values[i])) finite = false;
                    }
                    crossed = !finite || lp_norm(u, r) >= rec.blow_threshold;
                }
                if (crossed) {
                    st.status = EvolutionStatus::BlewUp;
                    st.t_blow = mesh[n];
                } else {
                    st.status = EvolutionStatus::Inconclusive;
                }
                st.stopped = true;
            }
        }

        const double nr = lp_norm(u, r);
        rec.norms_r.push_back(nr);
        rec.norms_p.push_back(lp_norm(u, p));
        if (options.store_snapshots) rec.snapshots.push_back(u);
        rec.nodes_marched = n + 1;

        if (!st.stopped) {
            if (nr >= rec.blow_threshold) {
                st.status = EvolutionStatus::BlewUp;
                st.t_blow = mesh[n];
                st.stopped = true;
            } else {
                double mx = max_abs(u.values), mn = 0.0;
                for (double v : u.values) mn = std::min(mn, v);
                if (mn < -1e-6 * std::max(mx, 1e-300))
                    throw PositivityViolation(
                        "duhamel_evolve: field dipped below -1e-6*max at t = " +
                        std::to_string(mesh[n]));
            }
        }
        if (!st.stopped && options.source_enabled) {
            Field src = u;
            for (std::size_t i = 0; i < npts; ++i)
                src.values[i] = wsig[i] * pos_pow(u.values[i], nl.rho);
            history.push_back(fft_forward(src));
        }
    }

    rec.status = st.status;
    rec.t_blow = st.t_blow;
    return rec;
}

EvolutionRecord duhamel_evolve_system(const Field& u0, const Field& v0,
                                      const FracParams& params, const NonlinearitySpec& nl,
                                      const TimeMesh& mesh, double r, double p,
                                      const EvolveOptions& options) {
    if (!nl.is_system)
        throw std::invalid_argument("duhamel_evolve_system: system solver given a scalar spec");
    if (!(u0.grid == v0.grid))
        throw std::invalid_argument("duhamel_evolve_system: component grids differ");
    if (!mesh.is_uniform())
        throw std::invalid_argument(
            "duhamel_evolve_system: mesh must be uniform (lags must align with nodes)");
    const Grid& grid = u0.grid;
    const std::size_t npts = grid.total_points();
    for (const Field* f : {&u0, &v0}) {
        double mx = max_abs(f->values);
        for (double v : f->values)
            if (v < -1e-12 * std::max(mx, 1.0))
                throw std::invalid_argument("duhamel_evolve_system: data must be nonnegative");
    }
    admissible_q(grid.dim, r, p);

    const std::size_t m = mesh.size();
    EvolutionRecord rec{mesh, 0,  {}, {}, EvolutionStatus::Global, -1.0, 0.0, 2, r, p,
                        true, {}, {}, {}};
    rec.source_enabled = options.source_enabled;
    rec.blow_threshold = options.blow_threshold.value_or(
        options.blow_threshold_factor * std::max(lp_norm(u0, r), lp_norm(v0, r)));

    SpectralPropagator prop(grid, params, mesh);
    const auto wsig = sigma_weight(grid, nl);
    const auto wgam = gamma_panel_weights(mesh, nl.gamma);

    const Spectrum u0_hat = fft_forward(u0), v0_hat = fft_forward(v0);
    std::vector<Spectrum> hist_u, hist_v;  // sources: w_sig v^rho1 (for u), w_sig u^rho2 (for v)

    Field u = u0, v = v0;
    auto combined = [&](const Field& a, const Field& b, double q) {
        return std::max(lp_norm(a, q), lp_norm(b, q));
    };
    rec.norms_r.push_back(combined(u0, v0, r));
    rec.norms_p.push_back(combined(u0, v0, p));
    if (options.store_snapshots) {
        rec.snapshots.push_back(u0);
        rec.snapshots_v.push_back(v0);
    }
    rec.nodes_marched = 1;

    MarchState st;
    for (std::size_t n = 1; n < m && !st.stopped; ++n) {
        Spectrum acc_u(u0_hat), acc_v(v0_hat);
        prop.multiply_lag(acc_u, n);
        prop.multiply_lag(acc_v, n);
        for (std::size_t j = 1; j < n && j <= hist_u.size(); ++j) {
            Spectrum term_u(hist_u[j - 1]), term_v(hist_v[j - 1]);
            prop.multiply_lag(term_u, n - j);
            prop.multiply_lag(term_v, n - j);
            for (std::size_t i = 0; i < acc_u.size(); ++i) {
                acc_u[i] += wgam[j] * term_u[i];
                acc_v[i] += wgam[j] * term_v[i];
            }
        }
        Field base_u = fft_inverse(grid, std::move(acc_u));
        Field base_v = fft_inverse(grid, std::move(acc_v));

        if (!options.source_enabled) {
            u = std::move(base_u);
            v = std::move(base_v);
        } else {
            // Eliminate each component pointwise (u = b_u + lam (b_v + lam
            // u^{rho2})^{rho1} and the v-analog) and solve both by the same
            // concave-Newton scheme; identical code paths keep the symmetric
            // case u0 = v0, rho1 = rho2 exactly componentwise equal.
            u = base_u;
            v = base_v;
            bool any_escape = false, newton_stuck = false;
            auto solve_eliminated = [&](double own_b, double other_b, double own_rho,
                                        double other_rho, double lam, bool& escaped) {
                double x = own_b;
                escaped = false;
                for (int it = 0; it < 60; ++it) {
                    const double inner = other_b + lam * pos_pow(x, other_rho);
                    const double gval = own_b + lam * pos_pow(inner, own_rho);
                    const double fval = x - gval;
                    if (std::abs(fval) <= options.picard_tol * std::max(1.0, std::abs(x)))
                        return x;
                    const double gprime = lam * lam * own_rho * other_rho *
                                          pos_pow(inner, own_rho - 1.0) *
                                          pos_pow(x, other_rho - 1.0);
                    if (1.0 - gprime <= 1e-12) break;  // no bounded root
                    x -= fval / (1.0 - gprime);
                }
                escaped = true;
                return x;
            };
            for (std::size_t i = 0; i < npts; ++i) {
                const double lam = wgam[n] * wsig[i];
                if (lam == 0.0) continue;
                bool eu = false, ev = false;
                const double xu = solve_eliminated(base_u.values[i], base_v.values[i], nl.rho1,
                                                   nl.rho2, lam, eu);
                const double xv = solve_eliminated(base_v.values[i], base_u.values[i], nl.rho2,
                                                   nl.rho1, lam, ev);
                if (!std::isfinite(xu) || !std::isfinite(xv)) {
                    newton_stuck = true;
                    break;
                }
                u.values[i] = xu;
                v.values[i] = xv;
                if (eu || ev) any_escape = true;
            }
            if (newton_stuck) {
                st.status = EvolutionStatus::Inconclusive;
                st.stopped = true;
            } else if (any_escape || combined(u, v, r) >= rec.blow_threshold) {
                bool crossed = combined(u, v, r) >= rec.blow_threshold;
                for (int it = 0; it < 2000 && !crossed; ++it) {
                    bool finite = true;
                    for (std::size_t i = 0; i < npts; ++i) {
                        const double lam = wgam[n] * wsig[i];
                        const double nu = base_u.values[i] + lam * pos_pow(v.values[i], nl.rho1);
                        const double nv = base_v.values[i] + lam * pos_pow(u.values[i], nl.rho2);
                        u.values[i] = nu;
                        v.values[i] = nv;
                        if (!std::isfinite(nu) || !std::isfinite(nv)) finite = false;
                    }
                    crossed = !finite || combined(u, v, r) >= rec.blow_threshold;
                }
                if (crossed) {
                    st.status = EvolutionStatus::BlewUp;
                    st.t_blow = mesh[n];
                } else {
                    st.status = EvolutionStatus::Inconclusive;
                }
                st.stopped = true;
            }
        }

        const double nr = combined(u, v, r);
        rec.norms_r.push_back(nr);
        rec.norms_p.push_back(combined(u, v, p));
        if (options.store_snapshots) {
            rec.snapshots.push_back(u);
            rec.snapshots_v.push_back(v);
        }
        rec.nodes_marched = n + 1;

        if (!st.stopped) {
            if (nr >= rec.blow_threshold) {
                st.status = EvolutionStatus::BlewUp;
                st.t_blow = mesh[n];
                st.stopped = true;
            } else {
                for (const Field* f : {&u, &v}) {
                    double mx = max_abs(f->values), mn = 0.0;
                    for (double w : f->values) mn = std::min(mn, w);
                    if (mn < -1e-6 * std::max(mx, 1e-300))
                        throw PositivityViolation(
                            "duhamel_evolve_system: field dipped below -1e-6*max at t = " +
                            std::to_string(mesh[n]));
                }
            }
        }
        if (!st.stopped && options.source_enabled) {
            Field su = u, sv = v;
            for (std::size_t i = 0; i < npts; ++i) {
                su.values[i] = wsig[i] * pos_pow(v.values[i], nl.rho1);
                sv.values[i] = wsig[i] * pos_pow(u.values[i], nl.rho2);
            }
            hist_u.push_back(fft_forward(su));
            hist_v.push_back(fft_forward(sv));
        }
    }

    rec.status = st.status;
    rec.t_blow = st.t_blow;
    return rec;
}

RadiusResult contraction_radius(const NonlinearitySpec& nl, int dim, double p, double r,
                                double q, double c_op) {
    if (nl.is_system)
        throw std::invalid_argument("contraction_radius: scalar-problem diagnostic");
    if (!(c_op > 0.0)) throw std::domain_error("contraction_radius: C_op must be positive");
    if (!(r > 1.0)) throw std::domain_error("contraction_radius: requires r > 1");
    const double rho = nl.rho;
    const double arg1 = 1.0 - dim * (rho - 1.0) / (2.0 * p) + 0.5 * nl.sigma;
    const double arg2 = 1.0 + nl.gamma - rho / q;
    if (!(arg1 > 0.0))
        throw std::domain_error(
            "contraction_radius: regime violated, needs p > N(rho-1)/(2+sigma) "
            "(first Beta argument nonpositive)");
    if (!(arg2 > 0.0))
        throw std::domain_error(
            "contraction_radius: regime violated, needs rho/q < 1+gamma "
            "(second Beta argument nonpositive; p too close to r*rho)");
    const double b1 = beta_fn(arg1, arg2);
    return {std::pow(2.0 * c_op * b1, 1.0 / (1.0 - rho)), b1};
}

double local_existence_horizon(double norm_u0_r, const NonlinearitySpec& nl, int dim, double r,
                               double p, double q, double c_op) {
    if (nl.is_system)
        throw std::invalid_argument("local_existence_horizon: scalar-problem diagnostic");
    if (!(norm_u0_r > 0.0))
        throw std::domain_error("local_existence_horizon: norm must be positive");
    const double rho = nl.rho;
    const double r_c = dim * (rho - 1.0) / (nl.sigma + 2.0 * nl.gamma + 2.0);
    if (!(r > r_c))
        throw std::domain_error("local_existence_horizon: requires r > r_c = " +
                                std::to_string(r_c));
    const double denom = dim * (rho - 1.0) / (2.0 * r) - 0.5 * nl.sigma - nl.gamma - 1.0;
    const double b1 = contraction_radius(nl, dim, p, r, q, c_op).b1;
    const double base =
        std::pow(2.0, rho) * std::pow(c_op, rho) * b1 * std::pow(norm_u0_r, rho - 1.0);
    return std::pow(base, 1.0 / denom);
}

}  // namespace rslab
