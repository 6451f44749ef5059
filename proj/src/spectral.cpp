#include "rslab/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace rslab {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// FFTW planning is not thread-safe; execution on caller arrays is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

PlanPair& plans_for(const Grid& grid) {
    static std::unordered_map<std::uint64_t, PlanPair> cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    const std::uint64_t key =
        (std::uint64_t(grid.dim) << 40) | std::uint64_t(grid.points_per_axis);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const int n = int(grid.points_per_axis);
    std::vector<double> real(grid.total_points());
    std::vector<std::complex<double>> cplx(grid.spectral_size());
    auto* rp = real.data();
    auto* cp = reinterpret_cast<fftw_complex*>(cplx.data());
    PlanPair pp;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (grid.dim == 1) {
        pp.fwd = fftw_plan_dft_r2c_1d(n, rp, cp, flags);
        pp.bwd = fftw_plan_dft_c2r_1d(n, cp, rp, flags);
    } else {
        pp.fwd = fftw_plan_dft_r2c_2d(n, n, rp, cp, flags);
        pp.bwd = fftw_plan_dft_c2r_2d(n, n, cp, rp, flags);
    }
    return cache.emplace(key, pp).first->second;
}

}  // namespace

Grid::Grid(int dim_, std::size_t points_per_axis_, double box_half_length_)
    : dim(dim_), points_per_axis(points_per_axis_), box_half_length(box_half_length_) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("Grid: dim must be 1 or 2");
    if (points_per_axis < 64 || !is_power_of_two(points_per_axis))
        throw std::invalid_argument("Grid: points_per_axis must be a power of two >= 64");
    if (!(box_half_length > 0.0))
        throw std::invalid_argument("Grid: box_half_length must be positive");
}

std::size_t Grid::total_points() const {
    return dim == 1 ? points_per_axis : points_per_axis * points_per_axis;
}

std::size_t Grid::spectral_size() const {
    const std::size_t half = points_per_axis / 2 + 1;
    return dim == 1 ? half : points_per_axis * half;
}

double Grid::cell_volume() const {
    const double dx = cell_width();
    return dim == 1 ? dx : dx * dx;
}

std::array<double, 2> Grid::point(std::size_t flat) const {
    if (dim == 1) return {coordinate(flat), 0.0};
    const std::size_t n = points_per_axis;
    return {coordinate(flat / n), coordinate(flat % n)};
}

double Grid::radius2(std::size_t flat) const {
    const auto p = point(flat);
    return p[0] * p[0] + p[1] * p[1];
}

std::int64_t Grid::mode_key(std::size_t flat) const {
    const std::int64_t n = std::int64_t(points_per_axis);
    if (dim == 1) return std::int64_t(flat) * std::int64_t(flat);
    const std::int64_t half = n / 2 + 1;
    std::int64_t f0 = std::int64_t(flat) / half;
    const std::int64_t f1 = std::int64_t(flat) % half;
    if (f0 > n / 2) f0 -= n;
    return f0 * f0 + f1 * f1;
}

double Grid::mode_mu(std::int64_t key) const {
    const double unit = std::numbers::pi / box_half_length;
    return unit * unit * double(key);
}

Field::Field(Grid grid_, std::vector<double> values_)
    : grid(grid_), values(std::move(values_)) {
    if (values.size() != grid.total_points())
        throw std::invalid_argument("Field: values length inconsistent with grid");
}

Field Field::zero(const Grid& grid) {
    return Field(grid, std::vector<double>(grid.total_points(), 0.0));
}

Field make_gaussian(const Grid& grid, double amplitude, double width) {
    std::vector<double> v(grid.total_points());
    const double inv = 1.0 / (2.0 * width * width);
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = amplitude * std::exp(-grid.radius2(i) * inv);
    return Field(grid, std::move(v));
}

Field make_power_law(const Grid& grid, double a, double exponent) {
    std::vector<double> v(grid.total_points());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = std::pow(a * a + grid.radius2(i), 0.5 * exponent);
    return Field(grid, std::move(v));
}

Field make_homogeneous_odd(const Grid& grid, double degree) {
    if (!(degree < 0.0))
        throw std::invalid_argument("make_homogeneous_odd: degree must be negative");
    std::vector<double> v(grid.total_points(), 0.0);
    const double h = grid.cell_width();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto p = grid.point(i);
        const double r2 = grid.radius2(i);
        if (r2 < 0.25 * h * h || p[0] == 0.0 || p[0] <= -grid.box_half_length + 0.5 * h)
            continue;
        v[i] = (p[0] > 0.0 ? 1.0 : -1.0) * std::pow(r2, 0.5 * degree);
    }
    return Field(grid, std::move(v));
}

Field make_indicator(const Grid& grid, double half_extent) {
    // half-open [-half_extent, half_extent): discrete measure matches the
    // continuum one exactly when the endpoints are grid points
    std::vector<double> v(grid.total_points(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto p = grid.point(i);
        if (p[0] >= -half_extent && p[0] < half_extent) v[i] = 1.0;
    }
    return Field(grid, std::move(v));
}

double lp_norm(const Field& field, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : field.values) m = std::max(m, std::abs(v));
        return m;
    }
    if (!(p >= 1.0)) throw std::domain_error("lp_norm: p must be >= 1 or infinity");
    double acc = 0.0;
    for (double v : field.values) acc += std::pow(std::abs(v), p);
    return std::pow(acc * field.grid.cell_volume(), 1.0 / p);
}

std::vector<std::complex<double>> fft_forward(const Field& field) {
    auto& pp = plans_for(field.grid);
    std::vector<double> in(field.values);  // r2c may destroy input
    std::vector<std::complex<double>> out(field.grid.spectral_size());
    fftw_execute_dft_r2c(pp.fwd, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

Field fft_inverse(const Grid& grid, std::vector<std::complex<double>> spectrum) {
    if (spectrum.size() != grid.spectral_size())
        throw std::invalid_argument("fft_inverse: spectrum size mismatch");
    auto& pp = plans_for(grid);
    std::vector<double> out(grid.total_points());
    fftw_execute_dft_c2r(pp.bwd, reinterpret_cast<fftw_complex*>(spectrum.data()), out.data());
    const double scale = 1.0 / double(grid.total_points());
    for (double& v : out) v *= scale;
    return Field(grid, std::move(out));
}

Field apply_multiplier(const Field& field, const std::function<double(double)>& multiplier) {
    for (double v : field.values)
        if (!std::isfinite(v))
            throw std::invalid_argument("apply_multiplier: non-finite input value");
    auto spec = fft_forward(field);
    const auto& grid = field.grid;
    // one multiplier evaluation per distinct eigenvalue
    std::unordered_map<std::int64_t, double> cache;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const auto key = grid.mode_key(i);
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, multiplier(grid.mode_mu(key))).first;
        spec[i] *= it->second;
    }
    return fft_inverse(grid, std::move(spec));
}

Field apply_S(double t, const Field& field, const FracParams& params, std::size_t time_nodes) {
    if (t < 0.0) throw std::domain_error("apply_S: t must be nonnegative");
    for (double v : field.values)
        if (!std::isfinite(v)) throw std::invalid_argument("apply_S: non-finite input value");
    if (t == 0.0) return field;
    auto mesh = TimeMesh::graded(t, time_nodes, 2.0);
    SpectralPropagator prop(field.grid, params, mesh);
    return prop.apply_at_node(field, mesh.size() - 1);
}

SpectralPropagator::SpectralPropagator(const Grid& grid, const FracParams& params,
                                       const TimeMesh& mesh)
    : grid_(grid), mesh_(mesh) {
    std::unordered_map<std::int64_t, std::uint32_t> index;
    std::vector<std::int64_t> keys;
    mode2distinct_.resize(grid_.spectral_size());
    for (std::size_t i = 0; i < mode2distinct_.size(); ++i) {
        const auto key = grid_.mode_key(i);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, std::uint32_t(keys.size())).first;
            keys.push_back(key);
        }
        mode2distinct_[i] = it->second;
    }
    std::vector<double> mus(keys.size());
    for (std::size_t d = 0; d < keys.size(); ++d) mus[d] = grid_.mode_mu(keys[d]);
    table_ = solve_volterra_family(mus, params, mesh_);
}

void SpectralPropagator::multiply_lag(std::vector<std::complex<double>>& spectrum,
                                      std::size_t lag_node) const {
    if (spectrum.size() != mode2distinct_.size())
        throw std::invalid_argument("SpectralPropagator: spectrum size mismatch");
    if (lag_node >= mesh_.size())
        throw std::invalid_argument("SpectralPropagator: lag node out of range");
    for (std::size_t i = 0; i < spectrum.size(); ++i)
        spectrum[i] *= table_[mode2distinct_[i]][lag_node];
}

Field SpectralPropagator::apply_at_node(const Field& field, std::size_t node) const {
    auto spec = fft_forward(field);
    multiply_lag(spec, node);
    return fft_inverse(grid_, std::move(spec));
}

namespace {

struct SlopeFit {
    double slope;
    double intercept;
};

SlopeFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    return {(n * sxy - sx * sy) / denom, (sy * sxx - sx * sxy) / denom};
}

}  // namespace

DecayFit measure_decay_exponent(const Field& u0, const FracParams& params, double r, double p,
                                const std::vector<double>& times) {
    const int N = u0.grid.dim;
    if (!(r > 1.0 && r < p))
        throw std::domain_error("measure_decay_exponent: need 1 < r < p");
    const double rho_exp = 0.5 * N * (1.0 / r - 1.0 / p);
    if (!(rho_exp < 1.0))
        throw std::domain_error(
            "measure_decay_exponent: inadmissible (r,p): N/2(1/r-1/p) must be < 1");
    if (times.size() < 3)
        throw std::invalid_argument("measure_decay_exponent: need at least 3 times");
    const auto [tmin, tmax] = std::minmax_element(times.begin(), times.end());
    if (*tmax / *tmin < std::pow(10.0, 1.5))
        throw std::invalid_argument("measure_decay_exponent: times must span >= 1.5 decades");

    DecayFit fit;
    fit.predicted_slope = -rho_exp;
    fit.times = times;
    const double norm_r = lp_norm(u0, r);

    // one Volterra table per distinct eigenvalue serves every probe time:
    // backbone mesh over [0, t_max] with the probes merged in as nodes
    std::vector<double> nodes = TimeMesh::graded(*tmax, 160, 2.0).nodes();
    for (double t : times)
        if (t < *tmax) nodes.push_back(t);
    std::sort(nodes.begin(), nodes.end());
    std::vector<double> merged{0.0};
    for (double t : nodes)
        if (t > merged.back() * (1.0 + 1e-12) && t > 0.0) merged.push_back(t);
    TimeMesh mesh{merged};
    SpectralPropagator prop(u0.grid, params, mesh);
    std::vector<std::size_t> probe_idx;
    for (double t : times) {
        const auto& ns = mesh.nodes();
        auto it = std::lower_bound(ns.begin(), ns.end(), t * (1.0 - 1e-9));
        probe_idx.push_back(std::size_t(it - ns.begin()));
    }

    std::vector<double> logb, logn;
    fit.sup_ratio = 0.0;
    Field last = u0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        Field ut = prop.apply_at_node(u0, probe_idx[i]);
        const double b = angle_bracket(times[i], params);
        const double n = lp_norm(ut, p);
        fit.brackets.push_back(b);
        fit.norms.push_back(n);
        logb.push_back(std::log(b));
        logn.push_back(std::log(n));
        fit.sup_ratio = std::max(fit.sup_ratio, std::pow(b, rho_exp) * n / norm_r);
        if (times[i] == *tmax) last = std::move(ut);
    }
    fit.fitted_slope = least_squares(logb, logn).slope;

    // boundary wrap-around diagnostic: |u| mass in the outer 10% shell
    double total = 0.0, shell = 0.0;
    const double edge = 0.9 * last.grid.box_half_length;
    for (std::size_t i = 0; i < last.values.size(); ++i) {
        const auto pt = last.grid.point(i);
        const double m = std::abs(last.values[i]);
        total += m;
        const double linf =
            last.grid.dim == 1 ? std::abs(pt[0]) : std::max(std::abs(pt[0]), std::abs(pt[1]));
        if (linf > edge) shell += m;
    }
    fit.boundary_mass_warning = total > 0.0 && shell / total > 0.01;
    return fit;
}

ContinuityReport check_strong_continuity(
    const Field& u0, const std::function<Field(double, const Field&)>& propagator,
    const std::vector<double>& t_sequence) {
    for (std::size_t i = 1; i < t_sequence.size(); ++i)
        if (!(t_sequence[i] < t_sequence[i - 1]))
            throw std::invalid_argument("check_strong_continuity: times must decrease");
    ContinuityReport rep;
    rep.times = t_sequence;
    const double base = lp_norm(u0, 2.0);
    for (double t : t_sequence) {
        Field ut = propagator(t, u0);
        for (std::size_t i = 0; i < ut.values.size(); ++i) ut.values[i] -= u0.values[i];
        rep.rel_errors.push_back(lp_norm(ut, 2.0) / base);
    }
    rep.monotone = true;
    for (std::size_t i = 1; i < rep.rel_errors.size(); ++i)
        if (rep.rel_errors[i] > rep.rel_errors[i - 1] * (1.0 + 1e-12)) rep.monotone = false;
    rep.small_at_last = rep.rel_errors.empty() ? false : rep.rel_errors.back() < 0.01;
    return rep;
}

ContinuityReport check_strong_continuity(const Field& u0, const FracParams& params,
                                         const std::vector<double>& t_sequence) {
    return check_strong_continuity(
        u0, [&](double t, const Field& f) { return apply_S(t, f, params); }, t_sequence);
}

}  // namespace rslab
