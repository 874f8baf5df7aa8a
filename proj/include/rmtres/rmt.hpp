#pragma once

// Asymptotic eigenvalue density of Sigma_B = (1/N) B B^T for B = C S A:
// numerical eta-transform from the coupled expectations E1/E2, the Stieltjes
// relation S(-1/gamma) = gamma eta(gamma), and Stieltjes inversion.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "rmtres/errors.hpp"
#include "rmtres/spectra.hpp"

namespace rmtres {

using cplx = std::complex<double>;

struct EtaSolverConfig {
    double tolerance = 1e-6;   ///< on |E2(k) - E2(k-1)| relative to |E2|
    int max_iters = 10000;
    int panels = 64;           ///< Gauss-Legendre panels on (0, pi)
    int order = 16;            ///< nodes per panel
    double damping = 0.5;      ///< E1 <- (1-a) E1 + a E1_new
    bool newton = true;        ///< Newton polish on the scalar E1 equation

    void validate() const {
        if (!(tolerance > 0.0)) throw InvalidConfig("eta tolerance must be positive");
        if (max_iters < 1) throw InvalidConfig("max_iters must be positive");
        if (panels < 1 || order < 1) throw InvalidConfig("quadrature needs panels and order >= 1");
        if (!(damping > 0.0 && damping <= 1.0)) throw InvalidConfig("damping must lie in (0, 1]");
    }
};

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Gauss-Legendre nodes and weights on [-1, 1].
inline void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(order), 0.0);
    weights.assign(static_cast<std::size_t>(order), 0.0);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= order; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
            }
            dp = order * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[static_cast<std::size_t>(i)] = -x;
        nodes[static_cast<std::size_t>(order - 1 - i)] = x;
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(order - 1 - i)] = w;
    }
}

/// A spectral law reduced to weighted atoms: value 0 with `zero_mass`, and
/// `values[i]` with `weights[i]` (the weights sum to 1 - zero_mass).
struct DiscreteLaw {
    double zero_mass = 0.0;
    std::vector<double> values;
    std::vector<double> weights;
    std::size_t clamped = 0;
    double xi = 1.0;
    std::string description;

    double nonzero_probability() const noexcept { return 1.0 - zero_mass; }

    double mean() const noexcept {
        double s = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * values[i];
        return s;
    }

    double max_value() const noexcept {
        double m = 0.0;
        for (double v : values) m = std::max(m, v);
        return m;
    }
};

/// Composite Gauss-Legendre on (0, pi), doubled through d(w) = d(2 pi - w).
/// Panels are graded quadratically towards w = 0 where AR spectra peak.
inline DiscreteLaw discretize(const SpectralLaw& law, const EtaSolverConfig& cfg = {}) {
    cfg.validate();
    std::vector<double> gx, gw;
    gauss_legendre(cfg.order, gx, gw);
    DiscreteLaw out;
    out.zero_mass = law.zero_mass;
    out.xi = law.xi;
    out.description = law.description();
    const double scale = 2.0 * law.angular_density;
    const auto np = static_cast<double>(cfg.panels);
    for (int p = 0; p < cfg.panels; ++p) {
        const double t0 = p / np, t1 = (p + 1) / np;
        const double a = std::numbers::pi * t0 * t0, b = std::numbers::pi * t1 * t1;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t k = 0; k < gx.size(); ++k) {
            const double w = mid + half * gx[k];
            out.values.push_back(law.transform(w, &out.clamped));
            out.weights.push_back(scale * half * gw[k]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// eta / Stieltjes
// ---------------------------------------------------------------------------

struct EtaResult {
    cplx eta;
    cplx e1;
    cplx e2;
    int iterations = 0;
};

class EtaSolver {
public:
    EtaSolver(const SpectralLaw& law_d, const SpectralLaw& law_t, double beta,
              EtaSolverConfig cfg = {})
        : EtaSolver(discretize(law_d, cfg), discretize(law_t, cfg), beta, cfg) {}

    EtaSolver(DiscreteLaw d, DiscreteLaw t, double beta, EtaSolverConfig cfg = {})
        : d_(std::move(d)), t_(std::move(t)), beta_(beta), cfg_(cfg) {
        cfg_.validate();
        if (!(beta > 0.0 && beta <= 1.0)) throw InvalidSpec("beta must lie in (0, 1]");
    }

    double beta() const noexcept { return beta_; }
    const DiscreteLaw& law_d() const noexcept { return d_; }
    const DiscreteLaw& law_t() const noexcept { return t_; }
    const EtaSolverConfig& config() const noexcept { return cfg_; }

    /// eta(gamma) = E[1 / (1 + gamma beta D E2*)], iterating
    ///   E2 = E[T / (1 + gamma T E1)],  E1 = E[D / (1 + gamma beta D E2)]
    /// from E1 = e1_start (1 when absent) until E2 settles.
    EtaResult eta(cplx gamma, std::optional<cplx> e1_start = std::nullopt) const {
        if (gamma == cplx{0.0, 0.0}) return {cplx{1.0, 0.0}, d_.mean(), t_.mean(), 0};

        cplx e1 = e1_start.value_or(cplx{1.0, 0.0});
        if (cfg_.newton) {
            if (auto r = newton(gamma, e1)) return *r;
        }
        return iterate(gamma, e1);
    }

    /// S(z) = -eta(-1/z) / z.
    cplx stieltjes(cplx z, std::optional<cplx> e1_start = std::nullopt, EtaResult* detail = nullptr) const {
        const EtaResult r = eta(-1.0 / z, e1_start);
        if (detail) *detail = r;
        return -r.eta / z;
    }

private:
    cplx e2_of(cplx gamma, cplx e1, cplx* de2 = nullptr) const {
        cplx s{0.0, 0.0}, ds{0.0, 0.0};
        for (std::size_t i = 0; i < t_.values.size(); ++i) {
            const double t = t_.values[i];
            const cplx inv = 1.0 / (1.0 + gamma * t * e1);
            s += t_.weights[i] * t * inv;
            if (de2) ds -= t_.weights[i] * gamma * t * t * inv * inv;
        }
        if (de2) *de2 = ds;
        return s;
    }

    cplx e1_of(cplx gamma, cplx e2, cplx* de1 = nullptr) const {
        cplx s{0.0, 0.0}, ds{0.0, 0.0};
        const cplx gb = gamma * beta_;
        for (std::size_t i = 0; i < d_.values.size(); ++i) {
            const double d = d_.values[i];
            const cplx inv = 1.0 / (1.0 + gb * d * e2);
            s += d_.weights[i] * d * inv;
            if (de1) ds -= d_.weights[i] * gb * d * d * inv * inv;
        }
        if (de1) *de1 = ds;
        return s;
    }

    cplx eta_of(cplx gamma, cplx e2) const {
        cplx s{d_.zero_mass, 0.0};
        const cplx gb = gamma * beta_;
        for (std::size_t i = 0; i < d_.values.size(); ++i)
            s += d_.weights[i] / (1.0 + gb * d_.values[i] * e2);
        return s;
    }

    // eta must map the upper half plane of z = -1/gamma into Im S >= 0, i.e.
    // Im(eta(gamma) / gamma) >= 0 up to rounding; reject Newton roots that don't.
    static bool admissible(cplx gamma, cplx eta) {
        if (gamma.imag() == 0.0) return std::abs(eta.imag()) <= 1e-9 * std::abs(eta);
        const cplx z = -1.0 / gamma;
        const cplx s = -eta / z;
        return s.imag() >= -1e-9 * std::abs(s);
    }

    std::optional<EtaResult> newton(cplx gamma, cplx e1) const {
        constexpr int max_newton = 40;
        cplx e2 = e2_of(gamma, e1);
        for (int it = 1; it <= max_newton; ++it) {
            cplx de2, de1;
            e2 = e2_of(gamma, e1, &de2);
            const cplx f = e1_of(gamma, e2, &de1) - e1;
            const cplx fp = de1 * de2 - 1.0;
            if (!std::isfinite(std::abs(f)) || std::abs(fp) == 0.0) return std::nullopt;
            const cplx step = f / fp;
            e1 -= step;
            if (!std::isfinite(std::abs(e1))) return std::nullopt;
            if (std::abs(step) <= 1e-3 * cfg_.tolerance * std::max(std::abs(e1), 1e-300)) {
                cplx g2, g1;
                const cplx e2n = e2_of(gamma, e1, &g2);
                e1_of(gamma, e2n, &g1);
                const cplx eta = eta_of(gamma, e2n);
                // The physical root attracts E1 -> E1(E2(E1)); spurious roots repel.
                if (std::abs(g1 * g2) > 1.0 + 1e-6 || !admissible(gamma, eta)) return std::nullopt;
                return EtaResult{eta, e1, e2n, it};
            }
        }
        return std::nullopt;
    }

    EtaResult iterate(cplx gamma, cplx e1) const {
        double alpha = cfg_.damping;
        cplx e2_prev = e2_of(gamma, e1);
        std::vector<double> residuals;
        residuals.reserve(64);
        double last_residual = 0.0;
        for (int it = 1; it <= cfg_.max_iters; ++it) {
            const cplx e1_new = e1_of(gamma, e2_prev);
            e1 = (1.0 - alpha) * e1 + alpha * e1_new;
            const cplx e2 = e2_of(gamma, e1);
            last_residual = std::abs(e2 - e2_prev);
            if (last_residual <= cfg_.tolerance * std::max(std::abs(e2), 1e-300)) {
                return {eta_of(gamma, e2), e1, e2, it};
            }
            e2_prev = e2;
            // Residual growth over a 50-iteration window switches schemes.
            residuals.push_back(last_residual);
            if (residuals.size() > 50) {
                if (residuals.back() > residuals[residuals.size() - 51]) {
                    alpha = alpha < 1.0 ? 1.0 : 0.5;
                    residuals.clear();
                }
            }
        }
        throw ConvergenceFailure("eta-transform fixed point did not converge for gamma=(" +
                                     std::to_string(gamma.real()) + "," +
                                     std::to_string(gamma.imag()) + ")",
                                 last_residual);
    }

    DiscreteLaw d_;
    DiscreteLaw t_;
    double beta_;
    EtaSolverConfig cfg_;
};

// ---------------------------------------------------------------------------
// Densities
// ---------------------------------------------------------------------------

/// Imaginary offset used for Stieltjes inversion at lambda: either a fixed
/// value or a multiple of lambda (the default; keeps the smoothing uniform on
/// a log grid spanning many decades).
struct ImagOffset {
    double value = 1e-8;
    bool relative = true;

    double at(double lambda) const noexcept { return relative ? value * lambda : value; }

    static ImagOffset fixed(double nu) { return {nu, false}; }
    static ImagOffset proportional(double factor) { return {factor, true}; }
};

struct EigenPdf {
    double zero_mass = 0.0;
    std::vector<double> lambda_grid;
    std::vector<double> density;
    double beta = 0.0;
    double xi = 1.0;
    ImagOffset nu;
    std::string law;
    std::size_t clamped = 0;

    /// Trapezoid integral of the continuous part.
    double continuous_mass() const {
        double s = 0.0;
        for (std::size_t i = 1; i < lambda_grid.size(); ++i)
            s += 0.5 * (density[i] + density[i - 1]) * (lambda_grid[i] - lambda_grid[i - 1]);
        return s;
    }

    double total_mass() const { return zero_mass + continuous_mass(); }

    double first_moment() const {
        double s = 0.0;
        for (std::size_t i = 1; i < lambda_grid.size(); ++i)
            s += 0.5 * (lambda_grid[i] * density[i] + lambda_grid[i - 1] * density[i - 1]) *
                 (lambda_grid[i] - lambda_grid[i - 1]);
        return s;
    }

    /// CDF of the continuous part renormalized to 1, on the grid.
    std::vector<double> nonzero_cdf() const {
        std::vector<double> c(lambda_grid.size(), 0.0);
        for (std::size_t i = 1; i < lambda_grid.size(); ++i)
            c[i] = c[i - 1] + 0.5 * (density[i] + density[i - 1]) * (lambda_grid[i] - lambda_grid[i - 1]);
        const double total = c.empty() ? 0.0 : c.back();
        if (total > 0.0)
            for (double& v : c) v /= total;
        return c;
    }

    /// Smallest grid point where the density exceeds rel * max density.
    double lambda_minus(double rel = 1e-6) const {
        const double peak = *std::max_element(density.begin(), density.end());
        for (std::size_t i = 0; i < density.size(); ++i)
            if (density[i] > rel * peak) return lambda_grid[i];
        return 0.0;
    }

    /// Largest grid point where the density exceeds rel * max density.
    double lambda_plus(double rel = 1e-6) const {
        const double peak = *std::max_element(density.begin(), density.end());
        for (std::size_t i = density.size(); i-- > 0;)
            if (density[i] > rel * peak) return lambda_grid[i];
        return 0.0;
    }

    /// Density for sigma_s2 != 1: lambda -> sigma_s2 lambda.
    EigenPdf scaled(double sigma_s2) const {
        EigenPdf out = *this;
        for (double& l : out.lambda_grid) l *= sigma_s2;
        for (double& d : out.density) d /= sigma_s2;
        if (!out.nu.relative) out.nu.value *= sigma_s2;
        return out;
    }
};

/// Upper bound on the support: max D * max T * (1 + sqrt(beta))^2.
inline double support_upper_bound(const DiscreteLaw& d, const DiscreteLaw& t, double beta) {
    const double sb = 1.0 + std::sqrt(beta);
    return d.max_value() * t.max_value() * sb * sb;
}

/// `points` log-spaced values on [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, std::size_t points) {
    if (!(lo > 0.0 && hi > lo) || points < 2) throw InvalidConfig("log_grid needs 0 < lo < hi and >= 2 points");
    std::vector<double> g(points);
    const double step = std::log(hi / lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo * std::exp(step * static_cast<double>(i));
    g.back() = hi;
    return g;
}

struct GridConfig {
    std::size_t points = 2048;
    double lo_relative = 1e-9; ///< lower end as a fraction of the mean eigenvalue
    double hi_factor = 1.2;    ///< upper end as a multiple of support_upper_bound
};

/// Log grid from lo_relative * E[lambda] (E[lambda] = beta E[D] E[T]) to
/// hi_factor * support_upper_bound.
inline std::vector<double> default_lambda_grid(const EtaSolver& solver, GridConfig cfg = {}) {
    const double mean = solver.beta() * solver.law_d().mean() * solver.law_t().mean();
    const double lo = cfg.lo_relative * mean;
    const double hi = cfg.hi_factor * support_upper_bound(solver.law_d(), solver.law_t(), solver.beta());
    return log_grid(lo, std::max(hi, 10.0 * lo), cfg.points);
}

namespace detail {

// Warm start first; then a cold start; then a homotopy in nu that walks the
// offset down from 1e4 times the target.
inline cplx solve_stieltjes(const EtaSolver& solver, double lam, double nu, std::optional<cplx>& warm) {
    EtaResult r;
    try {
        const cplx s = solver.stieltjes({lam, nu}, warm, &r);
        warm = r.e1;
        return s;
    } catch (const ConvergenceFailure&) {
    }
    try {
        const cplx s = solver.stieltjes({lam, nu}, std::nullopt, &r);
        warm = r.e1;
        return s;
    } catch (const ConvergenceFailure&) {
    }
    std::optional<cplx> chain;
    for (double f : {1e4, 1e3, 1e2, 1e1}) {
        try {
            solver.stieltjes({lam, nu * f}, chain, &r);
            chain = r.e1;
        } catch (const ConvergenceFailure&) {
        }
    }
    const cplx s = solver.stieltjes({lam, nu}, chain, &r);
    warm = r.e1;
    return s;
}

} // namespace detail

/// Density of the nonzero eigenvalues, (1/pi) Im S(lambda + i nu) with the
/// Lorentzian of the zero-eigenvalue mass removed. The grid is swept from the
/// largest lambda down, each point warm-started from its neighbour.
inline EigenPdf eigen_pdf(const EtaSolver& solver, std::vector<double> grid, ImagOffset nu = {}) {
    if (grid.empty()) throw InvalidConfig("empty lambda grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
            throw InvalidConfig("lambda grid must be positive and increasing");
        }
    }
    if (!(nu.value > 0.0)) throw InvalidConfig("imaginary offset nu must be positive");

    const DiscreteLaw& d = solver.law_d();
    const DiscreteLaw& t = solver.law_t();
    EigenPdf pdf;
    pdf.beta = solver.beta();
    pdf.zero_mass = afze(solver.beta(), t.nonzero_probability(), d.nonzero_probability());
    pdf.nu = nu;
    pdf.xi = std::max(d.xi, t.xi);
    pdf.law = d.description;
    pdf.clamped = d.clamped + t.clamped;
    pdf.lambda_grid = std::move(grid);
    pdf.density.resize(pdf.lambda_grid.size());

    std::optional<cplx> warm;
    for (std::size_t i = pdf.lambda_grid.size(); i-- > 0;) {
        const double lam = pdf.lambda_grid[i];
        const double off = nu.at(lam);
        cplx s;
        try {
            s = detail::solve_stieltjes(solver, lam, off, warm);
        } catch (const ConvergenceFailure& e) {
            throw ConvergenceFailure("eigen_pdf failed at lambda=" + std::to_string(lam) + ": " + e.what(),
                                     e.residual());
        }
        const double mass_term = pdf.zero_mass * off / (lam * lam + off * off);
        pdf.density[i] = std::max(0.0, (s.imag() - mass_term) / std::numbers::pi);
    }
    return pdf;
}

/// eigen_pdf on the default grid.
inline EigenPdf eigen_pdf(const EtaSolver& solver, ImagOffset nu = {}, GridConfig grid = {}) {
    return eigen_pdf(solver, default_lambda_grid(solver, grid), nu);
}

/// Convenience: density for the laws of D and T at aspect ratio beta.
inline EigenPdf eigen_pdf(const SpectralLaw& law_d, const SpectralLaw& law_t, double beta,
                          EtaSolverConfig cfg = {}, ImagOffset nu = {}, GridConfig grid = {}) {
    const EtaSolver solver(law_d, law_t, beta, cfg);
    return eigen_pdf(solver, nu, grid);
}

} // namespace rmtres
