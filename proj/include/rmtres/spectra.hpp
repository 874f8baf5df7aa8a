#pragma once

// Asymptotic spectra of the Toeplitz factors (Szego limits), their laws as
// functions of a uniform angle, zero-eigenvalue fractions, Marchenko-Pastur
// edges and the Weyl bounds on the signal/noise gap.

#include <cmath>
#include <string>
#include <vector>

#include "rmtres/errors.hpp"
#include "rmtres/resample.hpp"

namespace rmtres {

/// Szego limit of the AR(1) autocorrelation: 1 / (1 + rho^2 - 2 rho cos w).
inline double d_genuine(double omega, double rho) noexcept {
    return 1.0 / (1.0 + rho * rho - 2.0 * rho * std::cos(omega));
}

/// d_genuine(w) * sum_n r_hh[n] cos(n w), clamped at zero. Clamped
/// evaluations bump `clamped` when it is given.
inline double d_upscaled(double omega, double rho, const KernelAutocorr& r_hh,
                         std::size_t* clamped = nullptr) noexcept {
    const double v = d_genuine(omega, rho) * r_hh.response(omega);
    if (v < 0.0) {
        if (clamped) ++*clamped;
        return 0.0;
    }
    return v;
}

/// Law of a spectral random variable d(Omega): with probability zero_mass the
/// value is 0, otherwise Omega has constant density angular_density on
/// (0, 2 pi) and the value is transform(Omega).
struct SpectralLaw {
    double rho = 0.0;
    KernelAutocorr r_hh; ///< empty for the genuine law
    double xi = 1.0;
    double zero_mass = 0.0;
    double angular_density = 0.5 / std::numbers::pi;
    std::string kernel_name;

    bool upscaled() const noexcept { return !r_hh.lags.empty(); }

    double transform(double omega, std::size_t* clamped = nullptr) const noexcept {
        return upscaled() ? d_upscaled(omega, rho, r_hh, clamped) : d_genuine(omega, rho);
    }

    double nonzero_probability() const noexcept { return 1.0 - zero_mass; }

    std::string description() const {
        std::string s = "rho=" + std::to_string(rho);
        if (upscaled()) s += " xi=" + std::to_string(xi) + " kernel=" + kernel_name;
        return s;
    }
};

inline void require_rho(double rho) {
    if (!(rho >= 0.0 && rho < 1.0)) throw InvalidSpec("rho must lie in [0, 1)");
}

inline SpectralLaw law_genuine(double rho) {
    require_rho(rho);
    SpectralLaw law;
    law.rho = rho;
    return law;
}

/// Mixed law of the upscaled factors: mass 1 - 1/xi at zero, the remaining
/// 1/xi spread uniformly in angle through d'(w).
inline SpectralLaw law_upscaled(double rho, const ResampleSpec& spec) {
    require_rho(rho);
    spec.validate();
    if (!(spec.xi() > 1.0)) throw InvalidSpec("upscaled law needs xi > 1");
    SpectralLaw law;
    law.rho = rho;
    law.r_hh = kernel_autocorr(spec);
    law.xi = spec.xi();
    law.zero_mass = 1.0 - 1.0 / spec.xi();
    law.angular_density = 1.0 / (2.0 * std::numbers::pi * spec.xi());
    law.kernel_name = spec.kernel.name();
    return law;
}

/// Asymptotic fraction of zero eigenvalues, 1 - min{beta P(T != 0), P(D != 0)}.
inline double afze(double beta, double p_t_nonzero, double p_d_nonzero) {
    if (!(beta > 0.0 && beta <= 1.0)) throw InvalidSpec("beta must lie in (0, 1]");
    return 1.0 - std::min(beta * p_t_nonzero, p_d_nonzero);
}

/// AFZE for an upscaling factor xi (xi = 1 for genuine data): 1 - beta / xi.
inline double afze(double beta, double xi) {
    if (!(xi >= 1.0)) throw InvalidSpec("xi must be at least 1");
    return afze(beta, 1.0 / xi, 1.0 / xi);
}

inline double quantization_noise_variance(double delta) noexcept { return delta * delta / 12.0; }

struct MpEdges {
    double lower = 0.0;
    double upper = 0.0;
    double sigma_w2 = 0.0;
    double beta = 0.0;
};

/// Support of the Marchenko-Pastur law: sigma_w2 (1 -/+ sqrt(beta))^2.
inline MpEdges mp_edges(double sigma_w2, double beta) {
    if (!(sigma_w2 > 0.0)) throw InvalidSpec("noise variance must be positive");
    if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidSpec("beta must lie in [0, 1]");
    const double sb = std::sqrt(beta);
    return {sigma_w2 * (1.0 - sb) * (1.0 - sb), sigma_w2 * (1.0 + sb) * (1.0 + sb), sigma_w2, beta};
}

/// Weyl bounds around the rank-P transition of Sigma_Z = Sigma_Y + noise.
struct GapBounds {
    double noise_upper = 0.0;  ///< lambda_{P+1}(Sigma_Z) <= sigma_w2 (1 + sqrt(beta))^2
    double signal_lower = 0.0; ///< lambda_P(Sigma_Z) >= sigma_s2 lambda_-(Sigma_Y) - noise_upper
    double ratio = 0.0;        ///< lambda_P / lambda_{P+1} >= signal_lower / noise_upper
};

inline GapBounds gap_bounds(double sigma_s2, double sigma_w2, double beta, double lambda_minus_y) {
    if (!(sigma_s2 > 0.0) || !(lambda_minus_y > 0.0)) {
        throw InvalidSpec("gap bounds need positive sigma_s2 and lambda_-");
    }
    const MpEdges mp = mp_edges(sigma_w2, beta);
    GapBounds g;
    g.noise_upper = mp.upper;
    g.signal_lower = sigma_s2 * lambda_minus_y - mp.upper;
    g.ratio = g.signal_lower / g.noise_upper;
    return g;
}

/// Limiting gap bound (sigma_s2 / sigma_w2) lambda_- / (1 + sqrt(beta))^2 - 1.
inline double gap_lower_bound(double sigma_s2, double sigma_w2, double beta, double lambda_minus_y) {
    if (!(sigma_s2 > 0.0) || !(sigma_w2 > 0.0) || !(lambda_minus_y > 0.0)) {
        throw InvalidSpec("gap bound needs positive arguments");
    }
    if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidSpec("beta must lie in [0, 1]");
    const double edge = (1.0 + std::sqrt(beta)) * (1.0 + std::sqrt(beta));
    return (sigma_s2 / sigma_w2) * lambda_minus_y / edge - 1.0;
}

} // namespace rmtres
