#pragma once

// Resampling-factor interval from the eigenvalue-ratio profile of each view.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rmtres/detect.hpp"

namespace rmtres {

struct EstimatorConfig {
    std::size_t k = 16;
    double delta = 1.0;
    int kw = 2;            ///< kernel support width 2a (2 for linear, 4 for cubic kernels)
    double xi_max = 2.0;
    double t_mu = 2.0;

    /// First index of the search range {floor(K / xi_max), ..., K-1}.
    std::size_t range_begin() const noexcept {
        return static_cast<std::size_t>(std::floor(static_cast<double>(k) / xi_max));
    }

    void validate(std::size_t n) const {
        if (k < 3) throw InvalidConfig("K must be at least 3");
        if (k > n) {
            throw InvalidConfig("K=" + std::to_string(k) + " exceeds block size N=" + std::to_string(n));
        }
        if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidConfig("delta must be positive");
        if (kw < 1) throw InvalidConfig("k_w must be at least 1");
        if (!(xi_max > 1.0) || !std::isfinite(xi_max)) throw InvalidConfig("xi_max must exceed 1");
        if (range_begin() < 1) throw InvalidConfig("floor(K / xi_max) must be at least 1");
        if (!(t_mu > 0.0)) throw InvalidConfig("T_mu must be positive");
    }
};

struct EstimationResult {
    std::size_t p_hat = 0;
    double xi_lower = 1.0;
    double xi_upper = 2.0;
    double mu = 0.0;
    std::vector<std::size_t> per_view_p;
    std::vector<std::vector<double>> psi; ///< psi[v][i-1] = lambda_i / lambda_{i+1}, i = 1..K-1
    std::vector<std::size_t> below_set;
    std::vector<std::size_t> nearest_edge_index; ///< i_v, 1-based
    std::size_t range_begin = 0;
    bool clamped = false;

    bool contains(double xi) const noexcept { return xi >= xi_lower && xi < xi_upper; }

    friend bool operator==(const EstimationResult&, const EstimationResult&) = default;
};

/// lambda_i / lambda_{i+1}, +inf once lambda_{i+1} vanishes relative to lambda_1.
inline std::vector<double> ratio_profile(const std::vector<double>& ev) {
    std::vector<double> psi(ev.size() - 1);
    const double floor = 1e-14 * ev.front();
    for (std::size_t i = 0; i + 1 < ev.size(); ++i) {
        psi[i] = ev[i + 1] <= floor ? std::numeric_limits<double>::infinity() : ev[i] / ev[i + 1];
    }
    return psi;
}

namespace detail {

/// Peak over median on psi restricted to indices first..K-1 (1-based).
inline double peak_to_median(const std::vector<double>& psi, std::size_t first) {
    std::vector<double> sub(psi.begin() + static_cast<std::ptrdiff_t>(first - 1), psi.end());
    const double peak = *std::max_element(sub.begin(), sub.end());
    const double med = lower_median(sub);
    if (std::isinf(med)) return 1.0;
    return peak / med;
}

/// 1-based argmax over indices first..K-1; the first maximum wins.
inline std::size_t argmax_from(const std::vector<double>& psi, std::size_t first) {
    std::size_t best = first;
    for (std::size_t i = first + 1; i <= psi.size(); ++i)
        if (psi[i - 1] > psi[best - 1]) best = i;
    return best;
}

} // namespace detail

inline EstimationResult estimate(const Matrix& z, const EstimatorConfig& cfg) {
    if (!z.is_square()) throw InvalidShape("estimate expects a square block");
    const std::size_t n = z.rows();
    cfg.validate(n);

    const std::size_t k = cfg.k;
    const double beta = static_cast<double>(k) / static_cast<double>(n);
    const MpEdges mp = mp_edges(quantization_noise_variance(cfg.delta), beta);

    EstimationResult res;
    res.range_begin = cfg.range_begin();
    const std::size_t views = view_count(n, k);
    res.psi.resize(views);
    res.nearest_edge_index.resize(views);
    std::vector<bool> below(views, false);

    for (std::size_t v = 0; v < views; ++v) {
        const std::vector<double> ev = view_spectrum(z, v, k);
        res.psi[v] = ratio_profile(ev);
        if (ev.back() < mp.lower) {
            below[v] = true;
            res.below_set.push_back(v);
        }
        std::size_t iv = 0;
        for (std::size_t i = 1; i < ev.size(); ++i)
            if (std::abs(ev[i] - mp.upper) < std::abs(ev[iv] - mp.upper)) iv = i;
        res.nearest_edge_index[v] = iv + 1;
    }
    if (res.below_set.size() == views) {
        throw InsufficientViews("every view lies below the noise edge; mu is undefined");
    }

    double sum = 0.0;
    for (std::size_t v = 0; v < views; ++v)
        if (!below[v]) sum += detail::peak_to_median(res.psi[v], res.range_begin);
    res.mu = sum / static_cast<double>(views - res.below_set.size());

    res.per_view_p.assign(views, 0);
    for (std::size_t v = 0; v < views; ++v) {
        if (below[v]) continue;
        res.per_view_p[v] = res.mu >= cfg.t_mu ? detail::argmax_from(res.psi[v], res.range_begin)
                                               : res.nearest_edge_index[v];
    }

    std::vector<std::size_t> hist(k + 1, 0);
    for (std::size_t p : res.per_view_p) ++hist[p];
    res.p_hat = static_cast<std::size_t>(std::max_element(hist.begin(), hist.end()) - hist.begin());

    const double km1 = static_cast<double>(k - 1);
    const double excess = static_cast<double>(res.p_hat) - cfg.kw;
    if (res.p_hat == 0) {
        res.xi_lower = 1.0;
        res.xi_upper = cfg.xi_max;
    } else if (excess - 1.0 <= 0.0) {
        res.xi_lower = 1.0;
        res.xi_upper = cfg.xi_max;
        res.clamped = true;
    } else {
        res.xi_upper = km1 / (excess - 1.0);
        res.xi_lower = res.mu < cfg.t_mu ? 1.0 : std::max(1.0, km1 / (excess + 1.0));
        if (!(res.xi_upper > res.xi_lower)) {
            res.xi_lower = 1.0;
            res.xi_upper = cfg.xi_max;
            res.clamped = true;
        }
    }
    return res;
}

} // namespace rmtres
