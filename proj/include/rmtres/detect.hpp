#pragma once

// Resampling detector: smallest signal eigenvalue of the sliding N x K views
// compared against the Marchenko-Pastur edge of the quantization noise.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rmtres/armodel.hpp"
#include "rmtres/errors.hpp"
#include "rmtres/spectra.hpp"

namespace rmtres {

/// Descending eigenvalues of (1/N) Z_K Z_K^T restricted to its K possibly
/// nonzero ones, computed from the K x K Gram (1/N) Z_K^T Z_K.
inline std::vector<double> view_spectrum(const Matrix& z, std::size_t v, std::size_t k) {
    const Matrix zk = crop_view(z, v, k);
    return sym_eigenvalues(gram_cols(zk, 1.0 / static_cast<double>(z.rows())));
}

/// Element ceil(n/2)-1 of the sorted values.
inline double lower_median(std::vector<double> v) {
    if (v.empty()) throw InvalidInput("median of an empty set");
    std::sort(v.begin(), v.end());
    return v[(v.size() + 1) / 2 - 1];
}

struct DetectorConfig {
    std::size_t k = 9;
    double delta = 1.0;
    std::optional<double> custom_threshold; ///< theoretical MP edge when empty

    void validate(std::size_t n) const {
        if (k < 2) throw InvalidConfig("K must be at least 2");
        if (k > n) {
            throw InvalidConfig("K=" + std::to_string(k) + " exceeds block size N=" + std::to_string(n));
        }
        if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidConfig("delta must be positive");
        if (custom_threshold && !std::isfinite(*custom_threshold)) {
            throw InvalidConfig("custom threshold must be finite");
        }
    }
};

enum class KappaBranch { min_all, median_outside, min_lambda0 };

inline std::string to_string(KappaBranch b) {
    switch (b) {
    case KappaBranch::min_all: return "min_all";
    case KappaBranch::median_outside: return "median_outside";
    case KappaBranch::min_lambda0: return "min_lambda0";
    }
    return "?";
}

struct DetectionResult {
    double kappa = 0.0;
    double threshold = 0.0;
    bool is_upscaled = false;
    std::vector<double> per_view_lambda;               ///< Lambda_v = lambda_K of view v
    std::vector<std::size_t> below_set;                ///< views with Lambda_v under the lower MP edge
    std::vector<std::optional<double>> lambda0_per_view; ///< smallest eigenvalue above the lower edge
    std::size_t n = 0;
    std::size_t k = 0;
    double beta = 0.0;
    double sigma_w2 = 0.0;
    double lower_edge = 0.0;
    std::size_t degenerate_views = 0;
    KappaBranch branch = KappaBranch::min_all;

    friend bool operator==(const DetectionResult&, const DetectionResult&) = default;
};

/// Statistic kappa and decision for an N x N block z.
inline DetectionResult detect(const Matrix& z, const DetectorConfig& cfg) {
    if (!z.is_square()) throw InvalidShape("detect expects a square block");
    const std::size_t n = z.rows();
    cfg.validate(n);

    DetectionResult res;
    res.n = n;
    res.k = cfg.k;
    res.beta = static_cast<double>(cfg.k) / static_cast<double>(n);
    res.sigma_w2 = quantization_noise_variance(cfg.delta);
    const MpEdges mp = mp_edges(res.sigma_w2, res.beta);
    res.lower_edge = mp.lower;
    res.threshold = cfg.custom_threshold.value_or(mp.upper);

    const std::size_t views = view_count(n, cfg.k);
    res.per_view_lambda.resize(views);
    res.lambda0_per_view.resize(views);
    for (std::size_t v = 0; v < views; ++v) {
        const std::vector<double> ev = view_spectrum(z, v, cfg.k);
        const double lam_k = ev.back();
        res.per_view_lambda[v] = lam_k;
        if (lam_k < mp.lower) res.below_set.push_back(v);
        for (std::size_t i = ev.size(); i-- > 0;) {
            if (ev[i] > mp.lower) {
                res.lambda0_per_view[v] = ev[i];
                break;
            }
        }
    }

    if (res.below_set.empty()) {
        res.branch = KappaBranch::min_all;
        res.kappa = *std::min_element(res.per_view_lambda.begin(), res.per_view_lambda.end());
    } else if (res.below_set.size() < views) {
        res.branch = KappaBranch::median_outside;
        std::vector<double> outside;
        std::size_t s = 0;
        for (std::size_t v = 0; v < views; ++v) {
            if (s < res.below_set.size() && res.below_set[s] == v) {
                ++s;
                continue;
            }
            outside.push_back(res.per_view_lambda[v]);
        }
        res.kappa = lower_median(std::move(outside));
    } else {
        res.branch = KappaBranch::min_lambda0;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& l0 : res.lambda0_per_view) {
            if (l0) best = std::min(best, *l0);
            else ++res.degenerate_views;
        }
        // Every view sits on the noise floor: strongest evidence of upscaling.
        res.kappa = std::isfinite(best) ? best : 0.0;
    }
    res.is_upscaled = res.kappa < res.threshold;
    return res;
}

} // namespace rmtres
