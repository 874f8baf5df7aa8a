#pragma once

// Separable causal 2D-AR(1) fields X = U S U^T, renormalized sample
// autocorrelation matrices and the sliding column/row views used by the
// detector and estimator.

#include <cmath>
#include <string>

#include "rmtres/errors.hpp"
#include "rmtres/matcore.hpp"

namespace rmtres {

struct ArParams {
    double rho = 0.97;
    double sigma_s2 = 1.0;
    std::size_t q = 0; ///< AR truncation length; 0 means "same as n"
    std::size_t n = 512;

    std::size_t truncation() const noexcept { return q == 0 ? n : q; }

    void validate() const {
        if (!(rho >= 0.0 && rho < 1.0)) {
            throw InvalidConfig("rho must lie in [0, 1), got " + std::to_string(rho));
        }
        if (!(sigma_s2 > 0.0) || !std::isfinite(sigma_s2)) {
            throw InvalidConfig("sigma_s2 must be positive, got " + std::to_string(sigma_s2));
        }
        if (n < 2) throw InvalidConfig("field side n must be at least 2");
    }
};

/// One-sided AR filter u_Q[n] = rho^(Q-1-n), n = 0..Q-1.
inline ToeplitzSpec ar_filter_sequence(double rho, std::size_t q) {
    ToeplitzSpec spec{std::vector<double>(q), false};
    for (std::size_t n = 0; n < q; ++n) spec.sequence[n] = std::pow(rho, static_cast<double>(q - 1 - n));
    return spec;
}

/// Autocorrelation of the untruncated AR(1) filter: rho^|n| / (1 - rho^2).
inline ToeplitzSpec ar_autocorr_sequence(double rho, std::size_t len) {
    ToeplitzSpec spec{std::vector<double>(len), true};
    const double scale = 1.0 / (1.0 - rho * rho);
    for (std::size_t n = 0; n < len; ++n) spec.sequence[n] = std::pow(rho, static_cast<double>(n)) * scale;
    return spec;
}

/// Autocorrelation of the Q-truncated filter, valid for Q >= len:
/// (1 - rho^(2(Q-|n|))) rho^|n| / (1 - rho^2).
inline ToeplitzSpec ar_gram_sequence(double rho, std::size_t q, std::size_t len) {
    ToeplitzSpec spec{std::vector<double>(len, 0.0), true};
    const double scale = 1.0 / (1.0 - rho * rho);
    for (std::size_t n = 0; n < len && n < q; ++n) {
        const double rn = std::pow(rho, static_cast<double>(n));
        spec.sequence[n] = (1.0 - std::pow(rho, 2.0 * static_cast<double>(q - n))) * rn * scale;
    }
    return spec;
}

/// U with rows x (rows + q - 1) entries U[i][j] = u_Q[j - i].
inline Matrix ar_filter_matrix(double rho, std::size_t q, std::size_t rows) {
    return toeplitz_materialize(ar_filter_sequence(rho, q), rows, rows + q - 1);
}

/// left * S * right^T where S is (left.cols x right.cols) with i.i.d.
/// N(0, sigma^2) entries drawn row-major from `seed`.
inline Matrix coloured_gaussian_product(const Matrix& left, const Matrix& right, double sigma,
                                        RngSeed seed) {
    const Matrix s = gaussian_matrix(left.cols(), right.cols(), sigma, seed);
    // right * S^T is cheap when `right` is banded; then left * (right S^T)^T.
    const Matrix rs = multiply(right, s.transposed());
    return multiply(left, rs.transposed());
}

/// N x N field X = U S U^T with U of size N x (N+Q-1).
inline Matrix generate_field(const ArParams& p, RngSeed seed) {
    p.validate();
    const Matrix u = ar_filter_matrix(p.rho, p.truncation(), p.n);
    return coloured_gaussian_product(u, u, std::sqrt(p.sigma_s2), seed);
}

// ---------------------------------------------------------------------------

struct SampleAutocorr {
    Matrix matrix;
    double beta = 0.0;
    std::size_t normalizer = 0;
};

/// Subtract the mean and divide by the (population) standard deviation.
inline Matrix standardize(Matrix m) {
    const auto vals = m.values();
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(vals.size());
    if (!(var > 0.0)) throw ZeroVariance("block has zero variance; cannot standardize");
    const double inv_sd = 1.0 / std::sqrt(var);
    for (double& v : m.values()) v = (v - mean) * inv_sd;
    return m;
}

enum class Standardize { off, on };

/// (1/N) B B^T for an N x K block, optionally standardizing the block first.
inline SampleAutocorr sample_autocorr(const Matrix& block, Standardize mode = Standardize::off) {
    const std::size_t n = block.rows();
    const std::size_t k = block.cols();
    if (k > n) {
        throw InvalidShape("sample_autocorr: block has more columns (" + std::to_string(k) +
                           ") than rows (" + std::to_string(n) + ")");
    }
    const Matrix b = mode == Standardize::on ? standardize(block) : block;
    return {gram_rows(b, 1.0 / static_cast<double>(n)),
            static_cast<double>(k) / static_cast<double>(n), n};
}

inline std::size_t view_count(std::size_t n, std::size_t k) { return 2 * (n - k + 1); }

/// The v-th N x K view of a square matrix: even v take K consecutive columns
/// starting at v/2, odd v the same from the transpose (i.e. K rows starting at
/// (v-1)/2, transposed). Indices are 0-based.
inline Matrix crop_view(const Matrix& z, std::size_t v, std::size_t k) {
    if (!z.is_square()) throw InvalidShape("crop_view needs a square matrix");
    const std::size_t n = z.rows();
    if (k == 0 || k > n) throw InvalidView("crop_view: K must lie in [1, N]");
    if (v >= view_count(n, k)) {
        throw InvalidView("view index " + std::to_string(v) + " out of range [0, " +
                          std::to_string(view_count(n, k)) + ")");
    }
    const std::size_t start = v / 2;
    Matrix out(n, k);
    if (v % 2 == 0) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < k; ++c) out(i, c) = z(i, start + c);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < k; ++c) out(i, c) = z(start + c, i);
    }
    return out;
}

} // namespace rmtres
