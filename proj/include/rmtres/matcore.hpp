#pragma once

// Dense row-major matrices, a symmetric eigensolver, Toeplitz builders and a
// seedable Gaussian sampler. Everything else in the library is built on this.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rmtres/errors.hpp"

namespace rmtres {

class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {
        if (rows == 0 || cols == 0) {
            throw InvalidShape("matrix dimensions must be positive, got " + std::to_string(rows) +
                               "x" + std::to_string(cols));
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r ? rows.begin()->size() : 0;
        Matrix m(r, c);
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != c) throw InvalidShape("ragged initializer list");
            std::copy(row.begin(), row.end(), m.row(i++).begin());
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return values_.empty(); }
    bool is_square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept { return {values_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {values_.data() + i * cols_, cols_};
    }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    /// Copy of the nr x nc block starting at (r0, c0).
    Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
        if (r0 + nr > rows_ || c0 + nc > cols_) {
            throw InvalidShape("block exceeds matrix bounds");
        }
        Matrix b(nr, nc);
        for (std::size_t i = 0; i < nr; ++i) {
            auto src = row(r0 + i).subspan(c0, nc);
            std::copy(src.begin(), src.end(), b.row(i).begin());
        }
        return b;
    }

    Matrix& operator*=(double s) noexcept {
        for (double& v : values_) v *= s;
        return *this;
    }

    double max_abs() const noexcept {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    bool all_finite() const noexcept {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

inline Matrix operator*(Matrix m, double s) {
    m *= s;
    return m;
}

/// a * b. Zero entries of `a` are skipped, so banded left operands are cheap.
inline Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw InvalidShape("multiply: inner dimensions differ (" + std::to_string(a.cols()) +
                           " vs " + std::to_string(b.rows()) + ")");
    }
    Matrix c(a.rows(), b.cols());
    const std::size_t p = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = c.row(i).data();
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* bk = b.row(k).data();
            for (std::size_t j = 0; j < p; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

/// scale * a * a^T
inline Matrix gram_rows(const Matrix& a, double scale = 1.0) {
    const std::size_t n = a.rows();
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        auto ri = a.row(i);
        for (std::size_t j = 0; j <= i; ++j) {
            auto rj = a.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += ri[k] * rj[k];
            g(i, j) = g(j, i) = scale * s;
        }
    }
    return g;
}

/// scale * a^T * a
inline Matrix gram_cols(const Matrix& a, double scale = 1.0) {
    const std::size_t n = a.cols();
    Matrix g(n, n);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto ar = a.row(r);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = ar[i];
            if (v == 0.0) continue;
            double* gi = g.row(i).data();
            for (std::size_t j = i; j < n; ++j) gi[j] += v * ar[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            g(i, j) *= scale;
            g(j, i) = g(i, j);
        }
    return g;
}

// ---------------------------------------------------------------------------
// Symmetric eigenvalues
// ---------------------------------------------------------------------------

struct SymEigen {
    std::vector<double> values; ///< descending
    Matrix vectors;             ///< column i is the eigenvector of values[i]
};

namespace detail {

inline void require_symmetric(const Matrix& m) {
    if (!m.is_square()) {
        throw InvalidMatrix("eigenvalues need a square matrix, got " + std::to_string(m.rows()) +
                            "x" + std::to_string(m.cols()));
    }
    if (!m.all_finite()) throw InvalidMatrix("matrix has non-finite entries");
    const double tol = 1e-9 * std::max(m.max_abs(), std::numeric_limits<double>::min());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(m(i, j) - m(j, i)) > tol) {
                throw InvalidMatrix("matrix is not symmetric at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
            }
}

// Householder reduction to tridiagonal form. On return `diag`/`sub` hold the
// tridiagonal (sub[i] couples i and i+1). When `q` is non-null it receives the
// orthogonal factor with a = q * T * q^T.
inline void tridiagonalize(Matrix a, std::vector<double>& diag, std::vector<double>& sub,
                           Matrix* q) {
    const std::size_t n = a.rows();
    diag.assign(n, 0.0);
    sub.assign(n, 0.0);
    std::vector<std::vector<double>> reflectors;
    std::vector<double> taus;
    std::vector<double> v(n), p(n);

    for (std::size_t k = 0; k + 2 < n; ++k) {
        const std::size_t m = n - k - 1;
        auto x = a.row(k).subspan(k + 1, m);
        double norm2 = 0.0;
        for (double xi : x) norm2 += xi * xi;
        const double tail2 = norm2 - x[0] * x[0];
        diag[k] = a(k, k);
        if (tail2 <= std::numeric_limits<double>::min() * 16) {
            sub[k] = x[0];
            if (q) {
                reflectors.emplace_back();
                taus.push_back(0.0);
            }
            continue;
        }
        const double norm = std::sqrt(norm2);
        const double alpha = x[0] >= 0.0 ? -norm : norm;
        std::copy(x.begin(), x.end(), v.begin());
        v[0] -= alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) vnorm2 += v[i] * v[i];
        const double tau = 2.0 / vnorm2;

        // p = tau * A22 * v, then w = p - (tau/2)(p.v) v
        double pv = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double* ai = a.row(k + 1 + i).data() + k + 1;
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += ai[j] * v[j];
            p[i] = tau * s;
            pv += p[i] * v[i];
        }
        const double kk = 0.5 * tau * pv;
        for (std::size_t i = 0; i < m; ++i) p[i] -= kk * v[i];
        for (std::size_t i = 0; i < m; ++i) {
            double* ai = a.row(k + 1 + i).data() + k + 1;
            const double vi = v[i], wi = p[i];
            for (std::size_t j = 0; j < m; ++j) ai[j] -= vi * p[j] + wi * v[j];
        }
        sub[k] = alpha;
        if (q) {
            reflectors.emplace_back(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
            taus.push_back(tau);
        }
    }
    if (n >= 2) {
        diag[n - 2] = a(n - 2, n - 2);
        sub[n - 2] = a(n - 1, n - 2);
    }
    diag[n - 1] = a(n - 1, n - 1);
    sub[n - 1] = 0.0;

    if (q) {
        *q = Matrix::identity(n);
        for (std::size_t r = reflectors.size(); r-- > 0;) {
            if (taus[r] == 0.0) continue;
            const auto& vr = reflectors[r];
            const std::size_t off = r + 1;
            // q <- H_r q, acting on rows off..n-1
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < vr.size(); ++i) s += vr[i] * (*q)(off + i, j);
                s *= taus[r];
                if (s == 0.0) continue;
                for (std::size_t i = 0; i < vr.size(); ++i) (*q)(off + i, j) -= s * vr[i];
            }
        }
    }
}

// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.
// Rotations are accumulated into the columns of z when it is non-null.
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, Matrix* z) {
    const std::size_t n = d.size();
    constexpr int max_sweeps = 60;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    // Absolute floor: clusters near zero would otherwise never deflate, and the
    // reduction already carries errors of order eps * |T|.
    double tnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) tnorm = std::max(tnorm, std::abs(d[i]) + std::abs(e[i]));
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * std::max(dd, tnorm)) break;
            }
            if (m == l) break;
            if (iter++ == max_sweeps) {
                throw ConvergenceFailure("tridiagonal QL did not converge", std::abs(e[l]));
            }
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            bool underflow = false;
            for (std::size_t i = m; i-- > l;) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if (z) {
                    for (std::size_t k = 0; k < n; ++k) {
                        f = (*z)(k, i + 1);
                        (*z)(k, i + 1) = s * (*z)(k, i) + c * f;
                        (*z)(k, i) = c * (*z)(k, i) - s * f;
                    }
                }
            }
            if (underflow) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        } while (m != l);
    }
}

} // namespace detail

/// All eigenvalues of a symmetric matrix, sorted descending.
inline std::vector<double> sym_eigenvalues(const Matrix& m) {
    detail::require_symmetric(m);
    std::vector<double> d, e;
    detail::tridiagonalize(m, d, e, nullptr);
    detail::tridiagonal_ql(d, e, nullptr);
    std::sort(d.begin(), d.end(), std::greater<>());
    return d;
}

/// Eigenvalues (descending) together with orthonormal eigenvectors.
inline SymEigen sym_eigen(const Matrix& m) {
    detail::require_symmetric(m);
    std::vector<double> d, e;
    Matrix q;
    detail::tridiagonalize(m, d, e, &q);
    detail::tridiagonal_ql(d, e, &q);
    const std::size_t n = d.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return d[a] > d[b]; });
    SymEigen out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t c = 0; c < n; ++c) {
        out.values[c] = d[order[c]];
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = q(r, order[c]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

/// Seed for every stochastic routine. Equal seeds give bit-identical streams.
struct RngSeed {
    std::uint64_t value = 0;
};

/// xoshiro256** seeded through splitmix64, with Box-Muller normals.
/// Both Box-Muller outputs are used; the stream is fully determined by the seed.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(RngSeed seed) {
        std::uint64_t x = seed.value;
        for (auto& s : state_) s = splitmix64(x);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Standard normal deviate.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& x) noexcept {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4]{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// rows x cols matrix of i.i.d. N(0, sigma^2) entries, filled row by row.
inline Matrix gaussian_matrix(std::size_t rows, std::size_t cols, double sigma, RngSeed seed) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidConfig("gaussian_matrix: sigma must be positive, got " + std::to_string(sigma));
    }
    Matrix m(rows, cols);
    Rng rng(seed);
    for (double& v : m.values()) v = sigma * rng.normal();
    return m;
}

// ---------------------------------------------------------------------------
// Toeplitz
// ---------------------------------------------------------------------------

/// Generating sequence of a Toeplitz matrix. sequence[0] is the lag-0 value.
/// Symmetric specs give M[i][j] = sequence[|i-j|]; banded (one-sided) specs
/// give M[i][j] = sequence[j-i] for j >= i. Lags past the end are zero.
struct ToeplitzSpec {
    std::vector<double> sequence;
    bool symmetric = true;

    double center() const noexcept { return sequence.empty() ? 0.0 : sequence.front(); }

    double at_lag(std::ptrdiff_t lag) const noexcept {
        if (symmetric) lag = lag < 0 ? -lag : lag;
        if (lag < 0 || static_cast<std::size_t>(lag) >= sequence.size()) return 0.0;
        return sequence[static_cast<std::size_t>(lag)];
    }
};

inline Matrix toeplitz_materialize(const ToeplitzSpec& spec, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(i, j) = spec.at_lag(static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(i));
    return m;
}

} // namespace rmtres
