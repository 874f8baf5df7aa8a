#pragma once

// Interpolation kernels, polyphase upscaling matrices, kernel autocorrelation
// and quantization.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rmtres/errors.hpp"
#include "rmtres/matcore.hpp"

namespace rmtres {

enum class KernelType { linear, catmull_rom, bspline, lanczos3 };

/// Symmetric interpolation kernel h(t), zero for |t| >= half_support().
///   linear       tent on [-1, 1]
///   catmull-rom  Keys cubic with a = -0.5
///   bspline      cubic B-spline basis
///   lanczos3     sinc(t) sinc(t/3) on [-3, 3]
struct KernelSpec {
    KernelType type = KernelType::linear;

    double half_support() const noexcept {
        switch (type) {
        case KernelType::linear: return 1.0;
        case KernelType::catmull_rom:
        case KernelType::bspline: return 2.0;
        case KernelType::lanczos3: return 3.0;
        }
        return 0.0;
    }

    /// Support width in input samples (2a).
    int width() const noexcept { return static_cast<int>(2.0 * half_support()); }

    double operator()(double t) const noexcept {
        const double x = std::abs(t);
        switch (type) {
        case KernelType::linear: return x < 1.0 ? 1.0 - x : 0.0;
        case KernelType::catmull_rom:
            if (x < 1.0) return (1.5 * x - 2.5) * x * x + 1.0;
            if (x < 2.0) return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
            return 0.0;
        case KernelType::bspline:
            if (x < 1.0) return 2.0 / 3.0 - x * x + 0.5 * x * x * x;
            if (x < 2.0) {
                const double u = 2.0 - x;
                return u * u * u / 6.0;
            }
            return 0.0;
        case KernelType::lanczos3:
            if (x < 3.0) return sinc(x) * sinc(x / 3.0);
            return 0.0;
        }
        return 0.0;
    }

    std::string name() const {
        switch (type) {
        case KernelType::linear: return "linear";
        case KernelType::catmull_rom: return "catmull-rom";
        case KernelType::bspline: return "bspline";
        case KernelType::lanczos3: return "lanczos3";
        }
        return "?";
    }

    static KernelSpec parse(std::string_view text) {
        std::string s;
        for (char c : text) {
            if (c == '_' || c == '-' || c == ' ') continue;
            s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        if (s == "linear" || s == "bilinear" || s == "triangle") return {KernelType::linear};
        if (s == "catmullrom" || s == "cubic" || s == "bicubic") return {KernelType::catmull_rom};
        if (s == "bspline" || s == "cubicbspline") return {KernelType::bspline};
        if (s == "lanczos" || s == "lanczos3") return {KernelType::lanczos3};
        throw InvalidSpec("unknown kernel '" + std::string(text) + "'");
    }

    static std::vector<KernelSpec> all() {
        return {{KernelType::linear}, {KernelType::catmull_rom}, {KernelType::bspline},
                {KernelType::lanczos3}};
    }

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

private:
    static double sinc(double x) noexcept {
        if (x == 0.0) return 1.0;
        const double px = std::numbers::pi * x;
        return std::sin(px) / px;
    }
};

/// Rational upscaling by xi = L/M with phase phi and optional quantization.
struct ResampleSpec {
    int L = 2;
    int M = 1;
    double phi = 0.0;
    KernelSpec kernel{};
    std::optional<double> delta;

    double xi() const noexcept { return static_cast<double>(L) / static_cast<double>(M); }

    void validate() const {
        if (L < 1 || M < 1) throw InvalidSpec("L and M must be positive");
        if (std::gcd(L, M) != 1) {
            throw InvalidSpec("L=" + std::to_string(L) + " and M=" + std::to_string(M) +
                              " are not coprime");
        }
        if (L < M) throw InvalidSpec("only upscaling (L >= M) is supported");
        if (!(phi >= 0.0 && phi < 1.0)) throw InvalidSpec("phase must lie in [0, 1)");
        if (delta && !(*delta > 0.0)) throw InvalidSpec("quantization step must be positive");
    }

    /// Best rational approximation L/M of `xi` with M <= max_den. Accepts
    /// "a/b" or a decimal literal.
    static std::pair<int, int> ratio_from_string(std::string_view text, int max_den = 1000) {
        const auto slash = text.find('/');
        try {
            if (slash != std::string_view::npos) {
                const int a = std::stoi(std::string(text.substr(0, slash)));
                const int b = std::stoi(std::string(text.substr(slash + 1)));
                if (a < 1 || b < 1) throw InvalidSpec("resampling ratio must be positive");
                const int g = std::gcd(a, b);
                return {a / g, b / g};
            }
            return ratio_from_value(std::stod(std::string(text)), max_den);
        } catch (const std::logic_error&) {
            throw InvalidSpec("cannot parse resampling factor '" + std::string(text) + "'");
        }
    }

    static std::pair<int, int> ratio_from_value(double xi, int max_den = 1000) {
        if (!(xi > 0.0) || !std::isfinite(xi)) throw InvalidSpec("resampling factor must be positive");
        // Continued-fraction convergents.
        long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
        double x = xi;
        for (int iter = 0; iter < 64; ++iter) {
            const long a = static_cast<long>(std::floor(x));
            const long h2 = a * h1 + h0, k2 = a * k1 + k0;
            if (k2 > max_den) break;
            h0 = h1; h1 = h2; k0 = k1; k1 = k2;
            const double frac = x - static_cast<double>(a);
            if (frac < 1e-12 || std::abs(static_cast<double>(h1) / static_cast<double>(k1) - xi) < 1e-12) break;
            x = 1.0 / frac;
        }
        return {static_cast<int>(h1), static_cast<int>(k1)};
    }

    static ResampleSpec from_ratio(int l, int m, KernelSpec kernel = {}, double phi = 0.0,
                                   std::optional<double> delta = std::nullopt) {
        ResampleSpec s{l, m, phi, kernel, delta};
        s.validate();
        return s;
    }
};

/// N x R polyphase matrix H[i][j] = h(i M / L + phi - j); taps falling outside
/// the input are dropped (zero padding).
inline Matrix build_polyphase(const ResampleSpec& spec, std::size_t out_rows, std::size_t in_rows) {
    spec.validate();
    const auto max_rows = static_cast<std::size_t>(
        (static_cast<long long>(in_rows) * spec.L + spec.M - 1) / spec.M);
    if (out_rows > max_rows) {
        throw InvalidShape("build_polyphase: " + std::to_string(out_rows) +
                           " output rows exceed ceil(R*xi) = " + std::to_string(max_rows));
    }
    Matrix h(out_rows, in_rows);
    const double a = spec.kernel.half_support();
    for (std::size_t i = 0; i < out_rows; ++i) {
        const long long num = static_cast<long long>(i) * spec.M;
        const double pos = static_cast<double>(num) / spec.L + spec.phi;
        const long long lo = std::max<long long>(0, static_cast<long long>(std::floor(pos - a)));
        const long long hi = std::min<long long>(static_cast<long long>(in_rows) - 1,
                                                 static_cast<long long>(std::ceil(pos + a)));
        for (long long j = lo; j <= hi; ++j) h(i, static_cast<std::size_t>(j)) = spec.kernel(pos - static_cast<double>(j));
    }
    return h;
}

/// Symmetric kernel autocorrelation r_hh[n], stored for n = 0..k_w-1.
struct KernelAutocorr {
    std::vector<double> lags;

    int kw() const noexcept { return static_cast<int>(lags.size()); }

    double operator[](int n) const noexcept {
        const auto a = static_cast<std::size_t>(n < 0 ? -n : n);
        return a < lags.size() ? lags[a] : 0.0;
    }

    /// sum_n r_hh[n] cos(n omega)
    double response(double omega) const noexcept {
        double s = lags.empty() ? 0.0 : lags[0];
        for (std::size_t n = 1; n < lags.size(); ++n) s += 2.0 * lags[n] * std::cos(static_cast<double>(n) * omega);
        return s;
    }
};

/// r_hh[n] = (1/M) sum_{k in Z} h(k/L + phi) h(k/L + phi - n), the Toeplitz
/// average of the polyphase components of H^T H.
inline KernelAutocorr kernel_autocorr(const ResampleSpec& spec) {
    spec.validate();
    const int kw = spec.kernel.width();
    const double a = spec.kernel.half_support();
    const long long k_lo = static_cast<long long>(std::floor((-a - spec.phi) * spec.L)) - 1;
    const long long k_hi = static_cast<long long>(std::ceil((a - spec.phi) * spec.L)) + 1;
    KernelAutocorr r{std::vector<double>(static_cast<std::size_t>(kw), 0.0)};
    for (int n = 0; n < kw; ++n) {
        double s = 0.0;
        for (long long k = k_lo; k <= k_hi; ++k) {
            const double t = static_cast<double>(k) / spec.L + spec.phi;
            s += spec.kernel(t) * spec.kernel(t - n);
        }
        r.lags[static_cast<std::size_t>(n)] = s / spec.M;
    }
    return r;
}

/// Number of output samples produced from `in_rows` inputs: floor(R * xi).
inline std::size_t upscaled_size(const ResampleSpec& spec, std::size_t in_rows) {
    return static_cast<std::size_t>(static_cast<long long>(in_rows) * spec.L / spec.M);
}

/// The exact (non-Toeplitz) R = H_N^T H_N with N = floor(R xi).
inline Matrix exact_autocorr_matrix(const ResampleSpec& spec, std::size_t in_rows) {
    const Matrix h = build_polyphase(spec, upscaled_size(spec, in_rows), in_rows);
    return gram_cols(h);
}

/// Z = delta * round(Y / delta)
inline Matrix quantize(Matrix m, double delta) {
    if (!(delta > 0.0)) throw InvalidSpec("quantization step must be positive");
    for (double& v : m.values()) v = delta * std::round(v / delta);
    return m;
}

/// Y + W with W uniform on [-delta/2, delta/2): the additive model of rounding.
inline Matrix add_quantization_noise(Matrix m, double delta, RngSeed seed) {
    if (!(delta > 0.0)) throw InvalidSpec("quantization step must be positive");
    Rng rng(seed);
    for (double& v : m.values()) v += delta * (rng.uniform() - 0.5);
    return m;
}

/// Separable upscaling Y = H X H^T, followed by rounding when spec.delta is set.
inline Matrix upscale(const Matrix& field, const ResampleSpec& spec) {
    spec.validate();
    if (!field.is_square()) throw InvalidShape("upscale expects a square field");
    const std::size_t r = field.rows();
    const std::size_t n = upscaled_size(spec, r);
    if (n < 2) throw InvalidShape("upscaled output would be smaller than 2x2");
    const Matrix h = build_polyphase(spec, n, r);
    const Matrix hxt = multiply(h, field.transposed()); // (H X^T) = (X H^T)^T
    Matrix y = multiply(h, hxt.transposed());
    if (spec.delta) y = quantize(std::move(y), *spec.delta);
    return y;
}

} // namespace rmtres
