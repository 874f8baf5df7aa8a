#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rmtres/armodel.hpp"
#include "rmtres/bench.hpp"
#include "rmtres/rmt.hpp"
#include "rmtres/spectra.hpp"

using namespace rmtres;

TEST(DGenuine, Values) {
    EXPECT_NEAR(d_genuine(0.0, 0.97), 1.0 / (0.03 * 0.03), 1e-9);
    EXPECT_NEAR(d_genuine(std::numbers::pi, 0.97), 1.0 / (1.97 * 1.97), 1e-12);
    for (double w : {0.0, 1.0, 2.5, 5.0}) EXPECT_DOUBLE_EQ(d_genuine(w, 0.0), 1.0);
}

TEST(DGenuine, MeanOverPeriod) {
    for (double rho : {0.0, 0.5, 0.9, 0.97}) {
        const DiscreteLaw law = discretize(law_genuine(rho));
        EXPECT_NEAR(law.mean(), oracle::ar_spectrum_mean(rho), 1e-6 * oracle::ar_spectrum_mean(rho));
    }
    EXPECT_NEAR(discretize(law_genuine(0.97)).mean(), 16.92, 0.01);
}

TEST(DUpscaled, ReducesToGenuineForIdealSampling) {
    const KernelAutocorr ideal{{1.0}};
    for (double w : {0.1, 1.0, 3.0}) EXPECT_DOUBLE_EQ(d_upscaled(w, 0.9, ideal), d_genuine(w, 0.9));
}

TEST(DUpscaled, LinearXi2) {
    const KernelAutocorr r = kernel_autocorr(ResampleSpec::from_ratio(2, 1));
    EXPECT_NEAR(d_upscaled(0.0, 0.97, r), 2222.22, 0.01);
    EXPECT_NEAR(d_upscaled(std::numbers::pi, 0.97, r), 1.0 / (1.97 * 1.97), 1e-12);
}

TEST(DUpscaled, ClampsNegativeValues) {
    const KernelAutocorr r{{0.1, 0.5}};
    std::size_t clamped = 0;
    EXPECT_EQ(d_upscaled(std::numbers::pi, 0.5, r, &clamped), 0.0);
    EXPECT_EQ(clamped, 1u);
}

TEST(SpectralLaw, ZeroMass) {
    EXPECT_EQ(law_genuine(0.97).zero_mass, 0.0);
    const SpectralLaw up = law_upscaled(0.97, ResampleSpec::from_ratio(2, 1));
    EXPECT_DOUBLE_EQ(up.zero_mass, 0.5);
    for (const SpectralLaw& l : {law_genuine(0.5), up, law_upscaled(0.9, ResampleSpec::from_ratio(8, 5))})
        EXPECT_NEAR(l.zero_mass + 2.0 * std::numbers::pi * l.angular_density, 1.0, 1e-15);
    EXPECT_THROW(law_upscaled(0.97, ResampleSpec::from_ratio(1, 1)), InvalidSpec);
    EXPECT_THROW(law_genuine(1.0), InvalidSpec);
}

TEST(Afze, Values) {
    EXPECT_DOUBLE_EQ(afze(0.5, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(afze(1.0, 2.0), 0.5);
    EXPECT_DOUBLE_EQ(afze(1.0, 1.0), 0.0);
    EXPECT_THROW(afze(1.5, 1.0), InvalidSpec);
}

TEST(MpEdges, Values) {
    const MpEdges e = mp_edges(1.0 / 12.0, 9.0 / 32.0);
    EXPECT_NEAR(e.upper, 0.19516, 1e-5);
    EXPECT_NEAR(e.lower, 0.01838, 1e-5);
    const MpEdges z = mp_edges(2.0, 0.0);
    EXPECT_EQ(z.lower, 2.0);
    EXPECT_EQ(z.upper, 2.0);
    EXPECT_EQ(mp_edges(1.0, 1.0).lower, 0.0);
}

TEST(GapBound, Values) {
    EXPECT_NEAR(gap_lower_bound(1200.0, 1.0, 0.0, 0.02), 1200.0 * 0.02 - 1.0, 1e-12);
    EXPECT_NEAR(gap_lower_bound(100.0, 1.0 / 12.0, 0.125, 0.02), 12.0996, 1e-3);
    double prev = -1e300;
    for (double snr : {10.0, 100.0, 1000.0, 1e4}) {
        const double g = gap_lower_bound(snr, 1.0, 0.25, 0.05);
        EXPECT_GT(g, prev);
        prev = g;
    }
    const GapBounds b = gap_bounds(100.0, 1.0 / 12.0, 0.125, 0.02);
    EXPECT_NEAR(b.ratio, 12.0996, 1e-3);
    EXPECT_NEAR(b.noise_upper, mp_edges(1.0 / 12.0, 0.125).upper, 1e-15);
}

TEST(TraceConsistency, UpscaledMeanMatchesFiniteTrace) {
    const double rho = 0.97;
    const std::size_t n = 1024;
    for (const KernelSpec& k : KernelSpec::all())
        for (auto [l, m] : std::vector<std::pair<int, int>>{{4, 3}, {8, 5}, {2, 1}}) {
            const ResampleSpec spec = ResampleSpec::from_ratio(l, m, k);
            const auto r = static_cast<std::size_t>(n * m / l);
            const Matrix h = build_polyphase(spec, n, r);
            const Matrix g = toeplitz_materialize(ar_gram_sequence(rho, r, r), r, r);
            const Matrix hg = multiply(h, g);
            double trace = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < r; ++j) trace += hg(i, j) * h(i, j);
            const DiscreteLaw law = discretize(law_upscaled(rho, spec));
            EXPECT_NEAR(law.mean(), trace / n, 0.05 * trace / n) << k.name() << " " << l << "/" << m;
        }
}

TEST(FiniteD, ZeroFractionAndKernelOrdering) {
    const double rho = 0.97;
    const std::size_t n = 512;
    std::map<KernelType, double> smallest;
    for (const KernelSpec& k : KernelSpec::all()) {
        const ResampleSpec spec = ResampleSpec::from_ratio(2, 1, k);
        const std::size_t r = n / 2;
        const Matrix h = build_polyphase(spec, n, r);
        const Matrix g = toeplitz_materialize(ar_gram_sequence(rho, r, r), r, r);
        const auto ev = sym_eigenvalues(multiply(h, multiply(g, h.transposed())));
        std::size_t zeros = 0;
        for (double v : ev) zeros += v < 1e-9 * ev.front() ? 1 : 0;
        EXPECT_NEAR(static_cast<double>(zeros) / n, 0.5, 2.0 / n) << k.name();
        smallest[k.type] = ev[r - 1];
    }
    EXPECT_LT(smallest[KernelType::bspline], smallest[KernelType::linear]);
    EXPECT_LT(smallest[KernelType::linear], smallest[KernelType::catmull_rom]);
    EXPECT_LT(smallest[KernelType::linear], smallest[KernelType::lanczos3]);
}

TEST(LambdaMinus, GapShrinksTowardsUnitXiAndRho) {
    const double beta = 0.125;
    const std::vector<double> rhos{0.9, 0.95, 0.97};
    const std::vector<std::pair<int, int>> ratios{{5, 4}, {3, 2}, {2, 1}};
    std::vector<std::vector<double>> lm(3, std::vector<double>(3));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            const SpectralLaw law = law_upscaled(rhos[i], ResampleSpec::from_ratio(ratios[j].first, ratios[j].second));
            lm[i][j] = eigen_pdf(law, law, beta).lambda_minus();
        }
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j + 1 < 3; ++j) EXPECT_LT(lm[i][j], lm[i][j + 1]) << "rho " << rhos[i];
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i + 1 < 3; ++i) EXPECT_GT(lm[i][j], lm[i + 1][j]) << "xi index " << j;
}
