// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rmtres/bench.hpp"
#include "rmtres/estimate.hpp"
#include "rmtres/json_io.hpp"

using namespace rmtres;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream log;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            log << " [fail: " << what << "]";
        }
    }
};

std::size_t index_at_or_above(const std::vector<double>& grid, double x) {
    return static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), x) - grid.begin());
}

std::size_t index_of(const std::vector<double>& grid, double x) {
    return static_cast<std::size_t>(std::find(grid.begin(), grid.end(), x) - grid.begin());
}

// 1. Marchenko-Pastur closed form.
void mp_oracle(Outcome& o) {
    for (double beta : {0.25, 0.5, 1.0}) {
        const EigenPdf pdf = eigen_pdf(law_genuine(0.0), law_genuine(0.0), beta);
        const double a = std::pow(1.0 - std::sqrt(beta), 2), b = std::pow(1.0 + std::sqrt(beta), 2);
        const double lo = a + 0.05 * (b - a), hi = b - 0.05 * (b - a);
        double peak = 0.0, worst = 0.0;
        for (double lam : pdf.lambda_grid)
            if (lam >= lo && lam <= hi) peak = std::max(peak, oracle::mp_density(lam, beta));
        for (std::size_t i = 0; i < pdf.lambda_grid.size(); ++i) {
            const double lam = pdf.lambda_grid[i];
            if (lam >= lo && lam <= hi) worst = std::max(worst, std::abs(pdf.density[i] - oracle::mp_density(lam, beta)));
        }
        const auto& g = pdf.lambda_grid;
        const long lower_steps = static_cast<long>(index_of(g, pdf.lambda_minus())) - static_cast<long>(index_at_or_above(g, a));
        const long upper_steps = static_cast<long>(index_of(g, pdf.lambda_plus())) - static_cast<long>(index_at_or_above(g, b) - 1);
        o.log << " beta=" << beta << " maxerr/peak=" << worst / peak << " edge_steps=(" << lower_steps << ","
              << upper_steps << ")";
        o.check(worst <= 0.01 * peak, "density error");
        o.check(std::abs(lower_steps) <= 1 && std::abs(upper_steps) <= 1, "edges");
    }
}

// 2. eta at zero and at infinity.
void eta_sanity(Outcome& o) {
    for (double beta : {0.5, 1.0}) {
        const EtaSolver s(law_genuine(0.97), law_genuine(0.97), beta);
        o.check(s.eta(0.0).eta == cplx(1.0, 0.0), "eta(0)");
        const double e = s.eta(1e8).eta.real();
        o.log << " genuine beta=" << beta << " eta(1e8)=" << e;
        o.check(std::abs(e - afze(beta, 1.0)) <= 1e-3, "genuine eta(inf)");
    }
    const SpectralLaw up = law_upscaled(0.97, ResampleSpec::from_ratio(2, 1));
    const EtaSolver s(up, up, 1.0);
    o.check(s.eta(0.0).eta == cplx(1.0, 0.0), "eta(0)");
    const double e = s.eta(1e8).eta.real();
    o.log << " upscaled eta(1e8)=" << e;
    o.check(std::abs(e - afze(1.0, 2.0)) <= 1e-3, "upscaled eta(inf)");
}

// 3. Normalization and first moment over the parameter grid.
void normalization(Outcome& o) {
    struct Job {
        double rho, beta;
        std::optional<ResampleSpec> spec;
        double mass_err = 0.0, moment_err = 0.0;
    };
    std::vector<Job> jobs;
    for (double rho : {0.9, 0.97})
        for (double beta : {0.25, 0.5, 1.0}) {
            jobs.push_back({rho, beta, std::nullopt});
            for (auto [l, m] : std::vector<std::pair<int, int>>{{3, 2}, {2, 1}})
                for (const KernelSpec& k : KernelSpec::all()) jobs.push_back({rho, beta, ResampleSpec::from_ratio(l, m, k)});
        }
    parallel_for(jobs.size(), [&](std::size_t i) {
        Job& j = jobs[i];
        const SpectralLaw law = j.spec ? law_upscaled(j.rho, *j.spec) : law_genuine(j.rho);
        const EtaSolver solver(law, law, j.beta);
        const EigenPdf pdf = eigen_pdf(solver);
        const double moment = j.beta * solver.law_d().mean() * solver.law_t().mean();
        j.mass_err = std::abs(pdf.total_mass() - 1.0);
        j.moment_err = std::abs(pdf.first_moment() - moment) / moment;
    });
    double worst_mass = 0.0, worst_moment = 0.0;
    for (const Job& j : jobs) {
        worst_mass = std::max(worst_mass, j.mass_err);
        worst_moment = std::max(worst_moment, j.moment_err);
    }
    o.log << " laws=" << jobs.size() << " max|mass-1|=" << worst_mass << " max moment rel err=" << worst_moment;
    o.check(worst_mass <= 1e-2, "mass");
    o.check(worst_moment <= 0.01, "moment");
}

// 4. Finite D eigenvalues against sorted d'(omega).
void tracking(Outcome& o) {
    std::vector<ResampleSpec> specs;
    for (auto [l, m] : std::vector<std::pair<int, int>>{{4, 3}, {8, 5}, {2, 1}})
        for (const KernelSpec& k : KernelSpec::all()) specs.push_back(ResampleSpec::from_ratio(l, m, k));
    std::vector<double> worst(specs.size()), mean(specs.size());
    parallel_for(specs.size(), [&](std::size_t s) {
        const TrackingCurve c = eigen_tracking(0.97, specs[s], 1024);
        const std::size_t r = c.eigen.size();
        std::size_t count = 0;
        for (std::size_t i = r / 10; i < r - r / 10; ++i, ++count) {
            const double e = std::abs(c.eigen[i] - c.approx[i]) / c.approx[i];
            worst[s] = std::max(worst[s], e);
            mean[s] += e;
        }
        mean[s] /= static_cast<double>(count);
    });
    for (std::size_t s = 0; s < specs.size(); ++s) {
        const std::string name = specs[s].kernel.name() + "@" + format_double(specs[s].xi());
        // The linear kernel's D has jumps at xi = 4/3 and 8/5 that the smooth
        // d'(omega) cannot follow; there only the overall tracking is required.
        const bool conceded = specs[s].kernel.type == KernelType::linear && specs[s].xi() < 2.0;
        if (conceded) {
            o.log << " " << name << " max=" << worst[s] << " mean=" << mean[s] << " (discontinuity)";
            o.check(mean[s] <= 0.10, name);
        } else {
            o.log << " " << name << " max=" << worst[s];
            o.check(worst[s] <= 0.10, name);
        }
    }
}

// 5. Monte Carlo eigenvalues against the analytic CDF of the nonzero part.
void monte_carlo(Outcome& o) {
    const std::size_t n = 1024, k = 512, seeds = 20;
    const double rho = 0.97, beta = static_cast<double>(k) / n;
    struct Case {
        std::optional<ResampleSpec> spec;
        double tol;
    };
    const std::vector<Case> cases{{std::nullopt, 0.05},
                                  {ResampleSpec::from_ratio(2, 1, {KernelType::linear}), 0.07},
                                  {ResampleSpec::from_ratio(3, 2, {KernelType::bspline}), 0.07}};
    for (const Case& c : cases) {
        BlockScenario sc{rho, 1.0, n, n, c.spec, std::nullopt};
        if (c.spec) sc.field_n = static_cast<std::size_t>(std::ceil(n / c.spec->xi())) + 1;
        std::vector<std::vector<double>> per_seed(seeds);
        parallel_for(seeds, [&](std::size_t s) {
            const Matrix y = signal_block(sc, realization_seed(11, s));
            const std::vector<double> ev = view_spectrum(y, 0, k);
            for (double v : ev)
                if (v > 1e-9 * ev.front()) per_seed[s].push_back(v);
        });
        std::vector<double> pooled;
        for (const auto& v : per_seed) pooled.insert(pooled.end(), v.begin(), v.end());
        const SpectralLaw law = c.spec ? law_upscaled(rho, *c.spec) : law_genuine(rho);
        const EigenPdf pdf = eigen_pdf(law, law, beta);
        const double d = oracle::sup_cdf_distance(pooled, pdf.lambda_grid, pdf.nonzero_cdf());
        const std::string name = c.spec ? c.spec->kernel.name() + "@" + format_double(c.spec->xi()) : "genuine";
        o.log << " " << name << " sup|F-G|=" << d << " (tol " << c.tol << ", " << pooled.size() << " eigenvalues)";
        o.check(d <= c.tol, name);
    }
}

// 6. Fraction of zero eigenvalues of Sigma_{Y_K}.
void rank_afze(Outcome& o) {
    const std::size_t n = 256;
    for (std::size_t k : {64u, 128u})
        for (auto [l, m] : std::vector<std::pair<int, int>>{{3, 2}, {2, 1}})
            for (const KernelSpec& kern : KernelSpec::all()) {
                const ResampleSpec spec = ResampleSpec::from_ratio(l, m, kern);
                BlockScenario sc{0.97, 1.0, static_cast<std::size_t>(std::ceil(n / spec.xi())) + 1, n, spec, std::nullopt};
                const Matrix yk = crop_view(signal_block(sc, RngSeed{k + static_cast<std::uint64_t>(l)}), 0, k);
                const std::vector<double> ev = sym_eigenvalues(gram_rows(yk, 1.0 / n));
                std::size_t zeros = 0;
                for (double v : ev) zeros += v <= 1e-10 * ev.front() ? 1 : 0;
                const double frac = static_cast<double>(zeros) / n;
                const double expect = afze(static_cast<double>(k) / n, spec.xi());
                const bool ok = std::abs(frac - expect) <= 2.0 / static_cast<double>(k);
                if (!ok) o.log << " " << kern.name() << " K=" << k << " xi=" << spec.xi() << " frac=" << frac << " expect=" << expect;
                o.check(ok, "rank " + kern.name());
            }
    o.log << " K in {64,128}, xi in {1.5,2}, all kernels checked";
}

// 7. Detector at SNR 1e3.
void detector(Outcome& o) {
    const BlockScenario gen{0.97, 1000.0 / 12.0, 512, 32, std::nullopt, 1.0};
    std::map<KernelType, double> auc;
    for (const KernelSpec& k : KernelSpec::all()) {
        BlockScenario up = gen;
        up.resample = ResampleSpec::from_ratio(2, 1, k);
        const DetectionTrial tr = run_detection_trial(gen, up, {}, 200, 2024);
        auc[k.type] = tr.auc();
        o.log << " " << k.name() << ": far=" << tr.far() << " pd=" << tr.pd() << " auc=" << tr.auc();
        o.check(tr.far() <= 0.05, "far " + k.name());
        o.check(tr.pd() >= (k.type == KernelType::bspline ? 0.95 : 0.90), "pd " + k.name());
    }
    o.check(auc[KernelType::bspline] >= auc[KernelType::catmull_rom], "auc bspline >= catmull-rom");
    o.check(auc[KernelType::bspline] >= auc[KernelType::lanczos3], "auc bspline >= lanczos");
}

// 8. AUC against SNR.
void snr_monotone(Outcome& o) {
    const std::vector<SnrPoint> pts = run_snr_sweep({});
    std::size_t nondecreasing = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        o.log << " snr=" << pts[i].snr << ":" << pts[i].auc;
        if (i > 0 && pts[i].auc >= pts[i - 1].auc) ++nondecreasing;
    }
    o.check(pts.size() == 6 && nondecreasing == 5, "monotone");
}

// 9. Estimator coverage and scale invariance.
void estimator(Outcome& o) {
    const std::size_t reps = 200;
    for (auto [l, m] : std::vector<std::pair<int, int>>{{3, 2}, {2, 1}})
        for (KernelType kt : {KernelType::linear, KernelType::bspline}) {
            const ResampleSpec spec = ResampleSpec::from_ratio(l, m, {kt});
            const BlockScenario sc{0.97, 1000.0 / 12.0, 512, 64, spec, 1.0};
            std::vector<char> hit(reps), invariant(reps);
            parallel_for(reps, [&](std::size_t r) {
                const Matrix z = synthetic_block(sc, realization_seed(99, r));
                const EstimationResult a = estimate(z, {});
                hit[r] = a.contains(spec.xi());
                EstimatorConfig scaled;
                scaled.delta = 4.0;
                invariant[r] = a == estimate(z * 4.0, scaled);
            });
            const auto hits = std::count(hit.begin(), hit.end(), 1);
            const auto inv = std::count(invariant.begin(), invariant.end(), 1);
            o.log << " " << spec.kernel.name() << "@" << spec.xi() << ": " << hits << "/" << reps << " (scale-invariant "
                  << inv << "/" << reps << ")";
            o.check(hits >= static_cast<long>(0.7 * reps), "coverage " + spec.kernel.name());
            o.check(inv == static_cast<long>(reps), "scale invariance");
        }
}

// 10. Byte-identical outputs on re-runs.
void determinism(Outcome& o) {
    for (const auto& [id, fn] : figure_registry()) {
        const std::string a = build_figure({id, false, 5, ".", 1}).table.str();
        const std::string b = build_figure({id, false, 5, ".", 0}).table.str();
        o.log << " " << id << (a == b ? "=" : "!=");
        o.check(a == b && !a.empty(), id);
    }
    const BlockScenario sc{0.97, 100.0, 512, 64, ResampleSpec::from_ratio(2, 1), 1.0};
    const Matrix z1 = synthetic_block(sc, RngSeed{8}), z2 = synthetic_block(sc, RngSeed{8});
    const std::string d1 = nlohmann::json(detect(z1, {})).dump(), d2 = nlohmann::json(detect(z2, {})).dump();
    const std::string e1 = nlohmann::json(estimate(z1, {})).dump(), e2 = nlohmann::json(estimate(z2, {})).dump();
    o.log << " detect json " << (d1 == d2 ? "=" : "!=") << " estimate json " << (e1 == e2 ? "=" : "!=");
    o.check(d1 == d2 && e1 == e2, "json");
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"1 marchenko-pastur oracle", mp_oracle},
        {"2 eta sanity", eta_sanity},
        {"3 normalization and moment", normalization},
        {"4 eigenvalue tracking", tracking},
        {"5 monte carlo vs analytic", monte_carlo},
        {"6 rank and zero fraction", rank_afze},
        {"7 detector", detector},
        {"8 snr monotonicity", snr_monotone},
        {"9 estimator", estimator},
        {"10 determinism", determinism},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            fn(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.log << " [exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %s (%.1f s):%s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.log.str().c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
