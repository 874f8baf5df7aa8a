#pragma once

// Command-line front end. run_cli() is the whole program; tools/rmtres.cpp
// only forwards argv. Exit codes: 0 success, 2 input error, 3 numerical failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rmtres/bench.hpp"
#include "rmtres/json_io.hpp"
#include "rmtres/pgm.hpp"

namespace rmtres {

namespace cli {

enum ExitCode { ok = 0, input_error = 2, numerical_error = 3 };

/// RMT_SEED when set and numeric, otherwise 1.
inline std::uint64_t default_seed() {
    if (const char* s = std::getenv("RMT_SEED")) {
        try {
            return std::stoull(s);
        } catch (const std::logic_error&) {
            throw InvalidInput("RMT_SEED must be an unsigned integer, got '" + std::string(s) + "'");
        }
    }
    return 1;
}

struct Options {
    // data source
    std::string image;
    bool synthetic = false;
    double rho = 0.97;
    double sigma_s2 = 100.0;
    std::size_t n = 32;
    std::size_t field_size = 512;
    std::string xi = "1";
    std::string kernel = "linear";
    double phi = 0.0;
    std::optional<std::uint64_t> seed;
    std::size_t block_size = 32;
    bool no_standardize = false;
    // analysis
    std::size_t k = 0; ///< 0: per-command default
    double delta = 1.0;
    std::optional<double> threshold;
    double t_mu = 2.0;
    double xi_max = 2.0;
    int kw = 2;
    // pdf / spectrum
    double beta = 1.0;
    std::size_t points = 2048;
    double pdf_scale = 1.0;
    std::size_t spectrum_n = 1024;
    // generate
    std::size_t gen_n = 256;
    double gen_sigma_s2 = 1.0;
    // output
    std::string out;
    std::string format;
    // experiment
    std::string experiment;
    bool full = false;
    unsigned threads = 0;

    std::uint64_t seed_value() const { return seed ? *seed : default_seed(); }

    ResampleSpec resample() const {
        const auto [l, m] = ResampleSpec::ratio_from_string(xi);
        ResampleSpec s{l, m, phi, KernelSpec::parse(kernel), std::nullopt};
        s.validate();
        return s;
    }
};

/// Writes to --out when given, otherwise to `out`.
inline void emit(const Options& o, std::ostream& out, const std::string& text) {
    if (o.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw InvalidInput("--out: cannot open '" + o.out + "' for writing");
    f << text;
}

inline std::string format_or(const Options& o, const char* fallback) {
    const std::string f = o.format.empty() ? fallback : o.format;
    if (f != "json" && f != "csv") throw InvalidInput("--format must be json or csv, got '" + f + "'");
    return f;
}

/// The block to analyse and the quantization step in its units.
struct Input {
    Matrix block;
    double delta = 1.0;
    nlohmann::json source;
};

inline Input load_input(const Options& o) {
    if (o.synthetic == !o.image.empty()) {
        throw InvalidInput("give either an image path or --synthetic");
    }
    if (o.synthetic) {
        BlockScenario sc{o.rho, o.sigma_s2, o.field_size, o.n, std::nullopt, o.delta};
        const ResampleSpec rs = o.resample();
        if (rs.xi() > 1.0) sc.resample = rs;
        const std::uint64_t seed = o.seed_value();
        nlohmann::json src{{"type", "synthetic"}, {"rho", o.rho},         {"sigma_s2", o.sigma_s2},
                           {"n", o.n},            {"field_size", o.field_size}, {"xi", rs.xi()},
                           {"kernel", rs.kernel.name()}, {"phi", o.phi}, {"seed", seed}};
        return {synthetic_block(sc, RngSeed{seed}), o.delta, src};
    }
    const ImageGray img = read_pgm(o.image);
    const ImageBlock b = central_block(img, o.block_size, !o.no_standardize);
    // Standardizing divides the noise by sigma-hat, so the step shrinks with it.
    const double delta = o.no_standardize ? o.delta : o.delta / b.stddev;
    nlohmann::json src{{"type", "image"},       {"path", o.image},    {"width", img.width},
                       {"height", img.height},  {"bit_depth", img.bit_depth()},
                       {"block_size", o.block_size}, {"row0", b.row0}, {"col0", b.col0},
                       {"mean", b.mean},        {"stddev", b.stddev}, {"standardized", !o.no_standardize}};
    return {b.block, delta, src};
}

inline void cmd_detect(const Options& o, std::ostream& out) {
    const Input in = load_input(o);
    const DetectorConfig cfg{o.k ? o.k : 9, in.delta, o.threshold};
    const DetectionResult r = detect(in.block, cfg);
    if (format_or(o, "json") == "csv") {
        CsvTable t;
        t.header = {"view", "lambda", "lambda0", "below"};
        for (std::size_t v = 0; v < r.per_view_lambda.size(); ++v) {
            const bool below = std::find(r.below_set.begin(), r.below_set.end(), v) != r.below_set.end();
            t.add({std::to_string(v), format_double(r.per_view_lambda[v]),
                   r.lambda0_per_view[v] ? format_double(*r.lambda0_per_view[v]) : "", below ? "1" : "0"});
        }
        emit(o, out, t.str());
        return;
    }
    nlohmann::json j = r;
    j["delta"] = in.delta;
    j["source"] = in.source;
    emit(o, out, j.dump(2) + "\n");
}

inline void cmd_estimate(const Options& o, std::ostream& out) {
    const Input in = load_input(o);
    EstimatorConfig cfg;
    cfg.k = o.k ? o.k : 16;
    cfg.delta = in.delta;
    cfg.kw = o.kw;
    cfg.xi_max = o.xi_max;
    cfg.t_mu = o.t_mu;
    const EstimationResult r = estimate(in.block, cfg);
    if (format_or(o, "json") == "csv") {
        CsvTable t;
        t.header = {"p_hat", "xi_lower", "xi_upper", "mu", "clamped"};
        t.add({std::to_string(r.p_hat), format_double(r.xi_lower), format_double(r.xi_upper),
               format_double(r.mu), r.clamped ? "1" : "0"});
        emit(o, out, t.str());
        return;
    }
    nlohmann::json j = r;
    j["delta"] = in.delta;
    j["source"] = in.source;
    emit(o, out, j.dump(2) + "\n");
}

inline void cmd_pdf(const Options& o, std::ostream& out) {
    const ResampleSpec rs = o.resample();
    const SpectralLaw law = rs.xi() > 1.0 ? law_upscaled(o.rho, rs) : law_genuine(o.rho);
    GridConfig grid;
    grid.points = o.points;
    EigenPdf pdf = eigen_pdf(law, law, o.beta, {}, {}, grid);
    if (o.pdf_scale != 1.0) pdf = pdf.scaled(o.pdf_scale);
    if (format_or(o, "csv") == "csv") {
        CsvTable t;
        t.header = {"lambda", "density"};
        for (std::size_t i = 0; i < pdf.lambda_grid.size(); ++i)
            t.add({format_double(pdf.lambda_grid[i]), format_double(pdf.density[i])});
        emit(o, out, t.str());
        return;
    }
    nlohmann::json j{{"rho", o.rho},
                     {"beta", o.beta},
                     {"xi", rs.xi()},
                     {"kernel", rs.kernel.name()},
                     {"sigma_s2", o.pdf_scale},
                     {"zero_mass", pdf.zero_mass},
                     {"lambda_minus", pdf.lambda_minus()},
                     {"lambda_plus", pdf.lambda_plus()},
                     {"lambda", pdf.lambda_grid},
                     {"density", pdf.density}};
    emit(o, out, j.dump(2) + "\n");
}

inline void cmd_spectrum(const Options& o, std::ostream& out) {
    const ResampleSpec rs = o.resample();
    const std::size_t n = o.spectrum_n;
    const TrackingCurve c = eigen_tracking(o.rho, rs, n);
    if (format_or(o, "csv") == "csv") {
        CsvTable t;
        t.header = {"index", "eigenvalue", "approximation"};
        for (std::size_t i = 0; i < c.eigen.size(); ++i)
            t.add({std::to_string(i + 1), format_double(c.eigen[i]), format_double(c.approx[i])});
        emit(o, out, t.str());
        return;
    }
    nlohmann::json j{{"rho", o.rho},
                     {"xi", rs.xi()},
                     {"kernel", rs.kernel.name()},
                     {"n", n},
                     {"afze", 1.0 - 1.0 / rs.xi()},
                     {"eigenvalue", c.eigen},
                     {"approximation", c.approx}};
    emit(o, out, j.dump(2) + "\n");
}

inline void cmd_generate(const Options& o, std::ostream& out) {
    const std::uint64_t seed = o.seed_value();
    Matrix z = generate_field({o.rho, o.gen_sigma_s2, 0, o.gen_n}, RngSeed{seed});
    const ResampleSpec rs = o.resample();
    if (rs.xi() > 1.0) z = upscale(z, rs);
    z = quantize(std::move(z), o.delta);
    const std::string fmt = o.format.empty() ? "csv" : o.format;
    if (fmt == "pgm") {
        if (o.out.empty()) throw InvalidInput("--format pgm needs --out");
        Matrix levels = z;
        levels *= 1.0 / o.delta;
        write_pgm(o.out, to_image(levels));
        return;
    }
    if (fmt == "json") {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < z.rows(); ++i) {
            const auto r = z.row(i);
            rows.push_back(std::vector<double>(r.begin(), r.end()));
        }
        emit(o, out, nlohmann::json{{"seed", seed}, {"rho", o.rho}, {"xi", rs.xi()}, {"data", rows}}.dump() + "\n");
        return;
    }
    if (fmt != "csv") throw InvalidInput("--format must be csv, json or pgm, got '" + fmt + "'");
    std::string s;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        for (std::size_t j = 0; j < z.cols(); ++j) {
            if (j) s += ',';
            s += format_double(z(i, j));
        }
        s += '\n';
    }
    emit(o, out, s);
}

inline void cmd_experiment(const Options& o, std::ostream& out) {
    std::vector<std::string> ids;
    if (o.experiment == "all") {
        for (const auto& [id, fn] : figure_registry()) ids.push_back(id);
    } else {
        ids.push_back(o.experiment);
    }
    for (const std::string& id : ids) {
        ExperimentSpec ex{id, o.full, o.seed_value(), o.out.empty() ? "." : o.out, o.threads};
        out << run_figure(ex) << "\n";
    }
}

inline void add_source_flags(CLI::App* c, Options& o) {
    c->add_option("image", o.image, "PGM image (P2 or P5)");
    c->add_flag("--synthetic", o.synthetic, "analyse a synthetic AR block instead of an image");
    c->add_option("--rho", o.rho, "AR correlation coefficient")->check(CLI::Range(0.0, 0.999999));
    c->add_option("--sigma-s2", o.sigma_s2, "innovation variance of the synthetic field")->check(CLI::PositiveNumber);
    c->add_option("--n", o.n, "synthetic block size N")->check(CLI::Range(2, 1 << 14));
    c->add_option("--field-size", o.field_size, "side of the synthetic field the block is cut from");
    c->add_option("--xi", o.xi, "upscaling factor, e.g. 2, 1.5 or 8/5 (1 = genuine)");
    c->add_option("--kernel", o.kernel, "linear | catmull-rom | bspline | lanczos3");
    c->add_option("--phi", o.phi, "interpolation phase in [0, 1)");
    c->add_option("--seed", o.seed, "random seed (default: $RMT_SEED or 1)");
    c->add_option("--block-size", o.block_size, "central block size for images")->check(CLI::PositiveNumber);
    c->add_flag("--no-standardize", o.no_standardize, "keep raw pixel values");
    c->add_option("--delta", o.delta, "quantization step")->check(CLI::PositiveNumber);
    c->add_option("--k", o.k, "columns per view K");
    c->add_option("--out", o.out, "output file (default: stdout)");
    c->add_option("--format", o.format, "json | csv");
}

} // namespace cli

/// Parses argv and runs one subcommand. Messages go to `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    using namespace cli;
    Options o;
    CLI::App app{"Random-matrix analysis of upscaled images"};
    app.require_subcommand(1);

    auto* det = app.add_subcommand("detect", "decide whether a block was upscaled");
    add_source_flags(det, o);
    det->add_option("--threshold", o.threshold, "custom decision threshold");

    auto* est = app.add_subcommand("estimate", "interval estimate of the upscaling factor");
    add_source_flags(est, o);
    est->add_option("--t-mu", o.t_mu, "threshold on the peak-to-median statistic mu")->check(CLI::PositiveNumber);
    est->add_option("--xi-max", o.xi_max, "largest factor considered");
    est->add_option("--kw", o.kw, "kernel width k_w subtracted from the rank");

    auto* pdf = app.add_subcommand("pdf", "asymptotic eigenvalue density");
    pdf->add_option("--rho", o.rho, "AR correlation coefficient");
    pdf->add_option("--beta", o.beta, "aspect ratio K/N in (0, 1]");
    pdf->add_option("--xi", o.xi, "upscaling factor (1 = genuine)");
    pdf->add_option("--kernel", o.kernel, "interpolation kernel");
    pdf->add_option("--phi", o.phi, "interpolation phase");
    pdf->add_option("--sigma-s2", o.pdf_scale, "signal variance scaling")->check(CLI::PositiveNumber);
    pdf->add_option("--points", o.points, "grid points")->check(CLI::Range(16, 1 << 20));
    pdf->add_option("--out", o.out, "output file (default: stdout)");
    pdf->add_option("--format", o.format, "csv | json");

    auto* spec = app.add_subcommand("spectrum", "eigenvalues of D against the d'(omega) approximation");
    spec->add_option("--rho", o.rho, "AR correlation coefficient");
    spec->add_option("--xi", o.xi, "upscaling factor");
    spec->add_option("--kernel", o.kernel, "interpolation kernel");
    spec->add_option("--phi", o.phi, "interpolation phase");
    spec->add_option("--n", o.spectrum_n, "matrix size N")->check(CLI::Range(4, 8192));
    spec->add_option("--out", o.out, "output file (default: stdout)");
    spec->add_option("--format", o.format, "csv | json");

    auto* gen = app.add_subcommand("generate", "write a synthetic (upscaled, quantized) field");
    gen->add_option("--rho", o.rho, "AR correlation coefficient");
    gen->add_option("--sigma-s2", o.gen_sigma_s2, "innovation variance")->check(CLI::PositiveNumber);
    gen->add_option("--n", o.gen_n, "field size")->check(CLI::Range(2, 8192));
    gen->add_option("--xi", o.xi, "upscaling factor");
    gen->add_option("--kernel", o.kernel, "interpolation kernel");
    gen->add_option("--phi", o.phi, "interpolation phase");
    gen->add_option("--delta", o.delta, "quantization step")->check(CLI::PositiveNumber);
    gen->add_option("--seed", o.seed, "random seed (default: $RMT_SEED or 1)");
    gen->add_option("--out", o.out, "output file (default: stdout)");
    gen->add_option("--format", o.format, "csv | json | pgm");

    auto* exp = app.add_subcommand("experiment", "regenerate a figure dataset (fig1b fig2 fig3 fig4 fig5 fig7 all)");
    exp->add_option("id", o.experiment, "experiment id")->required();
    exp->add_option("--out", o.out, "output directory");
    exp->add_flag("--full", o.full, "full-scale realization counts");
    exp->add_option("--seed", o.seed, "base seed (default: $RMT_SEED or 1)");
    exp->add_option("--threads", o.threads, "worker threads (0 = all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    }

    try {
        if (det->parsed()) cmd_detect(o, out);
        else if (est->parsed()) cmd_estimate(o, out);
        else if (pdf->parsed()) cmd_pdf(o, out);
        else if (spec->parsed()) cmd_spectrum(o, out);
        else if (gen->parsed()) cmd_generate(o, out);
        else if (exp->parsed()) cmd_experiment(o, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return numerical_error;
    }
    return ok;
}

} // namespace rmtres
