#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pgsv/diagnostics.hpp"
#include "pgsv/engine.hpp"
#include "pgsv/io.hpp"
#include "pgsv/model.hpp"
#include "pgsv/particle.hpp"
#include "pgsv/rng.hpp"
#include "pgsv/simulate.hpp"

namespace pgsv::cli {

namespace fs = std::filesystem;

inline std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw config_error(what + ": expected comma-separated numbers, got '" + s + "'");
        }
    }
    if (out.empty()) {
        throw config_error(what + ": empty list");
    }
    return out;
}

inline PriorSpec prior_from_config(const ConfigMap& cfg) {
    PriorSpec prior;
    const double m1 = cfg.get_double("prior.mu_phi", prior.theta_prior.mean1);
    const double m2 = cfg.get_double("prior.mu_q", prior.theta_prior.mean2);
    const double s1 = cfg.get_double("prior.sd_phi", prior.theta_prior.sd1);
    const double s2 = cfg.get_double("prior.sd_q", prior.theta_prior.sd2);
    const double rho = cfg.get_double("prior.rho", prior.theta_prior.corr);
    try {
        prior.theta_prior = BivariateNormalSpec(m1, m2, s1, s2, rho);
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("prior: ") + e.what());
    }
    prior.ig_state.a = cfg.get_double("prior.ig_a0", prior.ig_state.a);
    prior.ig_state.b = cfg.get_double("prior.ig_b0", prior.ig_state.b);
    if (!(prior.ig_state.a > 0.0) || !(prior.ig_state.b > 0.0)) {
        throw config_error("prior: ig_a0 and ig_b0 must be positive");
    }
    const auto ba = cfg.get("prior.ig_beta_a");
    const auto bb = cfg.get("prior.ig_beta_b");
    if (ba || bb) {
        const auto av = parse_double_list(ba.value_or("4"), "prior.ig_beta_a");
        const auto bv = parse_double_list(bb.value_or("2"), "prior.ig_beta_b");
        const std::size_t k = std::max(av.size(), bv.size());
        for (std::size_t i = 0; i < k; ++i) {
            const double a = av[std::min(i, av.size() - 1)];
            const double b = bv[std::min(i, bv.size() - 1)];
            if (!(a > 0.0) || !(b > 0.0)) {
                throw config_error("prior: ig_beta hyperparameters must be positive");
            }
            prior.ig_beta.push_back({a, b});
        }
    }
    return prior;
}

inline AdapterState tuning_from_config(const ConfigMap& cfg) {
    AdapterState tuning;
    tuning.lambda = cfg.get_double("tuning.lambda0", tuning.lambda);
    tuning.alpha_star = cfg.get_double("tuning.alpha_star", tuning.alpha_star);
    tuning.gamma_exponent = cfg.get_double("tuning.gamma_exponent", tuning.gamma_exponent);
    tuning.cov[0] = cfg.get_double("tuning.sigma0_phi", tuning.cov[0]);
    tuning.cov[3] = cfg.get_double("tuning.sigma0_sigma", tuning.cov[3]);
    tuning.cov[1] = cfg.get_double("tuning.sigma0_cross", tuning.cov[1]);
    tuning.cov[2] = tuning.cov[1];
    return tuning;
}

inline void echo_prior(std::ofstream& out, const PriorSpec& prior) {
    out << "[prior]\n";
    out << "mu_phi = " << format_g17(prior.theta_prior.mean1) << "\n";
    out << "mu_q = " << format_g17(prior.theta_prior.mean2) << "\n";
    out << "sd_phi = " << format_g17(prior.theta_prior.sd1) << "\n";
    out << "sd_q = " << format_g17(prior.theta_prior.sd2) << "\n";
    out << "rho = " << format_g17(prior.theta_prior.corr) << "\n";
    out << "ig_a0 = " << format_g17(prior.ig_state.a) << "\n";
    out << "ig_b0 = " << format_g17(prior.ig_state.b) << "\n";
    if (!prior.ig_beta.empty()) {
        out << "ig_beta_a = ";
        for (std::size_t i = 0; i < prior.ig_beta.size(); ++i) {
            out << (i ? "," : "") << format_g17(prior.ig_beta[i].a);
        }
        out << "\nig_beta_b = ";
        for (std::size_t i = 0; i < prior.ig_beta.size(); ++i) {
            out << (i ? "," : "") << format_g17(prior.ig_beta[i].b);
        }
        out << "\n";
    }
}

inline void echo_tuning(std::ofstream& out, const AdapterState& t) {
    out << "[tuning]\n";
    out << "lambda0 = " << format_g17(t.lambda) << "\n";
    out << "alpha_star = " << format_g17(t.alpha_star) << "\n";
    out << "gamma_exponent = " << format_g17(t.gamma_exponent) << "\n";
    out << "sigma0_phi = " << format_g17(t.cov[0]) << "\n";
    out << "sigma0_sigma = " << format_g17(t.cov[3]) << "\n";
    out << "sigma0_cross = " << format_g17(t.cov[1]) << "\n";
}

// -------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    double phi = 0.9;
    double sigma = 0.5;
    double mu = 0.0;
    std::string beta;   // empty: exp(mu/2)
    std::string betas;  // nonempty: multivariate
    std::uint64_t n = 1000;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::string config_file;
};

inline RunManifest run_simulate(const SimulateArgs& args) {
    const auto start = std::chrono::steady_clock::now();
    fs::create_directories(args.output_dir);
    RngState rng(args.seed);

    LatentPath x;
    ReturnsPanel y;
    if (!args.betas.empty()) {
        MsvParams params{args.phi, args.sigma, parse_double_list(args.betas, "betas")};
        if (!(std::fabs(params.phi) < 1.0)) {
            throw config_error("simulate: |phi| must be < 1");
        }
        std::tie(x, y) = simulate_msv(params, args.n, rng);
    } else {
        SvParams params{args.phi, args.sigma, args.mu,
                        args.beta.empty() ? std::exp(0.5 * args.mu)
                                          : parse_double_list(args.beta, "beta").at(0)};
        if (!(std::fabs(params.phi) < 1.0)) {
            throw config_error("simulate: |phi| must be < 1");
        }
        std::tie(x, y) = simulate_sv(params, args.n, rng);
    }

    const fs::path dir(args.output_dir);
    write_simulation_csv(dir / "sim.csv", x, y);

    std::ofstream cfg(dir / "effective_config.ini");
    cfg << "[run]\ncommand = simulate\n";
    cfg << "seed = " << args.seed << "\n";
    cfg << "n = " << args.n << "\n";
    cfg << "phi = " << format_g17(args.phi) << "\n";
    cfg << "sigma = " << format_g17(args.sigma) << "\n";
    if (!args.betas.empty()) {
        cfg << "betas = " << args.betas << "\n";
    } else {
        cfg << "mu = " << format_g17(args.mu) << "\n";
        cfg << "beta = "
            << format_g17(args.beta.empty() ? std::exp(0.5 * args.mu)
                                            : parse_double_list(args.beta, "beta").at(0))
            << "\n";
    }
    cfg << "output_dir = " << args.output_dir << "\n";
    cfg.close();

    RunManifest manifest;
    manifest.command = "simulate";
    manifest.seed = args.seed;
    manifest.config_echo_file = "effective_config.ini";
    manifest.outputs = {"sim.csv", "effective_config.ini"};
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.write(dir / "manifest.txt");
    return manifest;
}

// -------------------------------------------------------------------------
// fit / fit-msv

struct FitArgs {
    std::string input;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    std::uint64_t particles = 20;
    std::uint64_t iters = 5000;
    std::uint64_t burnin = 100;
    std::string mode = "joint2";
    std::string adapt = "on";
    std::uint64_t chains = 1;
    std::uint64_t thin = 1;
    std::uint64_t state_thin = 10;
    double beta = 1.0;
    double band_level = 0.95;
    bool msv = false;
    ConfigMap file_config;
};

inline FitMode parse_mode(const std::string& mode, bool msv) {
    if (msv) {
        return FitMode::msv;
    }
    if (mode == "joint2") {
        return FitMode::joint2;
    }
    if (mode == "joint3") {
        return FitMode::joint3;
    }
    if (mode == "individual2") {
        return FitMode::individual2;
    }
    throw config_error("mode: expected joint2, joint3 or individual2, got '" + mode + "'");
}

inline void write_fit_outputs(const fs::path& dir, const ChainOutput& out,
                              RunManifest& manifest) {
    const bool three_param = out.config.mode == FitMode::joint3;

    CsvTable theta;
    theta.columns = {"iter", "phi", "sigma"};
    if (three_param) {
        theta.columns.push_back("mu");
    }
    for (std::size_t i = 0; i < out.theta_trace.size(); ++i) {
        std::vector<double> row{static_cast<double>(i + 1), out.theta_trace[i][0],
                                out.theta_trace[i][1]};
        if (three_param) {
            row.push_back(out.mu_trace[i]);
        }
        theta.rows.push_back(std::move(row));
    }
    write_csv_table(dir / "theta_trace.csv", theta);
    manifest.outputs.push_back("theta_trace.csv");

    if (!out.beta_traces.empty()) {
        CsvTable betas;
        betas.columns = {"iter"};
        for (std::size_t i = 0; i < out.beta_traces.size(); ++i) {
            betas.columns.push_back("beta" + std::to_string(i + 1));
        }
        for (std::size_t r = 0; r < out.beta_traces[0].size(); ++r) {
            std::vector<double> row{static_cast<double>(r + 1)};
            for (const auto& tr : out.beta_traces) {
                row.push_back(tr[r]);
            }
            betas.rows.push_back(std::move(row));
        }
        write_csv_table(dir / "betas.csv", betas);
        manifest.outputs.push_back("betas.csv");
    }

    if (out.state_draws.size() >= 2) {
        const auto band = state_band(out.state_draws, out.config.band_level);
        CsvTable bt;
        bt.columns = {"t", "mean", "lower", "upper"};
        for (std::size_t t = 0; t < band.mean.size(); ++t) {
            bt.rows.push_back({static_cast<double>(t), band.mean[t], band.lower[t],
                               band.upper[t]});
        }
        write_csv_table(dir / "state_band.csv", bt);
        manifest.outputs.push_back("state_band.csv");
    }
}

inline void echo_fit_config(const fs::path& path, const FitArgs& args, const FitConfig& cfg,
                            std::uint64_t seed) {
    std::ofstream out(path);
    out << "[run]\n";
    out << "command = " << (args.msv ? "fit-msv" : "fit") << "\n";
    out << "input = " << args.input << "\n";
    out << "output_dir = " << args.output_dir << "\n";
    out << "seed = " << seed << "\n";
    out << "particles = " << cfg.n_particles << "\n";
    out << "iters = " << cfg.iterations << "\n";
    out << "burnin = " << cfg.burnin << "\n";
    if (!args.msv) {
        out << "mode = " << to_string(cfg.mode) << "\n";
    }
    out << "adapt = " << (cfg.adapt ? "on" : "off") << "\n";
    out << "chains = " << args.chains << "\n";
    out << "thin = " << cfg.thin << "\n";
    out << "state_thin = " << cfg.state_thin << "\n";
    out << "beta = " << format_g17(cfg.fixed_beta) << "\n";
    out << "band_level = " << format_g17(cfg.band_level) << "\n";
    echo_prior(out, cfg.prior);
    echo_tuning(out, cfg.tuning);
}

inline RunManifest run_fit(const FitArgs& args) {
    const auto start = std::chrono::steady_clock::now();
    if (args.input.empty()) {
        throw config_error("fit: --input is required");
    }
    if (args.adapt != "on" && args.adapt != "off") {
        throw config_error("adapt: expected on or off, got '" + args.adapt + "'");
    }
    if (args.chains < 1) {
        throw config_error("chains: must be >= 1");
    }

    FitConfig cfg;
    cfg.n_particles = args.particles;
    cfg.iterations = args.iters;
    cfg.burnin = args.burnin;
    cfg.adapt = args.adapt == "on";
    cfg.seed = args.seed;
    cfg.mode = parse_mode(args.mode, args.msv);
    cfg.thin = args.thin;
    cfg.state_thin = args.state_thin;
    cfg.fixed_beta = args.beta;
    cfg.band_level = args.band_level;
    cfg.prior = prior_from_config(args.file_config);
    cfg.tuning = tuning_from_config(args.file_config);

    const auto problems = cfg.validate();
    if (!problems.empty()) {
        std::string msg = "invalid fit configuration:";
        for (const auto& p : problems) {
            msg += "\n  " + p;
        }
        throw config_error(msg);
    }

    const auto panel = load_returns_csv(args.input);
    if (!args.msv && panel.p != 1) {
        throw data_error("fit: input has " + std::to_string(panel.p) +
                         " columns; use fit-msv for panels");
    }

    const fs::path dir(args.output_dir);
    fs::create_directories(dir);

    RunManifest manifest;
    manifest.command = args.msv ? "fit-msv" : "fit";
    manifest.seed = args.seed;
    manifest.input = args.input;
    manifest.input_digest = file_digest(args.input);
    manifest.config_echo_file = "effective_config.ini";
    manifest.outputs.push_back("effective_config.ini");

    if (args.chains == 1) {
        RngState rng(args.seed);
        const auto out = fit(panel, cfg, rng);
        write_fit_outputs(dir, out, manifest);
    } else {
        std::vector<ChainOutput> outs(args.chains);
        std::vector<std::exception_ptr> errors(args.chains);
        std::vector<std::thread> workers;
        for (std::uint64_t c = 0; c < args.chains; ++c) {
            workers.emplace_back([&, c] {
                try {
                    RngState rng(args.seed, c);
                    outs[c] = fit(panel, cfg, rng);
                } catch (...) {
                    errors[c] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) {
            w.join();
        }
        for (const auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
        for (std::uint64_t c = 0; c < args.chains; ++c) {
            const fs::path sub = dir / ("chain" + std::to_string(c));
            fs::create_directories(sub);
            RunManifest chain_manifest = manifest;
            chain_manifest.outputs.clear();
            write_fit_outputs(sub, outs[c], chain_manifest);
            for (const auto& f : chain_manifest.outputs) {
                manifest.outputs.push_back("chain" + std::to_string(c) + "/" + f);
            }
        }
    }

    echo_fit_config(dir / "effective_config.ini", args, cfg, args.seed);
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.write(dir / "manifest.txt");
    return manifest;
}

// -------------------------------------------------------------------------
// diagnose

struct DiagnoseArgs {
    std::string input;
    std::string output_dir = "out";
    std::uint64_t max_lag = 100;
};

inline RunManifest run_diagnose(const DiagnoseArgs& args) {
    const auto start = std::chrono::steady_clock::now();
    if (args.input.empty()) {
        throw config_error("diagnose: --input is required");
    }
    const auto table = load_csv_table(args.input);
    if (table.rows.empty()) {
        throw data_error("diagnose: no rows in " + args.input);
    }

    const fs::path dir(args.output_dir);
    fs::create_directories(dir);

    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (table.columns[c] != "iter" && table.columns[c] != "t") {
            cols.push_back(c);
        }
    }
    if (cols.empty()) {
        throw data_error("diagnose: no trace columns in " + args.input);
    }

    const std::size_t max_lag =
        std::min<std::size_t>(args.max_lag, table.rows.size() - 1);

    std::ofstream summary(dir / "summary.csv");
    summary << "column,mean,sd,q025,median,q975,if\n";
    CsvTable acf_out;
    acf_out.columns = {"lag"};
    std::vector<std::vector<double>> acfs;
    for (const auto c : cols) {
        std::vector<double> trace(table.rows.size());
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            trace[r] = table.rows[r][c];
        }
        const auto s = posterior_summary(trace);
        double inefficiency = std::numeric_limits<double>::quiet_NaN();
        if (trace.size() >= 100) {
            inefficiency = inefficiency_factor(trace);
        }
        summary << table.columns[c] << "," << format_g17(s.mean) << "," << format_g17(s.sd)
                << "," << format_g17(s.q025) << "," << format_g17(s.median) << ","
                << format_g17(s.q975) << "," << format_g17(inefficiency) << "\n";
        acf_out.columns.push_back(table.columns[c]);
        acfs.push_back(sample_acf(trace, max_lag));
    }
    summary.close();

    for (std::size_t k = 0; k < max_lag; ++k) {
        std::vector<double> row{static_cast<double>(k + 1)};
        for (const auto& a : acfs) {
            row.push_back(a[k]);
        }
        acf_out.rows.push_back(std::move(row));
    }
    write_csv_table(dir / "acf.csv", acf_out);

    RunManifest manifest;
    manifest.command = "diagnose";
    manifest.input = args.input;
    manifest.input_digest = file_digest(args.input);
    manifest.config_echo_file = "effective_config.ini";
    manifest.outputs = {"summary.csv", "acf.csv", "effective_config.ini"};
    std::ofstream cfg(dir / "effective_config.ini");
    cfg << "[run]\ncommand = diagnose\ninput = " << args.input
        << "\noutput_dir = " << args.output_dir << "\nmax_lag = " << args.max_lag << "\n";
    cfg.close();
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.write(dir / "manifest.txt");
    return manifest;
}

// -------------------------------------------------------------------------
// acf-theory

struct AcfTheoryArgs {
    double phi = 0.9;
    double sigma = 0.5;
    double kappa = 3.0;
    std::uint64_t max_lag = 100;
    std::string output_dir = "out";
};

inline RunManifest run_acf_theory(const AcfTheoryArgs& args) {
    const auto start = std::chrono::steady_clock::now();
    if (!(std::fabs(args.phi) < 1.0)) {
        throw config_error("acf-theory: |phi| must be < 1");
    }
    if (args.max_lag < 1) {
        throw config_error("acf-theory: max-lag must be >= 1");
    }
    const fs::path dir(args.output_dir);
    fs::create_directories(dir);

    CsvTable table;
    table.columns = {"lag", "acf"};
    for (std::uint64_t h = 1; h <= args.max_lag; ++h) {
        table.rows.push_back({static_cast<double>(h),
                              theoretical_sv_acf(args.phi, args.sigma, args.kappa,
                                                 static_cast<int>(h))});
    }
    write_csv_table(dir / "acf_theory.csv", table);

    RunManifest manifest;
    manifest.command = "acf-theory";
    manifest.config_echo_file = "effective_config.ini";
    manifest.outputs = {"acf_theory.csv", "effective_config.ini"};
    std::ofstream cfg(dir / "effective_config.ini");
    cfg << "[run]\ncommand = acf-theory\nphi = " << format_g17(args.phi)
        << "\nsigma = " << format_g17(args.sigma) << "\nkappa = " << format_g17(args.kappa)
        << "\nmax_lag = " << args.max_lag << "\noutput_dir = " << args.output_dir << "\n";
    cfg.close();
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.write(dir / "manifest.txt");
    return manifest;
}

// -------------------------------------------------------------------------
// top level

inline int run_main(int argc, const char* const* argv) {
    CLI::App app{"Particle Gibbs with ancestor sampling for stochastic volatility models"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "generate synthetic SV/MSV data");
    sim_cmd->add_option("--phi", sim.phi, "AR coefficient");
    sim_cmd->add_option("--sigma", sim.sigma, "state noise sd");
    sim_cmd->add_option("--mu", sim.mu, "log-volatility level");
    sim_cmd->add_option("--beta", sim.beta, "observation scale (default exp(mu/2))");
    sim_cmd->add_option("--betas", sim.betas, "comma-separated asset scales (multivariate)");
    sim_cmd->add_option("--n", sim.n, "series length");
    sim_cmd->add_option("--seed", sim.seed, "RNG seed");
    sim_cmd->add_option("--output-dir", sim.output_dir, "output directory");
    sim_cmd->add_option("--config", sim.config_file, "config file");

    FitArgs fit_args;
    std::string fit_config_file;
    auto* fit_cmd = app.add_subcommand("fit", "fit a univariate SV model");
    auto* msv_cmd = app.add_subcommand("fit-msv", "fit a multivariate SV model");
    for (auto* cmd : {fit_cmd, msv_cmd}) {
        cmd->add_option("--input", fit_args.input, "returns CSV");
        cmd->add_option("--output-dir", fit_args.output_dir, "output directory");
        cmd->add_option("--seed", fit_args.seed, "RNG seed");
        cmd->add_option("--particles", fit_args.particles, "particle count N");
        cmd->add_option("--iters", fit_args.iters, "total sweeps including burnin");
        cmd->add_option("--burnin", fit_args.burnin, "discarded sweeps");
        cmd->add_option("--adapt", fit_args.adapt, "adaptive proposal: on|off");
        cmd->add_option("--chains", fit_args.chains, "parallel chains");
        cmd->add_option("--thin", fit_args.thin, "keep every k-th parameter draw");
        cmd->add_option("--state-thin", fit_args.state_thin, "keep every k-th state path");
        cmd->add_option("--band-level", fit_args.band_level, "credible band level");
        cmd->add_option("--config", fit_config_file, "config file");
    }
    fit_cmd->add_option("--mode", fit_args.mode, "joint2|joint3|individual2");
    fit_cmd->add_option("--beta", fit_args.beta, "fixed observation scale (2p modes)");

    DiagnoseArgs diag;
    auto* diag_cmd = app.add_subcommand("diagnose", "trace summaries, ACF and inefficiency");
    diag_cmd->add_option("--input", diag.input, "trace CSV");
    diag_cmd->add_option("--output-dir", diag.output_dir, "output directory");
    diag_cmd->add_option("--max-lag", diag.max_lag, "ACF lags");

    AcfTheoryArgs acft;
    auto* acf_cmd = app.add_subcommand("acf-theory", "theoretical ACF of squared returns");
    acf_cmd->add_option("--phi", acft.phi, "AR coefficient");
    acf_cmd->add_option("--sigma", acft.sigma, "state noise sd");
    acf_cmd->add_option("--kappa", acft.kappa, "noise kurtosis");
    acf_cmd->add_option("--max-lag", acft.max_lag, "lags to tabulate");
    acf_cmd->add_option("--output-dir", acft.output_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim_cmd->parsed()) {
            // config file fills in anything not given on the command line
            if (!sim.config_file.empty()) {
                const auto cfg = ConfigMap::parse_file(sim.config_file);
                if (!sim_cmd->count("--phi")) sim.phi = cfg.get_double("run.phi", sim.phi);
                if (!sim_cmd->count("--sigma")) sim.sigma = cfg.get_double("run.sigma", sim.sigma);
                if (!sim_cmd->count("--mu")) sim.mu = cfg.get_double("run.mu", sim.mu);
                if (!sim_cmd->count("--beta")) sim.beta = cfg.get_string("run.beta", sim.beta);
                if (!sim_cmd->count("--betas")) sim.betas = cfg.get_string("run.betas", sim.betas);
                if (!sim_cmd->count("--n")) sim.n = cfg.get_u64("run.n", sim.n);
                if (!sim_cmd->count("--seed")) sim.seed = cfg.get_u64("run.seed", sim.seed);
                if (!sim_cmd->count("--output-dir")) {
                    sim.output_dir = cfg.get_string("run.output_dir", sim.output_dir);
                }
            }
            run_simulate(sim);
            return 0;
        }
        if (fit_cmd->parsed() || msv_cmd->parsed()) {
            auto* cmd = fit_cmd->parsed() ? fit_cmd : msv_cmd;
            fit_args.msv = msv_cmd->parsed();
            if (!fit_config_file.empty()) {
                const auto cfg = ConfigMap::parse_file(fit_config_file);
                fit_args.file_config = cfg;
                if (!cmd->count("--input")) {
                    fit_args.input = cfg.get_string("run.input", fit_args.input);
                }
                if (!cmd->count("--output-dir")) {
                    fit_args.output_dir = cfg.get_string("run.output_dir", fit_args.output_dir);
                }
                if (!cmd->count("--seed")) fit_args.seed = cfg.get_u64("run.seed", fit_args.seed);
                if (!cmd->count("--particles")) {
                    fit_args.particles = cfg.get_u64("run.particles", fit_args.particles);
                }
                if (!cmd->count("--iters")) fit_args.iters = cfg.get_u64("run.iters", fit_args.iters);
                if (!cmd->count("--burnin")) {
                    fit_args.burnin = cfg.get_u64("run.burnin", fit_args.burnin);
                }
                if (!cmd->count("--mode")) {
                    fit_args.mode = cfg.get_string("run.mode", fit_args.mode);
                }
                if (!cmd->count("--adapt")) {
                    fit_args.adapt = cfg.get_string("run.adapt", fit_args.adapt);
                }
                if (!cmd->count("--chains")) {
                    fit_args.chains = cfg.get_u64("run.chains", fit_args.chains);
                }
                if (!cmd->count("--thin")) fit_args.thin = cfg.get_u64("run.thin", fit_args.thin);
                if (!cmd->count("--state-thin")) {
                    fit_args.state_thin = cfg.get_u64("run.state_thin", fit_args.state_thin);
                }
                if (!cmd->count("--beta")) {
                    fit_args.beta = cfg.get_double("run.beta", fit_args.beta);
                }
                if (!cmd->count("--band-level")) {
                    fit_args.band_level = cfg.get_double("run.band_level", fit_args.band_level);
                }
            }
            run_fit(fit_args);
            return 0;
        }
        if (diag_cmd->parsed()) {
            run_diagnose(diag);
            return 0;
        }
        if (acf_cmd->parsed()) {
            run_acf_theory(acft);
            return 0;
        }
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const weight_collapse_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace pgsv::cli
