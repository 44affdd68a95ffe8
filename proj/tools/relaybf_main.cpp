// SPDX-License-Identifier: Apache-2.0
//
// Command-line harness: SDR solves, Monte Carlo rate sweeps, PAPR CCDF
// simulation and the formula/tail-bound verification suite.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "relaybf/errors.hpp"
#include "relaybf/experiments.hpp"
#include "relaybf/problem.hpp"
#include "relaybf/randomization.hpp"
#include "relaybf/sbf.hpp"
#include "relaybf/scenario.hpp"
#include "relaybf/sdr.hpp"

namespace {

using namespace relaybf;

ProblemData build_from_config(const NetworkConfig& config,
                              const ChannelRealization& channels,
                              bool per_antenna) {
    if (config.topology == Topology::MIMO) {
        std::optional<int> active;
        if (!per_antenna) active = 0;
        if (per_antenna && !config.per_antenna_budgets)
            throw DimensionMismatchError(
                "--per-antenna requires per_antenna_budgets in the config");
        return build_mimo_problem(config, channels, {}, active);
    }
    if (per_antenna)
        throw TopologyMismatchError(
            "--per-antenna applies to the MIMO topology only");
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(
        config.num_relay_antennas, config.num_relay_antennas);
    return build_distributed_problem(config, channels,
                                     {{eye, config.total_power_budget}});
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + path);
    out << text;
}

int run_solve(const std::string& config_path, std::uint64_t seed,
              bool per_antenna, int randomizations) {
    const NetworkConfig config = load_config(config_path);
    const ChannelRealization channels = generate_channels(config, seed);
    const ProblemData problem = build_from_config(config, channels, per_antenna);
    const SdrSolution sdr = solve_sdr(problem);
    const BfSolution bf = gaussian_randomize(
        sdr, problem, randomizations,
        RngStream::derive(seed, RngStream::kTagRandomization).next_u64());
    auto [factor, rank] = factorize_covariance(sdr.W_star, 1e-6);
    const SbfScheme gauss{SbfKind::Gaussian, sdr.W_star, factor, rank};
    const SbfScheme ellip{SbfKind::Elliptic, sdr.W_star, factor, rank};
    const double ln2 = std::log(2.0);
    std::printf("%.10g,%d,%.10g,%.10g,%.10g,%.10g\n", sdr.gamma_star, sdr.rank,
                sdr.sdr_rate / ln2, bf.bf_rate / ln2,
                sbf_rate(problem, gauss) / ln2, sbf_rate(problem, ellip) / ln2);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Max-min-fair AF relay beamforming: SDR, randomization and "
                 "stochastic beamforming"};
    app.require_subcommand(1);

    std::string config_path, spec_path, out_path, scheme_name = "bf";
    std::uint64_t seed = 0;
    bool per_antenna = false;
    int randomizations = 1000;
    int blocks = 10000;
    int block_len = 4800;
    int threads = 1;

    auto* solve = app.add_subcommand("solve", "Solve one channel realization");
    solve->add_option("--config", config_path, "NetworkConfig JSON")->required();
    solve->add_option("--seed", seed, "channel seed");
    solve->add_flag("--per-antenna", per_antenna,
                    "apply the per-antenna budgets from the config");
    solve->add_option("--randomizations", randomizations, "Algorithm draws");

    auto* sweep = app.add_subcommand("sweep", "Monte Carlo rate sweep to CSV");
    sweep->add_option("--spec", spec_path, "SweepSpec JSON")->required();
    sweep->add_option("--out", out_path, "output CSV path")->required();
    sweep->add_option("--threads", threads, "worker threads");

    auto* papr = app.add_subcommand("papr", "PAPR CCDF simulation to CSV");
    papr->add_option("--config", config_path, "NetworkConfig JSON")->required();
    papr->add_option("--scheme", scheme_name, "bf | gauss | ellip")->required();
    papr->add_option("--blocks", blocks, "number of data blocks");
    papr->add_option("--block-len", block_len, "symbols per block");
    papr->add_option("--seed", seed, "channel/simulation seed");
    papr->add_option("--out", out_path, "output CSV path")->required();

    auto* verify = app.add_subcommand("verify", "formula and bound checks");
    verify->add_option("--seed", seed, "seed for randomized checks");
    verify->add_option("--out", out_path, "output CSV path")->required();

    auto* dump = app.add_subcommand("dump-problem",
                                    "dump assembled problem matrices as JSON");
    dump->add_option("--config", config_path, "NetworkConfig JSON")->required();
    dump->add_option("--seed", seed, "channel seed");
    dump->add_flag("--per-antenna", per_antenna,
                   "apply the per-antenna budgets from the config");
    dump->add_option("--out", out_path, "output JSON path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed())
            return run_solve(config_path, seed, per_antenna, randomizations);
        if (sweep->parsed()) {
            const SweepSpec spec = load_sweep_spec(spec_path);
            const RateReport report = run_sweep(spec, threads);
            write_file(out_path, rate_report_csv(report));
            return 0;
        }
        if (papr->parsed()) {
            PaprSchemeKind kind;
            if (scheme_name == "bf") kind = PaprSchemeKind::BF;
            else if (scheme_name == "gauss") kind = PaprSchemeKind::GaussianSBF;
            else if (scheme_name == "ellip") kind = PaprSchemeKind::EllipticSBF;
            else throw Error("unknown scheme: " + scheme_name);
            const NetworkConfig config = load_config(config_path);
            const ChannelRealization channels = generate_channels(config, seed);
            const PaprCurve curve = papr_ccdf(config, channels, kind, blocks,
                                              block_len, Modulation::QAM64, seed);
            write_file(out_path, papr_csv(curve));
            return 0;
        }
        if (verify->parsed()) {
            const VerifyReport report = verify_suite(seed);
            write_file(out_path, verify_csv(report));
            for (const auto& c : report.checks)
                std::printf("%-40s %s  margin=%.3g\n", c.name.c_str(),
                            c.pass ? "pass" : "FAIL", c.margin);
            return report.all_pass() ? 0 : 1;
        }
        if (dump->parsed()) {
            const NetworkConfig config = load_config(config_path);
            const ChannelRealization channels = generate_channels(config, seed);
            const ProblemData problem =
                build_from_config(config, channels, per_antenna);
            write_file(out_path, dump_problem_json(problem));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
