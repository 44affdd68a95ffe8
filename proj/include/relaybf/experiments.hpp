// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relaybf/problem.hpp"
#include "relaybf/randomization.hpp"
#include "relaybf/scenario.hpp"
#include "relaybf/sdr.hpp"

namespace relaybf {

enum class SweepVariable {
    TotalPower,              ///< values in dB applied to the total budget
    PerAntennaPower,         ///< values in dB applied to every antenna budget
    NumUsers,                ///< values are user counts (split evenly per group)
    NumPerAntennaConstraints ///< values are constraint counts 0..L
};

struct SweepSpec {
    NetworkConfig base_config;
    SweepVariable sweep_variable = SweepVariable::TotalPower;
    std::vector<double> sweep_values;
    int num_channel_draws = 100;
    int num_randomizations = 1000;
    std::uint64_t master_seed = 0;
};

void validate_sweep_spec(const SweepSpec& spec);
SweepSpec sweep_spec_from_json_text(const std::string& text);
SweepSpec load_sweep_spec(const std::string& path);

/// Per-draw outcome in nats (CSV reporting converts to bits).
struct DrawRates {
    bool ok = false;
    double r_sdr = 0.0;
    double r_bf = 0.0;
    double r_sbf_gauss = 0.0;
    double r_sbf_ellip = 0.0;
    int rank = 0;
};

struct RateRow {
    double sweep_value = 0.0;
    double r_sdr = 0.0, r_bf = 0.0, r_sbf_gauss = 0.0, r_sbf_ellip = 0.0; // bits
    double se_sdr = 0.0, se_bf = 0.0, se_gauss = 0.0, se_ellip = 0.0;     // bits
    double mean_rank = 0.0;
    int failed_draws = 0;
};

struct RateReport {
    std::vector<RateRow> rows;
    std::vector<std::vector<DrawRates>> draws; ///< [point][draw], nats
};

/// The NetworkConfig a sweep point resolves to (exposed for tests).
NetworkConfig sweep_point_config(const SweepSpec& spec, double value);

/// Runs the Monte Carlo sweep: per point and channel draw, build the
/// problem, solve the SDR, randomize, and evaluate all four rates.  The
/// result is a deterministic function of the spec regardless of
/// num_threads; failed solver draws are excluded from means and counted.
RateReport run_sweep(const SweepSpec& spec, int num_threads = 1);

std::string rate_report_csv(const RateReport& report);

enum class PaprSchemeKind { BF, GaussianSBF, EllipticSBF };
enum class Modulation { QAM64 };

struct PaprCurve {
    std::vector<double> threshold_db; ///< 0 to 12 dB in 0.25 dB steps
    std::vector<double> ccdf;
    std::vector<double> samples_db;   ///< sorted per-block-antenna PAPRs (dB)
};

/// Per-antenna PAPRs max_t |x_l(t)|^2 / mean_t |x_l(t)|^2 of one transmit
/// block x (antennas x slots).
std::vector<double> papr_of_block(const Eigen::MatrixXcd& x);

/// Symbol-level PAPR CCDF: unit-average-power 64-QAM symbols through the
/// relay input model, forwarded with fixed (BF) or per-slot (SBF) weights.
PaprCurve papr_ccdf(const NetworkConfig& config, const ChannelRealization& channels,
                    PaprSchemeKind scheme, int num_blocks, int block_len,
                    Modulation modulation, std::uint64_t seed);

/// Same, reusing an already-solved design (the SDR solution and, for the BF
/// scheme, the randomized weight vector).
PaprCurve papr_ccdf_with_design(const NetworkConfig& config,
                                const ChannelRealization& channels,
                                const SdrSolution& sdr,
                                const Eigen::VectorXcd& bf_weights,
                                PaprSchemeKind scheme, int num_blocks,
                                int block_len, Modulation modulation,
                                std::uint64_t seed);

std::string papr_csv(const PaprCurve& curve);

/// Exact empirical threshold (dB) at which the CCDF drops to `level`,
/// computed from the retained samples (the reporting grid tops out at 12 dB).
double papr_at_ccdf_level(const PaprCurve& curve, double level);

struct VerifyCheck {
    std::string name;
    bool pass = false;
    double margin = 0.0; ///< positive slack relative to the check's bound
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Cross-checks of the closed forms against quadrature oracles, the
/// binomial/harmonic identity, vectorization identities, and the
/// probabilistic tail bounds behind the randomization analysis.
VerifyReport verify_suite(std::uint64_t seed);

std::string verify_csv(const VerifyReport& report);

} // namespace relaybf
