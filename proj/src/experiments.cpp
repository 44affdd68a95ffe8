// SPDX-License-Identifier: Apache-2.0

#include "relaybf/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "relaybf/errors.hpp"
#include "relaybf/numerics.hpp"
#include "relaybf/rng.hpp"
#include "relaybf/sbf.hpp"

namespace relaybf {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

double db_to_watts(double db) { return std::pow(10.0, db / 10.0); }

} // namespace

void validate_sweep_spec(const SweepSpec& spec) {
    validate_config(spec.base_config);
    if (spec.sweep_values.empty())
        throw DimensionMismatchError("sweep_values must be nonempty");
    for (std::size_t i = 1; i < spec.sweep_values.size(); ++i)
        if (!(spec.sweep_values[i] > spec.sweep_values[i - 1]))
            throw DimensionMismatchError("sweep_values must be strictly increasing");
    if (spec.num_channel_draws < 1)
        throw DimensionMismatchError("num_channel_draws must be >= 1");
    if (spec.num_randomizations < 1)
        throw DimensionMismatchError("num_randomizations must be >= 1");
    const auto& c = spec.base_config;
    switch (spec.sweep_variable) {
        case SweepVariable::TotalPower:
            break;
        case SweepVariable::PerAntennaPower:
            if (c.topology != Topology::MIMO)
                throw TopologyMismatchError(
                    "per-antenna power sweeps require the MIMO topology");
            break;
        case SweepVariable::NumUsers:
            for (double v : spec.sweep_values) {
                const int m = static_cast<int>(std::lround(v));
                if (std::abs(v - m) > 1e-9 || m < c.num_groups ||
                    m % c.num_groups != 0)
                    throw DimensionMismatchError(
                        "NumUsers sweep values must be positive multiples of "
                        "num_groups");
            }
            break;
        case SweepVariable::NumPerAntennaConstraints:
            if (c.topology != Topology::MIMO || !c.per_antenna_budgets)
                throw TopologyMismatchError(
                    "constraint-count sweeps need MIMO per-antenna budgets");
            for (double v : spec.sweep_values) {
                const int k = static_cast<int>(std::lround(v));
                if (std::abs(v - k) > 1e-9 || k < 0 || k > c.num_relay_antennas)
                    throw IndexOutOfRangeError(
                        "constraint count out of 0..L range");
            }
            break;
    }
}

SweepSpec sweep_spec_from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    SweepSpec s;
    s.base_config = config_from_json_text(j.at("base_config").dump());
    const std::string var = j.at("sweep_variable").get<std::string>();
    if (var == "TotalPower") s.sweep_variable = SweepVariable::TotalPower;
    else if (var == "PerAntennaPower") s.sweep_variable = SweepVariable::PerAntennaPower;
    else if (var == "NumUsers") s.sweep_variable = SweepVariable::NumUsers;
    else if (var == "NumPerAntennaConstraints")
        s.sweep_variable = SweepVariable::NumPerAntennaConstraints;
    else
        throw DimensionMismatchError("unknown sweep_variable: " + var);
    s.sweep_values = j.at("sweep_values").get<std::vector<double>>();
    s.num_channel_draws = j.value("num_channel_draws", 100);
    s.num_randomizations = j.value("num_randomizations", 1000);
    s.master_seed = j.value("master_seed", std::uint64_t{0});
    validate_sweep_spec(s);
    return s;
}

SweepSpec load_sweep_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open sweep spec file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return sweep_spec_from_json_text(ss.str());
}

NetworkConfig sweep_point_config(const SweepSpec& spec, double value) {
    NetworkConfig c = spec.base_config;
    switch (spec.sweep_variable) {
        case SweepVariable::TotalPower:
            c.total_power_budget = db_to_watts(value);
            break;
        case SweepVariable::PerAntennaPower:
            c.per_antenna_budgets =
                std::vector<double>(c.num_relay_antennas, db_to_watts(value));
            break;
        case SweepVariable::NumUsers: {
            const int m = static_cast<int>(std::lround(value));
            const int per_group = m / c.num_groups;
            c.group_sizes.assign(c.num_groups, per_group);
            c.user_noise_vars.assign(m, spec.base_config.user_noise_vars.front());
            break;
        }
        case SweepVariable::NumPerAntennaConstraints:
            break; // constraint count is applied at problem build time
    }
    return c;
}

namespace {

DrawRates run_sweep_draw(const SweepSpec& spec, const NetworkConfig& config,
                         int point, int draw) {
    const std::uint64_t chan_seed =
        RngStream::derive(spec.master_seed, RngStream::kTagSweep, point, draw, 1)
            .next_u64();
    const std::uint64_t rand_seed =
        RngStream::derive(spec.master_seed, RngStream::kTagSweep, point, draw, 2)
            .next_u64();
    const ChannelRealization channels = generate_channels(config, chan_seed);

    ProblemData problem;
    if (config.topology == Topology::MIMO) {
        std::optional<int> active;
        if (spec.sweep_variable == SweepVariable::NumPerAntennaConstraints)
            active = static_cast<int>(std::lround(spec.sweep_values[point]));
        problem = build_mimo_problem(config, channels, {}, active);
    } else {
        const MatrixXcd eye = MatrixXcd::Identity(config.num_relay_antennas,
                                                  config.num_relay_antennas);
        problem = build_distributed_problem(config, channels,
                                            {{eye, config.total_power_budget}});
    }

    DrawRates r;
    const SdrSolution sdr = solve_sdr(problem);
    const BfSolution bf =
        gaussian_randomize(sdr, problem, spec.num_randomizations, rand_seed);

    auto [factor, rank] = factorize_covariance(sdr.W_star, 1e-6);
    SbfScheme gauss{SbfKind::Gaussian, sdr.W_star, factor, rank};
    SbfScheme ellip{SbfKind::Elliptic, sdr.W_star, std::move(factor), rank};

    r.ok = true;
    r.r_sdr = sdr.sdr_rate;
    r.r_bf = bf.bf_rate;
    r.r_sbf_gauss = sbf_rate(problem, gauss);
    r.r_sbf_ellip = sbf_rate(problem, ellip);
    r.rank = sdr.rank;
    return r;
}

} // namespace

RateReport run_sweep(const SweepSpec& spec, int num_threads) {
    validate_sweep_spec(spec);
    const int points = static_cast<int>(spec.sweep_values.size());
    const int draws = spec.num_channel_draws;

    RateReport report;
    report.draws.assign(points, std::vector<DrawRates>(draws));
    std::vector<NetworkConfig> configs(points);
    for (int si = 0; si < points; ++si)
        configs[si] = sweep_point_config(spec, spec.sweep_values[si]);

    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::string first_error;
    auto worker = [&] {
        for (;;) {
            const int task = next.fetch_add(1);
            if (task >= points * draws) break;
            const int si = task / draws;
            const int d = task % draws;
            try {
                report.draws[si][d] = run_sweep_draw(spec, configs[si], si, d);
            } catch (const NumericalFailureError&) {
                report.draws[si][d].ok = false; // counted and excluded
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (first_error.empty()) first_error = e.what();
            }
        }
    };

    const int workers = std::max(1, num_threads);
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (!first_error.empty()) throw Error("sweep draw failed: " + first_error);

    const double ln2 = std::log(2.0);
    for (int si = 0; si < points; ++si) {
        RateRow row;
        row.sweep_value = spec.sweep_values[si];
        std::vector<const DrawRates*> ok;
        for (const auto& d : report.draws[si])
            if (d.ok) ok.push_back(&d);
        row.failed_draws = draws - static_cast<int>(ok.size());
        auto mean_se = [&](auto getter, double& mean, double& se) {
            if (ok.empty()) return;
            double sum = 0.0;
            for (const auto* d : ok) sum += getter(*d);
            mean = sum / ok.size() / ln2;
            if (ok.size() > 1) {
                double ss = 0.0;
                for (const auto* d : ok) {
                    const double dev = getter(*d) / ln2 - mean;
                    ss += dev * dev;
                }
                se = std::sqrt(ss / (ok.size() - 1)) / std::sqrt(double(ok.size()));
            }
        };
        mean_se([](const DrawRates& d) { return d.r_sdr; }, row.r_sdr, row.se_sdr);
        mean_se([](const DrawRates& d) { return d.r_bf; }, row.r_bf, row.se_bf);
        mean_se([](const DrawRates& d) { return d.r_sbf_gauss; }, row.r_sbf_gauss,
                row.se_gauss);
        mean_se([](const DrawRates& d) { return d.r_sbf_ellip; }, row.r_sbf_ellip,
                row.se_ellip);
        if (!ok.empty()) {
            double s = 0.0;
            for (const auto* d : ok) s += d->rank;
            row.mean_rank = s / ok.size();
        }
        report.rows.push_back(row);
    }
    return report;
}

std::string rate_report_csv(const RateReport& report) {
    std::string out =
        "sweep_value,r_sdr,r_bf,r_sbf_gauss,r_sbf_ellip,se_sdr,se_bf,se_gauss,"
        "se_ellip,mean_rank,failed_draws\n";
    for (const auto& r : report.rows) {
        out += fmt_double(r.sweep_value) + "," + fmt_double(r.r_sdr) + "," +
               fmt_double(r.r_bf) + "," + fmt_double(r.r_sbf_gauss) + "," +
               fmt_double(r.r_sbf_ellip) + "," + fmt_double(r.se_sdr) + "," +
               fmt_double(r.se_bf) + "," + fmt_double(r.se_gauss) + "," +
               fmt_double(r.se_ellip) + "," + fmt_double(r.mean_rank) + "," +
               std::to_string(r.failed_draws) + "\n";
    }
    return out;
}

std::vector<double> papr_of_block(const MatrixXcd& x) {
    std::vector<double> out;
    out.reserve(x.rows());
    for (Eigen::Index l = 0; l < x.rows(); ++l) {
        const VectorXd p = x.row(l).cwiseAbs2().transpose();
        const double mean = p.mean();
        out.push_back(mean > 0.0 ? p.maxCoeff() / mean : 1.0);
    }
    return out;
}

namespace {

// Unit-average-power 64-QAM symbol: components from {+-1,+-3,+-5,+-7}/sqrt(42).
std::complex<double> qam64_symbol(RngStream& rng) {
    const std::uint64_t bits = rng.next_u64();
    const int a = static_cast<int>(bits & 7);
    const int b = static_cast<int>((bits >> 3) & 7);
    const double lvl[8] = {-7, -5, -3, -1, 1, 3, 5, 7};
    const double norm = 1.0 / std::sqrt(42.0);
    return {lvl[a] * norm, lvl[b] * norm};
}

} // namespace

PaprCurve papr_ccdf_with_design(const NetworkConfig& config,
                                const ChannelRealization& channels,
                                const SdrSolution& sdr,
                                const VectorXcd& bf_weights, PaprSchemeKind scheme,
                                int num_blocks, int block_len,
                                Modulation modulation, std::uint64_t seed) {
    if (modulation != Modulation::QAM64)
        throw UnsupportedModulationError("only 64-QAM is supported");
    validate_config(config);
    const int L = config.num_relay_antennas;
    const int G = config.num_groups;
    const int T = block_len;

    SbfScheme sbf_scheme;
    if (scheme != PaprSchemeKind::BF) {
        sbf_scheme = make_sbf_scheme(scheme == PaprSchemeKind::GaussianSBF
                                         ? SbfKind::Gaussian
                                         : SbfKind::Elliptic,
                                     sdr.W_star);
    }

    MatrixXcd F(L, G);
    for (int j = 0; j < G; ++j) F.col(j) = channels.f[j];
    const VectorXd noise_std =
        Eigen::Map<const VectorXd>(config.relay_noise_vars.data(), L).cwiseSqrt();
    const VectorXd tx_amp =
        Eigen::Map<const VectorXd>(config.tx_powers.data(), G).cwiseSqrt();

    MatrixXcd V_fixed;
    if (scheme == PaprSchemeKind::BF) {
        if (config.topology == Topology::MIMO) {
            V_fixed = Eigen::Map<const MatrixXcd>(bf_weights.data(), L, L);
        } else {
            V_fixed = MatrixXcd(bf_weights.asDiagonal());
        }
    }

    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(num_blocks) * L);
    MatrixXcd S(G, T), R(L, T), X(L, T), Wblk, Alpha;
    for (int blk = 0; blk < num_blocks; ++blk) {
        auto sym_rng = RngStream::derive(seed, RngStream::kTagSymbols, blk);
        auto noise_rng = RngStream::derive(seed, RngStream::kTagNoise, blk);
        for (int j = 0; j < G; ++j)
            for (int t = 0; t < T; ++t) S(j, t) = tx_amp[j] * qam64_symbol(sym_rng);
        R.noalias() = F * S;
        for (int l = 0; l < L; ++l)
            for (int t = 0; t < T; ++t)
                R(l, t) += noise_std[l] * noise_rng.next_cnormal();

        if (scheme == PaprSchemeKind::BF) {
            X.noalias() = V_fixed * R;
        } else {
            auto w_rng = RngStream::derive(seed, RngStream::kTagSbf, blk);
            const int r = std::max(sbf_scheme.rank, 1);
            Alpha.resize(r, T);
            for (int t = 0; t < T; ++t)
                for (int i = 0; i < r; ++i) Alpha(i, t) = w_rng.next_cnormal();
            if (scheme == PaprSchemeKind::EllipticSBF) {
                for (int t = 0; t < T; ++t) {
                    const double nrm = Alpha.col(t).norm();
                    if (nrm > 0.0) Alpha.col(t) *= std::sqrt(double(r)) / nrm;
                }
            }
            Wblk.noalias() = sbf_scheme.factor.adjoint() * Alpha; // n x T
            X.setZero();
            if (config.topology == Topology::MIMO) {
                for (int c = 0; c < L; ++c)
                    X += Wblk.middleRows(c * L, L) *
                         R.row(c).asDiagonal();
            } else {
                X = Wblk.cwiseProduct(R);
            }
        }
        for (double v : papr_of_block(X)) samples.push_back(v);
    }

    PaprCurve curve;
    for (double th = 0.0; th <= 12.0 + 1e-9; th += 0.25)
        curve.threshold_db.push_back(th);
    std::sort(samples.begin(), samples.end());
    for (double th : curve.threshold_db) {
        const double lin = db_to_watts(th);
        const auto it = std::upper_bound(samples.begin(), samples.end(), lin);
        curve.ccdf.push_back(static_cast<double>(samples.end() - it) /
                             static_cast<double>(samples.size()));
    }
    curve.samples_db.reserve(samples.size());
    for (double v : samples)
        curve.samples_db.push_back(10.0 * std::log10(std::max(v, 1e-300)));
    return curve;
}

PaprCurve papr_ccdf(const NetworkConfig& config, const ChannelRealization& channels,
                    PaprSchemeKind scheme, int num_blocks, int block_len,
                    Modulation modulation, std::uint64_t seed) {
    ProblemData problem;
    if (config.topology == Topology::MIMO) {
        problem = build_mimo_problem(config, channels);
    } else {
        const MatrixXcd eye = MatrixXcd::Identity(config.num_relay_antennas,
                                                  config.num_relay_antennas);
        problem = build_distributed_problem(config, channels,
                                            {{eye, config.total_power_budget}});
    }
    const SdrSolution sdr = solve_sdr(problem);
    VectorXcd w = VectorXcd::Zero(problem.n);
    if (scheme == PaprSchemeKind::BF) {
        const std::uint64_t rand_seed =
            RngStream::derive(seed, RngStream::kTagRandomization, 0).next_u64();
        w = gaussian_randomize(sdr, problem, 1000, rand_seed).w_hat;
    }
    return papr_ccdf_with_design(config, channels, sdr, w, scheme, num_blocks,
                                 block_len, modulation, seed);
}

std::string papr_csv(const PaprCurve& curve) {
    std::string out = "threshold_db,ccdf\n";
    for (std::size_t i = 0; i < curve.threshold_db.size(); ++i)
        out += fmt_double(curve.threshold_db[i]) + "," + fmt_double(curve.ccdf[i]) +
               "\n";
    return out;
}

double papr_at_ccdf_level(const PaprCurve& curve, double level) {
    if (!curve.samples_db.empty()) {
        // Smallest threshold exceeded by at most `level` of the samples.
        const std::size_t n = curve.samples_db.size();
        const std::size_t allowed =
            static_cast<std::size_t>(std::floor(level * static_cast<double>(n)));
        return curve.samples_db[n - 1 - allowed];
    }
    for (std::size_t i = 0; i < curve.threshold_db.size(); ++i)
        if (curve.ccdf[i] <= level) return curve.threshold_db[i];
    return curve.threshold_db.back();
}

// ---------------------------------------------------------------------------
// Verification suite
// ---------------------------------------------------------------------------

namespace {

void add_check(VerifyReport& rep, const std::string& name, bool pass,
               double margin) {
    rep.checks.push_back({name, pass, margin});
}

NetworkConfig small_config(int L, int G, int users_per_group, double sigma2,
                           double p0, bool per_antenna, double pl) {
    NetworkConfig c;
    c.num_relay_antennas = L;
    c.num_groups = G;
    c.group_sizes.assign(G, users_per_group);
    c.tx_powers.assign(G, 1.0);
    c.relay_noise_vars.assign(L, sigma2);
    c.user_noise_vars.assign(G * users_per_group, sigma2);
    c.total_power_budget = p0;
    if (per_antenna) c.per_antenna_budgets = std::vector<double>(L, pl);
    return c;
}

} // namespace

VerifyReport verify_suite(std::uint64_t seed) {
    VerifyReport rep;

    { // Binomial/harmonic identity sum_k C(n,k)(-1)^k/k = -H_n for n = 1..20.
        double worst = 0.0;
        for (int n = 1; n <= 20; ++n) {
            double s = 0.0;
            for (int k = 1; k <= n; ++k)
                s += binom(n, k) * ((k % 2) ? -1.0 : 1.0) / k;
            worst = std::max(worst, std::abs(s + harmonic(n)));
        }
        add_check(rep, "binomial_identity", worst <= 1e-10, 1e-10 - worst);
    }

    { // Elliptic closed form against the defining-integral quadrature.
        double worst = 0.0;
        for (int gi = 0; gi < 20; ++gi) {
            const double gamma = std::pow(10.0, -3.0 + 6.0 * gi / 19.0);
            for (int r = 1; r <= 12; ++r)
                worst = std::max(worst,
                                 std::abs(sbf_rate_elliptic(gamma, r) -
                                          sbf_rate_elliptic_quadrature(gamma, r)));
        }
        add_check(rep, "elliptic_closed_form_vs_quadrature", worst <= 1e-8,
                  1e-8 - worst);
    }

    { // Gaussian rate at gamma = 1 against its quadrature oracle.
        const double err =
            std::abs(sbf_rate_gaussian(1.0) - sbf_rate_gaussian_quadrature(1.0));
        add_check(rep, "gaussian_rate_vs_quadrature", err <= 1e-10, 1e-10 - err);
        const double gap_limit_err = std::abs(
            (std::log1p(1e12) - sbf_rate_gaussian(1e12)) - 0.5772156649015329);
        add_check(rep, "gaussian_gap_limit", gap_limit_err <= 1e-8,
                  1e-8 - gap_limit_err);
    }

    { // Both densities integrate to one and have unit mean.
        const double T = 60.0;
        const double n_g =
            adaptive_quad([](double t) { return std::exp(-t); }, 0.0, T, 1e-12) +
            std::exp(-T);
        const double m_g =
            adaptive_quad([](double t) { return t * std::exp(-t); }, 0.0, T, 1e-12) +
            (T + 1.0) * std::exp(-T);
        double worst = std::max(std::abs(n_g - 1.0), std::abs(m_g - 1.0));
        for (int r = 2; r <= 12; ++r) {
            const double rr = r;
            const double n_e = adaptive_quad(
                [rr](double t) {
                    return (1.0 - 1.0 / rr) * std::pow(1.0 - t / rr, rr - 2.0);
                },
                0.0, rr, 1e-12);
            const double m_e = adaptive_quad(
                [rr](double t) {
                    return t * (1.0 - 1.0 / rr) * std::pow(1.0 - t / rr, rr - 2.0);
                },
                0.0, rr, 1e-12);
            worst = std::max({worst, std::abs(n_e - 1.0), std::abs(m_e - 1.0)});
        }
        add_check(rep, "density_normalization_and_mean", worst <= 1e-10,
                  1e-10 - worst);
    }

    { // Rate ordering and the nondecreasing Gaussian gap on a grid.
        double ord_margin = std::numeric_limits<double>::infinity();
        bool ord_ok = true;
        double prev_gap = 0.0;
        bool mono_ok = true;
        double mono_margin = std::numeric_limits<double>::infinity();
        for (int gi = 0; gi < 25; ++gi) {
            const double gamma = std::pow(10.0, -3.0 + 6.0 * gi / 24.0);
            const double shannon = std::log1p(gamma);
            const double rg = sbf_rate_gaussian(gamma);
            for (int r = 2; r <= 12; ++r) {
                const double re = sbf_rate_elliptic(gamma, r);
                ord_ok = ord_ok && re > rg && rg > 0.0 && re < shannon;
                ord_margin = std::min({ord_margin, re - rg, shannon - re, rg});
            }
            const double gap = shannon - rg;
            if (gi > 0) {
                mono_ok = mono_ok && gap >= prev_gap - 1e-12;
                mono_margin = std::min(mono_margin, gap - prev_gap + 1e-12);
            }
            prev_gap = gap;
        }
        add_check(rep, "rate_ordering_grid", ord_ok, ord_margin);
        add_check(rep, "gaussian_gap_monotone", mono_ok, mono_margin);
    }

    { // Vectorization identity tr(V^H B V D) = vec(V)^H (D^T (x) B) vec(V).
        auto rng = RngStream::derive(seed, RngStream::kTagVerify, 1);
        const int L = 5;
        MatrixXcd V(L, L), B(L, L), D(L, L);
        for (int c = 0; c < L; ++c)
            for (int r = 0; r < L; ++r) {
                V(r, c) = rng.next_cnormal();
                B(r, c) = rng.next_cnormal();
                D(r, c) = rng.next_cnormal();
            }
        const std::complex<double> lhs = (V.adjoint() * B * V * D).trace();
        MatrixXcd kron(L * L, L * L);
        for (int i = 0; i < L; ++i)
            for (int j = 0; j < L; ++j)
                kron.block(i * L, j * L, L, L) = D.transpose()(i, j) * B;
        const Eigen::Map<const VectorXcd> w(V.data(), L * L);
        const std::complex<double> rhs = (w.adjoint() * kron * w)(0);
        const double err = std::abs(lhs - rhs) / std::abs(lhs);
        add_check(rep, "kronecker_identity", err <= 1e-10, 1e-10 - err);
    }

    { // Matrix-form SINR equals the physical weighting-matrix expression.
        NetworkConfig cfg = small_config(4, 2, 2, 0.5, 4.0, false, 0.0);
        const ChannelRealization ch = generate_channels(cfg, seed ^ 0x5eedULL);
        const ProblemData pd = build_mimo_problem(cfg, ch);
        auto rng = RngStream::derive(seed, RngStream::kTagVerify, 2);
        VectorXcd w(pd.n);
        for (int i = 0; i < pd.n; ++i) w[i] = rng.next_cnormal();
        const Eigen::Map<const MatrixXcd> V(w.data(), pd.L, pd.L);
        double worst = 0.0;
        for (int u = 0; u < pd.M; ++u) {
            const int k = pd.group_of[u];
            const VectorXcd& g = ch.g[u];
            const double su2 = cfg.user_noise_vars[u];
            double interf = 0.0;
            for (int m = 0; m < pd.G; ++m)
                if (m != k)
                    interf += cfg.tx_powers[m] *
                              std::norm((g.adjoint() * V * ch.f[m])(0));
            double fwd = 0.0;
            for (int l = 0; l < pd.L; ++l)
                fwd += cfg.relay_noise_vars[l] * std::norm((g.adjoint() * V)(l));
            const double num = cfg.tx_powers[k] *
                               std::norm((g.adjoint() * V * ch.f[k])(0));
            const double phys = num / (interf + fwd + su2);
            const double alg = sinr_of_vector(w, pd, u);
            worst = std::max(worst, std::abs(phys - alg) / phys);
        }
        add_check(rep, "sinr_consistency", worst <= 1e-9, 1e-9 - worst);
    }

    // Tail bounds of the randomization analysis, on a solved instance with
    // both constraint families present.
    {
        NetworkConfig cfg = small_config(8, 2, 8, 1.0, 4.0, true, 1.0);
        const ChannelRealization ch = generate_channels(cfg, seed ^ 0xabcdULL);
        const ProblemData pd = build_mimo_problem(cfg, ch);
        const SdrSolution sdr = solve_sdr(pd);
        Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(sdr.W_star);
        VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
        const MatrixXcd sqrt_w = eig.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
                                 eig.eigenvectors().adjoint();

        const int K = 100000;
        const double beta = 1.0 / (8.0 * pd.M);
        const double rho = 6.0 * std::log(3.0 * (pd.L + 1)) + 1.0;
        std::vector<double> base_sinr(pd.M), base_power(pd.constraints.size());
        for (int u = 0; u < pd.M; ++u)
            base_sinr[u] = herm_inner(pd.signal_mats[u], sdr.W_star) /
                           (herm_inner(pd.interference_mats[u], sdr.W_star) + 1.0);
        for (std::size_t s = 0; s < pd.constraints.size(); ++s)
            base_power[s] = power(sdr.W_star, pd, static_cast<int>(s));

        std::vector<int> hits_e(pd.M, 0);
        std::vector<int> hits_f(pd.constraints.size(), 0);
        for (int k = 0; k < K; ++k) {
            auto rng = RngStream::derive(seed, RngStream::kTagVerify, 100, k);
            VectorXcd z(pd.n);
            for (int i = 0; i < pd.n; ++i) z[i] = rng.next_cnormal();
            const VectorXcd xi = sqrt_w * z;
            for (int u = 0; u < pd.M; ++u)
                if (sinr_of_vector(xi, pd, u) <= beta * base_sinr[u]) ++hits_e[u];
            for (std::size_t s = 0; s < pd.constraints.size(); ++s)
                if (power_of_vector(xi, pd, static_cast<int>(s)) >=
                    rho * base_power[s])
                    ++hits_f[s];
        }
        const double bound_e = 3.0 * beta / (1.0 - 2.0 * beta);
        double margin_e = std::numeric_limits<double>::infinity();
        for (int u = 0; u < pd.M; ++u) {
            const double p = static_cast<double>(hits_e[u]) / K;
            const double sig = std::sqrt(std::max(p * (1.0 - p), 1.0 / K) / K);
            margin_e = std::min(margin_e, bound_e + 3.0 * sig - p);
        }
        add_check(rep, "lemma3_sinr_tail", margin_e >= 0.0, margin_e);

        const double bound_f = std::exp(-(rho - 1.0) / 6.0);
        double margin_f = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < pd.constraints.size(); ++s) {
            const double p = static_cast<double>(hits_f[s]) / K;
            const double sig = std::sqrt(std::max(p * (1.0 - p), 1.0 / K) / K);
            margin_f = std::min(margin_f, bound_f + 3.0 * sig - p);
        }
        add_check(rep, "lemma4_power_tail", margin_f >= 0.0, margin_f);

        // SDR-SBF gap bounds at omega = W* on the same instance.
        auto [factor, rank] = factorize_covariance(sdr.W_star, 1e-6);
        SbfScheme gauss{SbfKind::Gaussian, sdr.W_star, factor, rank};
        SbfScheme ellip{SbfKind::Elliptic, sdr.W_star, factor, rank};
        const double gap_g = sdr.sdr_rate - sbf_rate(pd, gauss);
        const double gap_e = sdr.sdr_rate - sbf_rate(pd, ellip);
        const double bound_el = gap_bound_elliptic(rank) + 1e-8;
        const bool pass = gap_g >= -1e-9 && gap_g <= 0.577216 &&
                          gap_e >= -1e-9 && gap_e <= bound_el;
        add_check(rep, "theorem2_gap_bounds", pass,
                  std::min(0.577216 - gap_g, bound_el - gap_e));

        // Per-draw elliptic power bounds.
        double margin_p = std::numeric_limits<double>::infinity();
        if (rank >= 1) {
            std::vector<std::pair<double, double>> bounds;
            for (const auto& c : pd.constraints)
                bounds.push_back(elliptic_power_bounds(ellip, c.Q));
            for (int k = 0; k < 10000; ++k) {
                auto rng = RngStream::derive(seed, RngStream::kTagVerify, 200, k);
                const VectorXcd w = sample_elliptic_weight(ellip, rng);
                for (std::size_t s = 0; s < pd.constraints.size(); ++s) {
                    const double v = power_of_vector(w, pd, static_cast<int>(s));
                    const double slack = 1e-9 * std::max(bounds[s].second, 1.0);
                    margin_p = std::min({margin_p, v - bounds[s].first + slack,
                                         bounds[s].second + slack - v});
                }
            }
        }
        add_check(rep, "prop3_power_bounds", margin_p >= 0.0, margin_p);
    }

    return rep;
}

std::string verify_csv(const VerifyReport& report) {
    std::string out = "check_name,status,margin\n";
    for (const auto& c : report.checks)
        out += c.name + "," + (c.pass ? "pass" : "fail") + "," +
               fmt_double(c.margin) + "\n";
    return out;
}

} // namespace relaybf
