// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: each numbered check prints one pass/fail line.  Run with
// a list of criterion numbers, or none to run all nine.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "relaybf/errors.hpp"
#include "relaybf/experiments.hpp"
#include "relaybf/numerics.hpp"
#include "relaybf/problem.hpp"
#include "relaybf/randomization.hpp"
#include "relaybf/rng.hpp"
#include "relaybf/sbf.hpp"
#include "relaybf/scenario.hpp"
#include "relaybf/sdr.hpp"

#ifndef RELAYBF_FIXTURE_DIR
#define RELAYBF_FIXTURE_DIR "tests/fixtures"
#endif

namespace {

using namespace relaybf;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

struct Outcome {
    bool pass = false;
    std::string detail;
};

NetworkConfig make_config(int L, int G, int per_group, double sigma2,
                          double budget, bool per_antenna, double pa_budget) {
    NetworkConfig c;
    c.num_relay_antennas = L;
    c.num_groups = G;
    c.group_sizes.assign(G, per_group);
    c.tx_powers.assign(G, 1.0);
    c.relay_noise_vars.assign(L, sigma2);
    c.user_noise_vars.assign(G * per_group, sigma2);
    c.total_power_budget = budget;
    if (per_antenna) c.per_antenna_budgets = std::vector<double>(L, pa_budget);
    return c;
}

std::pair<SbfScheme, SbfScheme> schemes_from(const SdrSolution& sdr) {
    auto [factor, rank] = factorize_covariance(sdr.W_star, 1e-6);
    SbfScheme gauss{SbfKind::Gaussian, sdr.W_star, factor, rank};
    SbfScheme ellip{SbfKind::Elliptic, sdr.W_star, std::move(factor), rank};
    return {gauss, ellip};
}

// Criterion 1: Theorem-level SBF gap bounds, exact, on 300 random instances.
Outcome criterion1() {
    int checked = 0;
    double worst_gap_slack = 1e9;
    std::vector<int> ranks_seen;
    for (int t = 0; t < 300; ++t) {
        const int L = (t % 3 == 0) ? 2 : (t % 3 == 1) ? 4 : 8;
        const int G = 1 + (t % 2);
        int M = 2 + (t * 5) % 15;
        if (M % G) ++M;
        const double sigma2 = (t % 4 < 2) ? 1.0 : 0.25;
        const double budget = std::pow(10.0, 0.2 * (t % 5));
        const bool pa = (t % 7) == 0;
        const NetworkConfig c = make_config(L, G, M / G, sigma2, budget, pa,
                                            2.0 * budget / L);
        const ProblemData p = build_mimo_problem(c, generate_channels(c, 5000 + t));
        const SdrSolution sdr = solve_sdr(p);
        auto [gauss, ellip] = schemes_from(sdr);
        const double gap_g = sdr.sdr_rate - sbf_rate(p, gauss);
        const double gap_e = sdr.sdr_rate - sbf_rate(p, ellip);
        const double bound_e = gap_bound_elliptic(std::max(gauss.rank, 1)) + 1e-8;
        if (!(gap_g >= 0.0 && gap_g <= 0.577216 && gap_e >= 0.0 &&
              gap_e <= bound_e))
            return {false, "gap bound violated on instance " + std::to_string(t) +
                               " (gap_g=" + std::to_string(gap_g) +
                               ", gap_e=" + std::to_string(gap_e) + ")"};
        worst_gap_slack = std::min(worst_gap_slack,
                                   std::min(0.577216 - gap_g, bound_e - gap_e));
        if (std::find(ranks_seen.begin(), ranks_seen.end(), gauss.rank) ==
            ranks_seen.end())
            ranks_seen.push_back(gauss.rank);
        ++checked;
    }
    // Large-gamma regime: the elliptic gap matches its closed-form limit.
    double worst_limit_err = 0.0;
    for (int r : ranks_seen) {
        if (r < 1) continue;
        const double gap = std::log1p(1e12) - sbf_rate_elliptic(1e12, r);
        worst_limit_err =
            std::max(worst_limit_err, std::abs(gap - gap_bound_elliptic(r)));
    }
    if (worst_limit_err > 1e-8)
        return {false, "large-gamma elliptic gap mismatch " +
                           std::to_string(worst_limit_err)};
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%d instances, min bound slack %.3g, large-gamma err %.3g",
                  checked, worst_gap_slack, worst_limit_err);
    return {true, buf};
}

// Criterion 2: closed forms against quadrature oracles.
Outcome criterion2() {
    double worst = 0.0;
    for (int gi = 0; gi < 25; ++gi) {
        const double gamma = std::pow(10.0, -3.0 + 6.0 * gi / 24.0);
        for (int r = 1; r <= 12; ++r)
            worst = std::max(worst, std::abs(sbf_rate_elliptic(gamma, r) -
                                             sbf_rate_elliptic_quadrature(gamma, r)));
    }
    if (worst > 1e-8)
        return {false, "elliptic closed form deviates " + std::to_string(worst)};
    const double g1 = sbf_rate_gaussian(1.0);
    const double oracle = sbf_rate_gaussian_quadrature(1.0);
    if (std::abs(g1 - 0.596347) > 1e-6 + 4e-7 || std::abs(g1 - oracle) > 1e-6)
        return {false, "gaussian rate at 1 deviates: " + std::to_string(g1)};
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "elliptic grid max err %.3g; gaussian(1) = %.9f vs oracle %.9f",
                  worst, g1, oracle);
    return {true, buf};
}

// Criterion 3: agreement with the frozen external-solver fixtures.
Outcome criterion3() {
    const std::string path = std::string(RELAYBF_FIXTURE_DIR) + "/sdr_reference.json";
    std::ifstream in(path);
    if (!in) return {false, "missing fixture file " + path};
    nlohmann::json j;
    in >> j;
    int n = 0;
    double worst_rel = 0.0;
    for (const auto& item : j.at("instances")) {
        const NetworkConfig c = config_from_json_text(item.at("config").dump());
        const std::uint64_t seed = item.at("seed").get<std::uint64_t>();
        const double gamma_ref = item.at("gamma_ref").get<double>();
        const ChannelRealization ch = generate_channels(c, seed);
        const ProblemData p = build_mimo_problem(c, ch);
        SdrOptions opt;
        opt.tol_gamma = 1e-6 * (1.0 + gamma_ref);
        const SdrSolution sol = solve_sdr(p, opt);
        const double rel = std::abs(sol.gamma_star - gamma_ref) / gamma_ref;
        worst_rel = std::max(worst_rel, rel);
        if (rel > 1e-4)
            return {false, "instance " + std::to_string(n) + " rel err " +
                               std::to_string(rel)};
        if (min_sinr(sol.W_star, p) < sol.gamma_star * (1.0 - 1e-6))
            return {false, "certificate mismatch on instance " + std::to_string(n)};
        for (std::size_t s = 0; s < p.constraints.size(); ++s)
            if (power(sol.W_star, p, static_cast<int>(s)) >
                p.constraints[s].b * (1.0 + 1e-6))
                return {false, "infeasible W* on instance " + std::to_string(n)};
        ++n;
    }
    if (n < 20) return {false, "only " + std::to_string(n) + " fixtures present"};
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d instances, worst rel err %.3g", n,
                  worst_rel);
    return {true, buf};
}

// Criterion 4: Algorithm contract and the empirical randomization bound.
Outcome criterion4() {
    const int total = 200;
    const double bound = theorem1_gap_bound(16, 8);
    int within = 0;
    for (int t = 0; t < total; ++t) {
        const double budget = std::pow(10.0, 0.1 * (t % 11));
        const NetworkConfig c = make_config(8, 2, 8, 1.0, budget, false, 0.0);
        const ProblemData p = build_mimo_problem(c, generate_channels(c, 7000 + t));
        const SdrSolution sdr = solve_sdr(p);
        const BfSolution bf = gaussian_randomize(sdr, p, 20, 81000 + t);
        for (std::size_t s = 0; s < p.constraints.size(); ++s)
            if (power_of_vector(bf.w_hat, p, static_cast<int>(s)) >
                p.constraints[s].b * (1.0 + 1e-9))
                return {false, "randomized weights infeasible on " +
                                   std::to_string(t)};
        if (bf.bf_rate > sdr.sdr_rate + 1e-9)
            return {false, "r_BF above r_SDR on " + std::to_string(t)};
        if (sdr.sdr_rate - bf.bf_rate <= bound) ++within;
    }
    const double p_hat = static_cast<double>(within) / total;
    const double target = 1.0 - std::pow(5.0 / 6.0, 20);
    const double sigma = std::sqrt(std::max(p_hat * (1.0 - p_hat), 1.0 / total) /
                                   total);
    if (p_hat < target - 3.0 * sigma)
        return {false, "bound frequency " + std::to_string(p_hat) + " below " +
                           std::to_string(target - 3.0 * sigma)};
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "gap <= %.3f nats on %d/%d draws (need >= %.4f)", bound, within,
                  total, target - 3.0 * sigma);
    return {true, buf};
}

// Criterion 5: per-sample elliptic power bounds on every constraint.
Outcome criterion5() {
    double worst_slack = 1e9;
    for (int t = 0; t < 20; ++t) {
        const int G = 1 + (t % 2);
        const int pg = 1 + (t % 3);
        const bool pa = (t % 2) == 0;
        const NetworkConfig c =
            make_config(4, G, pg, 1.0, 2.0, pa, 1.0);
        const ProblemData p = build_mimo_problem(c, generate_channels(c, 9000 + t));
        const SdrSolution sdr = solve_sdr(p);
        auto [gauss, ellip] = schemes_from(sdr);
        if (ellip.rank < 1) continue;
        std::vector<std::pair<double, double>> bounds;
        for (const auto& pc : p.constraints)
            bounds.push_back(elliptic_power_bounds(ellip, pc.Q));
        for (int k = 0; k < 10000; ++k) {
            auto rng = RngStream::derive(91000 + t, RngStream::kTagSbf, k);
            const VectorXcd w = sample_elliptic_weight(ellip, rng);
            for (std::size_t s = 0; s < p.constraints.size(); ++s) {
                const double v = power_of_vector(w, p, static_cast<int>(s));
                const double tol = 1e-9 * std::max(bounds[s].second, 1e-300);
                const double slack =
                    std::min(v - bounds[s].first + tol, bounds[s].second + tol - v);
                worst_slack = std::min(worst_slack, slack);
                if (slack < 0.0)
                    return {false, "sample outside the power interval on " +
                                       std::to_string(t)};
            }
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "2e5 draws within bounds, min slack %.3g",
                  worst_slack);
    return {true, buf};
}

// Criterion 6: figure-level statistical orderings at paper scale.
Outcome criterion6() {
    std::string detail;

    // (a) rates vs total power, L=8 G=2 M=16, sigma^2 = 1.
    SweepSpec a;
    a.base_config = make_config(8, 2, 8, 1.0, 1.0, false, 0.0);
    a.sweep_variable = SweepVariable::TotalPower;
    a.sweep_values = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    a.num_channel_draws = 100;
    a.num_randomizations = 1000;
    a.master_seed = 61;
    const RateReport ra = run_sweep(a, 1);
    for (const auto& row : ra.rows) {
        const double se = std::sqrt(row.se_ellip * row.se_ellip +
                                    row.se_bf * row.se_bf);
        if (row.r_sbf_ellip < row.r_bf - se)
            return {false, "(a) elliptic below BF at " +
                               std::to_string(row.sweep_value) + " dB"};
    }

    // (b) rates vs number of users, L=8 G=2, 6 dB, sigma^2 = 0.25.
    SweepSpec b;
    b.base_config = make_config(8, 2, 1, 0.25, std::pow(10.0, 0.6), false, 0.0);
    b.sweep_variable = SweepVariable::NumUsers;
    b.sweep_values = {4, 6, 8, 10, 12, 14, 16};
    b.num_channel_draws = 100;
    b.num_randomizations = 1000;
    b.master_seed = 62;
    const RateReport rb = run_sweep(b, 1);
    for (const auto& row : rb.rows) {
        const double se_g =
            std::sqrt(row.se_gauss * row.se_gauss + row.se_bf * row.se_bf);
        const double se_e =
            std::sqrt(row.se_ellip * row.se_ellip + row.se_bf * row.se_bf);
        if (row.sweep_value > 10.0 && !(row.r_sbf_gauss > row.r_bf - se_g))
            return {false, "(b) gaussian not above BF at M=" +
                               std::to_string(row.sweep_value)};
        if (row.r_sbf_ellip < row.r_bf - se_e)
            return {false, "(b) elliptic below BF at M=" +
                               std::to_string(row.sweep_value)};
    }

    // (c) rates vs number of per-antenna constraints, L=4 G=1 M=16.
    SweepSpec cc;
    cc.base_config = make_config(4, 1, 16, 0.25, std::pow(10.0, 0.4), true,
                                 std::pow(10.0, -0.5));
    cc.sweep_variable = SweepVariable::NumPerAntennaConstraints;
    cc.sweep_values = {0, 1, 2, 3, 4};
    cc.num_channel_draws = 100;
    cc.num_randomizations = 1000;
    cc.master_seed = 63;
    const RateReport rc = run_sweep(cc, 1);
    for (std::size_t i = 1; i < rc.rows.size(); ++i) {
        const auto& prev = rc.rows[i - 1];
        const auto& cur = rc.rows[i];
        const double gap_prev = prev.r_sdr - prev.r_bf;
        const double gap_cur = cur.r_sdr - cur.r_bf;
        const double se = std::sqrt(prev.se_bf * prev.se_bf + prev.se_sdr * prev.se_sdr +
                                    cur.se_bf * cur.se_bf + cur.se_sdr * cur.se_sdr);
        if (gap_cur < gap_prev - se)
            return {false, "(c) BF gap decreased at count " +
                               std::to_string(cur.sweep_value)};
    }

    // Theorem bound per draw, all sweeps, both SBF schemes (bits).
    int failed_draws = 0;
    for (const RateReport* rep : {&ra, &rb, &rc}) {
        for (const auto& point : rep->draws) {
            for (const auto& d : point) {
                if (!d.ok) {
                    ++failed_draws;
                    continue;
                }
                const double ln2 = std::log(2.0);
                if ((d.r_sdr - d.r_sbf_gauss) / ln2 > 0.8317 ||
                    (d.r_sdr - d.r_sbf_ellip) / ln2 > 0.8317)
                    return {false, "per-draw SBF gap above 0.8317 bits"};
                if (d.r_sdr < d.r_bf - 1e-9)
                    return {false, "per-draw r_SDR below r_BF"};
            }
        }
    }
    detail = "all orderings hold; failed draws: " + std::to_string(failed_draws);
    return {true, detail};
}

// Criterion 7: Appendix tail bounds on five solved instances.
Outcome criterion7() {
    double worst_margin = 1e9;
    for (int t = 0; t < 5; ++t) {
        const bool pa = t < 3;
        const NetworkConfig c =
            make_config(8, 2, 8, 1.0, 4.0, pa, 1.0);
        const ProblemData p = build_mimo_problem(c, generate_channels(c, 1700 + t));
        const SdrSolution sdr = solve_sdr(p);
        Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(sdr.W_star);
        const MatrixXcd sqrt_w =
            eig.eigenvectors() *
            eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
            eig.eigenvectors().adjoint();

        const int K = 100000;
        const double beta = 1.0 / (8.0 * p.M);
        const double rho = 6.0 * std::log(3.0 * (p.L + 1)) + 1.0;
        const double bound_e = 3.0 * beta / (1.0 - 2.0 * beta);
        const double bound_f = std::exp(-(rho - 1.0) / 6.0);

        std::vector<double> base_sinr(p.M), base_pow(p.constraints.size());
        for (int u = 0; u < p.M; ++u)
            base_sinr[u] = herm_inner(p.signal_mats[u], sdr.W_star) /
                           (herm_inner(p.interference_mats[u], sdr.W_star) + 1.0);
        for (std::size_t s = 0; s < p.constraints.size(); ++s)
            base_pow[s] = power(sdr.W_star, p, static_cast<int>(s));

        std::vector<int> hits_e(p.M, 0), hits_f(p.constraints.size(), 0);
        for (int k = 0; k < K; ++k) {
            auto rng = RngStream::derive(73000 + t, RngStream::kTagRandomization, k);
            VectorXcd z(p.n);
            for (int i = 0; i < p.n; ++i) z[i] = rng.next_cnormal();
            const VectorXcd xi = sqrt_w * z;
            for (int u = 0; u < p.M; ++u)
                if (sinr_of_vector(xi, p, u) <= beta * base_sinr[u]) ++hits_e[u];
            for (std::size_t s = 0; s < p.constraints.size(); ++s)
                if (power_of_vector(xi, p, static_cast<int>(s)) >= rho * base_pow[s])
                    ++hits_f[s];
        }
        for (int u = 0; u < p.M; ++u) {
            const double ph = static_cast<double>(hits_e[u]) / K;
            const double sig = std::sqrt(std::max(ph * (1 - ph), 1.0 / K) / K);
            worst_margin = std::min(worst_margin, bound_e + 3 * sig - ph);
        }
        for (std::size_t s = 0; s < p.constraints.size(); ++s) {
            const double ph = static_cast<double>(hits_f[s]) / K;
            const double sig = std::sqrt(std::max(ph * (1 - ph), 1.0 / K) / K);
            worst_margin = std::min(worst_margin, bound_f + 3 * sig - ph);
        }
        if (worst_margin < 0.0)
            return {false, "tail bound exceeded on instance " + std::to_string(t)};
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "lemma tails within bounds, min margin %.3g",
                  worst_margin);
    return {true, buf};
}

// Criterion 8: PAPR CCDF ordering at the 1e-2 level.
Outcome criterion8() {
    const NetworkConfig c = make_config(8, 2, 8, 1.0, std::pow(10.0, 0.6), false, 0.0);
    const ChannelRealization ch = generate_channels(c, 424242);
    const ProblemData p = build_mimo_problem(c, ch);
    const SdrSolution sdr = solve_sdr(p);
    const BfSolution bf = gaussian_randomize(sdr, p, 1000, 515151);

    const int blocks = 10000, T = 4800;
    const PaprCurve cb = papr_ccdf_with_design(c, ch, sdr, bf.w_hat,
                                               PaprSchemeKind::BF, blocks, T,
                                               Modulation::QAM64, 31);
    const PaprCurve cg = papr_ccdf_with_design(c, ch, sdr, bf.w_hat,
                                               PaprSchemeKind::GaussianSBF, blocks,
                                               T, Modulation::QAM64, 32);
    const PaprCurve ce = papr_ccdf_with_design(c, ch, sdr, bf.w_hat,
                                               PaprSchemeKind::EllipticSBF, blocks,
                                               T, Modulation::QAM64, 33);
    const double t_bf = papr_at_ccdf_level(cb, 1e-2);
    const double t_ga = papr_at_ccdf_level(cg, 1e-2);
    const double t_el = papr_at_ccdf_level(ce, 1e-2);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "PAPR@1e-2: BF %.2f dB, elliptic %.2f dB, gaussian %.2f dB",
                  t_bf, t_el, t_ga);
    if (!(t_bf < t_el && t_el < t_ga))
        return {false, std::string("ordering violated: ") + buf};
    if (t_el - t_bf > 4.0) return {false, std::string("elliptic loss > 4 dB: ") + buf};
    if (t_ga - t_bf < 3.0) return {false, std::string("gaussian loss < 3 dB: ") + buf};
    return {true, buf};
}

// Criterion 9: byte-identical sweep CSV across worker-thread counts.
Outcome criterion9() {
    SweepSpec s;
    s.base_config = make_config(4, 2, 2, 1.0, 1.0, false, 0.0);
    s.sweep_variable = SweepVariable::TotalPower;
    s.sweep_values = {0, 3, 6};
    s.num_channel_draws = 6;
    s.num_randomizations = 50;
    s.master_seed = 2024;
    const std::string c1 = rate_report_csv(run_sweep(s, 1));
    const std::string c4 = rate_report_csv(run_sweep(s, 4));
    const std::string c16 = rate_report_csv(run_sweep(s, 16));
    const std::string c4b = rate_report_csv(run_sweep(s, 4));
    if (c1 != c4) return {false, "1-thread and 4-thread CSV differ"};
    if (c1 != c16) return {false, "1-thread and 16-thread CSV differ"};
    if (c4 != c4b) return {false, "repeated 4-thread runs differ"};
    return {true, "identical CSV bytes across 1/4/16 workers and reruns"};
}

} // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
    if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8, 9};

    int failures = 0;
    for (int c : which) {
        Outcome o;
        try {
            switch (c) {
                case 1: o = criterion1(); break;
                case 2: o = criterion2(); break;
                case 3: o = criterion3(); break;
                case 4: o = criterion4(); break;
                case 5: o = criterion5(); break;
                case 6: o = criterion6(); break;
                case 7: o = criterion7(); break;
                case 8: o = criterion8(); break;
                case 9: o = criterion9(); break;
                default:
                    o = {false, "unknown criterion"};
            }
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %d: %s (%s)\n", c, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures;
}
