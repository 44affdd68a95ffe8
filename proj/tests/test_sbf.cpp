// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "relaybf/errors.hpp"
#include "relaybf/numerics.hpp"
#include "relaybf/problem.hpp"
#include "relaybf/rng.hpp"
#include "relaybf/sbf.hpp"
#include "relaybf/scenario.hpp"
#include "relaybf/sdr.hpp"

using namespace relaybf;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

TEST_CASE("factorize_covariance on identity, outer product and rank-3 input") {
    auto [f_id, r_id] = factorize_covariance(MatrixXcd::Identity(4, 4), 1e-6);
    CHECK(r_id == 4);
    CHECK((f_id.adjoint() * f_id - MatrixXcd::Identity(4, 4)).norm() <= 1e-10);

    auto rng = RngStream::derive(1, 1);
    VectorXcd w(5);
    for (int i = 0; i < 5; ++i) w[i] = rng.next_cnormal();
    auto [f_w, r_w] = factorize_covariance(w * w.adjoint(), 1e-6);
    CHECK(r_w == 1);
    // single row = sqrt(w^H w) * (phase-normalized w)^H
    CHECK(std::abs(f_w.row(0).norm() - w.norm()) <= 1e-10 * w.norm());
    CHECK((f_w.adjoint() * f_w - w * w.adjoint()).norm() <= 1e-10 * w.squaredNorm());

    MatrixXcd b(3, 6);
    for (int c = 0; c < 6; ++c)
        for (int r = 0; r < 3; ++r) b(r, c) = rng.next_cnormal();
    auto [f_3, r_3] = factorize_covariance(b.adjoint() * b, 1e-6);
    CHECK(r_3 == 3);

    CHECK_THROWS_AS(factorize_covariance(-MatrixXcd::Identity(3, 3), 1e-6),
                    NotPsdError);
}

TEST_CASE("gaussian sampler: zero covariance and sample covariance") {
    SbfScheme zero = make_sbf_scheme(SbfKind::Gaussian, MatrixXcd::Zero(3, 3));
    auto rng0 = RngStream::derive(2, 1);
    CHECK(sample_gaussian_weight(zero, rng0).norm() == 0.0);

    auto rng = RngStream::derive(2, 2);
    MatrixXcd b(3, 3);
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r) b(r, c) = rng.next_cnormal();
    const MatrixXcd omega = b * b.adjoint() / 3.0;
    SbfScheme g = make_sbf_scheme(SbfKind::Gaussian, omega);

    const int K = 100000;
    MatrixXcd acc = MatrixXcd::Zero(3, 3);
    for (int k = 0; k < K; ++k) {
        auto s = RngStream::derive(2, 3, k);
        const VectorXcd w = sample_gaussian_weight(g, s);
        acc += w * w.adjoint();
    }
    acc /= K;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double sd = std::sqrt((omega(i, i).real() * omega(j, j).real() +
                                         std::norm(omega(i, j))) /
                                        K);
            CHECK(std::abs(acc(i, j) - omega(i, j)) <= 3.0 * sd);
        }
    }
}

TEST_CASE("elliptic sampler: fixed norm, rank-one determinism, covariance") {
    SbfScheme id2 = make_sbf_scheme(SbfKind::Elliptic, MatrixXcd::Identity(2, 2));
    for (int k = 0; k < 50; ++k) {
        auto s = RngStream::derive(3, 1, k);
        CHECK(sample_elliptic_weight(id2, s).squaredNorm() ==
              doctest::Approx(2.0).epsilon(1e-12));
    }

    auto rng = RngStream::derive(3, 2);
    VectorXcd v(4);
    for (int i = 0; i < 4; ++i) v[i] = rng.next_cnormal();
    SbfScheme r1 = make_sbf_scheme(SbfKind::Elliptic, v * v.adjoint());
    REQUIRE(r1.rank == 1);
    for (int k = 0; k < 20; ++k) {
        auto s = RngStream::derive(3, 3, k);
        const VectorXcd w = sample_elliptic_weight(r1, s);
        CHECK((w * w.adjoint() - r1.omega).norm() <= 1e-9 * r1.omega.norm());
    }

    MatrixXcd b(3, 3);
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r) b(r, c) = rng.next_cnormal();
    const MatrixXcd omega = b * b.adjoint() / 3.0;
    SbfScheme e = make_sbf_scheme(SbfKind::Elliptic, omega);
    const int K = 100000;
    MatrixXcd acc = MatrixXcd::Zero(3, 3);
    for (int k = 0; k < K; ++k) {
        auto s = RngStream::derive(3, 4, k);
        const VectorXcd w = sample_elliptic_weight(e, s);
        acc += w * w.adjoint();
    }
    acc /= K;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double sd = std::sqrt((omega(i, i).real() * omega(j, j).real() +
                                         std::norm(omega(i, j))) /
                                        K);
            CHECK(std::abs(acc(i, j) - omega(i, j)) <= 4.0 * sd);
        }
}

TEST_CASE("elliptic power bounds: identities and per-draw containment") {
    SbfScheme id2 = make_sbf_scheme(SbfKind::Elliptic, MatrixXcd::Identity(2, 2));
    auto [lo_id, hi_id] = elliptic_power_bounds(id2, MatrixXcd::Identity(2, 2));
    CHECK(lo_id == doctest::Approx(2.0));
    CHECK(hi_id == doctest::Approx(2.0));
    auto [lo_z, hi_z] = elliptic_power_bounds(id2, MatrixXcd::Zero(2, 2));
    CHECK(lo_z == 0.0);
    CHECK(hi_z == 0.0);

    auto rng = RngStream::derive(4, 1);
    MatrixXcd b(4, 4), qb(4, 4);
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) {
            b(r, c) = rng.next_cnormal();
            qb(r, c) = rng.next_cnormal();
        }
    const MatrixXcd omega = b * b.adjoint() / 4.0;
    const MatrixXcd q = qb * qb.adjoint() / 4.0;
    SbfScheme e = make_sbf_scheme(SbfKind::Elliptic, omega);
    auto [lo, hi] = elliptic_power_bounds(e, q);
    REQUIRE(hi > lo);
    for (int k = 0; k < 10000; ++k) {
        auto s = RngStream::derive(4, 2, k);
        const VectorXcd w = sample_elliptic_weight(e, s);
        const double p = (w.adjoint() * q * w)(0).real();
        CHECK(p >= lo - 1e-9 * hi);
        CHECK(p <= hi + 1e-9 * hi);
    }
}

TEST_CASE("gaussian rate formula against oracle and limits") {
    CHECK(sbf_rate_gaussian(0.0) == 0.0);
    CHECK(sbf_rate_gaussian(1.0) == doctest::Approx(0.596347).epsilon(2e-6));
    CHECK(std::abs(sbf_rate_gaussian(1.0) - sbf_rate_gaussian_quadrature(1.0)) <=
          1e-10);
    // Gap approaches the Euler-Mascheroni constant from below.
    const double gap8 = std::log1p(1e8) - sbf_rate_gaussian(1e8);
    CHECK(std::abs(gap8 - 0.5772156649) <= 1e-6);
    CHECK(gap8 < 0.5772156649015329);
}

TEST_CASE("elliptic rate formula: reductions and oracle agreement") {
    CHECK(sbf_rate_elliptic(0.0, 5) == 0.0);
    for (double g : {1e-3, 0.1, 1.0, 17.0, 1e3})
        CHECK(sbf_rate_elliptic(g, 1) == doctest::Approx(std::log1p(g)));
    CHECK_THROWS_AS(sbf_rate_elliptic(1.0, 0), MathDomainError);

    for (double g : {1e-3, 1e-2, 0.1, 1.0, 10.0, 1e3}) {
        for (int r = 1; r <= 12; ++r) {
            const double closed = sbf_rate_elliptic(g, r);
            const double quad = sbf_rate_elliptic_quadrature(g, r);
            CHECK(std::abs(closed - quad) <= 1e-8);
        }
    }
}

TEST_CASE("elliptic gap bound values and monotonicity") {
    CHECK(gap_bound_elliptic(1) == 0.0);
    CHECK(gap_bound_elliptic(2) == doctest::Approx(1.0 - std::log(2.0)));
    CHECK(gap_bound_elliptic(2) == doctest::Approx(0.306853).epsilon(1e-5));
    double prev = 0.0;
    for (int r = 1; r <= 5000; ++r) {
        const double b = gap_bound_elliptic(r);
        CHECK(b >= prev);
        CHECK(b < 0.5772157);
        prev = b;
    }
    CHECK(prev > 0.5771);
    CHECK_THROWS_AS(gap_bound_elliptic(0), MathDomainError);
}

TEST_CASE("binomial identity sum_k C(n,k)(-1)^k/k = -H_n for n = 1..20") {
    for (int n = 1; n <= 20; ++n) {
        double s = 0.0;
        for (int k = 1; k <= n; ++k)
            s += binom(n, k) * ((k % 2) ? -1.0 : 1.0) / k;
        CHECK(std::abs(s + harmonic(n)) <= 1e-10);
    }
}

TEST_CASE("rate ordering: elliptic > gaussian > 0, both below Shannon") {
    for (double g : {0.05, 0.6, 3.0, 40.0}) {
        const double rg = sbf_rate_gaussian(g);
        CHECK(rg > 0.0);
        for (int r = 2; r <= 12; ++r) {
            const double re = sbf_rate_elliptic(g, r);
            CHECK(re > rg);
            CHECK(re < std::log1p(g));
        }
    }
}

TEST_CASE("worst-user sbf_rate on a solved instance with omega = W*") {
    NetworkConfig c;
    c.num_relay_antennas = 4;
    c.num_groups = 2;
    c.group_sizes = {2, 2};
    c.tx_powers = {1.0, 1.0};
    c.relay_noise_vars.assign(4, 0.5);
    c.user_noise_vars.assign(4, 0.5);
    c.total_power_budget = 4.0;
    const ChannelRealization ch = generate_channels(c, 77);
    const ProblemData p = build_mimo_problem(c, ch);
    const SdrSolution sdr = solve_sdr(p);
    REQUIRE(sdr.gamma_star > 0.0);

    SbfScheme zero = make_sbf_scheme(SbfKind::Gaussian, MatrixXcd::Zero(p.n, p.n));
    CHECK(sbf_rate(p, zero) == 0.0);

    auto [factor, rank] = factorize_covariance(sdr.W_star, 1e-6);
    SbfScheme gauss{SbfKind::Gaussian, sdr.W_star, factor, rank};
    SbfScheme ellip{SbfKind::Elliptic, sdr.W_star, factor, rank};
    const double rate_g = sbf_rate(p, gauss);
    const double rate_e = sbf_rate(p, ellip);

    // Theorem-level gap bounds at omega = W*.
    CHECK(sdr.sdr_rate - rate_g >= -1e-12);
    CHECK(sdr.sdr_rate - rate_g <= 0.577216);
    CHECK(sdr.sdr_rate - rate_e >= -1e-12);
    CHECK(sdr.sdr_rate - rate_e <= gap_bound_elliptic(rank) + 1e-8);

    // Average power feasibility: E[w^H Q w] = Q . W* within budget.
    for (std::size_t s = 0; s < p.constraints.size(); ++s)
        CHECK(power(sdr.W_star, p, static_cast<int>(s)) <=
              p.constraints[s].b * (1.0 + 1e-6));

    // Monte Carlo estimate of the worst user's expected log rate.
    int worst = 0;
    double worst_gamma = std::numeric_limits<double>::infinity();
    for (int u = 0; u < p.M; ++u) {
        const double gu = herm_inner(p.signal_mats[u], sdr.W_star) /
                          (herm_inner(p.interference_mats[u], sdr.W_star) + 1.0);
        if (gu < worst_gamma) {
            worst_gamma = gu;
            worst = u;
        }
    }
    const double denom = herm_inner(p.interference_mats[worst], sdr.W_star) + 1.0;
    for (const SbfScheme& scheme : {gauss, ellip}) {
        const int K = 100000;
        double sum = 0.0, sumsq = 0.0;
        for (int k = 0; k < K; ++k) {
            auto s = RngStream::derive(5, 9, k);
            const VectorXcd w = scheme.kind == SbfKind::Gaussian
                                    ? sample_gaussian_weight(scheme, s)
                                    : sample_elliptic_weight(scheme, s);
            const double inst =
                std::log1p(p.signal_factors[worst].quad_form(w) / denom);
            sum += inst;
            sumsq += inst * inst;
        }
        const double mean = sum / K;
        const double se = std::sqrt(std::max(sumsq / K - mean * mean, 0.0) / K);
        const double formula = scheme.kind == SbfKind::Gaussian ? rate_g : rate_e;
        // the 1e-6 term covers the covariance-factor rank truncation
        CHECK(std::abs(mean - formula) <= 3.0 * se + 1e-6 * (1.0 + formula));
    }
}

TEST_CASE("scheme factor invariants: Lf^H Lf = omega, rank rows") {
    auto rng = RngStream::derive(6, 1);
    MatrixXcd b(5, 2);
    for (int c = 0; c < 2; ++c)
        for (int r = 0; r < 5; ++r) b(r, c) = rng.next_cnormal();
    const MatrixXcd omega = b * b.adjoint();
    SbfScheme s = make_sbf_scheme(SbfKind::Elliptic, omega);
    CHECK(s.rank == 2);
    CHECK(s.factor.rows() == 2);
    CHECK((s.factor.adjoint() * s.factor - omega).norm() <= 1e-10 * omega.norm());
}
