// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <utility>

#include "relaybf/problem.hpp"
#include "relaybf/rng.hpp"

namespace relaybf {

enum class SbfKind { Gaussian, Elliptic };

/// A stochastic beamforming scheme: a zero-mean weight distribution of the
/// given kind whose covariance is `omega` (set to W* in the experiments).
/// `factor` is the rank-truncated square root, factor^H factor = omega.
struct SbfScheme {
    SbfKind kind = SbfKind::Gaussian;
    Eigen::MatrixXcd omega;  // n x n Hermitian PSD
    Eigen::MatrixXcd factor; // r x n
    int rank = 0;
};

/// Rank-truncated factor L with L^H L = omega: rows sqrt(lambda_j) v_j^H for
/// eigenpairs above rel_tol * lambda_max, eigenvalues descending, each row's
/// global phase normalized.  Throws NotPsdError below -rel_tol * lambda_max.
std::pair<Eigen::MatrixXcd, int> factorize_covariance(const Eigen::MatrixXcd& omega,
                                                      double rel_tol);

SbfScheme make_sbf_scheme(SbfKind kind, const Eigen::MatrixXcd& omega,
                          double rel_tol = 1e-6);

/// w = L^H alpha with alpha ~ CN(0, I_r); E[w w^H] = omega.
Eigen::VectorXcd sample_gaussian_weight(const SbfScheme& scheme, RngStream& rng);

/// w = L^H alpha / (|alpha| / sqrt(r)); every draw satisfies the Proposition
/// power bounds below with probability one.
Eigen::VectorXcd sample_elliptic_weight(const SbfScheme& scheme, RngStream& rng);

/// Deterministic per-draw bounds on w^H Q w for the elliptic scheme:
/// [r lambda_min^+(Q^(1/2) omega Q^(1/2)), r lambda_max(same)].
std::pair<double, double> elliptic_power_bounds(const SbfScheme& scheme,
                                                const Eigen::MatrixXcd& Q);

/// E_{xi ~ Exp(1)}[log(1 + xi gamma)] = e^(1/gamma) E_1(1/gamma), in nats.
double sbf_rate_gaussian(double gamma);

/// Quadrature route for the same integral (independent cross-check).
double sbf_rate_gaussian_quadrature(double gamma);

/// Closed-form elliptic rate
///   (1 + 1/(r gamma))^(r-1) [log(1+r gamma) - H_{r-1}
///      - sum_k C(r-1,k)(-1)^k / (k (1+r gamma)^k)],
/// with an automatic switch to quadrature where the alternating sum cancels
/// catastrophically.  r = 1 reduces to log(1+gamma).
double sbf_rate_elliptic(double gamma, int r);

/// Quadrature of the defining integral
/// (1-1/r) \int_0^r log(1+t gamma) (1-t/r)^(r-2) dt (point mass for r = 1).
double sbf_rate_elliptic_quadrature(double gamma, int r);

/// H_{r-1} - log(r): the elliptic SDR-rate gap bound; increasing in r with
/// limit 0.5772156649.
double gap_bound_elliptic(int r);

/// Worst-user SBF rate at covariance scheme.omega: the minimizing user's
/// Gamma = (A . omega)/(C . omega + 1) fed to the kind's rate formula.
double sbf_rate(const ProblemData& problem, const SbfScheme& scheme);

} // namespace relaybf
