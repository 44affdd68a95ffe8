// SPDX-License-Identifier: Apache-2.0

#include "relaybf/sbf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relaybf/errors.hpp"
#include "relaybf/numerics.hpp"

namespace relaybf {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

// Rotate v so its first non-negligible entry is real positive.
void normalize_phase(Eigen::Ref<VectorXcd> v) {
    const double scale = v.norm();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > 1e-12 * scale) {
            const std::complex<double> phase = v[i] / std::abs(v[i]);
            v /= phase;
            return;
        }
    }
}

VectorXcd standard_cnormal(int r, RngStream& rng) {
    VectorXcd a(r);
    for (int i = 0; i < r; ++i) a[i] = rng.next_cnormal();
    return a;
}

} // namespace

std::pair<MatrixXcd, int> factorize_covariance(const MatrixXcd& omega,
                                               double rel_tol) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(0.5 * (omega + omega.adjoint()));
    const VectorXd lam = eig.eigenvalues();
    const double lmax = std::max(lam.maxCoeff(), 0.0);
    if (lam.minCoeff() < -rel_tol * std::max(lmax, 1e-300))
        throw NotPsdError("covariance is not positive semidefinite");
    int r = 0;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam[i] > rel_tol * lmax) ++r;
    MatrixXcd factor(r, omega.rows());
    int row = 0;
    for (Eigen::Index i = lam.size() - 1; i >= 0; --i) { // descending eigenvalues
        if (lam[i] <= rel_tol * lmax) continue;
        VectorXcd v = eig.eigenvectors().col(i);
        normalize_phase(v);
        factor.row(row++) = std::sqrt(lam[i]) * v.adjoint();
    }
    return {factor, r};
}

SbfScheme make_sbf_scheme(SbfKind kind, const MatrixXcd& omega, double rel_tol) {
    SbfScheme s;
    s.kind = kind;
    s.omega = omega;
    auto [factor, r] = factorize_covariance(omega, rel_tol);
    s.factor = std::move(factor);
    s.rank = r;
    return s;
}

VectorXcd sample_gaussian_weight(const SbfScheme& scheme, RngStream& rng) {
    if (scheme.kind != SbfKind::Gaussian)
        throw MathDomainError("scheme kind is not Gaussian");
    if (scheme.rank == 0) return VectorXcd::Zero(scheme.omega.rows());
    return scheme.factor.adjoint() * standard_cnormal(scheme.rank, rng);
}

VectorXcd sample_elliptic_weight(const SbfScheme& scheme, RngStream& rng) {
    if (scheme.kind != SbfKind::Elliptic)
        throw MathDomainError("scheme kind is not Elliptic");
    if (scheme.rank < 1) throw MathDomainError("elliptic sampling needs rank >= 1");
    for (;;) {
        const VectorXcd alpha = standard_cnormal(scheme.rank, rng);
        const double nrm = alpha.norm();
        if (nrm == 0.0) continue; // probability-zero draw; redraw
        return scheme.factor.adjoint() * alpha *
               (std::sqrt(static_cast<double>(scheme.rank)) / nrm);
    }
}

std::pair<double, double> elliptic_power_bounds(const SbfScheme& scheme,
                                                const MatrixXcd& Q) {
    if (scheme.kind != SbfKind::Elliptic)
        throw MathDomainError("power bounds apply to the elliptic scheme");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eq(0.5 * (Q + Q.adjoint()));
    const VectorXd ql = eq.eigenvalues();
    const double qmax = std::max(ql.maxCoeff(), 0.0);
    if (ql.minCoeff() < -1e-10 * std::max(qmax, 1e-300))
        throw NotPsdError("Q is not positive semidefinite");
    const MatrixXcd qsqrt = eq.eigenvectors() *
                            ql.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                            eq.eigenvectors().adjoint();
    const MatrixXcd B = qsqrt * scheme.omega * qsqrt;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eb(0.5 * (B + B.adjoint()),
                                                Eigen::EigenvaluesOnly);
    const VectorXd bl = eb.eigenvalues();
    const double bmax = std::max(bl.maxCoeff(), 0.0);
    double bmin_pos = 0.0;
    for (Eigen::Index i = 0; i < bl.size(); ++i) {
        if (bl[i] > 1e-12 * bmax &&
            (bmin_pos == 0.0 || bl[i] < bmin_pos))
            bmin_pos = bl[i];
    }
    const double r = static_cast<double>(scheme.rank);
    return {r * bmin_pos, r * bmax};
}

double sbf_rate_gaussian(double gamma) {
    if (gamma < 0.0) throw MathDomainError("gamma must be nonnegative");
    if (gamma == 0.0) return 0.0;
    return expint_e1_scaled(1.0 / gamma);
}

double sbf_rate_gaussian_quadrature(double gamma) {
    if (gamma < 0.0) throw MathDomainError("gamma must be nonnegative");
    if (gamma == 0.0) return 0.0;
    const double T = std::max(50.0, 50.0 / std::max(gamma, 1.0));
    const double body = adaptive_quad(
        [gamma](double t) { return std::log1p(t * gamma) * std::exp(-t); }, 0.0, T,
        1e-12);
    // First term of the integrated-by-parts tail; the remainder is below
    // e^-T * gamma / (1 + gamma T).
    const double tail = std::exp(-T) * std::log1p(gamma * T);
    return body + tail;
}

double sbf_rate_elliptic_quadrature(double gamma, int r) {
    if (r < 1) throw MathDomainError("r must be >= 1");
    if (gamma < 0.0) throw MathDomainError("gamma must be nonnegative");
    if (gamma == 0.0) return 0.0;
    if (r == 1) return std::log1p(gamma); // xi is a unit point mass
    const double rr = r;
    return adaptive_quad(
        [gamma, rr](double t) {
            return std::log1p(t * gamma) * (1.0 - 1.0 / rr) *
                   std::pow(1.0 - t / rr, rr - 2.0);
        },
        0.0, rr, 1e-11);
}

double sbf_rate_elliptic(double gamma, int r) {
    if (r < 1) throw MathDomainError("r must be >= 1");
    if (gamma < 0.0) throw MathDomainError("gamma must be nonnegative");
    if (gamma == 0.0) return 0.0;
    if (r == 1) return std::log1p(gamma);

    const double rr = r;
    const double rg = rr * gamma;
    const double z = 1.0 + rg;
    const double ln_pref = (rr - 1.0) * (std::log(z) - std::log(rg));

    auto quad_fallback = [&] {
        // Integration by parts of the defining integral avoids the
        // alternating binomial sum entirely.
        return adaptive_quad(
            [gamma, rr](double t) {
                return gamma * std::pow(1.0 - t / rr, rr - 1.0) / (1.0 + t * gamma);
            },
            0.0, rr, 1e-11);
    };

    if (r > 25 || ln_pref > 600.0) return quad_fallback();

    // Compensated evaluation of the bracket with a cancellation estimate.
    double sum = std::log1p(rg) - harmonic(r - 1);
    double max_mag = std::max(std::abs(std::log1p(rg)), harmonic(r - 1));
    double comp = 0.0;
    double zk = 1.0;
    for (int k = 1; k <= r - 1; ++k) {
        zk *= z;
        const double term = -binom(r - 1, k) * ((k % 2) ? -1.0 : 1.0) / (k * zk);
        max_mag = std::max(max_mag, std::abs(term));
        const double t = sum + term;
        comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
    }
    const double bracket = sum + comp;
    const double pref = std::exp(ln_pref);
    const double est_abs_err = pref * max_mag * 1e-15 * (r + 2);
    if (est_abs_err > 1e-11) return quad_fallback();
    return pref * bracket;
}

double gap_bound_elliptic(int r) {
    if (r < 1) throw MathDomainError("r must be >= 1");
    return harmonic(r - 1) - std::log(static_cast<double>(r));
}

double sbf_rate(const ProblemData& problem, const SbfScheme& scheme) {
    if (scheme.omega.rows() != problem.n || scheme.omega.cols() != problem.n)
        throw DimensionMismatchError("scheme covariance must be n x n");
    double gamma_min = std::numeric_limits<double>::infinity();
    for (int u = 0; u < problem.M; ++u) {
        const double num = herm_inner(problem.signal_mats[u], scheme.omega);
        const double den = herm_inner(problem.interference_mats[u], scheme.omega) + 1.0;
        gamma_min = std::min(gamma_min, num / den);
    }
    gamma_min = std::max(gamma_min, 0.0);
    return scheme.kind == SbfKind::Gaussian
               ? sbf_rate_gaussian(gamma_min)
               : sbf_rate_elliptic(gamma_min, std::max(scheme.rank, 1));
}

} // namespace relaybf
