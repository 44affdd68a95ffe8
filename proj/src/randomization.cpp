// SPDX-License-Identifier: Apache-2.0

#include "relaybf/randomization.hpp"

#include <cmath>
#include <limits>

#include "relaybf/errors.hpp"
#include "relaybf/rng.hpp"

namespace relaybf {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

void normalize_phase(VectorXcd& v) {
    const double scale = v.norm();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > 1e-12 * scale) {
            v /= v[i] / std::abs(v[i]);
            return;
        }
    }
}

// Scale w down if any power budget is (marginally) exceeded.
void repair_power(VectorXcd& w, const ProblemData& p) {
    double ratio = 0.0;
    for (int s = 0; s < static_cast<int>(p.constraints.size()); ++s)
        ratio = std::max(ratio, power_of_vector(w, p, s) / p.constraints[s].b);
    if (ratio > 1.0) w /= std::sqrt(ratio);
}

} // namespace

double bf_rate(const VectorXcd& w, const ProblemData& problem) {
    return std::log1p(min_sinr_of_vector(w, problem));
}

double theorem1_gap_bound(int num_users, int num_power_dims) {
    if (num_users < 1) throw MathDomainError("M must be >= 1");
    if (num_power_dims < 2) throw MathDomainError("L must be >= 2");
    return std::log(static_cast<double>(num_users)) +
           std::log(std::log(3.0 * (num_power_dims + 1)) + 1.0 / 6.0) +
           std::log(48.0);
}

BfSolution gaussian_randomize(const SdrSolution& sdr, const ProblemData& problem,
                              int num_randomizations, std::uint64_t seed) {
    if (num_randomizations < 1)
        throw MathDomainError("number of randomizations must be >= 1");

    BfSolution out;
    out.num_randomizations = num_randomizations;

    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(sdr.W_star);
    const VectorXd lam = eig.eigenvalues();
    const double lmax = lam.size() ? std::max(lam.maxCoeff(), 0.0) : 0.0;

    if (sdr.rank <= 1) {
        VectorXcd w = VectorXcd::Zero(problem.n);
        if (lmax > 0.0)
            w = std::sqrt(lmax) * eig.eigenvectors().col(lam.size() - 1);
        normalize_phase(w);
        repair_power(w, problem);
        out.w_hat = w;
        out.achieved_sinr = min_sinr_of_vector(w, problem);
        out.bf_rate = std::log1p(out.achieved_sinr);
        return out;
    }

    // W*^(1/2) with eigenvalues below 1e-12 * lambda_max clipped to zero.
    VectorXd lam_clip = lam;
    for (Eigen::Index i = 0; i < lam_clip.size(); ++i)
        if (lam_clip[i] < 1e-12 * lmax) lam_clip[i] = 0.0;
    MatrixXcd sqrt_w = eig.eigenvectors() * lam_clip.cwiseSqrt().asDiagonal() *
                       eig.eigenvectors().adjoint();

    double best_sinr = -1.0;
    VectorXcd best_w;
    int best_idx = -1;
    for (int draw = 0; draw < num_randomizations; ++draw) {
        auto rng = RngStream::derive(seed, RngStream::kTagRandomization, draw);
        VectorXcd z(problem.n);
        for (int i = 0; i < problem.n; ++i) z[i] = rng.next_cnormal();
        VectorXcd xi = sqrt_w * z;

        // Tightest-budget scaling; a vanishing quadratic form means the
        // constraint cannot bind and its ratio is skipped as infinite.
        double scale2 = std::numeric_limits<double>::infinity();
        for (int s = 0; s < static_cast<int>(problem.constraints.size()); ++s) {
            const double q = power_of_vector(xi, problem, s);
            if (q > 0.0) scale2 = std::min(scale2, problem.constraints[s].b / q);
        }
        if (std::isfinite(scale2)) xi *= std::sqrt(scale2);

        const double theta = min_sinr_of_vector(xi, problem);
        if (theta > best_sinr) {
            best_sinr = theta;
            best_w = xi;
            best_idx = draw;
        }
    }

    normalize_phase(best_w);
    repair_power(best_w, problem);
    out.w_hat = best_w;
    out.achieved_sinr = min_sinr_of_vector(best_w, problem);
    out.bf_rate = std::log1p(out.achieved_sinr);
    out.winning_index = best_idx;
    return out;
}

} // namespace relaybf
