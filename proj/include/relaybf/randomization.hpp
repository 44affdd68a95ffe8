// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "relaybf/problem.hpp"
#include "relaybf/sdr.hpp"

namespace relaybf {

struct BfSolution {
    Eigen::VectorXcd w_hat;
    double achieved_sinr = 0.0; ///< min_sinr(w w^H), recomputed exactly
    double bf_rate = 0.0;       ///< nats
    int num_randomizations = 0;
    int winning_index = -1;     ///< 0-based draw index; -1 on the rank-one shortcut
};

/// Rank-one Gaussian randomization: when W* is numerically rank one its
/// dominant scaled eigenvector is returned directly; otherwise N candidates
/// xi ~ CN(0, W*) are scaled to the tightest power budget and the best
/// worst-user SINR wins.  Deterministic in (sdr, problem, N, seed); the
/// per-draw substream is indexed by the draw number.
BfSolution gaussian_randomize(const SdrSolution& sdr, const ProblemData& problem,
                              int num_randomizations, std::uint64_t seed);

/// log(1 + min_sinr(w w^H)) in nats.
double bf_rate(const Eigen::VectorXcd& w, const ProblemData& problem);

/// Theorem gap bound log M + log(log(3(L+1)) + 1/6) + log 48 in nats;
/// requires M >= 1 and L >= 2.
double theorem1_gap_bound(int num_users, int num_power_dims);

} // namespace relaybf
