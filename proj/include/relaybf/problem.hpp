// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "relaybf/scenario.hpp"

namespace relaybf {

/// A weighted sum of rank-one Hermitian outer products,
///   sum_t weights[t] * vecs.col(t) vecs.col(t)^H.
/// All problem matrices decompose this way with few terms, which keeps
/// quadratic forms and the solver's Schur complement cheap.
struct Rank1Sum {
    Eigen::MatrixXcd vecs;   // n x T
    Eigen::VectorXd weights; // T

    Eigen::MatrixXcd dense() const {
        if (vecs.cols() == 0)
            return Eigen::MatrixXcd::Zero(vecs.rows(), vecs.rows());
        return vecs * weights.asDiagonal() * vecs.adjoint();
    }

    /// w^H M w for the represented matrix M.
    double quad_form(const Eigen::VectorXcd& w) const {
        const Eigen::VectorXcd proj = vecs.adjoint() * w;
        double acc = 0.0;
        for (Eigen::Index t = 0; t < proj.size(); ++t)
            acc += weights[t] * std::norm(proj[t]);
        return acc;
    }
};

struct PowerConstraint {
    Eigen::MatrixXcd Q; ///< Hermitian PSD, n x n
    double b = 0.0;     ///< watts
    Rank1Sum factor;    ///< low-rank form of Q when worthwhile
    bool has_factor = false;
};

/// Hermitian data of Problems (BF)/(SDR)/(DBF) for one channel realization.
/// Immutable after build; all evaluation operations are pure.
struct ProblemData {
    Topology topology = Topology::MIMO;
    int n = 0; ///< weight dimension: L^2 (MIMO) or L (distributed)
    int L = 0;
    int G = 0;
    int M = 0;
    std::vector<int> group_sizes;
    std::vector<int> group_of; ///< flat user index -> group

    std::vector<Eigen::MatrixXcd> signal_mats;       ///< A_{k,i}, rank one
    std::vector<Eigen::MatrixXcd> interference_mats; ///< C_{k,i}
    std::vector<Rank1Sum> signal_factors;
    std::vector<Rank1Sum> interference_factors;

    /// Ordered power constraints; entry 0 is the budget pair used as the
    /// power-minimization objective ((D_0, P0_bar) in MIMO mode).
    std::vector<PowerConstraint> constraints;

    Eigen::MatrixXcd relay_input_cov; ///< R = sum_j P_j f_j f_j^H + Sigma_L

    int user_index(int k, int i) const {
        int base = 0;
        for (int g = 0; g < k; ++g) base += group_sizes[g];
        return base + i;
    }
};

/// Hermitian inner product A . B = Re tr(AB) (real for Hermitian A, B).
double herm_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// Assembles A_{k,i}, C_{k,i}, D_0 and (optionally) D_1..D_L for the MIMO
/// relay.  Per-antenna pairs are appended iff budgets are configured;
/// `active_per_antenna` restricts them to the first c antennas (used by the
/// constraint-count sweep).  Additional (Q, b) pairs may be appended to
/// model other quadratic power-type constraints.
ProblemData build_mimo_problem(
    const NetworkConfig& config, const ChannelRealization& channels,
    const std::vector<std::pair<Eigen::MatrixXcd, double>>& extra_constraints = {},
    std::optional<int> active_per_antenna = std::nullopt);

/// Assembles the Hadamard-product matrices of Problem (DBF); the constraint
/// list is exactly `extra_constraints` (each Q must be Hermitian PSD of
/// size L; the first pair doubles as the power objective/budget).
ProblemData build_distributed_problem(
    const NetworkConfig& config, const ChannelRealization& channels,
    const std::vector<std::pair<Eigen::MatrixXcd, double>>& extra_constraints);

/// SINR of user i in group k under PSD matrix W: (A.W) / (C.W + 1).
double sinr(const Eigen::MatrixXcd& W, const ProblemData& problem, int k, int i);

double min_sinr(const Eigen::MatrixXcd& W, const ProblemData& problem);

/// Q_s . W for constraint index s.
double power(const Eigen::MatrixXcd& W, const ProblemData& problem, int s);

/// Rank-one specializations evaluated through the factor lists; equal to the
/// matrix forms at W = w w^H but O(n) per rank-one term.
double sinr_of_vector(const Eigen::VectorXcd& w, const ProblemData& problem, int user);
double min_sinr_of_vector(const Eigen::VectorXcd& w, const ProblemData& problem);
double power_of_vector(const Eigen::VectorXcd& w, const ProblemData& problem, int s);

/// JSON dump of every problem matrix (row-major [re, im] pairs) for
/// cross-checks against external solvers; format described in the README.
std::string dump_problem_json(const ProblemData& problem);

} // namespace relaybf
