// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace relaybf::ipm {

/// One equality row's coefficient against the semidefinite block, stored
/// dense and, when the matrix has low rank, additionally as U diag(lam) U^T.
struct ConstraintMatrix {
    Eigen::MatrixXd dense;     // N x N symmetric
    Eigen::MatrixXd factor_u;  // N x r
    Eigen::VectorXd factor_lam;
    bool has_factor = false;
};

/// Standard-form conic program over S^N_+ x R^p_+:
///   minimize  <c_sdp, X> + c_lp . x
///   s.t.      <A_i, X> + d_i . x = b_i,   i = 1..m
///             X >= 0 (psd), x >= 0.
struct Problem {
    int sdp_dim = 0; // N
    int lp_dim = 0;  // p
    Eigen::MatrixXd c_sdp;
    Eigen::VectorXd c_lp;
    std::vector<ConstraintMatrix> rows_sdp; // m entries
    Eigen::MatrixXd rows_lp;                // m x p
    Eigen::VectorXd b;
};

struct Options {
    int max_iters = 200;
    double tol_gap = 1e-7;   // relative duality gap
    double tol_feas = 1e-7;  // relative primal/dual infeasibility
    double step_fraction = 0.98;
};

/// Optional strictly interior starting point (primal and/or dual).
struct Start {
    std::optional<Eigen::MatrixXd> X;
    std::optional<Eigen::VectorXd> x_lp;
    std::optional<Eigen::MatrixXd> Z;
    std::optional<Eigen::VectorXd> z_lp;
    std::optional<Eigen::VectorXd> y;
};

enum class Status { Optimal, MaxIters, Stalled };

struct Result {
    Status status = Status::Stalled;
    Eigen::MatrixXd X;
    Eigen::VectorXd x_lp;
    Eigen::VectorXd y;
    Eigen::MatrixXd Z;
    Eigen::VectorXd z_lp;
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    double rel_gap = 0.0;
    double primal_infeas = 0.0;
    double dual_infeas = 0.0;
    int iterations = 0;
};

/// Primal-dual path-following with Nesterov-Todd scaling and a Mehrotra
/// predictor-corrector step.  Dense linear algebra throughout; intended for
/// the small embedded problems of this library (N <= a few hundred).
Result solve(const Problem& prob, const Options& opt = {},
             const Start* start = nullptr);

} // namespace relaybf::ipm
