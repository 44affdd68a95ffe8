// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "relaybf/ipm.hpp"
#include "relaybf/problem.hpp"

namespace relaybf {

/// Lossless embedding of a Hermitian matrix into a real symmetric one:
/// H -> [[Re H, -Im H], [Im H, Re H]].  Inner products double, so problem
/// data is embedded with an extra factor 1/2.
Eigen::MatrixXd embed_hermitian(const Eigen::MatrixXcd& h);

/// Inverse of embed_hermitian for (near-)block-structured symmetric X,
/// averaging the two blocks; the result is Hermitian PSD whenever X is PSD.
Eigen::MatrixXcd recover_hermitian(const Eigen::MatrixXd& x);

/// Number of eigenvalues exceeding rel_tol * lambda_max; rank_of(0) = 0.
int rank_of(const Eigen::MatrixXcd& W, double rel_tol);

struct FeasibilityResult {
    enum class Status { Feasible, Infeasible, NumericalFailure };
    Status status = Status::NumericalFailure;
    Eigen::MatrixXcd W;      ///< candidate matrix when Feasible
    double min_power = 0.0;  ///< optimal D_0 . W of the power-minimization SDP
    int ipm_iters = 0;
};

struct SdrDiagnostics {
    int bisection_steps = 0;
    double final_bracket = 0.0;
    int total_ipm_iters = 0;
    double final_rel_gap = 0.0;
    std::vector<ipm::Status> step_status;
};

struct SdrSolution {
    Eigen::MatrixXcd W_star;
    double gamma_star = 0.0; ///< min_sinr(W_star), recomputed exactly
    int rank = 0;            ///< numerical rank of W_star at rel_tol 1e-6
    double sdr_rate = 0.0;   ///< log(1 + gamma_star), nats
    SdrDiagnostics diagnostics;
};

struct SdrOptions {
    double tol_gamma = -1.0; ///< <=0 selects 1e-5 * (1 + gamma_upper_bound)
    int max_bisections = 200;
    bool secant_acceleration = true;
    ipm::Options ipm;
};

/// Certified upper bound on the achievable SINR:
/// min_i lambda_max(A_i) * b_0 / lambda_min(Q_0).  Throws
/// UnboundedInstanceError when the budget matrix is singular.
double sdr_gamma_upper_bound(const ProblemData& problem);

/// Solves the SINR-level-gamma power-minimization SDP (a max-margin
/// feasibility phase certifies attainability first).  Status is Feasible iff
/// the minimized budget power is within the configured budget.
FeasibilityResult solve_feasibility(const ProblemData& problem, double gamma,
                                    const SdrOptions& options = {});

/// Bisection on gamma solving a feasibility SDP per step; returns the last
/// feasible matrix with its exact worst-user SINR as gamma_star.
SdrSolution solve_sdr(const ProblemData& problem, double tol_gamma = -1.0);
SdrSolution solve_sdr(const ProblemData& problem, const SdrOptions& options);

} // namespace relaybf
