// SPDX-License-Identifier: Apache-2.0

#include "relaybf/ipm.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace relaybf::ipm {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest a such that diag(lam) + a * D >= 0, computed from the smallest
// eigenvalue of the lam^{-1/2}-congruence of D.
double max_step_sdp(const VectorXd& lam, const MatrixXd& D) {
    const int n = static_cast<int>(lam.size());
    MatrixXd B(n, n);
    VectorXd isqrt = lam.cwiseSqrt().cwiseInverse();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) B(i, j) = D(i, j) * isqrt[i] * isqrt[j];
    VectorXd w(n);
    const int info =
        LAPACKE_dsyev(LAPACK_COL_MAJOR, 'N', 'L', n, B.data(), n, w.data());
    if (info != 0) return 0.0; // forces a restart-sized step; caller stalls out
    const double lmin = w[0];
    return lmin >= 0.0 ? kInf : -1.0 / lmin;
}

// In-place symmetrization through a temporary; the naive expression
// a = 0.5 * (a + a.transpose()) aliases its own storage.
void symmetrize(MatrixXd& a) { a = MatrixXd(0.5 * (a + a.transpose().eval())); }

double max_step_lp(const VectorXd& lam, const VectorXd& d) {
    double a = kInf;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (d[i] < 0.0) a = std::min(a, -lam[i] / d[i]);
    return a;
}

struct ScaledRow {
    MatrixXd tilde; // G^T A_i G
    VectorXd d;     // w .* d_i
};

} // namespace

Result solve(const Problem& prob, const Options& opt, const Start* start) {
    const int N = prob.sdp_dim;
    const int p = prob.lp_dim;
    const int m = static_cast<int>(prob.rows_sdp.size());

    // Row and objective equilibration; duals are mapped back on exit.
    VectorXd row_scale(m);
    for (int i = 0; i < m; ++i) {
        double s = prob.rows_sdp[i].dense.norm();
        if (p > 0) s = std::max(s, prob.rows_lp.row(i).cwiseAbs().maxCoeff());
        row_scale[i] = std::max(s, 1e-12);
    }
    const double obj_scale =
        std::max({1.0, prob.c_sdp.norm(), p > 0 ? prob.c_lp.cwiseAbs().maxCoeff() : 0.0});

    std::vector<ConstraintMatrix> A(m);
    MatrixXd Dlp = MatrixXd::Zero(m, std::max(p, 1));
    VectorXd b(m);
    for (int i = 0; i < m; ++i) {
        const double inv = 1.0 / row_scale[i];
        A[i].dense = prob.rows_sdp[i].dense * inv;
        A[i].has_factor = prob.rows_sdp[i].has_factor;
        if (A[i].has_factor) {
            A[i].factor_u = prob.rows_sdp[i].factor_u;
            A[i].factor_lam = prob.rows_sdp[i].factor_lam * inv;
        }
        if (p > 0) Dlp.row(i) = prob.rows_lp.row(i) * inv;
        b[i] = prob.b[i] * inv;
    }
    const MatrixXd C = prob.c_sdp / obj_scale;
    const VectorXd clp = p > 0 ? VectorXd(prob.c_lp / obj_scale) : VectorXd();

    // Starting point: identity-based unless the caller supplied one.
    const double bmax = m > 0 ? b.cwiseAbs().maxCoeff() : 0.0;
    const double rho_p = 10.0 * std::max(1.0, bmax);
    const double rho_d = 10.0 * std::max(1.0, C.norm());
    MatrixXd X = MatrixXd::Identity(N, N) * rho_p;
    VectorXd xlp = VectorXd::Constant(std::max(p, 1), rho_p);
    MatrixXd Z = MatrixXd::Identity(N, N) * rho_d;
    VectorXd zlp = VectorXd::Constant(std::max(p, 1), rho_d);
    VectorXd y = VectorXd::Zero(m);
    if (start) {
        if (start->X) X = *start->X;
        if (start->x_lp && p > 0) xlp = *start->x_lp;
        if (start->Z) Z = *start->Z / obj_scale;
        if (start->z_lp && p > 0) zlp = *start->z_lp / obj_scale;
        if (start->y) y = start->y->cwiseProduct(row_scale) / obj_scale;
    }

    Result res;
    Result best;
    double best_merit = kInf;

    const double bnorm = 1.0 + b.norm();
    const double cnorm = 1.0 + std::sqrt(C.squaredNorm() + (p > 0 ? clp.squaredNorm() : 0.0));

    auto record = [&](Status st, double pobj, double dobj, double relgap,
                      double pinf, double dinf, int it) {
        res.status = st;
        res.X = X;
        res.x_lp = p > 0 ? xlp : VectorXd();
        res.Z = Z * obj_scale;
        res.z_lp = p > 0 ? VectorXd(zlp * obj_scale) : VectorXd();
        res.y = (y * obj_scale).cwiseQuotient(row_scale);
        res.primal_obj = pobj * obj_scale;
        res.dual_obj = dobj * obj_scale;
        res.rel_gap = relgap;
        res.primal_infeas = pinf;
        res.dual_infeas = dinf;
        res.iterations = it;
    };

    int tiny_steps = 0;
    std::vector<ScaledRow> srows(m);
    MatrixXd G(N, N), Rd(N, N), Rd_t(N, N), dZt(N, N), dXt(N, N), H(N, N);
    MatrixXd schur(m, m);

    for (int iter = 0; iter <= opt.max_iters; ++iter) {
        // Residuals and convergence bookkeeping.
        VectorXd ax(m);
        for (int i = 0; i < m; ++i) {
            double v = A[i].dense.cwiseProduct(X).sum();
            if (p > 0) v += Dlp.row(i).dot(xlp);
            ax[i] = v;
        }
        const VectorXd rp = b - ax;
        Rd = C - Z;
        for (int i = 0; i < m; ++i) Rd.noalias() -= y[i] * A[i].dense;
        VectorXd rdlp;
        if (p > 0) rdlp = clp - zlp - Dlp.transpose() * y;

        const double compl_gap = X.cwiseProduct(Z).sum() + (p > 0 ? xlp.dot(zlp) : 0.0);
        const double mu = compl_gap / (N + p);
        const double pobj = C.cwiseProduct(X).sum() + (p > 0 ? clp.dot(xlp) : 0.0);
        const double dobj = b.dot(y);
        const double relgap = compl_gap / (1.0 + std::max(std::abs(pobj), std::abs(dobj)));
        const double pinf = rp.norm() / bnorm;
        const double dinf =
            std::sqrt(Rd.squaredNorm() + (p > 0 ? rdlp.squaredNorm() : 0.0)) / cnorm;

        const double merit = std::max({relgap, pinf, dinf});
        if (merit < best_merit) {
            best_merit = merit;
            record(Status::Stalled, pobj, dobj, relgap, pinf, dinf, iter);
            best = res;
        }
        if (relgap <= opt.tol_gap && pinf <= opt.tol_feas && dinf <= opt.tol_feas) {
            record(Status::Optimal, pobj, dobj, relgap, pinf, dinf, iter);
            return res;
        }
        if (iter == opt.max_iters) {
            best.status = Status::MaxIters;
            return best;
        }
        if (tiny_steps >= 3) {
            best.status = Status::Stalled;
            return best;
        }

        // Nesterov-Todd scaling: G with G^{-1} X G^{-T} = G^T Z G = diag(lam).
        Eigen::LLT<MatrixXd> lltX(X);
        Eigen::LLT<MatrixXd> lltZ(Z);
        if (lltX.info() != Eigen::Success || lltZ.info() != Eigen::Success) {
            best.status = Status::Stalled;
            return best;
        }
        const MatrixXd Lx = lltX.matrixL();
        const MatrixXd Lz = lltZ.matrixL();
        MatrixXd Msvd(N, N), Usv(N, N), Vt(N, N);
        Msvd.noalias() = Lz.transpose() * Lx;
        VectorXd lam(N);
        const int svd_info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'A', N, N,
                                            Msvd.data(), N, lam.data(),
                                            Usv.data(), N, Vt.data(), N);
        if (svd_info != 0 || lam.minCoeff() <= 0.0) {
            best.status = Status::Stalled;
            return best;
        }
        const MatrixXd Vmat = Vt.transpose();
        const VectorXd lam_isqrt = lam.cwiseSqrt().cwiseInverse();
        G.noalias() = Lx * Vmat;
        G = G * lam_isqrt.asDiagonal();
        // G^{-1} = diag(sqrt(lam)) V^T Lx^{-1}; applied via triangular solves.
        auto apply_ginv_congruence = [&](const MatrixXd& S) {
            // returns G^{-T} S G^{-1}
            MatrixXd T = Vmat * (lam.cwiseSqrt().asDiagonal() * S *
                                 lam.cwiseSqrt().asDiagonal()) *
                         Vmat.transpose();
            MatrixXd W1 = Lx.transpose().triangularView<Eigen::Upper>().solve(T);
            MatrixXd W2 = Lx.transpose().triangularView<Eigen::Upper>().solve(W1.transpose());
            return MatrixXd(0.5 * (W2 + W2.transpose()));
        };

        VectorXd wlp, lamlp;
        if (p > 0) {
            wlp = (xlp.cwiseQuotient(zlp)).cwiseSqrt();
            lamlp = (xlp.cwiseProduct(zlp)).cwiseSqrt();
        }

        // Scaled rows and Schur complement M_ij = <A~_i, A~_j> + d~_i . d~_j.
        for (int i = 0; i < m; ++i) {
            if (A[i].has_factor) {
                const MatrixXd Y = G.transpose() * A[i].factor_u;
                srows[i].tilde.noalias() =
                    (Y * A[i].factor_lam.asDiagonal()) * Y.transpose();
            } else {
                srows[i].tilde.noalias() = G.transpose() * (A[i].dense * G);
                symmetrize(srows[i].tilde);
            }
            if (p > 0) srows[i].d = wlp.cwiseProduct(Dlp.row(i).transpose());
        }
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j <= i; ++j) {
                double v = srows[i].tilde.cwiseProduct(srows[j].tilde).sum();
                if (p > 0) v += srows[i].d.dot(srows[j].d);
                schur(i, j) = v;
                schur(j, i) = v;
            }
        }
        Eigen::LDLT<MatrixXd> schur_fact(schur);
        if (schur_fact.info() != Eigen::Success ||
            !schur_fact.isPositive()) {
            schur.diagonal().array() += 1e-12 * schur.diagonal().maxCoeff() + 1e-300;
            schur_fact.compute(schur);
            if (schur_fact.info() != Eigen::Success) {
                best.status = Status::Stalled;
                return best;
            }
        }

        Rd_t.noalias() = G.transpose() * (Rd * G);
        symmetrize(Rd_t);
        VectorXd rdlp_t;
        if (p > 0) rdlp_t = wlp.cwiseProduct(rdlp);

        // Newton solve for a given scaled complementarity right-hand side.
        auto solve_direction = [&](const MatrixXd& Hs, const VectorXd& hlp,
                                   VectorXd& dy, MatrixXd& dZt_out, VectorXd& dzlp_t,
                                   MatrixXd& dXt_out, VectorXd& dxlp_t) {
            VectorXd rhs(m);
            for (int i = 0; i < m; ++i) {
                double v = rp[i] - srows[i].tilde.cwiseProduct(Hs).sum() +
                           srows[i].tilde.cwiseProduct(Rd_t).sum();
                if (p > 0) v += -srows[i].d.dot(hlp) + srows[i].d.dot(rdlp_t);
                rhs[i] = v;
            }
            dy = schur_fact.solve(rhs);
            dZt_out = Rd_t;
            for (int i = 0; i < m; ++i) dZt_out.noalias() -= dy[i] * srows[i].tilde;
            dXt_out = Hs - dZt_out;
            if (p > 0) {
                dzlp_t = rdlp_t;
                for (int i = 0; i < m; ++i) dzlp_t -= dy[i] * srows[i].d;
                dxlp_t = hlp - dzlp_t;
            }
        };

        // Predictor (affine scaling) direction.
        MatrixXd Haff = MatrixXd::Zero(N, N);
        Haff.diagonal() = -lam;
        VectorXd haff_lp;
        if (p > 0) haff_lp = -lamlp;
        VectorXd dy_aff, dzlp_aff, dxlp_aff;
        MatrixXd dZt_aff, dXt_aff;
        solve_direction(Haff, haff_lp, dy_aff, dZt_aff, dzlp_aff, dXt_aff, dxlp_aff);

        double ap = max_step_sdp(lam, dXt_aff);
        double ad = max_step_sdp(lam, dZt_aff);
        if (p > 0) {
            ap = std::min(ap, max_step_lp(lamlp, dxlp_aff));
            ad = std::min(ad, max_step_lp(lamlp, dzlp_aff));
        }
        const double ap_aff = std::min(1.0, ap);
        const double ad_aff = std::min(1.0, ad);

        double gap_aff = 0.0;
        {
            MatrixXd Xa = MatrixXd(lam.asDiagonal()) + ap_aff * dXt_aff;
            MatrixXd Za = MatrixXd(lam.asDiagonal()) + ad_aff * dZt_aff;
            gap_aff = Xa.cwiseProduct(Za).sum();
            if (p > 0)
                gap_aff += (lamlp + ap_aff * dxlp_aff).dot(lamlp + ad_aff * dzlp_aff);
        }
        const double mu_aff = gap_aff / (N + p);
        double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3);
        sigma = std::clamp(sigma, 1e-8, 1.0);

        // Corrector with Mehrotra second-order term, combined direction.
        {
            MatrixXd so = dXt_aff * dZt_aff;
            symmetrize(so);
            for (Eigen::Index jj = 0; jj < N; ++jj) {
                for (Eigen::Index ii = 0; ii < N; ++ii) {
                    double val = -so(ii, jj);
                    if (ii == jj) val += sigma * mu - lam[ii] * lam[ii];
                    H(ii, jj) = 2.0 * val / (lam[ii] + lam[jj]);
                }
            }
        }
        VectorXd hlp;
        if (p > 0) {
            hlp.resize(p);
            for (int j = 0; j < p; ++j)
                hlp[j] = (sigma * mu - lamlp[j] * lamlp[j] - dxlp_aff[j] * dzlp_aff[j]) /
                         lamlp[j];
        }
        VectorXd dy, dzlp_t, dxlp_t;
        solve_direction(H, hlp, dy, dZt, dzlp_t, dXt, dxlp_t);

        double sp = max_step_sdp(lam, dXt);
        double sd = max_step_sdp(lam, dZt);
        if (p > 0) {
            sp = std::min(sp, max_step_lp(lamlp, dxlp_t));
            sd = std::min(sd, max_step_lp(lamlp, dzlp_t));
        }
        const double alpha = std::min(1.0, opt.step_fraction * sp);
        const double beta = std::min(1.0, opt.step_fraction * sd);

        // Unscale and update.
        MatrixXd dX = G * dXt * G.transpose();
        MatrixXd dZ = apply_ginv_congruence(dZt);
        X.noalias() += alpha * dX;
        Z.noalias() += beta * dZ;
        symmetrize(X);
        symmetrize(Z);
        y += beta * dy;
        if (p > 0) {
            xlp += alpha * wlp.cwiseProduct(dxlp_t);
            zlp += beta * dzlp_t.cwiseQuotient(wlp);
        }

        tiny_steps = (alpha < 1e-4 && beta < 1e-4) ? tiny_steps + 1 : 0;
    }

    best.status = Status::MaxIters;
    return best;
}

} // namespace relaybf::ipm
