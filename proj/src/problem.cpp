// SPDX-License-Identifier: Apache-2.0

#include "relaybf/problem.hpp"

#include <json.hpp>

#include "relaybf/errors.hpp"

namespace relaybf {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// kron(u, v) for column vectors: entry [i*len(v)+j] = u[i] v[j].
VectorXcd kron_vec(const VectorXcd& u, const VectorXcd& v) {
    VectorXcd out(u.size() * v.size());
    for (Eigen::Index i = 0; i < u.size(); ++i)
        out.segment(i * v.size(), v.size()) = u[i] * v;
    return out;
}

Rank1Sum make_rank1_sum(int n, const std::vector<VectorXcd>& vecs,
                        const std::vector<double>& weights) {
    Rank1Sum s;
    s.vecs.resize(n, static_cast<Eigen::Index>(vecs.size()));
    s.weights.resize(static_cast<Eigen::Index>(weights.size()));
    for (std::size_t t = 0; t < vecs.size(); ++t) {
        s.vecs.col(static_cast<Eigen::Index>(t)) = vecs[t];
        s.weights[static_cast<Eigen::Index>(t)] = weights[t];
    }
    return s;
}

// Eigendecompose a Hermitian PSD matrix into a Rank1Sum, dropping
// eigenvalues below rel_tol * lambda_max.  Throws if Q is not PSD.
Rank1Sum factor_psd(const MatrixXcd& Q, const char* what, double rel_tol = 1e-12) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(0.5 * (Q + Q.adjoint()));
    const VectorXd lam = eig.eigenvalues();
    const double lmax = lam.size() ? lam.maxCoeff() : 0.0;
    const double floor = std::max(lmax, 0.0) * rel_tol;
    if (lam.size() && lam.minCoeff() < -std::max(floor, 1e-12 * Q.trace().real()))
        throw NotPsdError(std::string(what) + " is not positive semidefinite");
    std::vector<VectorXcd> vecs;
    std::vector<double> weights;
    for (Eigen::Index t = 0; t < lam.size(); ++t) {
        if (lam[t] > floor) {
            vecs.push_back(eig.eigenvectors().col(t));
            weights.push_back(lam[t]);
        }
    }
    return make_rank1_sum(static_cast<int>(Q.rows()), vecs, weights);
}

} // namespace

double herm_inner(const MatrixXcd& a, const MatrixXcd& b) {
    return a.cwiseProduct(b.conjugate()).sum().real();
}

ProblemData build_mimo_problem(
    const NetworkConfig& config, const ChannelRealization& channels,
    const std::vector<std::pair<MatrixXcd, double>>& extra_constraints,
    std::optional<int> active_per_antenna) {
    validate_config(config);
    if (config.topology != Topology::MIMO)
        throw TopologyMismatchError("build_mimo_problem requires MIMO topology");

    const int L = config.num_relay_antennas;
    const int G = config.num_groups;
    const int M = config.num_users();
    const int n = L * L;

    ProblemData p;
    p.topology = Topology::MIMO;
    p.n = n;
    p.L = L;
    p.G = G;
    p.M = M;
    p.group_sizes = config.group_sizes;
    p.group_of.resize(M);
    for (int k = 0, u = 0; k < G; ++k)
        for (int i = 0; i < config.group_sizes[k]; ++i) p.group_of[u++] = k;

    // Relay input covariance R = sum_j P_j f_j f_j^H + Sigma_L.
    MatrixXcd R = MatrixXcd::Zero(L, L);
    for (int j = 0; j < G; ++j)
        R += config.tx_powers[j] * channels.f[j] * channels.f[j].adjoint();
    for (int l = 0; l < L; ++l) R(l, l) += config.relay_noise_vars[l];
    p.relay_input_cov = R;

    p.signal_mats.resize(M);
    p.interference_mats.resize(M);
    p.signal_factors.resize(M);
    p.interference_factors.resize(M);
    for (int u = 0; u < M; ++u) {
        const int k = p.group_of[u];
        const double su2 = config.user_noise_vars[u];
        const VectorXcd& g = channels.g[u];

        const VectorXcd a = kron_vec(channels.f[k].conjugate(), g);
        p.signal_factors[u] =
            make_rank1_sum(n, {a}, {config.tx_powers[k] / su2});
        p.signal_mats[u] = p.signal_factors[u].dense();

        std::vector<VectorXcd> cvecs;
        std::vector<double> cweights;
        for (int m = 0; m < G; ++m) {
            if (m == k) continue;
            cvecs.push_back(kron_vec(channels.f[m].conjugate(), g));
            cweights.push_back(config.tx_powers[m] / su2);
        }
        // Noise forwarding Sigma_L (x) g g^H = sum_l sigma_l^2 (e_l (x) g)(.)^H.
        for (int l = 0; l < L; ++l) {
            VectorXcd el = VectorXcd::Zero(L);
            el[l] = 1.0;
            cvecs.push_back(kron_vec(el, g));
            cweights.push_back(config.relay_noise_vars[l] / su2);
        }
        p.interference_factors[u] = make_rank1_sum(n, cvecs, cweights);
        p.interference_mats[u] = p.interference_factors[u].dense();
    }

    // Rbar = R^T = conj(R); D_0 = Rbar (x) I_L, D_l = Rbar (x) e_l e_l^H.
    const MatrixXcd Rbar = R.conjugate();
    const Rank1Sum rbar_factor = factor_psd(Rbar, "relay input covariance");

    auto kron_with_antenna = [&](int l) {
        std::vector<VectorXcd> vecs;
        std::vector<double> weights;
        VectorXcd el = VectorXcd::Zero(L);
        el[l] = 1.0;
        for (Eigen::Index t = 0; t < rbar_factor.weights.size(); ++t) {
            vecs.push_back(kron_vec(rbar_factor.vecs.col(t), el));
            weights.push_back(rbar_factor.weights[t]);
        }
        return make_rank1_sum(n, vecs, weights);
    };

    PowerConstraint total;
    total.b = config.total_power_budget;
    total.Q = MatrixXcd::Zero(n, n);
    for (int c = 0; c < L; ++c)
        for (int r = 0; r < L; ++r)
            for (int l = 0; l < L; ++l)
                total.Q(c * L + l, r * L + l) = Rbar(c, r);
    total.has_factor = false; // full rank; the solver uses the dense form
    p.constraints.push_back(std::move(total));

    if (config.per_antenna_budgets) {
        const int count = active_per_antenna.value_or(L);
        if (count < 0 || count > L)
            throw IndexOutOfRangeError("active_per_antenna out of range");
        for (int l = 0; l < count; ++l) {
            PowerConstraint pc;
            pc.b = (*config.per_antenna_budgets)[l];
            pc.factor = kron_with_antenna(l);
            pc.has_factor = true;
            pc.Q = pc.factor.dense();
            p.constraints.push_back(std::move(pc));
        }
    }

    for (const auto& [Q, b] : extra_constraints) {
        if (Q.rows() != n || Q.cols() != n)
            throw DimensionMismatchError("extra constraint matrix must be n x n");
        PowerConstraint pc;
        pc.Q = Q;
        pc.b = b;
        pc.factor = factor_psd(Q, "extra constraint");
        pc.has_factor = pc.factor.vecs.cols() * 2 < n;
        p.constraints.push_back(std::move(pc));
    }
    return p;
}

ProblemData build_distributed_problem(
    const NetworkConfig& config, const ChannelRealization& channels,
    const std::vector<std::pair<MatrixXcd, double>>& extra_constraints) {
    validate_config(config);
    if (config.topology != Topology::Distributed)
        throw TopologyMismatchError(
            "build_distributed_problem requires Distributed topology");
    if (extra_constraints.empty())
        throw DimensionMismatchError(
            "distributed problem needs at least one power constraint");

    const int L = config.num_relay_antennas;
    const int G = config.num_groups;
    const int M = config.num_users();

    ProblemData p;
    p.topology = Topology::Distributed;
    p.n = L;
    p.L = L;
    p.G = G;
    p.M = M;
    p.group_sizes = config.group_sizes;
    p.group_of.resize(M);
    for (int k = 0, u = 0; k < G; ++k)
        for (int i = 0; i < config.group_sizes[k]; ++i) p.group_of[u++] = k;

    MatrixXcd R = MatrixXcd::Zero(L, L);
    for (int j = 0; j < G; ++j)
        R += config.tx_powers[j] * channels.f[j] * channels.f[j].adjoint();
    for (int l = 0; l < L; ++l) R(l, l) += config.relay_noise_vars[l];
    p.relay_input_cov = R;

    p.signal_mats.resize(M);
    p.interference_mats.resize(M);
    p.signal_factors.resize(M);
    p.interference_factors.resize(M);
    for (int u = 0; u < M; ++u) {
        const int k = p.group_of[u];
        const double su2 = config.user_noise_vars[u];
        const VectorXcd& g = channels.g[u];

        const VectorXcd a = channels.f[k].cwiseProduct(g.conjugate());
        p.signal_factors[u] = make_rank1_sum(L, {a}, {config.tx_powers[k] / su2});
        p.signal_mats[u] = p.signal_factors[u].dense();

        std::vector<VectorXcd> cvecs;
        std::vector<double> cweights;
        for (int m = 0; m < G; ++m) {
            if (m == k) continue;
            cvecs.push_back(channels.f[m].cwiseProduct(g.conjugate()));
            cweights.push_back(config.tx_powers[m] / su2);
        }
        // Noise forwarding Diag(|g_l|^2 sigma_l^2) expressed on the basis vectors.
        for (int l = 0; l < L; ++l) {
            VectorXcd el = VectorXcd::Zero(L);
            el[l] = 1.0;
            cvecs.push_back(el);
            cweights.push_back(std::norm(g[l]) * config.relay_noise_vars[l] / su2);
        }
        p.interference_factors[u] = make_rank1_sum(L, cvecs, cweights);
        p.interference_mats[u] = p.interference_factors[u].dense();
    }

    for (const auto& [Q, b] : extra_constraints) {
        if (Q.rows() != L || Q.cols() != L)
            throw DimensionMismatchError("constraint matrix must be L x L");
        PowerConstraint pc;
        pc.Q = Q;
        pc.b = b;
        try {
            pc.factor = factor_psd(Q, "constraint");
        } catch (const NotPsdError&) {
            throw NotPsdError("non-psd-constraint: distributed constraint matrix "
                              "must be Hermitian PSD");
        }
        pc.has_factor = pc.factor.vecs.cols() * 2 < L;
        p.constraints.push_back(std::move(pc));
    }
    return p;
}

namespace {

void check_dims(const MatrixXcd& W, const ProblemData& problem) {
    if (W.rows() != problem.n || W.cols() != problem.n)
        throw DimensionMismatchError("W must be n x n");
}

} // namespace

double sinr(const MatrixXcd& W, const ProblemData& problem, int k, int i) {
    check_dims(W, problem);
    if (k < 0 || k >= problem.G || i < 0 || i >= problem.group_sizes[k])
        throw IndexOutOfRangeError("user index (k,i) out of range");
    const int u = problem.user_index(k, i);
    const double num = herm_inner(problem.signal_mats[u], W);
    const double den = herm_inner(problem.interference_mats[u], W) + 1.0;
    return num / den;
}

double min_sinr(const MatrixXcd& W, const ProblemData& problem) {
    check_dims(W, problem);
    double best = std::numeric_limits<double>::infinity();
    for (int u = 0; u < problem.M; ++u) {
        const double num = herm_inner(problem.signal_mats[u], W);
        const double den = herm_inner(problem.interference_mats[u], W) + 1.0;
        best = std::min(best, num / den);
    }
    return best;
}

double power(const MatrixXcd& W, const ProblemData& problem, int s) {
    check_dims(W, problem);
    if (s < 0 || s >= static_cast<int>(problem.constraints.size()))
        throw IndexOutOfRangeError("constraint index out of range");
    return herm_inner(problem.constraints[s].Q, W);
}

double sinr_of_vector(const VectorXcd& w, const ProblemData& problem, int user) {
    if (w.size() != problem.n) throw DimensionMismatchError("w must have length n");
    if (user < 0 || user >= problem.M)
        throw IndexOutOfRangeError("user index out of range");
    const double num = problem.signal_factors[user].quad_form(w);
    const double den = problem.interference_factors[user].quad_form(w) + 1.0;
    return num / den;
}

double min_sinr_of_vector(const VectorXcd& w, const ProblemData& problem) {
    double best = std::numeric_limits<double>::infinity();
    for (int u = 0; u < problem.M; ++u)
        best = std::min(best, sinr_of_vector(w, problem, u));
    return best;
}

double power_of_vector(const VectorXcd& w, const ProblemData& problem, int s) {
    if (w.size() != problem.n) throw DimensionMismatchError("w must have length n");
    if (s < 0 || s >= static_cast<int>(problem.constraints.size()))
        throw IndexOutOfRangeError("constraint index out of range");
    const auto& c = problem.constraints[s];
    if (c.has_factor) return c.factor.quad_form(w);
    return (w.adjoint() * c.Q * w)(0).real();
}

namespace {

nlohmann::json matrix_to_json(const MatrixXcd& m) {
    std::vector<double> flat;
    flat.reserve(2 * m.size());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            flat.push_back(m(r, c).real());
            flat.push_back(m(r, c).imag());
        }
    }
    return nlohmann::json(flat);
}

} // namespace

std::string dump_problem_json(const ProblemData& problem) {
    nlohmann::json j;
    j["n"] = problem.n;
    j["num_users"] = problem.M;
    j["topology"] = problem.topology == Topology::MIMO ? "MIMO" : "Distributed";
    j["signal_mats"] = nlohmann::json::array();
    j["interference_mats"] = nlohmann::json::array();
    for (int u = 0; u < problem.M; ++u) {
        j["signal_mats"].push_back(matrix_to_json(problem.signal_mats[u]));
        j["interference_mats"].push_back(matrix_to_json(problem.interference_mats[u]));
    }
    j["constraint_mats"] = nlohmann::json::array();
    j["constraint_bounds"] = nlohmann::json::array();
    for (const auto& c : problem.constraints) {
        j["constraint_mats"].push_back(matrix_to_json(c.Q));
        j["constraint_bounds"].push_back(c.b);
    }
    return j.dump();
}

} // namespace relaybf
