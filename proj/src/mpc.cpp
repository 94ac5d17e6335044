#include "empc/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "empc/errors.hpp"
#include "empc/lp.hpp"

namespace empc {

namespace {

void require_symmetric_weight(const Eigen::MatrixXd& M, const char* name, bool strict) {
    if (M.rows() != M.cols() || M.rows() == 0) {
        throw InvalidParameter(std::string(name) + " must be a non-empty square matrix");
    }
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
        throw InvalidParameter(std::string(name) + " must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (strict) {
        if (!(min_eig > 1e-12)) {
            throw InvalidParameter(std::string(name) + " must be positive definite");
        }
    } else if (min_eig < -1e-9) {
        throw InvalidParameter(std::string(name) + " must be positive semidefinite");
    }
}

}  // namespace

MpQp condense(const AugmentedModel& aug, const MpcSpec& spec) {
    const int ne = aug.size();
    const int l = static_cast<int>(aug.Be.cols());
    const int m = static_cast<int>(aug.Ce.rows());
    if (spec.N < 1) {
        throw InvalidParameter("horizon N must be >= 1");
    }
    require_symmetric_weight(spec.Q, "Q", /*strict=*/false);
    require_symmetric_weight(spec.R, "R", /*strict=*/true);
    if (spec.Q.rows() != m) {
        throw InvalidParameter("Q must match the output dimension");
    }
    if (spec.R.rows() != l) {
        throw InvalidParameter("R must match the input dimension");
    }
    if (!(spec.u_min < spec.u_max)) {
        throw InvalidParameter("input bounds must satisfy u_min < u_max");
    }

    const int N = spec.N;
    const int nu = l * N;
    const int ny = m * N;

    // Free response Gamma and forced response Theta of the stacked outputs
    // y_0..y_{N-1}; y_k = Ce Ae^k x0 + sum_j Ce Ae^(k-1-j) Be u_j + De u_k.
    Eigen::MatrixXd gamma(ny, ne);
    {
        Eigen::MatrixXd block = aug.Ce;
        for (int k = 0; k < N; ++k) {
            gamma.middleRows(k * m, m) = block;
            block = block * aug.Ae;
        }
    }
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(ny, nu);
    {
        // impulse[d] = Ce Ae^(d-1) Be for d >= 1; impulse[0] = De.
        std::vector<Eigen::MatrixXd> impulse(static_cast<std::size_t>(N));
        impulse[0] = aug.De;
        Eigen::MatrixXd power = aug.Be;
        for (int d = 1; d < N; ++d) {
            impulse[static_cast<std::size_t>(d)] = aug.Ce * power;
            power = aug.Ae * power;
        }
        for (int k = 0; k < N; ++k) {
            for (int j = 0; j <= k; ++j) {
                theta.block(k * m, j * l, m, l) = impulse[static_cast<std::size_t>(k - j)];
            }
        }
    }

    // Difference operator: dU = S U - E u_prev.
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(nu, nu);
    for (int k = 1; k < N; ++k) {
        S.block(k * l, (k - 1) * l, l, l) = -Eigen::MatrixXd::Identity(l, l);
    }
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(nu, l);
    E.topRows(l) = Eigen::MatrixXd::Identity(l, l);

    Eigen::MatrixXd Qbar = Eigen::MatrixXd::Zero(ny, ny);
    Eigen::MatrixXd Rbar = Eigen::MatrixXd::Zero(nu, nu);
    for (int k = 0; k < N; ++k) {
        Qbar.block(k * m, k * m, m, m) = spec.Q;
        Rbar.block(k * l, k * l, l, l) = spec.R;
    }
    Eigen::MatrixXd Tref(ny, m);
    for (int k = 0; k < N; ++k) {
        Tref.middleRows(k * m, m) = Eigen::MatrixXd::Identity(m, m);
    }

    MpQp qp;
    qp.layout.n_plant = aug.n;
    qp.layout.n_dist = aug.p;
    qp.layout.n_input = l;
    qp.layout.n_ref = m;
    qp.horizon = N;
    qp.l = l;
    qp.u_min = spec.u_min;
    qp.u_max = spec.u_max;

    qp.H = theta.transpose() * Qbar * theta + S.transpose() * Rbar * S;
    qp.H = 0.5 * (qp.H + qp.H.transpose());

    const int dim = qp.layout.dim();
    qp.F = Eigen::MatrixXd::Zero(dim, nu);
    qp.F.topRows(ne) = 2.0 * gamma.transpose() * Qbar * theta;
    qp.F.middleRows(ne, l) = -2.0 * E.transpose() * Rbar * S;
    qp.F.bottomRows(m) = -2.0 * Tref.transpose() * Qbar * theta;

    qp.Y = Eigen::MatrixXd::Zero(dim, dim);
    qp.Y.topLeftCorner(ne, ne) = gamma.transpose() * Qbar * gamma;
    qp.Y.block(0, dim - m, ne, m) = -gamma.transpose() * Qbar * Tref;
    qp.Y.block(dim - m, 0, m, ne) = qp.Y.block(0, dim - m, ne, m).transpose();
    qp.Y.block(ne, ne, l, l) = E.transpose() * Rbar * E;
    qp.Y.bottomRightCorner(m, m) = static_cast<double>(N) * spec.Q;

    qp.G = Eigen::MatrixXd::Zero(2 * nu, nu);
    qp.G.topRows(nu) = Eigen::MatrixXd::Identity(nu, nu);
    qp.G.bottomRows(nu) = -Eigen::MatrixXd::Identity(nu, nu);
    qp.w = Eigen::MatrixXd::Zero(2 * nu, 1);
    qp.w.topRows(nu).setConstant(spec.u_max);
    qp.w.bottomRows(nu).setConstant(-spec.u_min);
    qp.W = Eigen::MatrixXd::Zero(2 * nu, dim);
    return qp;
}

double qp_objective(const MpQp& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& U) {
    return U.dot(qp.H * U) + x.dot(qp.F * U);
}

namespace {

bool is_box_constraints(const MpQp& qp) {
    const Eigen::Index nu = qp.H.rows();
    if (qp.G.rows() != 2 * nu || qp.W.cwiseAbs().maxCoeff() != 0.0) return false;
    return qp.G.topRows(nu).isIdentity(0.0) && (-qp.G.bottomRows(nu)).isIdentity(0.0);
}

Eigen::VectorXd feasible_start(const MpQp& qp, const Eigen::VectorXd& rhs,
                               const Eigen::VectorXd& u_free) {
    const Eigen::Index nu = qp.H.rows();
    if (qp.G.rows() == 0) return u_free;
    if (is_box_constraints(qp)) {
        Eigen::VectorXd u = u_free;
        for (Eigen::Index k = 0; k < nu; ++k) {
            u(k) = std::clamp(u(k), -rhs(nu + k), rhs(k));
        }
        return u;
    }
    const LpSolution lp = solve_lp(Eigen::VectorXd::Zero(nu), qp.G, rhs);
    if (lp.status != LpStatus::Optimal) {
        throw DesignError("solve_qp_online: constraint set is infeasible at this parameter");
    }
    return lp.x;
}

}  // namespace

QpResult solve_qp_online(const MpQp& qp, const Eigen::VectorXd& x) {
    const Eigen::Index nu = qp.H.rows();
    const Eigen::Index q = qp.G.rows();
    if (x.size() != qp.layout.dim() || qp.F.cols() != nu || (q > 0 && qp.G.cols() != nu)) {
        throw DimensionError("solve_qp_online: parameter/problem dimensions do not match");
    }

    Eigen::LDLT<Eigen::MatrixXd> hfact(qp.H);
    if (hfact.info() != Eigen::Success || !hfact.isPositive()) {
        throw InvalidParameter("solve_qp_online: H must be positive definite");
    }

    const Eigen::VectorXd u_free = -0.5 * hfact.solve(qp.F.transpose() * x);
    QpResult result;
    if (q == 0) {
        result.U = u_free;
        return result;
    }

    const Eigen::VectorXd rhs = qp.w + qp.W * x;
    Eigen::VectorXd u = feasible_start(qp, rhs, u_free);

    std::vector<int> active;
    const int max_iter = 50 + static_cast<int>(10 * q);
    for (int iter = 0; iter < max_iter; ++iter) {
        // Equality-constrained subproblem over the current working set, via
        // the Schur complement on H^{-1}.
        Eigen::VectorXd u_eq = u_free;
        Eigen::VectorXd lambda;
        if (!active.empty()) {
            const Eigen::Index na = static_cast<Eigen::Index>(active.size());
            Eigen::MatrixXd Ga(na, nu);
            Eigen::VectorXd ba(na);
            for (Eigen::Index a = 0; a < na; ++a) {
                Ga.row(a) = qp.G.row(active[static_cast<std::size_t>(a)]);
                ba(a) = rhs(active[static_cast<std::size_t>(a)]);
            }
            const Eigen::MatrixXd HiGt = hfact.solve(Ga.transpose());
            const Eigen::MatrixXd Sa = Ga * HiGt;
            const Eigen::VectorXd res = Ga * u_free - ba;
            lambda = Eigen::LDLT<Eigen::MatrixXd>(Sa).solve(2.0 * res);
            if ((Sa * lambda - 2.0 * res).norm() > 1e-6 * std::max(1.0, res.norm())) {
                throw DesignError("solve_qp_online: degenerate working set");
            }
            u_eq = u_free - 0.5 * HiGt * lambda;
        }

        const Eigen::VectorXd p = u_eq - u;
        if (p.lpNorm<Eigen::Infinity>() <= 1e-11) {
            // Converged on this working set; check multipliers for optimality.
            int worst = -1;
            double worst_lambda = -1e-9;
            for (std::size_t a = 0; a < active.size(); ++a) {
                if (lambda(static_cast<Eigen::Index>(a)) < worst_lambda) {
                    worst_lambda = lambda(static_cast<Eigen::Index>(a));
                    worst = static_cast<int>(a);
                }
            }
            if (worst < 0) {
                result.U = u_eq;
                result.active_set = active;
                result.iterations = iter;
                return result;
            }
            active.erase(active.begin() + worst);
            continue;
        }

        // Step toward the subproblem optimum; stop at the first blocking row.
        double alpha = 1.0;
        int blocking = -1;
        for (Eigen::Index i = 0; i < q; ++i) {
            if (std::find(active.begin(), active.end(), static_cast<int>(i)) != active.end()) {
                continue;
            }
            const double gp = qp.G.row(i).dot(p);
            if (gp <= 1e-12) continue;
            const double slack = std::max(0.0, rhs(i) - qp.G.row(i).dot(u));
            const double ratio = slack / gp;
            if (ratio < alpha - 1e-12) {
                alpha = ratio;
                blocking = static_cast<int>(i);
            }
        }
        u += alpha * p;
        if (blocking >= 0) {
            active.insert(std::upper_bound(active.begin(), active.end(), blocking), blocking);
        }
    }
    throw DesignError("solve_qp_online: active-set iteration limit reached");
}

}  // namespace empc
