#pragma once

// Reference implementations used only by the tests.  Each one deliberately
// takes a different algorithmic route than the library code it checks, so
// agreement between the two is evidence and not tautology.

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "empc/augment.hpp"
#include "empc/mpc.hpp"

namespace oracle {

/// Deterministic uniform double in [lo, hi] from the raw mt19937 stream.
inline double uniform(std::mt19937& rng, double lo, double hi) {
    const double u01 = static_cast<double>(rng()) * (1.0 / 4294967296.0);
    return lo + (hi - lo) * u01;
}

/// Matrix exponential by scaled-and-squared Taylor series (the library uses
/// Pade approximation instead).
inline Eigen::MatrixXd expm_series(const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    int scaling = 0;
    double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm > 0.5) {
        norm *= 0.5;
        ++scaling;
    }
    const Eigen::MatrixXd B = A / std::pow(2.0, scaling);

    Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= 60; ++k) {
        term = (term * B) / static_cast<double>(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18 * sum.cwiseAbs().maxCoeff()) break;
    }
    for (int s = 0; s < scaling; ++s) sum = sum * sum;
    return sum;
}

/// Tracking cost of an input sequence by explicit stage-by-stage rollout:
/// sum over the horizon of (y_k - r)'Q(y_k - r) + du_k'R du_k.
inline double rollout_cost(const empc::AugmentedModel& aug, const empc::MpcSpec& spec,
                           const Eigen::VectorXd& xe0, const Eigen::VectorXd& u_prev,
                           const Eigen::VectorXd& r, const Eigen::VectorXd& U) {
    const int l = static_cast<int>(aug.Be.cols());
    Eigen::VectorXd x = xe0;
    Eigen::VectorXd last_u = u_prev;
    double cost = 0.0;
    for (int k = 0; k < spec.N; ++k) {
        const Eigen::VectorXd u = U.segment(k * l, l);
        const Eigen::VectorXd y = aug.Ce * x + aug.De * u;
        const Eigen::VectorXd e = y - r;
        const Eigen::VectorXd du = u - last_u;
        cost += e.dot(spec.Q * e) + du.dot(spec.R * du);
        x = aug.Ae * x + aug.Be * u;
        last_u = u;
    }
    return cost;
}

/// QP solve by brute-force KKT enumeration over every active-set candidate,
/// solving the full bordered KKT system by LU (the library iterates with a
/// Schur complement instead).  Returns the feasible KKT point with the
/// lowest objective.
inline Eigen::VectorXd qp_enumerate(const empc::MpQp& qp, const Eigen::VectorXd& x) {
    const Eigen::Index nu = qp.H.rows();
    const Eigen::Index q = qp.G.rows();
    const Eigen::VectorXd rhs = qp.w + qp.W * x;
    const Eigen::VectorXd f = qp.F.transpose() * x;

    bool found = false;
    double best_cost = 0.0;
    Eigen::VectorXd best;

    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << q); ++mask) {
        std::vector<Eigen::Index> active;
        for (Eigen::Index i = 0; i < q; ++i) {
            if (mask & (std::uint64_t{1} << i)) active.push_back(i);
        }
        const Eigen::Index na = static_cast<Eigen::Index>(active.size());
        if (na > nu) continue;

        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nu + na, nu + na);
        kkt.topLeftCorner(nu, nu) = 2.0 * qp.H;
        Eigen::VectorXd b(nu + na);
        b.head(nu) = -f;
        for (Eigen::Index a = 0; a < na; ++a) {
            kkt.block(a + nu, 0, 1, nu) = qp.G.row(active[static_cast<std::size_t>(a)]);
            kkt.block(0, a + nu, nu, 1) =
                qp.G.row(active[static_cast<std::size_t>(a)]).transpose();
            b(nu + a) = rhs(active[static_cast<std::size_t>(a)]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        if (!lu.isInvertible()) continue;
        const Eigen::VectorXd sol = lu.solve(b);
        const Eigen::VectorXd U = sol.head(nu);
        const Eigen::VectorXd lambda = sol.tail(na);

        if (lambda.size() > 0 && lambda.minCoeff() < -1e-9) continue;
        if (q > 0 && (qp.G * U - rhs).maxCoeff() > 1e-9) continue;

        const double cost = U.dot(qp.H * U) + x.dot(qp.F * U);
        if (!found || cost < best_cost - 1e-12) {
            found = true;
            best_cost = cost;
            best = U;
        }
    }
    if (!found) throw std::runtime_error("qp_enumerate: no KKT point found");
    return best;
}

/// min c'x over a bounded 2-D polyhedron by enumerating vertex candidates
/// from every row pair.
inline double polygon_min(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                          const Eigen::VectorXd& b) {
    if (A.cols() != 2) throw std::runtime_error("polygon_min: 2-D only");
    bool found = false;
    double best = 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < A.rows(); ++j) {
            const double det = A(i, 0) * A(j, 1) - A(i, 1) * A(j, 0);
            if (std::abs(det) < 1e-12) continue;
            Eigen::Vector2d v;
            v(0) = (b(i) * A(j, 1) - A(i, 1) * b(j)) / det;
            v(1) = (A(i, 0) * b(j) - b(i) * A(j, 0)) / det;
            if (((A * v - b).array() > 1e-9).any()) continue;
            const double value = c.dot(v);
            if (!found || value < best) {
                found = true;
                best = value;
            }
        }
    }
    if (!found) throw std::runtime_error("polygon_min: no feasible vertex");
    return best;
}

/// Characteristic polynomial coefficients (ascending powers, monic) via the
/// Faddeev-LeVerrier recursion.
inline Eigen::VectorXd char_poly(const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    Eigen::VectorXd coeffs(n + 1);
    coeffs(n) = 1.0;
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        const Eigen::MatrixXd AM = A * M;
        const double c = -AM.trace() / static_cast<double>(k);
        coeffs(n - k) = c;
        M = AM + c * Eigen::MatrixXd::Identity(n, n);
    }
    return coeffs;
}

/// Numerical rank by Gaussian elimination with partial pivoting (the library
/// uses an SVD).
inline int gauss_rank(Eigen::MatrixXd A, double tol = 1e-9) {
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    int rank = 0;
    Eigen::Index row = 0;
    for (Eigen::Index col = 0; col < A.cols() && row < A.rows(); ++col) {
        Eigen::Index pivot = row;
        for (Eigen::Index i = row + 1; i < A.rows(); ++i) {
            if (std::abs(A(i, col)) > std::abs(A(pivot, col))) pivot = i;
        }
        if (std::abs(A(pivot, col)) <= tol * scale) continue;
        A.row(pivot).swap(A.row(row));
        for (Eigen::Index i = row + 1; i < A.rows(); ++i) {
            A.row(i) -= (A(i, col) / A(row, col)) * A.row(row);
        }
        ++row;
        ++rank;
    }
    return rank;
}

}  // namespace oracle
