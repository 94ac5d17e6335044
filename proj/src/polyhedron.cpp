#include "empc/polyhedron.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "empc/errors.hpp"
#include "empc/lp.hpp"

namespace empc {

namespace {

constexpr double kZeroRowTol = 1e-12;
constexpr double kFeasTol = 1e-9;

}  // namespace

bool contains(const Polyhedron& poly, const Eigen::VectorXd& x, double tol) {
    return max_violation(poly, x) <= tol;
}

double max_violation(const Polyhedron& poly, const Eigen::VectorXd& x) {
    if (x.size() != poly.dim()) {
        throw DimensionError("max_violation: point dimension does not match the polyhedron");
    }
    if (poly.rows() == 0) return -std::numeric_limits<double>::infinity();
    return (poly.Z * x - poly.z).maxCoeff();
}

Polyhedron normalized_rows(const Polyhedron& poly, double tol) {
    Polyhedron out = poly;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double norm = out.Z.row(i).norm();
        if (norm > tol) {
            out.Z.row(i) /= norm;
            out.z(i) /= norm;
        }
    }
    return out;
}

ChebyshevResult chebyshev(const Polyhedron& poly) {
    const Eigen::Index d = poly.dim();
    ChebyshevResult result;
    result.center = Eigen::VectorXd::Zero(d);

    std::vector<Eigen::Index> effective;
    for (Eigen::Index i = 0; i < poly.rows(); ++i) {
        if (poly.Z.row(i).norm() <= kZeroRowTol) {
            if (poly.z(i) < -kFeasTol) {
                // 0'x <= negative: provably empty without an LP.
                result.radius = -std::numeric_limits<double>::infinity();
                return result;
            }
            continue;  // 0'x <= nonnegative holds everywhere
        }
        effective.push_back(i);
    }

    if (effective.empty()) {
        result.radius = std::numeric_limits<double>::infinity();
        return result;
    }

    // max r  s.t.  Z_i x + ||Z_i|| r <= z_i, posed as min -r over (x, r).
    const Eigen::Index h = static_cast<Eigen::Index>(effective.size());
    Eigen::MatrixXd A(h, d + 1);
    Eigen::VectorXd b(h);
    for (Eigen::Index k = 0; k < h; ++k) {
        const Eigen::Index i = effective[static_cast<std::size_t>(k)];
        A.block(k, 0, 1, d) = poly.Z.row(i);
        A(k, d) = poly.Z.row(i).norm();
        b(k) = poly.z(i);
    }
    Eigen::VectorXd c = Eigen::VectorXd::Zero(d + 1);
    c(d) = -1.0;

    const LpSolution lp = solve_lp(c, A, b);
    if (lp.status == LpStatus::Unbounded) {
        result.radius = std::numeric_limits<double>::infinity();
        return result;
    }
    if (lp.status == LpStatus::Infeasible) {
        // Cannot happen analytically (r free); treat as empty defensively.
        result.radius = -1.0;
        return result;
    }
    result.center = lp.x.head(d);
    result.radius = lp.x(d);
    return result;
}

ChebyshevResult chebyshev_interior(const Polyhedron& poly, double cap) {
    ChebyshevResult result = chebyshev(poly);
    if (std::isfinite(result.radius)) return result;

    const Eigen::Index d = poly.dim();
    Polyhedron capped;
    capped.Z.resize(poly.rows() + 2 * d, d);
    capped.z.resize(poly.rows() + 2 * d);
    capped.Z.topRows(poly.rows()) = poly.Z;
    capped.z.head(poly.rows()) = poly.z;
    capped.Z.middleRows(poly.rows(), d) = Eigen::MatrixXd::Identity(d, d);
    capped.Z.bottomRows(d) = -Eigen::MatrixXd::Identity(d, d);
    capped.z.tail(2 * d).setConstant(cap);

    const ChebyshevResult inner = chebyshev(capped);
    result.center = inner.center;
    return result;
}

Polyhedron remove_redundant(const Polyhedron& poly) {
    const Eigen::Index d = poly.dim();
    const Polyhedron norm = normalized_rows(poly);

    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < norm.rows(); ++i) {
        if (norm.Z.row(i).norm() <= kZeroRowTol) {
            if (norm.z(i) < -kFeasTol) {
                throw Error("remove_redundant: polyhedron is empty (contradictory zero row)");
            }
            continue;  // vacuous row
        }
        rows.push_back(i);
    }

    Polyhedron work;
    work.Z.resize(static_cast<Eigen::Index>(rows.size()), d);
    work.z.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        work.Z.row(static_cast<Eigen::Index>(k)) = norm.Z.row(rows[k]);
        work.z(static_cast<Eigen::Index>(k)) = norm.z(rows[k]);
    }

    if (chebyshev(work).radius < 0.0) {
        throw Error("remove_redundant: polyhedron is empty");
    }

    const Eigen::Index h = work.rows();
    std::vector<bool> kept(static_cast<std::size_t>(h), true);
    Eigen::Index kept_count = h;

    for (Eigen::Index i = 0; i < h && kept_count > 1; ++i) {
        // Row i is redundant iff max Z_i x over the remaining rows stays
        // below z_i.  The extra capped copy of row i keeps the LP bounded.
        Eigen::MatrixXd A(kept_count, d);
        Eigen::VectorXd b(kept_count);
        Eigen::Index at = 0;
        for (Eigen::Index j = 0; j < h; ++j) {
            if (j == i || !kept[static_cast<std::size_t>(j)]) continue;
            A.row(at) = work.Z.row(j);
            b(at) = work.z(j);
            ++at;
        }
        A.row(at) = work.Z.row(i);
        b(at) = work.z(i) + 1.0;

        const LpSolution lp = solve_lp(-work.Z.row(i).transpose(), A, b);
        if (lp.status == LpStatus::Optimal && -lp.value <= work.z(i) + kFeasTol) {
            kept[static_cast<std::size_t>(i)] = false;
            --kept_count;
        }
    }

    Polyhedron out;
    out.Z.resize(kept_count, d);
    out.z.resize(kept_count);
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < h; ++i) {
        if (!kept[static_cast<std::size_t>(i)]) continue;
        out.Z.row(at) = work.Z.row(i);
        out.z(at) = work.z(i);
        ++at;
    }
    return out;
}

}  // namespace empc
