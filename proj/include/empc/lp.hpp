#pragma once

#include <Eigen/Dense>

namespace empc {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd x;     //!< minimizer (valid when status == Optimal)
    double value = 0.0;    //!< c'x at the minimizer
};

/// Minimizes c'x subject to A x <= b over free x, with a dense two-phase
/// tableau simplex.  Bland's rule makes the pivot sequence deterministic and
/// cycle-free, which in turn makes every caller (Chebyshev centers,
/// redundancy elimination) reproducible across runs.  Intended for the small
/// dense problems of this project (tens of rows), not for sparse LPs.
LpSolution solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                    const Eigen::VectorXd& b);

}  // namespace empc
