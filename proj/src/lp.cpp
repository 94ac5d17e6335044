#include "empc/lp.hpp"

#include <limits>
#include <vector>

#include "empc/errors.hpp"

namespace empc {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kPhase1Tol = 1e-8;

/// Dense simplex tableau over the standard-form split x = u - v with slacks
/// and one artificial variable per row.  Column layout:
///   [0, n)        u part of x
///   [n, 2n)       v part of x
///   [2n, 2n+h)    slacks
///   [2n+h, ...)   artificials (phase 1 only)
/// The last tableau row holds reduced costs, the last column the RHS (with
/// -objective in the cost row).
class Tableau {
public:
    Tableau(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b)
        : n_(c.size()), h_(A.rows()), structural_(2 * n_ + h_) {
        T_.setZero(h_ + 1, structural_ + h_ + 1);
        basis_.resize(h_);
        for (Eigen::Index i = 0; i < h_; ++i) {
            double sign = (b(i) < 0.0) ? -1.0 : 1.0;
            T_.block(i, 0, 1, n_) = sign * A.row(i);
            T_.block(i, n_, 1, n_) = -sign * A.row(i);
            T_(i, 2 * n_ + i) = sign;
            T_(i, rhs_col()) = sign * b(i);
            T_(i, structural_ + i) = 1.0;
            basis_[i] = structural_ + i;
        }
    }

    Eigen::Index rhs_col() const { return structural_ + h_; }
    Eigen::Index rows() const { return h_; }

    /// Installs the reduced-cost row for objective coefficients `costs`
    /// (indexed over all columns), canonicalized against the current basis.
    void set_objective(const Eigen::VectorXd& costs) {
        T_.row(h_).setZero();
        T_.row(h_).head(costs.size()) = costs.transpose();
        for (Eigen::Index i = 0; i < h_; ++i) {
            const double cb = costs(basis_[i]);
            if (cb != 0.0) {
                T_.row(h_) -= cb * T_.row(i);
            }
        }
    }

    double objective() const { return -T_(h_, rhs_col()); }

    enum class PivotResult { Optimal, Unbounded };

    /// Bland's rule: entering column = lowest index with negative reduced
    /// cost; leaving row = lowest basis index among minimal ratios.
    PivotResult run(Eigen::Index allowed_cols) {
        for (;;) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < allowed_cols; ++j) {
                if (T_(h_, j) < -kCostTol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return PivotResult::Optimal;

            Eigen::Index leave = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < h_; ++i) {
                if (T_(i, enter) > kPivotTol) {
                    const double ratio = T_(i, rhs_col()) / T_(i, enter);
                    if (ratio < best_ratio - kPivotTol ||
                        (ratio < best_ratio + kPivotTol &&
                         (leave < 0 || basis_[i] < basis_[leave]))) {
                        best_ratio = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) return PivotResult::Unbounded;
            pivot(leave, enter);
        }
    }

    void pivot(Eigen::Index row, Eigen::Index col) {
        T_.row(row) /= T_(row, col);
        for (Eigen::Index i = 0; i <= h_; ++i) {
            if (i == row) continue;
            const double factor = T_(i, col);
            if (factor != 0.0) {
                T_.row(i) -= factor * T_.row(row);
            }
        }
        basis_[row] = col;
    }

    /// After phase 1: pivot remaining artificial basics onto structural
    /// columns, or drop their (linearly dependent) rows entirely.
    void remove_artificials() {
        for (Eigen::Index i = 0; i < h_;) {
            if (basis_[i] < structural_) {
                ++i;
                continue;
            }
            Eigen::Index col = -1;
            for (Eigen::Index j = 0; j < structural_; ++j) {
                if (std::abs(T_(i, j)) > kPivotTol) {
                    col = j;
                    break;
                }
            }
            if (col >= 0) {
                pivot(i, col);
                ++i;
            } else {
                drop_row(i);
            }
        }
    }

    Eigen::VectorXd extract_x() const {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
        for (Eigen::Index i = 0; i < h_; ++i) {
            if (basis_[i] < n_) {
                x(basis_[i]) += T_(i, rhs_col());
            } else if (basis_[i] < 2 * n_) {
                x(basis_[i] - n_) -= T_(i, rhs_col());
            }
        }
        return x;
    }

    Eigen::Index structural() const { return structural_; }

private:
    void drop_row(Eigen::Index row) {
        const Eigen::Index last = h_ - 1;
        if (row != last) {
            T_.row(row).swap(T_.row(last));
            std::swap(basis_[row], basis_[last]);
        }
        T_.row(last).swap(T_.row(h_));  // keep the cost row contiguous
        T_.conservativeResize(h_, Eigen::NoChange);
        basis_.pop_back();
        --h_;
    }

    Eigen::Index n_;
    Eigen::Index h_;
    Eigen::Index structural_;
    Eigen::MatrixXd T_;
    std::vector<Eigen::Index> basis_;
};

}  // namespace

LpSolution solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                    const Eigen::VectorXd& b) {
    const Eigen::Index n = c.size();
    if (A.cols() != n || A.rows() != b.size()) {
        throw DimensionError("solve_lp: A must be h x n with b of length h");
    }

    LpSolution solution;
    if (A.rows() == 0) {
        // No constraints: optimal iff the objective is identically zero.
        if (c.isZero(0.0)) {
            solution.status = LpStatus::Optimal;
            solution.x = Eigen::VectorXd::Zero(n);
            solution.value = 0.0;
        } else {
            solution.status = LpStatus::Unbounded;
        }
        return solution;
    }

    Tableau tableau(c, A, b);

    // Phase 1: minimize the sum of artificials.
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(tableau.structural() + tableau.rows());
    phase1.tail(tableau.rows()).setOnes();
    tableau.set_objective(phase1);
    tableau.run(tableau.structural());
    if (tableau.objective() > kPhase1Tol) {
        solution.status = LpStatus::Infeasible;
        return solution;
    }
    tableau.remove_artificials();

    // Phase 2: the real objective over structural columns only.
    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(tableau.structural() + tableau.rows());
    phase2.head(n) = c;
    phase2.segment(n, n) = -c;
    tableau.set_objective(phase2);
    if (tableau.run(tableau.structural()) == Tableau::PivotResult::Unbounded) {
        solution.status = LpStatus::Unbounded;
        return solution;
    }

    solution.status = LpStatus::Optimal;
    solution.x = tableau.extract_x();
    solution.value = c.dot(solution.x);
    return solution;
}

}  // namespace empc
