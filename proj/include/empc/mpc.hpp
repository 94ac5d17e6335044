#pragma once

#include <vector>

#include <Eigen/Dense>

#include "empc/augment.hpp"

namespace empc {

/// Horizon, tracking weights and input bounds of the finite-horizon
/// controller.  The stage cost penalizes tracking error (y_k - r)'Q(y_k - r)
/// and input increments du_k' R du_k, with the hard box u_min <= u_k <= u_max.
struct MpcSpec {
    int N = 2;
    Eigen::MatrixXd Q;
    Eigen::MatrixXd R;
    double u_min = 0.0;
    double u_max = 0.0;
};

/// Layout of the parameter vector the condensed problem depends on:
///   [ augmented state estimate (plant + disturbance) ; previous input ; reference ].
struct ParamLayout {
    int n_plant = 0;
    int n_dist = 0;
    int n_input = 0;
    int n_ref = 0;

    int n_state() const { return n_plant + n_dist; }
    int dim() const { return n_state() + n_input + n_ref; }
    int state_offset() const { return 0; }
    int input_offset() const { return n_state(); }
    int ref_offset() const { return n_state() + n_input; }
};

/// Condensed quadratic program
///   min_U  U'H U + x'F U (+ x'Y x)    s.t.  G U <= w + W x
/// over the stacked input sequence U, parameterized by x as laid out above.
/// H is symmetric positive definite whenever R is positive definite.
struct MpQp {
    Eigen::MatrixXd H;
    Eigen::MatrixXd F;   //!< dim x (l*N)
    Eigen::MatrixXd Y;   //!< dim x dim, constant-in-U part of the cost
    Eigen::MatrixXd G;   //!< q x (l*N)
    Eigen::MatrixXd w;   //!< q x 1
    Eigen::MatrixXd W;   //!< q x dim
    ParamLayout layout;
    int horizon = 0;
    int l = 0;           //!< inputs per step
    double u_min = 0.0;
    double u_max = 0.0;
};

/// Builds the condensed program by propagating the augmented model over the
/// horizon.  The first predicted output only depends on the current state
/// when the model has no feedthrough; the last input still carries an
/// increment penalty tying it to its predecessor.
MpQp condense(const AugmentedModel& aug, const MpcSpec& spec);

/// U'H U + x'F U; the x'Y x part is omitted since it does not affect argmin.
double qp_objective(const MpQp& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& U);

struct QpResult {
    Eigen::VectorXd U;
    std::vector<int> active_set;  //!< constraint rows active at the optimum, ascending
    int iterations = 0;
};

/// Primal active-set solve of the condensed program at a given parameter.
/// Deterministic: ties in the blocking/dropping rules break toward the lowest
/// constraint index.  Feasible for box constraint rows by clipping; general
/// rows fall back to a phase-1 LP start.
QpResult solve_qp_online(const MpQp& qp, const Eigen::VectorXd& x);

}  // namespace empc
