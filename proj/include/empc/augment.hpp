#pragma once

#include <Eigen/Dense>

#include "empc/motor.hpp"

namespace empc {

/// Integrating disturbance model: d(t+1) = d(t), entering the plant through
/// Bd (input side) and/or Cd (output side).
struct DisturbanceModel {
    Eigen::MatrixXd Bd;  //!< n x p
    Eigen::MatrixXd Cd;  //!< m x p
};

/// Pure output-step disturbance: p offset states, the i-th entering the i-th
/// measured output directly (Bd = 0, Cd = leading m x p identity block).
DisturbanceModel output_disturbance_model(int n, int m, int p = 1);

/// Plant state stacked with the integrating disturbance state,
///   xe(t+1) = Ae xe(t) + Be u(t),  y(t) = Ce xe(t) + De u(t).
struct AugmentedModel {
    Eigen::MatrixXd Ae;
    Eigen::MatrixXd Be;
    Eigen::MatrixXd Ce;
    Eigen::MatrixXd De;
    int n = 0;       //!< plant state dimension
    int p = 0;       //!< disturbance state dimension
    double Ts = 0.0; //!< sample time inherited from the plant [s]

    int size() const { return n + p; }
};

AugmentedModel augment(const LtiModel& model, const DisturbanceModel& dist);

struct ObservabilityReport {
    int rank = 0;        //!< numerical rank of the stacked observability matrix
    int required = 0;    //!< n + p
    bool observable = false;
};

/// Rank test of [Ce; Ce*Ae; ...; Ce*Ae^(n+p-1)].  An offset-free design needs
/// the full augmented state to be reconstructible; when it is not, only the
/// observable subspace can be assigned dynamics (see observer.hpp).
ObservabilityReport check_offset_free_observability(const AugmentedModel& aug);

/// Stacked observability matrix of (Ae, Ce), one block row per power of Ae.
Eigen::MatrixXd observability_matrix(const AugmentedModel& aug);

}  // namespace empc
