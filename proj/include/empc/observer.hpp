#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "empc/augment.hpp"

namespace empc {

/// Correction gain of the prediction-form state observer
///   xe_hat(t+1) = Ae xe_hat + Be u + Le (y - Ce xe_hat - De u).
struct ObserverGain {
    Eigen::MatrixXd Le;  //!< (n+p) x m
};

/// Places all n+p observer poles by Ackermann's formula on the dual system.
/// Requires a single measured output and an observable (Ae, Ce) pair; poles
/// must lie strictly inside the unit circle and be closed under conjugation.
ObserverGain place_observer_poles(const AugmentedModel& aug,
                                  const std::vector<std::complex<double>>& poles);

struct SubspaceObserverDesign {
    ObserverGain gain;
    int observable_rank = 0;
    /// Eigenvalues of the unobservable part, untouched by the design.
    std::vector<std::complex<double>> residual_modes;
};

/// Pole placement restricted to the observable subspace of (Ae, Ce): the
/// number of requested poles must equal the observable rank, the gain is zero
/// along unobservable directions, and unobservable modes keep their open-loop
/// eigenvalues (reported in `residual_modes`).  With a speed-only measurement
/// the shaft position integrator is such a mode; it never feeds back into the
/// control problem, so leaving it unassigned is harmless.
SubspaceObserverDesign place_observable_subspace_poles(
    const AugmentedModel& aug, const std::vector<std::complex<double>>& poles);

struct ObserverState {
    Eigen::VectorXd xe_hat;
};

ObserverState make_observer_state(const AugmentedModel& aug);

/// One prediction-form update with measurement y taken at the same sample as
/// xe_hat; returns the estimate for the next sample.
ObserverState observer_step(const ObserverGain& gain, const AugmentedModel& aug,
                            const ObserverState& state, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& y);

}  // namespace empc
