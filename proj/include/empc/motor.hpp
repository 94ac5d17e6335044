#pragma once

#include <Eigen/Dense>

namespace empc {

/// Physical constants of a permanent-magnet DC motor.
struct MotorParams {
    double km;  //!< torque constant [N*m/A]
    double J;   //!< rotor inertia [kg*m^2]
    double fm;  //!< mechanical viscous friction [N*m*s/rad]
    double Ra;  //!< armature resistance [ohm]
    double La;  //!< armature inductance [H]
};

/// Reduced first-order model from armature voltage to shaft speed,
/// G(s) = K / (tau*s + 1), valid when the electrical time constant La/Ra is
/// much faster than the mechanical one.
struct FirstOrderModel {
    double K;    //!< steady-state speed gain [rad/s per V]
    double tau;  //!< mechanical time constant [s]
    double f;    //!< effective viscous friction including back-EMF [N*m*s/rad]
};

/// Continuous-time state-space model.  States are shaft position [rad] and
/// shaft speed [rad/s]; input is armature voltage [V]; output is speed.
struct CtModel {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;
    Eigen::MatrixXd D;
};

/// Discrete-time state-space model obtained by zero-order-hold sampling.
struct LtiModel {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;
    Eigen::MatrixXd D;
    double Ts = 0.0;  //!< sample time [s]
};

/// Collapses the armature electrical dynamics into an effective friction and
/// returns the first-order speed model.  Requires J, fm, Ra, La > 0 and
/// km >= 0 (km == 0 models a motor with no electromechanical coupling).
FirstOrderModel derive_first_order(const MotorParams& params);

/// Builds the position/speed continuous-time model
///   d/dt [theta; omega] = [[0, 1], [0, -1/tau]] [theta; omega] + [0; K/tau] u,
///   y = omega.
CtModel build_ct_model(const FirstOrderModel& model);

/// Exact zero-order-hold discretization at sample time Ts > 0, computed
/// through the matrix exponential of the augmented [[A, B], [0, 0]] * Ts.
LtiModel discretize_zoh(const CtModel& ct, double Ts);

struct PlantStep {
    Eigen::VectorXd x_next;
    Eigen::VectorXd y;
};

/// Advances the discrete plant one sample.  `u_dist` is an additive input
/// disturbance (same dimension as u) applied through B, and `noise` is added
/// to the measured output.
PlantStep plant_step(const LtiModel& model, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u, const Eigen::VectorXd& u_dist,
                     const Eigen::VectorXd& noise);

/// Convenience overload for single-input single-output plants.
PlantStep plant_step(const LtiModel& model, const Eigen::VectorXd& x, double u,
                     double u_dist = 0.0, double noise = 0.0);

}  // namespace empc
