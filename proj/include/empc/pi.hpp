#pragma once

namespace empc {

/// Discrete PI speed controller with output clamping and conditional
/// anti-windup: the integral only accumulates while the output is not pushed
/// further into an already-hit limit.
struct PiConfig {
    double kp = 0.0;
    double ki = 0.0;
    double Ts = 0.0;      //!< sample time [s]
    double u_min = 0.0;
    double u_max = 0.0;
    bool clamp = true;    //!< enable output clamping + anti-windup
};

struct PiState {
    double error_sum = 0.0;  //!< accumulated error [rad/s * samples]
};

struct PiOutput {
    double u = 0.0;
    PiState state;
    bool saturated = false;
};

PiOutput pi_step(const PiConfig& config, const PiState& state, double error);

}  // namespace empc
