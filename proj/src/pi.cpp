#include "empc/pi.hpp"

#include <algorithm>
#include <cmath>

#include "empc/errors.hpp"

namespace empc {

PiOutput pi_step(const PiConfig& config, const PiState& state, double error) {
    if (!(config.Ts > 0.0)) {
        throw InvalidParameter("pi_step: Ts must be positive");
    }
    if (config.clamp && !(config.u_min < config.u_max)) {
        throw InvalidParameter("pi_step: clamping needs u_min < u_max");
    }

    const double candidate_sum = state.error_sum + error;
    const double u_raw = config.kp * error + config.ki * config.Ts * candidate_sum;

    PiOutput out;
    if (!config.clamp) {
        out.u = u_raw;
        out.state.error_sum = candidate_sum;
        return out;
    }

    out.u = std::clamp(u_raw, config.u_min, config.u_max);
    out.saturated = (out.u != u_raw);
    // Conditional integration: freeze the accumulator when the output is
    // clamped and the error would drive it further into the limit.
    const bool windup = (u_raw > config.u_max && error > 0.0) ||
                        (u_raw < config.u_min && error < 0.0);
    out.state.error_sum = windup ? state.error_sum : candidate_sum;
    return out;
}

}  // namespace empc
