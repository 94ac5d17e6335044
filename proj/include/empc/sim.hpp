#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "empc/augment.hpp"
#include "empc/motor.hpp"
#include "empc/mpqp.hpp"
#include "empc/observer.hpp"
#include "empc/pi.hpp"

namespace empc {

struct ReferenceStep {
    double t = 0.0;
    double value = 0.0;
};

/// Additive input-side disturbance, constant over [t0, t1).  Negative
/// amplitudes model load torque (a disturbance opposing the motion).
struct DisturbanceEvent {
    double t0 = 0.0;
    double t1 = 0.0;
    double amplitude = 0.0;
};

/// Uniform measurement noise in [-amplitude, amplitude] over [t0, t1),
/// drawn from a dedicated generator so runs are reproducible.
struct NoiseEvent {
    double t0 = 0.0;
    double t1 = 0.0;
    double amplitude = 0.0;
    std::uint32_t seed = 0;
};

struct Scenario {
    double duration = 1.0;
    double Ts = 1e-3;
    std::vector<ReferenceStep> reference;  //!< sorted by time
    std::vector<DisturbanceEvent> disturbances;
    std::vector<NoiseEvent> noise;
    bool protocol_in_loop = false;
    double baud = 115200.0;

    double reference_at(double t) const;
};

/// Line-oriented scenario text: `duration`, `Ts`, `ref t value`,
/// `dist t0 t1 amplitude`, `noise t0 t1 amplitude seed`, `protocol on|off`,
/// `baud rate`; '#' starts a comment.  Errors carry file:line context.
Scenario parse_scenario(std::istream& in, const std::string& name = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

enum class ControllerKind { ExplicitMpc, Pi };

struct Sample {
    double t = 0.0;
    double r = 0.0;
    double y = 0.0;  //!< measured output, noise included
    double u = 0.0;  //!< applied input
    int region = -1; //!< matched region index, -1 for the PI controller
    bool saturated = false;
    Eigen::VectorXd x;       //!< true plant state
    Eigen::VectorXd xe_hat;  //!< observer estimate used at this sample
};

struct Trace {
    std::vector<Sample> samples;
    double Ts = 0.0;
    /// Worst amount by which the raw law output left the input box before
    /// actuator clamping; stays at rounding level for a correct law.
    double max_law_excess = 0.0;
};

const Sample& sample_at(const Trace& trace, double t);
void write_csv(const Trace& trace, std::ostream& out);

struct LoopSetup {
    LtiModel plant;
    AugmentedModel aug;
    ObserverGain observer;
    const PwaLaw* law = nullptr;  //!< required for ControllerKind::ExplicitMpc
    PiConfig pi;
};

/// Runs the full loop: plant -> measurement -> observer -> controller ->
/// actuator clamp -> plant.  With `protocol_in_loop` every controller
/// exchange passes through the byte frames, including their quantization,
/// and the frame turnaround must fit the sample period.
Trace run_closed_loop(const Scenario& scenario, const LoopSetup& setup, ControllerKind kind);

struct StepMetric {
    double t_event = 0.0;
    double magnitude = 0.0;      //!< |r_new - y| at the event
    double settling = std::numeric_limits<double>::infinity();  //!< to 2 % band [s]
    bool settled = false;
    double overshoot_pct = 0.0;
};

struct Metrics {
    double ise = 0.0;
    double iae = 0.0;
    double steady_state_error = 0.0;  //!< |r - y| at the final sample
    double overshoot_pct = 0.0;       //!< worst over all reference steps
    double settling_max = 0.0;        //!< worst settling time, +inf if unsettled
    std::vector<StepMetric> steps;
};

Metrics compute_metrics(const Trace& trace);

struct Comparison {
    Trace mpc_trace;
    Trace pi_trace;
    Metrics mpc;
    Metrics pi;
};

/// Same scenario, same plant, same noise realization, both controllers.
Comparison compare_controllers(const Scenario& scenario, const LoopSetup& setup);

}  // namespace empc
