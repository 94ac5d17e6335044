#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "empc/augment.hpp"
#include "empc/motor.hpp"
#include "empc/mpc.hpp"
#include "empc/mpqp.hpp"
#include "empc/observer.hpp"
#include "empc/pi.hpp"
#include "empc/sim.hpp"

namespace empc {

/// Everything needed to synthesize the controller and run the loop, with the
/// motor-bench defaults baked in.  Loaded from `key = value` text; lists
/// (Bd, Cd, observer.poles) take whitespace- or comma-separated numbers.
struct ProjectConfig {
    MotorParams motor{8.32e-4, 2.45e-7, 3.10e-5, 4.1, 2.27e-3};
    double Ts = 1e-3;

    int p = 1;                      //!< disturbance dimension
    /// Row-major n x p and m x p.  With both empty the design assumes a pure
    /// output offset (Bd = 0, Cd = identity block); providing only one of the
    /// two leaves the other at zero.
    std::vector<double> Bd;
    std::vector<double> Cd;
    std::vector<double> observer_poles{0.5, 0.6};

    int N = 2;
    double Q = 1.0;
    double R = 0.1;
    double u_min = 0.0;
    double u_max = 24.0;

    double pi_kp = 0.12;
    double pi_ki = 30.0;
    bool pi_clamp = true;
};

ProjectConfig default_config();
ProjectConfig parse_config(std::istream& in, const std::string& name = "<config>");
ProjectConfig load_config(const std::filesystem::path& path);

/// Outputs of the offline synthesis chain, from physical constants to the
/// explicit law.
struct DesignArtifacts {
    FirstOrderModel first_order;
    CtModel ct;
    LtiModel plant;
    DisturbanceModel disturbance;
    AugmentedModel aug;
    SubspaceObserverDesign observer;
    MpQp qp;
    PwaLaw law;
    MpqpDiagnostics diagnostics;
};

/// Runs the whole offline chain.  Observer poles are placed on the full
/// state when (Ae, Ce) is observable and the pole count allows it, otherwise
/// on the observable subspace (the pole count must equal its rank).
DesignArtifacts build_design(const ProjectConfig& config);

/// Wires the artifacts into a closed-loop setup; the returned struct borrows
/// `artifacts.law`, which must outlive it.
LoopSetup make_loop_setup(const ProjectConfig& config, const DesignArtifacts& artifacts);

}  // namespace empc
