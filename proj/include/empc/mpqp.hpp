#pragma once

#include <vector>

#include <Eigen/Dense>

#include "empc/mpc.hpp"
#include "empc/polyhedron.hpp"

namespace empc {

/// One polyhedral piece of the explicit law: inside `region` the optimal
/// input sequence is U(x) = U_gain x + U_offset, of which the first input
/// block F x + g is what gets applied.
struct CriticalRegion {
    Polyhedron region;           //!< normalized, irredundant half-spaces
    Eigen::MatrixXd F;           //!< l x dim, first input of the sequence
    Eigen::VectorXd g;           //!< l
    Eigen::MatrixXd U_gain;      //!< (l*N) x dim, the whole sequence
    Eigen::VectorXd U_offset;    //!< l*N
    std::vector<int> active_set; //!< constraint rows pinned to equality, ascending
    Eigen::VectorXd chebyshev_center;
    double chebyshev_radius = 0.0;
};

struct PwaLaw {
    std::vector<CriticalRegion> regions;
    int dim = 0;       //!< parameter dimension
    int l = 0;         //!< inputs per step
    int horizon = 0;
    ParamLayout layout;
    double u_min = 0.0;
    double u_max = 0.0;

    std::size_t total_halfspaces() const;
};

struct MpqpDiagnostics {
    int candidates = 0;        //!< active-set combinations enumerated
    int rank_deficient = 0;    //!< skipped: constraint gradients dependent
    int singular_dual = 0;     //!< skipped: dual system singular
    int empty_or_thin = 0;     //!< discarded: Chebyshev radius <= threshold
};

/// Enumerates candidate active sets by cardinality (empty set first) and
/// lexicographic order, keeps every candidate whose critical region has
/// Chebyshev radius above 1e-7, and returns the regions in enumeration
/// order.  The ordering and all tie-breaks are deterministic, so repeated
/// runs produce identical laws.
PwaLaw solve_mpqp(const MpQp& qp, MpqpDiagnostics* diagnostics = nullptr);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};
using ParamBox = std::vector<Interval>;

/// Sampling box used for validation: plant states within +-50, disturbance
/// states within +-10, previous input within its bounds, reference in [0, 50].
ParamBox default_param_box(const ParamLayout& layout, double u_min, double u_max);

struct ValidationReport {
    int samples = 0;
    int uncovered = 0;
    double coverage = 0.0;       //!< fraction of samples inside >= 1 region
    double max_deviation = 0.0;  //!< law vs. online QP, first input block
};

/// Uniform deterministic sampling over `box`; at every covered sample the
/// stored law is compared against solve_qp_online.
ValidationReport validate_law(const PwaLaw& law, const MpQp& qp, int n_samples,
                              const ParamBox& box, unsigned seed);

struct ContinuityReport {
    int pairs_checked = 0;
    int points_checked = 0;
    double max_gap = 0.0;  //!< worst |u_i(x) - u_j(x)| over shared boundary points
};

/// For every pair of regions with a nonempty intersection, samples points on
/// the shared boundary and compares the two affine laws there.
ContinuityReport check_continuity(const PwaLaw& law, int points_per_pair = 10,
                                  unsigned seed = 2024u);

struct CertificationReport {
    int regions = 0;
    double max_kkt_residual = 0.0;  //!< stationarity + primal feasibility
    double min_lambda = 0.0;        //!< most negative multiplier seen
};

/// Checks the KKT conditions of the stored law at every region's Chebyshev
/// center: stationarity, primal feasibility, active rows at equality, and
/// nonnegative multipliers recovered by least squares.
CertificationReport certify_kkt(const PwaLaw& law, const MpQp& qp);

}  // namespace empc
