#include "empc/mpqp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include "empc/errors.hpp"

namespace empc {

namespace {

constexpr double kRadiusThreshold = 1e-7;

/// Deterministic uniform double in [lo, hi] from the raw 32-bit stream; the
/// distribution classes of the standard library are not pinned down across
/// implementations, this mapping is.
double uniform(std::mt19937& rng, double lo, double hi) {
    const double u01 = static_cast<double>(rng()) * (1.0 / 4294967296.0);
    return lo + (hi - lo) * u01;
}

bool next_combination(std::vector<int>& idx, int q) {
    const int k = static_cast<int>(idx.size());
    for (int i = k - 1; i >= 0; --i) {
        if (idx[static_cast<std::size_t>(i)] < q - (k - i)) {
            ++idx[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < k; ++j) {
                idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
            }
            return true;
        }
    }
    return false;
}

Eigen::VectorXd law_output(const CriticalRegion& region, const Eigen::VectorXd& x) {
    return region.F * x + region.g;
}

}  // namespace

std::size_t PwaLaw::total_halfspaces() const {
    std::size_t total = 0;
    for (const auto& region : regions) {
        total += static_cast<std::size_t>(region.region.rows());
    }
    return total;
}

PwaLaw solve_mpqp(const MpQp& qp, MpqpDiagnostics* diagnostics) {
    const Eigen::Index nu = qp.H.rows();
    const Eigen::Index q = qp.G.rows();
    const Eigen::Index dim = qp.layout.dim();

    Eigen::LDLT<Eigen::MatrixXd> hfact(qp.H);
    if (hfact.info() != Eigen::Success || !hfact.isPositive()) {
        throw InvalidParameter("solve_mpqp: H must be positive definite");
    }
    const Eigen::MatrixXd HiFt = hfact.solve(qp.F.transpose());  // H^{-1} F'

    MpqpDiagnostics local;
    MpqpDiagnostics& diag = diagnostics ? *diagnostics : local;
    diag = MpqpDiagnostics{};

    PwaLaw law;
    law.dim = static_cast<int>(dim);
    law.l = qp.l;
    law.horizon = qp.horizon;
    law.layout = qp.layout;
    law.u_min = qp.u_min;
    law.u_max = qp.u_max;

    auto try_active_set = [&](const std::vector<int>& active) {
        ++diag.candidates;
        const Eigen::Index na = static_cast<Eigen::Index>(active.size());

        Eigen::MatrixXd U_gain;
        Eigen::VectorXd U_offset;
        Eigen::MatrixXd Lambda;   // na x dim, multipliers lambda(x) = Lambda x + lambda0
        Eigen::VectorXd lambda0;

        if (na == 0) {
            U_gain = -0.5 * HiFt;
            U_offset = Eigen::VectorXd::Zero(nu);
        } else {
            Eigen::MatrixXd Ga(na, nu);
            Eigen::VectorXd wa(na);
            Eigen::MatrixXd Wa(na, dim);
            for (Eigen::Index a = 0; a < na; ++a) {
                const int row = active[static_cast<std::size_t>(a)];
                Ga.row(a) = qp.G.row(row);
                wa(a) = qp.w(row);
                Wa.row(a) = qp.W.row(row);
            }
            Eigen::FullPivLU<Eigen::MatrixXd> rank_check(Ga);
            rank_check.setThreshold(1e-9);
            if (rank_check.rank() < na) {
                ++diag.rank_deficient;
                return;
            }

            const Eigen::MatrixXd HiGt = hfact.solve(Ga.transpose());
            const Eigen::MatrixXd Sa = Ga * HiGt;
            Eigen::FullPivLU<Eigen::MatrixXd> sfact(Sa);
            sfact.setThreshold(1e-10);
            if (!sfact.isInvertible()) {
                ++diag.singular_dual;
                return;
            }
            lambda0 = sfact.solve(-2.0 * wa);
            Lambda = sfact.solve(-(2.0 * Wa + Ga * HiFt));
            U_gain = -0.5 * (HiFt + HiGt * Lambda);
            U_offset = -0.5 * HiGt * lambda0;

            // Saturated box rows admit an exact closed form; overwrite the
            // solved rows so saturated pieces return the bound bit-exactly.
            for (Eigen::Index a = 0; a < na; ++a) {
                Eigen::Index nonzero_col = -1;
                bool single = true;
                for (Eigen::Index cidx = 0; cidx < nu && single; ++cidx) {
                    const double entry = Ga(a, cidx);
                    if (entry == 0.0) continue;
                    if (nonzero_col >= 0 || (entry != 1.0 && entry != -1.0)) single = false;
                    else nonzero_col = cidx;
                }
                if (!single || nonzero_col < 0) continue;
                const double sign = Ga(a, nonzero_col);
                U_gain.row(nonzero_col) = sign * Wa.row(a);
                U_offset(nonzero_col) = sign * wa(a);
            }
        }

        // Critical region: inactive rows stay feasible, multipliers stay
        // nonnegative.
        const Eigen::Index n_inactive = q - na;
        Polyhedron raw;
        raw.Z.resize(n_inactive + na, dim);
        raw.z.resize(n_inactive + na);
        Eigen::Index at = 0;
        for (Eigen::Index i = 0; i < q; ++i) {
            if (std::binary_search(active.begin(), active.end(), static_cast<int>(i))) continue;
            raw.Z.row(at) = qp.G.row(i) * U_gain - qp.W.row(i);
            raw.z(at) = qp.w(i) - qp.G.row(i).dot(U_offset);
            ++at;
        }
        for (Eigen::Index a = 0; a < na; ++a) {
            raw.Z.row(at) = -Lambda.row(a);
            raw.z(at) = lambda0(a);
            ++at;
        }

        const ChebyshevResult ball = chebyshev_interior(raw);
        if (!(ball.radius > kRadiusThreshold)) {
            ++diag.empty_or_thin;
            return;
        }

        CriticalRegion region;
        region.region = remove_redundant(raw);
        region.U_gain = U_gain;
        region.U_offset = U_offset;
        region.F = U_gain.topRows(qp.l);
        region.g = U_offset.head(qp.l);
        region.active_set = active;
        region.chebyshev_center = ball.center;
        region.chebyshev_radius = ball.radius;
        law.regions.push_back(std::move(region));
    };

    const int max_card = static_cast<int>(std::min(nu, q));
    for (int k = 0; k <= max_card; ++k) {
        std::vector<int> idx(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
        if (k == 0) {
            try_active_set(idx);
            continue;
        }
        do {
            try_active_set(idx);
        } while (next_combination(idx, static_cast<int>(q)));
    }

    if (law.regions.empty()) {
        throw DesignError("solve_mpqp: no full-dimensional critical region found");
    }
    return law;
}

ParamBox default_param_box(const ParamLayout& layout, double u_min, double u_max) {
    ParamBox box;
    for (int i = 0; i < layout.n_plant; ++i) box.push_back({-50.0, 50.0});
    for (int i = 0; i < layout.n_dist; ++i) box.push_back({-10.0, 10.0});
    for (int i = 0; i < layout.n_input; ++i) box.push_back({u_min, u_max});
    for (int i = 0; i < layout.n_ref; ++i) box.push_back({0.0, 50.0});
    return box;
}

ValidationReport validate_law(const PwaLaw& law, const MpQp& qp, int n_samples,
                              const ParamBox& box, unsigned seed) {
    if (static_cast<int>(box.size()) != law.dim) {
        throw DimensionError("validate_law: box dimension does not match the law");
    }
    std::mt19937 rng(seed);
    ValidationReport report;
    report.samples = n_samples;

    Eigen::VectorXd x(law.dim);
    for (int s = 0; s < n_samples; ++s) {
        for (int i = 0; i < law.dim; ++i) {
            x(i) = uniform(rng, box[static_cast<std::size_t>(i)].lo,
                           box[static_cast<std::size_t>(i)].hi);
        }
        const CriticalRegion* hit = nullptr;
        for (const auto& region : law.regions) {
            if (contains(region.region, x, 1e-8)) {
                hit = &region;
                break;
            }
        }
        if (!hit) {
            ++report.uncovered;
            continue;
        }
        const Eigen::VectorXd u_law = law_output(*hit, x);
        const QpResult qpsol = solve_qp_online(qp, x);
        const double dev = (u_law - qpsol.U.head(law.l)).lpNorm<Eigen::Infinity>();
        report.max_deviation = std::max(report.max_deviation, dev);
    }
    report.coverage =
        n_samples > 0 ? 1.0 - static_cast<double>(report.uncovered) / n_samples : 1.0;
    return report;
}

ContinuityReport check_continuity(const PwaLaw& law, int points_per_pair, unsigned seed) {
    ContinuityReport report;
    const int M = static_cast<int>(law.regions.size());
    const int dim = law.dim;

    for (int i = 0; i < M; ++i) {
        for (int j = i + 1; j < M; ++j) {
            const auto& ri = law.regions[static_cast<std::size_t>(i)];
            const auto& rj = law.regions[static_cast<std::size_t>(j)];

            // Intersection of the two closed regions; nonempty means the
            // pieces meet and the laws must agree there.
            Polyhedron both;
            both.Z.resize(ri.region.rows() + rj.region.rows(), dim);
            both.z.resize(both.Z.rows());
            both.Z << ri.region.Z, rj.region.Z;
            both.z << ri.region.z, rj.region.z;
            const ChebyshevResult meet = chebyshev_interior(both);
            if (meet.radius < -1e-7) continue;  // disjoint
            if (!contains(ri.region, meet.center, 1e-8) ||
                !contains(rj.region, meet.center, 1e-8)) {
                continue;
            }
            ++report.pairs_checked;

            // Direction along the shared hyperplane, when one can be
            // identified from complementary rows.
            Eigen::VectorXd normal = Eigen::VectorXd::Zero(dim);
            for (Eigen::Index a = 0; a < ri.region.rows() && normal.isZero(0.0); ++a) {
                for (Eigen::Index b = 0; b < rj.region.rows(); ++b) {
                    if ((ri.region.Z.row(a) + rj.region.Z.row(b)).norm() <= 1e-7 &&
                        std::abs(ri.region.z(a) + rj.region.z(b)) <= 1e-7) {
                        normal = ri.region.Z.row(a).transpose();
                        break;
                    }
                }
            }

            std::mt19937 rng(seed + 7919u * static_cast<unsigned>(i) +
                             104729u * static_cast<unsigned>(j));
            for (int s = 0; s < points_per_pair; ++s) {
                Eigen::VectorXd x = meet.center;
                if (s > 0) {
                    Eigen::VectorXd dir(dim);
                    for (int d = 0; d < dim; ++d) dir(d) = uniform(rng, -1.0, 1.0);
                    if (!normal.isZero(0.0)) {
                        dir -= normal * (normal.dot(dir) / normal.squaredNorm());
                    }
                    if (dir.norm() > 1e-12) {
                        dir.normalize();
                        double t = 0.5 * (1.0 + meet.center.lpNorm<Eigen::Infinity>());
                        Eigen::VectorXd candidate;
                        bool ok = false;
                        // Points must sit numerically on the shared set, or the
                        // neighbor's law would be evaluated as an extrapolation.
                        for (int halvings = 0; halvings < 40 && !ok; ++halvings) {
                            candidate = meet.center + t * dir;
                            ok = contains(ri.region, candidate, 1e-9) &&
                                 contains(rj.region, candidate, 1e-9);
                            t *= 0.5;
                        }
                        if (ok) x = candidate;
                    }
                }
                const double gap =
                    (law_output(ri, x) - law_output(rj, x)).lpNorm<Eigen::Infinity>();
                report.max_gap = std::max(report.max_gap, gap);
                ++report.points_checked;
            }
        }
    }
    return report;
}

CertificationReport certify_kkt(const PwaLaw& law, const MpQp& qp) {
    CertificationReport report;
    report.regions = static_cast<int>(law.regions.size());

    for (const auto& region : law.regions) {
        const Eigen::VectorXd& x = region.chebyshev_center;
        const Eigen::VectorXd U = region.U_gain * x + region.U_offset;
        const Eigen::VectorXd rhs = qp.w + qp.W * x;

        // Primal feasibility and equality on the active rows.
        double residual = 0.0;
        const Eigen::VectorXd slack = rhs - qp.G * U;
        if (slack.size() > 0) {
            residual = std::max(residual, std::max(0.0, -slack.minCoeff()));
        }
        for (int a : region.active_set) {
            residual = std::max(residual, std::abs(slack(a)));
        }

        // Stationarity: recover multipliers on the active rows by least
        // squares and measure the remaining gradient.
        const Eigen::VectorXd grad = 2.0 * qp.H * U + qp.F.transpose() * x;
        if (region.active_set.empty()) {
            residual = std::max(residual, grad.lpNorm<Eigen::Infinity>());
        } else {
            const Eigen::Index na = static_cast<Eigen::Index>(region.active_set.size());
            Eigen::MatrixXd Gat(qp.H.rows(), na);
            for (Eigen::Index a = 0; a < na; ++a) {
                Gat.col(a) = qp.G.row(region.active_set[static_cast<std::size_t>(a)]).transpose();
            }
            const Eigen::VectorXd lambda =
                Gat.completeOrthogonalDecomposition().solve(-grad);
            residual = std::max(residual, (Gat * lambda + grad).lpNorm<Eigen::Infinity>());
            report.min_lambda = std::min(report.min_lambda, lambda.minCoeff());
        }
        report.max_kkt_residual = std::max(report.max_kkt_residual, residual);
    }
    return report;
}

}  // namespace empc
