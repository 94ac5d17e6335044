#include "empc/observer.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "empc/errors.hpp"

namespace empc {

namespace {

constexpr double kConjugateTol = 1e-9;

void validate_poles(const std::vector<std::complex<double>>& poles, int expected) {
    if (static_cast<int>(poles.size()) != expected) {
        throw InvalidParameter("observer pole count must be " + std::to_string(expected) +
                               ", got " + std::to_string(poles.size()));
    }
    for (const auto& pole : poles) {
        if (!(std::abs(pole) < 1.0)) {
            throw InvalidParameter("observer poles must lie strictly inside the unit circle");
        }
    }
    std::vector<bool> matched(poles.size(), false);
    for (std::size_t i = 0; i < poles.size(); ++i) {
        if (matched[i] || std::abs(poles[i].imag()) <= kConjugateTol) continue;
        bool found = false;
        for (std::size_t j = 0; j < poles.size(); ++j) {
            if (j == i || matched[j]) continue;
            if (std::abs(std::conj(poles[i]) - poles[j]) <= kConjugateTol) {
                matched[i] = matched[j] = true;
                found = true;
                break;
            }
        }
        if (!found) {
            throw InvalidParameter("complex observer poles must come in conjugate pairs");
        }
    }
}

/// Monic characteristic polynomial prod (z - pole), coefficients ascending in
/// powers of z; the imaginary parts must cancel for a conjugate-closed set.
Eigen::VectorXd char_poly_coeffs(const std::vector<std::complex<double>>& poles) {
    std::vector<std::complex<double>> coeffs{1.0};
    for (const auto& pole : poles) {
        std::vector<std::complex<double>> next(coeffs.size() + 1, 0.0);
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            next[i + 1] += coeffs[i];
            next[i] -= pole * coeffs[i];
        }
        coeffs = std::move(next);
    }
    Eigen::VectorXd real_coeffs(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (std::abs(coeffs[i].imag()) > 1e-9) {
            throw InvalidParameter("observer pole set is not closed under conjugation");
        }
        real_coeffs(static_cast<Eigen::Index>(i)) = coeffs[i].real();
    }
    return real_coeffs;
}

/// Ackermann's formula on the dual pair: returns L (k x 1) such that
/// A - L C has the characteristic polynomial described by `coeffs`
/// (ascending, monic, degree k).
Eigen::MatrixXd ackermann_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                               const Eigen::VectorXd& coeffs) {
    const Eigen::Index k = A.rows();
    const Eigen::MatrixXd Ad = A.transpose();
    const Eigen::VectorXd bd = C.transpose();

    Eigen::MatrixXd Wc(k, k);
    Eigen::VectorXd col = bd;
    for (Eigen::Index i = 0; i < k; ++i) {
        Wc.col(i) = col;
        col = Ad * col;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Wc);
    lu.setThreshold(1e-9);
    if (!lu.isInvertible()) {
        throw DesignError("pole placement failed: pair is not observable");
    }

    Eigen::MatrixXd phi = coeffs(k) * Eigen::MatrixXd::Identity(k, k);
    for (Eigen::Index i = k - 1; i >= 0; --i) {
        phi = phi * Ad + coeffs(i) * Eigen::MatrixXd::Identity(k, k);
    }

    const Eigen::MatrixXd X = lu.solve(phi);
    return X.row(k - 1).transpose();
}

void require_single_output(const AugmentedModel& aug) {
    if (aug.Ce.rows() != 1) {
        throw DesignError("pole placement supports a single measured output only");
    }
}

}  // namespace

ObserverGain place_observer_poles(const AugmentedModel& aug,
                                  const std::vector<std::complex<double>>& poles) {
    require_single_output(aug);
    const int ne = aug.size();
    validate_poles(poles, ne);

    const ObservabilityReport report = check_offset_free_observability(aug);
    if (!report.observable) {
        throw DesignError("full pole placement needs an observable augmented pair (rank " +
                          std::to_string(report.rank) + " of " + std::to_string(report.required) +
                          "); use the observable-subspace design instead");
    }
    return ObserverGain{ackermann_gain(aug.Ae, aug.Ce, char_poly_coeffs(poles))};
}

SubspaceObserverDesign place_observable_subspace_poles(
    const AugmentedModel& aug, const std::vector<std::complex<double>>& poles) {
    require_single_output(aug);
    const int ne = aug.size();

    const Eigen::MatrixXd obs = observability_matrix(aug);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(obs, Eigen::ComputeFullV);
    const Eigen::VectorXd sing = svd.singularValues();
    const double threshold = 1e-9 * std::max(1.0, sing.size() > 0 ? sing(0) : 0.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sing.size(); ++i) {
        if (sing(i) > threshold) ++rank;
    }
    if (rank == 0) {
        throw DesignError("subspace pole placement failed: nothing is observable");
    }
    validate_poles(poles, rank);

    const Eigen::MatrixXd V = svd.matrixV();
    const Eigen::MatrixXd To = V.leftCols(rank);
    const Eigen::MatrixXd Tu = V.rightCols(ne - rank);

    // ker(obs) is Ae-invariant, so the observable block decouples; verify.
    if (rank < ne && (To.transpose() * aug.Ae * Tu).norm() > 1e-8) {
        throw DesignError("observable-subspace split failed: coupling into the "
                          "unobservable block is not negligible");
    }

    const Eigen::MatrixXd Ao = To.transpose() * aug.Ae * To;
    const Eigen::MatrixXd Co = aug.Ce * To;
    const Eigen::MatrixXd Lo = ackermann_gain(Ao, Co, char_poly_coeffs(poles));

    SubspaceObserverDesign design;
    design.gain.Le = To * Lo;
    design.observable_rank = rank;
    if (rank < ne) {
        const Eigen::MatrixXd Au = Tu.transpose() * aug.Ae * Tu;
        const Eigen::VectorXcd modes = Eigen::EigenSolver<Eigen::MatrixXd>(Au).eigenvalues();
        for (Eigen::Index i = 0; i < modes.size(); ++i) {
            design.residual_modes.push_back(modes(i));
        }
    }
    return design;
}

ObserverState make_observer_state(const AugmentedModel& aug) {
    return ObserverState{Eigen::VectorXd::Zero(aug.size())};
}

ObserverState observer_step(const ObserverGain& gain, const AugmentedModel& aug,
                            const ObserverState& state, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& y) {
    const int ne = aug.size();
    if (state.xe_hat.size() != ne || u.size() != aug.Be.cols() || y.size() != aug.Ce.rows() ||
        gain.Le.rows() != ne || gain.Le.cols() != aug.Ce.rows()) {
        throw DimensionError("observer_step: vector sizes do not match the model");
    }
    const Eigen::VectorXd innovation = y - aug.Ce * state.xe_hat - aug.De * u;
    return ObserverState{aug.Ae * state.xe_hat + aug.Be * u + gain.Le * innovation};
}

}  // namespace empc
