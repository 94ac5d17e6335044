#include "empc/augment.hpp"

#include <algorithm>

#include <Eigen/SVD>

#include "empc/errors.hpp"

namespace empc {

DisturbanceModel output_disturbance_model(int n, int m, int p) {
    if (n < 1 || m < 1 || p < 1) {
        throw InvalidParameter("output_disturbance_model: n, m, p must be >= 1");
    }
    DisturbanceModel dist;
    dist.Bd = Eigen::MatrixXd::Zero(n, p);
    dist.Cd = Eigen::MatrixXd::Zero(m, p);
    // One offset state per output; extra outputs beyond p see no offset.
    for (int i = 0; i < std::min(m, p); ++i) dist.Cd(i, i) = 1.0;
    return dist;
}

AugmentedModel augment(const LtiModel& model, const DisturbanceModel& dist) {
    const Eigen::Index n = model.A.rows();
    const Eigen::Index l = model.B.cols();
    const Eigen::Index m = model.C.rows();
    const Eigen::Index p = dist.Bd.cols();
    if (model.A.cols() != n || model.B.rows() != n || model.C.cols() != n) {
        throw DimensionError("augment: inconsistent plant dimensions");
    }
    if (p < 1) {
        throw InvalidParameter("augment: disturbance dimension must be >= 1");
    }
    if (dist.Bd.rows() != n || dist.Cd.rows() != m || dist.Cd.cols() != p) {
        throw DimensionError("augment: disturbance matrices must be n x p and m x p");
    }

    AugmentedModel aug;
    aug.n = static_cast<int>(n);
    aug.p = static_cast<int>(p);
    aug.Ts = model.Ts;

    aug.Ae = Eigen::MatrixXd::Zero(n + p, n + p);
    aug.Ae.topLeftCorner(n, n) = model.A;
    aug.Ae.topRightCorner(n, p) = dist.Bd;
    aug.Ae.bottomRightCorner(p, p) = Eigen::MatrixXd::Identity(p, p);

    aug.Be = Eigen::MatrixXd::Zero(n + p, l);
    aug.Be.topRows(n) = model.B;

    aug.Ce = Eigen::MatrixXd::Zero(m, n + p);
    aug.Ce.leftCols(n) = model.C;
    aug.Ce.rightCols(p) = dist.Cd;

    aug.De = model.D;
    return aug;
}

Eigen::MatrixXd observability_matrix(const AugmentedModel& aug) {
    const int ne = aug.size();
    const Eigen::Index m = aug.Ce.rows();
    Eigen::MatrixXd obs(m * ne, ne);
    Eigen::MatrixXd block = aug.Ce;
    for (int k = 0; k < ne; ++k) {
        obs.middleRows(k * m, m) = block;
        block = block * aug.Ae;
    }
    return obs;
}

ObservabilityReport check_offset_free_observability(const AugmentedModel& aug) {
    const Eigen::MatrixXd obs = observability_matrix(aug);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(obs);
    const Eigen::VectorXd sing = svd.singularValues();
    const double threshold = 1e-9 * std::max(1.0, sing.size() > 0 ? sing(0) : 0.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sing.size(); ++i) {
        if (sing(i) > threshold) ++rank;
    }

    ObservabilityReport report;
    report.rank = rank;
    report.required = aug.size();
    report.observable = (rank == report.required);
    return report;
}

}  // namespace empc
