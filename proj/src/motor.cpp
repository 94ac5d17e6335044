#include "empc/motor.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "empc/errors.hpp"

namespace empc {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InvalidParameter(std::string(name) + " must be a positive finite number");
    }
}

}  // namespace

FirstOrderModel derive_first_order(const MotorParams& params) {
    if (!(params.km >= 0.0) || !std::isfinite(params.km)) {
        throw InvalidParameter("km must be a non-negative finite number");
    }
    require_positive(params.J, "J");
    require_positive(params.fm, "fm");
    require_positive(params.Ra, "Ra");
    require_positive(params.La, "La");

    // Back-EMF damping km^2/Ra folded into the mechanical friction.
    FirstOrderModel model;
    model.f = params.fm + params.km * params.km / params.Ra;
    model.K = params.km / (params.Ra * model.f);
    model.tau = params.J / model.f;
    return model;
}

CtModel build_ct_model(const FirstOrderModel& model) {
    require_positive(model.tau, "tau");
    if (!(model.K >= 0.0) || !std::isfinite(model.K)) {
        throw InvalidParameter("K must be a non-negative finite number");
    }

    CtModel ct;
    ct.A = Eigen::MatrixXd::Zero(2, 2);
    ct.A(0, 1) = 1.0;
    ct.A(1, 1) = -1.0 / model.tau;
    ct.B = Eigen::MatrixXd::Zero(2, 1);
    ct.B(1, 0) = model.K / model.tau;
    ct.C = Eigen::MatrixXd::Zero(1, 2);
    ct.C(0, 1) = 1.0;
    ct.D = Eigen::MatrixXd::Zero(1, 1);
    return ct;
}

LtiModel discretize_zoh(const CtModel& ct, double Ts) {
    require_positive(Ts, "Ts");
    const Eigen::Index n = ct.A.rows();
    const Eigen::Index l = ct.B.cols();
    if (ct.A.cols() != n || ct.B.rows() != n || ct.C.cols() != n || ct.D.rows() != ct.C.rows() ||
        ct.D.cols() != l) {
        throw DimensionError("inconsistent continuous-time model dimensions");
    }

    // exp([[A, B], [0, 0]] * Ts) = [[Ad, Bd], [0, I]].
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + l, n + l);
    aug.topLeftCorner(n, n) = ct.A * Ts;
    aug.topRightCorner(n, l) = ct.B * Ts;
    const Eigen::MatrixXd e = aug.exp();

    LtiModel dt;
    dt.A = e.topLeftCorner(n, n);
    dt.B = e.topRightCorner(n, l);
    dt.C = ct.C;
    dt.D = ct.D;
    dt.Ts = Ts;
    return dt;
}

PlantStep plant_step(const LtiModel& model, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u, const Eigen::VectorXd& u_dist,
                     const Eigen::VectorXd& noise) {
    const Eigen::Index n = model.A.rows();
    const Eigen::Index l = model.B.cols();
    const Eigen::Index m = model.C.rows();
    if (x.size() != n || u.size() != l || u_dist.size() != l || noise.size() != m) {
        throw DimensionError("plant_step: vector sizes do not match the model");
    }

    PlantStep step;
    step.x_next = model.A * x + model.B * (u + u_dist);
    step.y = model.C * x + model.D * u + noise;
    return step;
}

PlantStep plant_step(const LtiModel& model, const Eigen::VectorXd& x, double u,
                     double u_dist, double noise) {
    Eigen::VectorXd uv(1), dv(1), nv(1);
    uv << u;
    dv << u_dist;
    nv << noise;
    return plant_step(model, x, uv, dv, nv);
}

}  // namespace empc
