#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "hcad/core/error.hpp"
#include "hcad/core/types.hpp"

namespace hcad::tracking {

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateMatrix = Eigen::Matrix<double, 8, 8>;
using MeasVector = Eigen::Matrix<double, 4, 1>;
using MeasMatrix = Eigen::Matrix<double, 4, 4>;

/// Constant-velocity state over (cx, cy, aspect = w/h, h) and their velocities.
struct KalmanState {
    StateVector mean = StateVector::Zero();
    StateMatrix covariance = StateMatrix::Identity();

    BoundingBox box() const {
        const double h = mean(3);
        const double w = mean(2) * h;
        return {mean(0) - 0.5 * w, mean(1) - 0.5 * h, w, h};
    }
};

/// Noise scales relative to box height. Aspect ratio gets fixed absolute noise.
struct KalmanNoise {
    double position_weight = 1.0 / 20.0;
    double velocity_weight = 1.0 / 160.0;
};

inline MeasVector to_measurement(const BoundingBox& b) {
    return {b.center_x(), b.center_y(), b.w / b.h, b.h};
}

inline KalmanState kalman_init(const Detection& d, const KalmanNoise& n = {}) {
    KalmanState s;
    s.mean.head<4>() = to_measurement(d.box);
    const double h = d.box.h;
    StateVector std_dev;
    std_dev << 2 * n.position_weight * h, 2 * n.position_weight * h, 1e-2, 2 * n.position_weight * h,
        10 * n.velocity_weight * h, 10 * n.velocity_weight * h, 1e-5, 10 * n.velocity_weight * h;
    s.covariance = std_dev.array().square().matrix().asDiagonal();
    return s;
}

inline StateMatrix transition_matrix() {
    StateMatrix f = StateMatrix::Identity();
    for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
    return f;
}

inline StateMatrix process_noise(double h, const KalmanNoise& n) {
    StateVector std_dev;
    std_dev << n.position_weight * h, n.position_weight * h, 1e-2, n.position_weight * h, n.velocity_weight * h,
        n.velocity_weight * h, 1e-5, n.velocity_weight * h;
    return std_dev.array().square().matrix().asDiagonal();
}

inline MeasMatrix measurement_noise(double h, const KalmanNoise& n) {
    MeasVector std_dev;
    std_dev << n.position_weight * h, n.position_weight * h, 1e-1, n.position_weight * h;
    return std_dev.array().square().matrix().asDiagonal();
}

/// Advances one frame.
inline KalmanState kalman_predict(const KalmanState& s, const KalmanNoise& n = {}) {
    const StateMatrix f = transition_matrix();
    KalmanState out;
    out.mean = f * s.mean;
    out.covariance = f * s.covariance * f.transpose() + process_noise(s.mean(3), n);
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
    return out;
}

/// Linear-Gaussian correction with the Joseph-form covariance update, which keeps
/// the covariance symmetric PSD under rounding.
inline KalmanState kalman_update(const KalmanState& s, const Detection& d, const KalmanNoise& n = {}) {
    Eigen::Matrix<double, 4, 8> h = Eigen::Matrix<double, 4, 8>::Zero();
    h.leftCols<4>().setIdentity();

    const MeasMatrix r = measurement_noise(s.mean(3), n);
    const MeasMatrix innovation_cov = h * s.covariance * h.transpose() + r;
    Eigen::LLT<MeasMatrix> llt(innovation_cov);
    if (llt.info() != Eigen::Success || !innovation_cov.allFinite()) {
        throw Error(ErrorKind::Numeric, "kalman update: innovation covariance is not positive definite");
    }
    // K = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric.
    const Eigen::Matrix<double, 8, 4> gain = llt.solve(h * s.covariance).transpose();
    const MeasVector innovation = to_measurement(d.box) - h * s.mean;

    KalmanState out;
    out.mean = s.mean + gain * innovation;
    const StateMatrix ikh = StateMatrix::Identity() - gain * h;
    out.covariance = ikh * s.covariance * ikh.transpose() + gain * r * gain.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
    return out;
}

}  // namespace hcad::tracking
