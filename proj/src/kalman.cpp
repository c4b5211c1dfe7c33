#include "uotkit/kalman.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "uotkit/error.hpp"

namespace uotkit {

namespace {

using ObservationMatrix = Eigen::Matrix<double, 4, 7>;

ObservationMatrix observation_matrix() {
    ObservationMatrix h = ObservationMatrix::Zero();
    h.leftCols<4>().setIdentity();
    return h;
}

bool usable(const BoundingBox& box) { return box.is_finite() && !box.is_degenerate(); }

}  // namespace

Observation box_to_observation(const BoundingBox& box) {
    Observation z;
    z << box.center_x(), box.center_y(), box.w * box.h, box.w / box.h;
    return z;
}

BoundingBox state_to_box(const StateVector& mean) {
    const double s = mean(2);
    const double r = mean(3);
    if (!(s > 0.0) || !(r > 0.0)) {
        return {mean(0), mean(1), 0.0, 0.0};
    }
    const double w = std::sqrt(s * r);
    const double h = s / w;
    return BoundingBox::from_center(mean(0), mean(1), w, h);
}

StateCovariance transition_matrix() {
    StateCovariance f = StateCovariance::Identity();
    f(0, 4) = 1.0;
    f(1, 5) = 1.0;
    f(2, 6) = 1.0;
    return f;
}

KalmanState kf_init(const BoundingBox& box, const KalmanConfig& config) {
    if (!usable(box)) {
        throw Error(ErrorCode::kInvalidInit, "Kalman filter needs a finite box with positive size to initialise");
    }
    KalmanState st;
    st.mean.head<4>() = box_to_observation(box);
    const double s = st.mean(2);
    for (int i = 0; i < 7; ++i) {
        double v = config.init_covariance[static_cast<std::size_t>(i)];
        if (i == 2 || i == 6) {
            v *= s;
        }
        st.covariance(i, i) = v;
    }
    return st;
}

KalmanPrediction kf_predict(const KalmanState& state, const KalmanConfig& config) {
    const StateCovariance f = transition_matrix();
    KalmanPrediction out;
    out.state.mean = f * state.mean;
    if (out.state.mean(2) <= 0.0) {
        out.state.mean(2) = state.mean(2);
        out.state.mean(6) = 0.0;
    }
    out.state.covariance = f * state.covariance * f.transpose();
    for (int i = 0; i < 7; ++i) {
        out.state.covariance(i, i) += config.process_noise[static_cast<std::size_t>(i)];
    }
    out.box = state_to_box(out.state.mean);
    return out;
}

KalmanState kf_update(const KalmanState& state, const BoundingBox& box, const KalmanConfig& config) {
    if (!usable(box)) {
        throw Error(ErrorCode::kInvalidObservation, "Kalman update needs a finite box with positive size");
    }
    const ObservationMatrix h = observation_matrix();
    Eigen::Matrix4d s = h * state.covariance * h.transpose();
    for (int i = 0; i < 4; ++i) {
        s(i, i) += config.measurement_noise[static_cast<std::size_t>(i)];
    }
    const Eigen::Matrix<double, 4, 7> hp = h * state.covariance;
    // K = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric.
    const Eigen::Matrix<double, 7, 4> gain = s.ldlt().solve(hp).transpose();
    const Observation residual = box_to_observation(box) - h * state.mean;

    KalmanState out;
    out.mean = state.mean + gain * residual;
    const StateCovariance ikh = StateCovariance::Identity() - gain * h;
    Eigen::Matrix4d r = Eigen::Matrix4d::Zero();
    for (int i = 0; i < 4; ++i) {
        r(i, i) = config.measurement_noise[static_cast<std::size_t>(i)];
    }
    out.covariance = ikh * state.covariance * ikh.transpose() + gain * r * gain.transpose();
    out.covariance = (0.5 * (out.covariance + out.covariance.transpose())).eval();
    return out;
}

}  // namespace uotkit
