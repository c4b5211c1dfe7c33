#pragma once

#include <array>

#include <Eigen/Core>

#include "uotkit/geometry.hpp"

namespace uotkit {

using StateVector = Eigen::Matrix<double, 7, 1>;
using StateCovariance = Eigen::Matrix<double, 7, 7>;
using Observation = Eigen::Matrix<double, 4, 1>;

/// Noise settings of the constant-velocity box filter. Entries are in the
/// state's native units; the init entries marked "x s" are multiplied by the
/// initial scale (box area).
struct KalmanConfig {
    // [u, v, s (x s), r, u', v', s' (x s)]
    std::array<double, 7> init_covariance = {10.0, 10.0, 10.0, 1e-2, 1e4, 1e4, 1e4};
    std::array<double, 7> process_noise = {1.0, 1.0, 1.0, 1e-2, 1e-2, 1e-2, 1e-4};
    // [u, v, s, r]
    std::array<double, 4> measurement_noise = {1.0, 1.0, 10.0, 1e-1};
};

/// Mean [u, v, s, r, u', v', s']: center x/y in px, scale = area in px^2,
/// aspect ratio w/h, and the velocities of u, v, s. r has no velocity.
struct KalmanState {
    StateVector mean = StateVector::Zero();
    StateCovariance covariance = StateCovariance::Zero();
};

Observation box_to_observation(const BoundingBox& box);
BoundingBox state_to_box(const StateVector& mean);

StateCovariance transition_matrix();

/// Throws Error(kInvalidInit) for a degenerate or non-finite box.
KalmanState kf_init(const BoundingBox& box, const KalmanConfig& config = {});

struct KalmanPrediction {
    KalmanState state;
    BoundingBox box;  // decoded predicted mean
};

/// x' = F x, P' = F P F^T + Q. A non-positive predicted scale is reset to the
/// previous one with its velocity zeroed.
KalmanPrediction kf_predict(const KalmanState& state, const KalmanConfig& config = {});

/// Standard correction with z = [cx, cy, w*h, w/h]. The posterior covariance
/// uses the Joseph form (I - KH) P (I - KH)^T + K R K^T and is symmetrised.
/// Throws Error(kInvalidObservation) for a degenerate box.
KalmanState kf_update(const KalmanState& state, const BoundingBox& box, const KalmanConfig& config = {});

}  // namespace uotkit
