#pragma once

#include <Eigen/Dense>

#include "smctrack/geometry.hpp"

namespace smctrack {

/// Process/measurement noise scales relative to box height, DeepSORT-style.
struct MotionNoiseConfig {
  double position_std_factor = 1.0 / 20.0;
  double velocity_std_factor = 1.0 / 160.0;
};

/// Constant-velocity box state: (cx, cy, a, h, v_cx, v_cy, v_a, v_h) where
/// a is the width/height aspect ratio and h the box height in pixels.
struct KalmanState {
  Eigen::Matrix<double, 8, 1> mean = Eigen::Matrix<double, 8, 1>::Zero();
  Eigen::Matrix<double, 8, 8> covariance = Eigen::Matrix<double, 8, 8>::Zero();
};

KalmanState kf_initiate(const BoundingBox& box, const MotionNoiseConfig& cfg = {});

KalmanState kf_predict(const KalmanState& state, const MotionNoiseConfig& cfg = {});

/// Standard correct step against an observed box. Throws
/// DegenerateFilterError when the innovation covariance is not invertible.
KalmanState kf_update(const KalmanState& state, const BoundingBox& measurement,
                      const MotionNoiseConfig& cfg = {});

/// Inverse of the kf_initiate coordinate conversion.
BoundingBox state_to_box(const KalmanState& state);

}  // namespace smctrack
