#include "smctrack/kalman.hpp"

#include <cmath>

#include "smctrack/errors.hpp"

namespace smctrack {

namespace {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat48 = Eigen::Matrix<double, 4, 8>;

Mat8 transition_matrix() {
  Mat8 f = Mat8::Identity();
  for (int i = 0; i < 4; ++i) {
    f(i, i + 4) = 1.0;
  }
  return f;
}

Vec4 measurement_of(const BoundingBox& box) {
  return Vec4(box.center_x(), box.center_y(), box.aspect_ratio(), box.height);
}

void symmetrize(Mat8& p) {
  p = 0.5 * (p + p.transpose()).eval();
}

}  // namespace

KalmanState kf_initiate(const BoundingBox& box, const MotionNoiseConfig& cfg) {
  KalmanState state;
  state.mean.head<4>() = measurement_of(box);

  const double h = box.height;
  Vec8 std;
  std << 2.0 * cfg.position_std_factor * h, 2.0 * cfg.position_std_factor * h, 1e-2,
      2.0 * cfg.position_std_factor * h, 10.0 * cfg.velocity_std_factor * h,
      10.0 * cfg.velocity_std_factor * h, 1e-5, 10.0 * cfg.velocity_std_factor * h;
  state.covariance = std.cwiseProduct(std).asDiagonal();
  return state;
}

KalmanState kf_predict(const KalmanState& state, const MotionNoiseConfig& cfg) {
  const double h = state.mean(3);
  Vec8 std;
  std << cfg.position_std_factor * h, cfg.position_std_factor * h, 1e-2,
      cfg.position_std_factor * h, cfg.velocity_std_factor * h,
      cfg.velocity_std_factor * h, 1e-5, cfg.velocity_std_factor * h;
  const Mat8 process_noise = std.cwiseProduct(std).asDiagonal();

  const Mat8 f = transition_matrix();
  KalmanState next;
  next.mean = f * state.mean;
  next.covariance = f * state.covariance * f.transpose() + process_noise;
  symmetrize(next.covariance);
  return next;
}

KalmanState kf_update(const KalmanState& state, const BoundingBox& measurement,
                      const MotionNoiseConfig& cfg) {
  const double h = state.mean(3);
  Vec4 std;
  std << cfg.position_std_factor * h, cfg.position_std_factor * h, 1e-1,
      cfg.position_std_factor * h;
  const Mat4 measurement_noise = std.cwiseProduct(std).asDiagonal();

  Mat48 obs = Mat48::Zero();
  obs.block<4, 4>(0, 0) = Mat4::Identity();

  const Mat4 innovation_cov =
      obs * state.covariance * obs.transpose() + measurement_noise;
  const Eigen::LLT<Mat4> llt(innovation_cov);
  if (llt.info() != Eigen::Success) {
    throw DegenerateFilterError("innovation covariance is not positive definite");
  }

  // K = P H^T S^-1, computed as the solution of S K^T = H P.
  const Eigen::Matrix<double, 8, 4> gain =
      llt.solve(obs * state.covariance).transpose();

  const Vec4 innovation = measurement_of(measurement) - obs * state.mean;

  KalmanState next;
  next.mean = state.mean + gain * innovation;

  // Joseph form keeps the posterior covariance symmetric PSD.
  const Mat8 closure = Mat8::Identity() - gain * obs;
  next.covariance = closure * state.covariance * closure.transpose() +
                    gain * measurement_noise * gain.transpose();
  symmetrize(next.covariance);
  return next;
}

BoundingBox state_to_box(const KalmanState& state) {
  const double aspect = state.mean(2);
  const double h = state.mean(3);
  if (!(aspect > 0.0) || !(h > 0.0)) {
    throw DegenerateStateError("state has non-positive aspect ratio or height");
  }
  return BoundingBox::from_center(state.mean(0), state.mean(1), aspect * h, h);
}

}  // namespace smctrack
