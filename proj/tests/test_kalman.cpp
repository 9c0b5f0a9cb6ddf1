#include <doctest.h>

#include <cmath>

#include "smctrack/errors.hpp"
#include "smctrack/kalman.hpp"
#include "smctrack/random.hpp"

using namespace smctrack;

namespace {

KalmanState random_state(Rng& rng) {
  KalmanState state = kf_initiate(
      BoundingBox{rng.uniform(0.0, 500.0), rng.uniform(0.0, 500.0),
                  rng.uniform(10.0, 80.0), rng.uniform(20.0, 160.0)});
  state.mean(4) = rng.uniform(-3.0, 3.0);
  state.mean(5) = rng.uniform(-3.0, 3.0);
  return state;
}

double max_asymmetry(const Eigen::Matrix<double, 8, 8>& p) {
  return (p - p.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("initiate converts the box and zeroes velocities") {
  const KalmanState state = kf_initiate(BoundingBox{0, 0, 10, 20});
  CHECK(state.mean(0) == 5.0);
  CHECK(state.mean(1) == 10.0);
  CHECK(state.mean(2) == 0.5);
  CHECK(state.mean(3) == 20.0);
  for (int i = 4; i < 8; ++i) CHECK(state.mean(i) == 0.0);
}

TEST_CASE("initiate covariance matches the scaling formula") {
  const MotionNoiseConfig cfg;
  const double h = 20.0;
  const KalmanState state = kf_initiate(BoundingBox{0, 0, 10, h}, cfg);

  // Independent re-computation of the documented diagonal.
  const double wp = cfg.position_std_factor;
  const double wv = cfg.velocity_std_factor;
  const double expected[8] = {2 * wp * h, 2 * wp * h, 1e-2, 2 * wp * h,
                              10 * wv * h, 10 * wv * h, 1e-5, 10 * wv * h};
  for (int i = 0; i < 8; ++i) {
    CHECK(state.covariance(i, i) == doctest::Approx(expected[i] * expected[i]));
    for (int j = 0; j < 8; ++j) {
      if (i != j) CHECK(state.covariance(i, j) == 0.0);
    }
  }
}

TEST_CASE("predict advances position by velocity") {
  KalmanState state = kf_initiate(BoundingBox{0, 0, 10, 20});
  state.mean << 5, 10, 0.5, 20, 1, 2, 0, 0;
  const KalmanState next = kf_predict(state);
  CHECK(next.mean(0) == 6.0);
  CHECK(next.mean(1) == 12.0);
  CHECK(next.mean(2) == 0.5);
  CHECK(next.mean(3) == 20.0);
}

TEST_CASE("zero velocity is a fixed point of prediction") {
  const BoundingBox box{40, 60, 30, 90};
  KalmanState state = kf_initiate(box);
  state = kf_predict(state);
  state = kf_predict(state);
  const BoundingBox predicted = state_to_box(state);
  CHECK(predicted.left == doctest::Approx(box.left).epsilon(1e-12));
  CHECK(predicted.top == doctest::Approx(box.top).epsilon(1e-12));
}

TEST_CASE("covariance trace grows under pure prediction") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    KalmanState state = random_state(rng);
    double prev = state.covariance.trace();
    for (int i = 0; i < 10; ++i) {
      state = kf_predict(state);
      const double cur = state.covariance.trace();
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("update with the predicted mean leaves the mean unchanged") {
  KalmanState state = kf_initiate(BoundingBox{100, 100, 40, 80});
  state = kf_predict(state);
  const BoundingBox at_mean = state_to_box(state);
  const KalmanState updated = kf_update(state, at_mean);
  for (int i = 0; i < 8; ++i) {
    CHECK(updated.mean(i) == doctest::Approx(state.mean(i)).epsilon(1e-12));
  }
  CHECK(updated.covariance.trace() <= state.covariance.trace());
}

TEST_CASE("update contracts the covariance trace") {
  Rng rng(88);
  for (int trial = 0; trial < 20; ++trial) {
    KalmanState state = kf_predict(random_state(rng));
    const BoundingBox measurement{state.mean(0) + rng.uniform(-5.0, 5.0),
                                  state.mean(1) + rng.uniform(-5.0, 5.0), 40, 80};
    const KalmanState updated = kf_update(state, measurement);
    CHECK(updated.covariance.trace() <= state.covariance.trace());
  }
}

TEST_CASE("noiseless constant-velocity target is tracked tightly") {
  const double vx = 3.0, vy = -2.0;
  const double w = 40.0, h = 80.0;
  auto truth_at = [&](int t) {
    return BoundingBox::from_center(100.0 + vx * t, 400.0 + vy * t, w, h);
  };

  KalmanState state = kf_initiate(truth_at(0));
  for (int t = 1; t <= 20; ++t) {
    state = kf_predict(state);
    const BoundingBox predicted = state_to_box(state);
    const BoundingBox truth = truth_at(t);
    if (t >= 5) {
      CHECK(iou(predicted, truth) >= 0.9);
    }
    if (t >= 10) {
      CHECK(std::abs(predicted.center_x() - truth.center_x()) < 0.5);
      CHECK(std::abs(predicted.center_y() - truth.center_y()) < 0.5);
    }
    state = kf_update(state, truth);
  }
}

TEST_CASE("covariance stays symmetric over long predict/update runs") {
  Rng rng(99);
  KalmanState state = random_state(rng);
  double worst = 0.0;
  for (int step = 0; step < 1000; ++step) {
    state = kf_predict(state);
    worst = std::max(worst, max_asymmetry(state.covariance));
    if (step % 3 != 0) {
      const BoundingBox measurement{state.mean(0) + rng.uniform(-4.0, 4.0),
                                    state.mean(1) + rng.uniform(-4.0, 4.0),
                                    rng.uniform(20.0, 60.0), rng.uniform(40.0, 120.0)};
      state = kf_update(state, measurement);
      worst = std::max(worst, max_asymmetry(state.covariance));
    }
  }
  CHECK(worst < 1e-9);
  for (int i = 0; i < 8; ++i) CHECK(state.covariance(i, i) >= 0.0);
}

TEST_CASE("prediction is linear in the mean") {
  Rng rng(111);
  for (int trial = 0; trial < 20; ++trial) {
    const KalmanState a = random_state(rng);
    KalmanState b = random_state(rng);
    b.covariance = a.covariance;

    KalmanState mixed = a;
    mixed.mean = 0.5 * (a.mean + b.mean);

    const auto pa = kf_predict(a);
    const auto pb = kf_predict(b);
    const auto pm = kf_predict(mixed);
    for (int i = 0; i < 8; ++i) {
      CHECK(pm.mean(i) == doctest::Approx(0.5 * (pa.mean(i) + pb.mean(i))).epsilon(1e-12));
    }
  }
}

TEST_CASE("state/box round trip") {
  CHECK(state_to_box(kf_initiate(BoundingBox{0, 0, 10, 20})).left == 0.0);

  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const BoundingBox box{rng.uniform(-100.0, 900.0), rng.uniform(-100.0, 900.0),
                          rng.uniform(0.5, 200.0), rng.uniform(0.5, 200.0)};
    const BoundingBox back = state_to_box(kf_initiate(box));
    CHECK(back.left == doctest::Approx(box.left).epsilon(1e-9));
    CHECK(back.top == doctest::Approx(box.top).epsilon(1e-9));
    CHECK(back.width == doctest::Approx(box.width).epsilon(1e-9));
    CHECK(back.height == doctest::Approx(box.height).epsilon(1e-9));
    CHECK(back.valid());
  }
}

TEST_CASE("degenerate states are reported") {
  KalmanState state = kf_initiate(BoundingBox{0, 0, 10, 20});
  state.mean(2) = -0.5;
  CHECK_THROWS_AS(state_to_box(state), DegenerateStateError);

  state = kf_initiate(BoundingBox{0, 0, 10, 20});
  state.mean(3) = 0.0;
  CHECK_THROWS_AS(state_to_box(state), DegenerateStateError);

  KalmanState broken = kf_initiate(BoundingBox{0, 0, 10, 20});
  broken.covariance = -1e9 * Eigen::Matrix<double, 8, 8>::Identity();
  CHECK_THROWS_AS(kf_update(broken, BoundingBox{0, 0, 10, 20}), DegenerateFilterError);
}
