#pragma once

#include <Eigen/Dense>
#include <optional>

#include "linetrace/detection.hpp"

namespace linetrace {

// Linear-Gaussian model x' = A x + B u + w, z = H x + v with
// w ~ N(0, Q) and v ~ N(0, R).
struct KalmanModel {
  Eigen::MatrixXd A;  // n x n
  Eigen::MatrixXd B;  // n x 1
  Eigen::MatrixXd H;  // m x n
  Eigen::MatrixXd Q;  // n x n
  Eigen::MatrixXd R;  // m x m

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index measurement_dim() const { return H.rows(); }

  // Throws Error(kInvalidArgument) on inconsistent dimensions.
  void validate() const;
};

struct KalmanState {
  Eigen::VectorXd x_hat;        // posterior estimate
  Eigen::VectorXd x_hat_prior;  // prior estimate
  Eigen::MatrixXd P;            // posterior error covariance
  Eigen::MatrixXd P_prior;      // prior error covariance
  Eigen::MatrixXd last_gain;    // n x m gain of the latest update
};

// Time update: x_prior = A x_hat + B u, P_prior = A P A^T + Q. Posterior
// fields are carried through unchanged.
KalmanState predict(const KalmanState& state, const KalmanModel& model,
                    const Eigen::VectorXd& u);
KalmanState predict(const KalmanState& state, const KalmanModel& model);

// Measurement update against the prior:
//   K = P_prior H^T (H P_prior H^T + R)^-1
//   x_hat = x_prior + K (z - H x_prior)
//   P = (I - K H) P_prior, then symmetrised.
// Throws Error(kNumeric) when the innovation covariance is not invertible.
KalmanState update(const KalmanState& state, const KalmanModel& model,
                   const Eigen::VectorXd& z);

struct TrackerConfig {
  double dt = 0.1;        // seconds per frame
  double q = 1.0;         // white-noise acceleration intensity, px^2/s^4
  double r_x = 25.0;      // measurement variance, px^2
  double r_y = 25.0;
  double p0_pos = 100.0;  // px^2
  double p0_vel = 1000.0; // (px/s)^2
  int max_coast = 15;     // frames

  void validate() const;
};

// State (cx, cy, vx, vy), measurement (cx, cy), B = 0.
KalmanModel constant_velocity_model(const TrackerConfig& cfg);

struct CentroidTrack {
  KalmanState state;
  KalmanModel model;
  int coast_count = 0;
  int max_coast = 15;
  double dt = 0.1;
};

struct TrackedCentroid {
  double cx = 0.0;
  double cy = 0.0;
  std::optional<Centroid> raw;
  bool valid = false;
};

CentroidTrack init_from(const Centroid& measurement, const TrackerConfig& cfg);

// Filtered output of a track as it stands, tagged with this frame's raw
// measurement.
TrackedCentroid current_output(const CentroidTrack& track,
                               const std::optional<Centroid>& raw);

struct TrackStep {
  CentroidTrack track;
  TrackedCentroid output;
};

// Always predicts. A present measurement is fused and resets the coast
// counter; an absent one promotes the prior to the posterior and coasts.
TrackStep track_step(const CentroidTrack& track,
                     const std::optional<Centroid>& measurement);

// Frame-loop policy on top of track_step: a measurement starts a new track
// when there is none or the old one coasted past max_coast. With no track at
// all the output is invalid and carries only `raw`.
TrackedCentroid follow(std::optional<CentroidTrack>& track,
                       const std::optional<Centroid>& raw,
                       const TrackerConfig& cfg);

}  // namespace linetrace
