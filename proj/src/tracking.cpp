#include "linetrace/tracking.hpp"

#include <cmath>

#include "linetrace/error.hpp"

namespace linetrace {

void KalmanModel::validate() const {
  const auto n = A.rows();
  const auto m = H.rows();
  const bool ok = n > 0 && m > 0 && A.cols() == n && B.rows() == n &&
                  H.cols() == n && Q.rows() == n && Q.cols() == n &&
                  R.rows() == m && R.cols() == m;
  if (!ok) {
    throw Error(ErrorKind::kInvalidArgument,
                "kalman model matrices have inconsistent dimensions");
  }
}

KalmanState predict(const KalmanState& state, const KalmanModel& model,
                    const Eigen::VectorXd& u) {
  model.validate();
  const auto n = model.state_dim();
  if (state.x_hat.size() != n || state.P.rows() != n || state.P.cols() != n ||
      u.size() != model.B.cols()) {
    throw Error(ErrorKind::kInvalidArgument,
                "kalman predict: state or control dimension mismatch");
  }
  KalmanState next = state;
  next.x_hat_prior = model.A * state.x_hat + model.B * u;
  next.P_prior = model.A * state.P * model.A.transpose() + model.Q;
  return next;
}

KalmanState predict(const KalmanState& state, const KalmanModel& model) {
  return predict(state, model, Eigen::VectorXd::Zero(model.B.cols()));
}

KalmanState update(const KalmanState& state, const KalmanModel& model,
                   const Eigen::VectorXd& z) {
  model.validate();
  const auto n = model.state_dim();
  const auto m = model.measurement_dim();
  if (state.x_hat_prior.size() != n || state.P_prior.rows() != n ||
      state.P_prior.cols() != n || z.size() != m) {
    throw Error(ErrorKind::kInvalidArgument,
                "kalman update: state or measurement dimension mismatch");
  }

  const Eigen::MatrixXd& H = model.H;
  const Eigen::MatrixXd PHt = state.P_prior * H.transpose();
  const Eigen::MatrixXd S = H * PHt + model.R;

  Eigen::MatrixXd gain;
  if (m == 2) {
    const double det = S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
    const double scale = std::fabs(S(0, 0) * S(1, 1)) + std::fabs(S(0, 1) * S(1, 0));
    if (!std::isfinite(det) || std::fabs(det) <= 1e-12 * scale || scale == 0.0) {
      throw Error(ErrorKind::kNumeric,
                  "innovation covariance S is singular and cannot be inverted");
    }
    Eigen::Matrix2d S_inv;
    S_inv << S(1, 1), -S(0, 1), -S(1, 0), S(0, 0);
    S_inv /= det;
    gain = PHt * S_inv;
  } else {
    const Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::kNumeric,
                  "innovation covariance S is not positive definite");
    }
    // K = P H^T S^-1  <=>  S K^T = H P^T
    gain = llt.solve(PHt.transpose()).transpose();
  }

  KalmanState next = state;
  next.last_gain = gain;
  next.x_hat = state.x_hat_prior + gain * (z - H * state.x_hat_prior);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd P = (I - gain * H) * state.P_prior;
  next.P = 0.5 * (P + P.transpose());
  return next;
}

void TrackerConfig::validate() const {
  if (!(dt > 0.0) || !(q >= 0.0) || !(r_x > 0.0) || !(r_y > 0.0) ||
      !(p0_pos >= 0.0) || !(p0_vel >= 0.0) || max_coast < 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "tracker config: dt, r must be > 0; q, p0 >= 0; max_coast >= 0");
  }
}

KalmanModel constant_velocity_model(const TrackerConfig& cfg) {
  cfg.validate();
  const double dt = cfg.dt;
  KalmanModel model;
  model.A = Eigen::MatrixXd::Identity(4, 4);
  model.A(0, 2) = dt;
  model.A(1, 3) = dt;
  model.B = Eigen::MatrixXd::Zero(4, 1);
  model.H = Eigen::MatrixXd::Zero(2, 4);
  model.H(0, 0) = 1.0;
  model.H(1, 1) = 1.0;

  const double dt2 = dt * dt;
  model.Q = Eigen::MatrixXd::Zero(4, 4);
  for (int axis = 0; axis < 2; ++axis) {
    const int p = axis;
    const int v = axis + 2;
    model.Q(p, p) = cfg.q * dt2 * dt2 / 4.0;
    model.Q(p, v) = cfg.q * dt2 * dt / 2.0;
    model.Q(v, p) = model.Q(p, v);
    model.Q(v, v) = cfg.q * dt2;
  }
  model.R = Eigen::MatrixXd::Zero(2, 2);
  model.R(0, 0) = cfg.r_x;
  model.R(1, 1) = cfg.r_y;
  return model;
}

CentroidTrack init_from(const Centroid& measurement, const TrackerConfig& cfg) {
  CentroidTrack track;
  track.model = constant_velocity_model(cfg);
  track.max_coast = cfg.max_coast;
  track.dt = cfg.dt;
  track.coast_count = 0;

  KalmanState& s = track.state;
  s.x_hat = Eigen::VectorXd::Zero(4);
  s.x_hat(0) = measurement.cx;
  s.x_hat(1) = measurement.cy;
  s.x_hat_prior = s.x_hat;
  s.P = Eigen::VectorXd(Eigen::Vector4d(cfg.p0_pos, cfg.p0_pos, cfg.p0_vel,
                                        cfg.p0_vel))
            .asDiagonal();
  s.P_prior = s.P;
  s.last_gain = Eigen::MatrixXd::Zero(4, 2);
  return track;
}

TrackedCentroid current_output(const CentroidTrack& track,
                               const std::optional<Centroid>& raw) {
  TrackedCentroid out;
  out.cx = track.state.x_hat(0);
  out.cy = track.state.x_hat(1);
  out.raw = raw;
  out.valid = track.coast_count <= track.max_coast;
  return out;
}

TrackStep track_step(const CentroidTrack& track,
                     const std::optional<Centroid>& measurement) {
  TrackStep step{track, {}};
  CentroidTrack& next = step.track;
  next.state = predict(track.state, track.model);
  if (measurement) {
    next.state = update(next.state, track.model,
                        Eigen::Vector2d(measurement->cx, measurement->cy));
    next.coast_count = 0;
  } else {
    next.state.x_hat = next.state.x_hat_prior;
    next.state.P = next.state.P_prior;
    next.coast_count = track.coast_count + 1;
  }
  step.output = current_output(next, measurement);
  return step;
}

TrackedCentroid follow(std::optional<CentroidTrack>& track,
                       const std::optional<Centroid>& raw,
                       const TrackerConfig& cfg) {
  const bool lost = track && track->coast_count > track->max_coast;
  if (raw && (!track || lost)) {
    track = init_from(*raw, cfg);
    return current_output(*track, raw);
  }
  if (track) {
    TrackStep step = track_step(*track, raw);
    track = std::move(step.track);
    return step.output;
  }
  TrackedCentroid out;
  out.raw = raw;
  return out;
}

}  // namespace linetrace
