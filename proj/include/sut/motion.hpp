#pragma once

// Motion filtering for the tracker: an unscented Kalman filter over a
// constant-turn-rate body model, a scalar confidence filter, and a linear
// constant-velocity baseline selectable at runtime.
//
// The unscented machinery is generic over the transition and measurement
// functions; the tracker binds it to the 8-state layout below. Components
// flagged as angles are averaged circularly and their residuals wrapped, so
// a cloud of sigma points straddling the +/-pi seam produces a sane mean.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sut/errors.hpp"
#include "sut/geometry.hpp"

namespace sut {

/// Gaussian belief: mean and covariance of any dimension.
struct StateEstimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Index layout of the tracker's motion state.
namespace state {
inline constexpr int kCx = 0;        ///< box center x, px
inline constexpr int kCy = 1;        ///< box center y, px
inline constexpr int kSpeed = 2;     ///< px/frame along the heading
inline constexpr int kHeading = 3;   ///< rad, wrapped to (-pi, pi]
inline constexpr int kTurnRate = 4;  ///< rad/frame
inline constexpr int kArea = 5;      ///< box area, px^2
inline constexpr int kAreaRate = 6;  ///< px^2/frame
inline constexpr int kAspect = 7;    ///< box width/height
inline constexpr int kDim = 8;
inline constexpr int kMeasDim = 4;   ///< measured: [cx, cy, area, aspect]
}  // namespace state

/// Post-update floors keeping box reconstruction finite.
inline constexpr double kMinArea = 1.0;
inline constexpr double kMinAspect = 0.05;
inline constexpr double kMaxAspect = 20.0;

/// Below this turn rate the arc equations degenerate and the transition
/// falls back to straight-line motion.
inline constexpr double kStraightTurnEps = 1e-6;

/// Maps any angle to (-pi, pi].
inline double wrap_angle(double rad) {
  double r = std::remainder(rad, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r = std::numbers::pi;
  return r;
}

/// Sigma-point scaling and the per-step noise. alpha_spread and kappa set
/// the spread via lambda = alpha^2 (n + kappa) - n; beta_prior enters only
/// the central covariance weight. kappa defaults to 3 - n for the 8-state
/// layout and must be adjusted for other dimensions so that n + lambda > 0.
struct UkfParams {
  double alpha_spread = 1.0;
  double beta_prior = 2.0;
  double kappa = 3.0 - state::kDim;
  Eigen::MatrixXd process_noise;      // Q, added after propagation
  Eigen::MatrixXd measurement_noise;  // R, added to the innovation covariance
};

/// 2n+1 sigma points (one per column) with their mean and covariance weights.
struct SigmaSet {
  Eigen::MatrixXd points;
  Eigen::VectorXd mean_weights;
  Eigen::VectorXd cov_weights;
};

/// Projects a symmetric matrix back onto the PSD cone: symmetrize, then clamp
/// eigenvalues to a small floor proportional to the mean diagonal magnitude.
/// PSD inputs pass through unchanged up to symmetrization.
inline Eigen::MatrixXd psd_repair(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) {
    throw NumericalError("psd_repair: covariance has non-finite entries");
  }
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) {
    throw NumericalError("psd_repair: eigendecomposition failed");
  }
  const double floor =
      std::max(0.0, 1e-9 * sym.trace() / static_cast<double>(sym.rows()));
  if (es.eigenvalues().minCoeff() >= floor) return sym;
  const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(floor);
  return es.eigenvectors() * clamped.asDiagonal() *
         es.eigenvectors().transpose();
}

namespace detail {

// Lower-triangular-style square root: plain Cholesky first, Cholesky of the
// repaired matrix second, and a pivoted LDLT with clamped diagonal for
// PSD-but-singular matrices (e.g. a zero covariance) last.
inline Eigen::MatrixXd covariance_sqrt(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) {
    throw NumericalError("covariance_sqrt: non-finite covariance");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const Eigen::MatrixXd repaired = psd_repair(m);
  llt.compute(repaired);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(repaired);
  if (ldlt.info() != Eigen::Success) {
    throw NumericalError("covariance_sqrt: factorization failed after repair");
  }
  const Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd l = ldlt.matrixL();
  return ldlt.transpositionsP().transpose() *
         Eigen::MatrixXd(l * d.asDiagonal());
}

}  // namespace detail

/// Deterministic sample of 2n+1 points around the estimate: the mean plus a
/// +/- pair along each column of the scaled covariance square root.
inline SigmaSet generate_sigma_points(const StateEstimate& e,
                                      const UkfParams& p) {
  const int n = static_cast<int>(e.mean.size());
  if (n == 0 || e.cov.rows() != n || e.cov.cols() != n) {
    throw std::invalid_argument("generate_sigma_points: dimension mismatch");
  }
  const double a2 = p.alpha_spread * p.alpha_spread;
  const double lambda = a2 * (n + p.kappa) - n;
  const double scale = n + lambda;
  if (!(scale > 0.0)) {
    throw std::invalid_argument(
        "generate_sigma_points: n + lambda must be positive");
  }
  const Eigen::MatrixXd root = detail::covariance_sqrt(scale * e.cov);

  SigmaSet s;
  s.points.resize(n, 2 * n + 1);
  s.points.col(0) = e.mean;
  for (int i = 0; i < n; ++i) {
    s.points.col(1 + i) = e.mean + root.col(i);
    s.points.col(1 + n + i) = e.mean - root.col(i);
  }
  s.mean_weights = Eigen::VectorXd::Constant(2 * n + 1, 0.5 / scale);
  s.cov_weights = s.mean_weights;
  s.mean_weights(0) = lambda / scale;
  s.cov_weights(0) = lambda / scale + (1.0 - a2 + p.beta_prior);
  return s;
}

/// Constant-turn-rate transition over the 8-state layout: the center moves
/// along a circular arc (straight line below kStraightTurnEps), heading
/// integrates the turn rate, area integrates its rate; speed, turn rate,
/// area rate and aspect persist.
inline Eigen::VectorXd ctrv_transition(const Eigen::VectorXd& x, double dt) {
  using namespace state;
  Eigen::VectorXd out = x;
  const double v = x(kSpeed);
  const double th = x(kHeading);
  const double om = x(kTurnRate);
  if (std::abs(om) < kStraightTurnEps) {
    out(kCx) += v * std::cos(th) * dt;
    out(kCy) += v * std::sin(th) * dt;
  } else {
    out(kCx) += v / om * (std::sin(th + om * dt) - std::sin(th));
    out(kCy) += v / om * (std::cos(th) - std::cos(th + om * dt));
  }
  out(kHeading) = wrap_angle(th + om * dt);
  out(kArea) += x(kAreaRate) * dt;
  return out;
}

/// Observation function of the 8-state layout.
inline Eigen::Vector4d measure(const Eigen::VectorXd& x) {
  using namespace state;
  return {x(kCx), x(kCy), x(kArea), x(kAspect)};
}

inline Eigen::Vector4d box_to_measurement(const BoundingBox& b) {
  return {b.center_x(), b.center_y(), b.area(), b.aspect()};
}

/// Rebuilds an axis-aligned box from [cx, cy, area, aspect], flooring the
/// scale components so a degenerate filter state cannot emit an invalid box.
inline BoundingBox measurement_to_box(const Eigen::Vector4d& z) {
  const double a = std::max(z(2), kMinArea);
  const double r = std::clamp(z(3), kMinAspect, kMaxAspect);
  const double w = std::sqrt(a * r);
  const double h = std::sqrt(a / r);
  return {z(0) - 0.5 * w, z(1) - 0.5 * h, z(0) + 0.5 * w, z(1) + 0.5 * h};
}

using TransitionFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)>;
using MeasureFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

namespace detail {

// Weighted mean of sigma points; angle components use the atan2 of the
// weighted sine/cosine sums instead of the arithmetic mean.
inline Eigen::VectorXd sigma_mean(const Eigen::MatrixXd& pts,
                                  const Eigen::VectorXd& w,
                                  const std::vector<int>& angles) {
  Eigen::VectorXd mean = pts * w;
  for (const int k : angles) {
    double s = 0.0;
    double c = 0.0;
    for (int i = 0; i < pts.cols(); ++i) {
      s += w(i) * std::sin(pts(k, i));
      c += w(i) * std::cos(pts(k, i));
    }
    mean(k) = std::atan2(s, c);
  }
  return mean;
}

inline Eigen::MatrixXd sigma_deviations(const Eigen::MatrixXd& pts,
                                        const Eigen::VectorXd& mean,
                                        const std::vector<int>& angles) {
  Eigen::MatrixXd dev = pts.colwise() - mean;
  for (const int k : angles) {
    for (int i = 0; i < dev.cols(); ++i) dev(k, i) = wrap_angle(dev(k, i));
  }
  return dev;
}

}  // namespace detail

/// Unscented prediction through an arbitrary transition; angle_components
/// lists state indices needing circular treatment.
inline StateEstimate ukf_predict(const StateEstimate& e, const UkfParams& p,
                                 double dt, const TransitionFn& f,
                                 const std::vector<int>& angle_components) {
  const SigmaSet s = generate_sigma_points(e, p);
  Eigen::MatrixXd propagated(e.mean.size(), s.points.cols());
  for (int i = 0; i < s.points.cols(); ++i) {
    propagated.col(i) = f(s.points.col(i), dt);
  }
  const Eigen::VectorXd mean =
      detail::sigma_mean(propagated, s.mean_weights, angle_components);
  const Eigen::MatrixXd dev =
      detail::sigma_deviations(propagated, mean, angle_components);
  Eigen::MatrixXd cov =
      dev * s.cov_weights.asDiagonal() * dev.transpose() + p.process_noise;
  cov = 0.5 * (cov + cov.transpose()).eval();
  return {mean, cov};
}

/// Unscented measurement update through an arbitrary observation function.
/// Throws NumericalError when the innovation covariance cannot be solved.
inline StateEstimate ukf_update(const StateEstimate& predicted,
                                const Eigen::VectorXd& z, const UkfParams& p,
                                const MeasureFn& h,
                                const std::vector<int>& angle_components) {
  const SigmaSet s = generate_sigma_points(predicted, p);
  const int m = static_cast<int>(z.size());
  Eigen::MatrixXd projected(m, s.points.cols());
  for (int i = 0; i < s.points.cols(); ++i) {
    projected.col(i) = h(s.points.col(i));
  }
  const Eigen::VectorXd z_hat =
      detail::sigma_mean(projected, s.mean_weights, {});
  const Eigen::MatrixXd z_dev = projected.colwise() - z_hat;
  const Eigen::MatrixXd x_dev =
      detail::sigma_deviations(s.points, predicted.mean, angle_components);

  const Eigen::MatrixXd innovation_cov =
      (z_dev * s.cov_weights.asDiagonal() * z_dev.transpose() +
       p.measurement_noise);
  const Eigen::MatrixXd cross_cov =
      x_dev * s.cov_weights.asDiagonal() * z_dev.transpose();

  const Eigen::LLT<Eigen::MatrixXd> llt(
      0.5 * (innovation_cov + innovation_cov.transpose()).eval());
  if (llt.info() != Eigen::Success) {
    throw NumericalError("ukf_update: innovation covariance is singular");
  }
  const Eigen::MatrixXd gain = llt.solve(cross_cov.transpose()).transpose();

  StateEstimate out;
  out.mean = predicted.mean + gain * (z - z_hat);
  out.cov = psd_repair(predicted.cov -
                       gain * innovation_cov * gain.transpose());
  return out;
}

/// Prediction bound to the 8-state turn-rate model.
inline StateEstimate predict(const StateEstimate& e, const UkfParams& p,
                             double dt = 1.0) {
  return ukf_predict(e, p, dt, ctrv_transition, {state::kHeading});
}

/// Measurement update bound to the 8-state layout: wraps the heading and
/// floors area/aspect afterwards.
inline StateEstimate update(const StateEstimate& predicted,
                            const Eigen::Vector4d& z, const UkfParams& p) {
  StateEstimate out = ukf_update(
      predicted, z, p, [](const Eigen::VectorXd& x) { return measure(x); },
      {state::kHeading});
  out.mean(state::kHeading) = wrap_angle(out.mean(state::kHeading));
  out.mean(state::kArea) = std::max(out.mean(state::kArea), kMinArea);
  out.mean(state::kAspect) =
      std::clamp(out.mean(state::kAspect), kMinAspect, kMaxAspect);
  return out;
}

/// Constant-velocity filter over a detection's confidence, used to carry a
/// score through unmatched frames. The predicted score is clamped to [0, 1].
class ScoreFilter {
 public:
  explicit ScoreFilter(double initial_score, double process_noise = 1e-3,
                       double measurement_noise = 1e-2)
      : q_((Eigen::Vector2d() << process_noise, 0.1 * process_noise)
               .finished()
               .asDiagonal()),
        r_(measurement_noise) {
    if (initial_score < 0.0 || initial_score > 1.0) {
      throw std::invalid_argument("ScoreFilter: score outside [0, 1]");
    }
    x_ << initial_score, 0.0;
    p_ << 0.25, 0.0, 0.0, 0.01;
  }

  void predict() {
    x_(0) += x_(1);
    // F P F^T for F = [[1,1],[0,1]], expanded.
    const double p00 = p_(0, 0) + 2.0 * p_(0, 1) + p_(1, 1);
    const double p01 = p_(0, 1) + p_(1, 1);
    p_(0, 0) = p00 + q_(0, 0);
    p_(0, 1) = p_(1, 0) = p01;
    p_(1, 1) += q_(1, 1);
    x_(0) = std::clamp(x_(0), 0.0, 1.0);
  }

  void update(double observed) {
    if (observed < 0.0 || observed > 1.0) {
      throw std::invalid_argument("ScoreFilter: score outside [0, 1]");
    }
    const double innovation = observed - x_(0);
    const double s = p_(0, 0) + r_;
    const Eigen::Vector2d k = p_.col(0) / s;
    x_ += k * innovation;
    p_ -= k * p_.row(0);
    p_ = (0.5 * (p_ + p_.transpose())).eval();
    x_(0) = std::clamp(x_(0), 0.0, 1.0);
  }

  double score() const { return x_(0); }
  double rate() const { return x_(1); }

 private:
  Eigen::Vector2d x_;
  Eigen::Matrix2d p_;
  Eigen::Matrix2d q_;
  double r_;
};

/// Noise configuration for track filters. Quantities suffixed _rel scale
/// with the birth box (position/speed with its diagonal, area with its area,
/// aspect with its aspect), so one configuration covers small and large
/// targets alike.
struct UkfSettings {
  double alpha_spread = 1.0;
  double beta_prior = 2.0;
  double kappa = 3.0 - state::kDim;
  // Process noise per frame.
  double pos_process_rel = 0.03;
  double speed_process_rel = 0.01;
  double heading_process = 0.15;  // rad
  double turn_process = 0.06;     // rad
  double area_process_rel = 0.03;
  // Kept very small: the axis-aligned box breathes as a target rotates, and
  // extrapolating that oscillation as a persistent trend collapses coasting
  // predictions.
  double area_rate_process_rel = 0.0005;
  double aspect_process_rel = 0.04;
  // Measurement noise.
  double pos_meas_rel = 0.08;
  double area_meas_rel = 0.08;
  double aspect_meas_rel = 0.06;
  // Initial uncertainty at track birth.
  double init_pos_rel = 0.08;
  double init_speed_rel = 0.20;
  double init_heading = 1.2;  // rad; heading starts unobserved
  double init_turn = 0.20;
  double init_area_rel = 0.15;
  double init_area_rate_rel = 0.05;
  double init_aspect_rel = 0.15;
  // Confidence filter.
  double score_process = 1e-3;
  double score_meas = 1e-2;
};

inline UkfParams make_ukf_params(const UkfSettings& s, const BoundingBox& b) {
  const double d = std::hypot(b.width(), b.height());
  const double a = b.area();
  const double r = b.aspect();
  UkfParams p;
  p.alpha_spread = s.alpha_spread;
  p.beta_prior = s.beta_prior;
  p.kappa = s.kappa;
  Eigen::VectorXd q(state::kDim);
  q << s.pos_process_rel * d, s.pos_process_rel * d, s.speed_process_rel * d,
      s.heading_process, s.turn_process, s.area_process_rel * a,
      s.area_rate_process_rel * a, s.aspect_process_rel * r;
  p.process_noise = q.cwiseProduct(q).asDiagonal();
  Eigen::Vector4d m;
  m << s.pos_meas_rel * d, s.pos_meas_rel * d, s.area_meas_rel * a,
      s.aspect_meas_rel * r;
  p.measurement_noise = m.cwiseProduct(m).asDiagonal();
  return p;
}

inline StateEstimate make_initial_state(const UkfSettings& s,
                                        const BoundingBox& b) {
  const double d = std::hypot(b.width(), b.height());
  const double a = b.area();
  const double r = b.aspect();
  StateEstimate e;
  e.mean.resize(state::kDim);
  e.mean << b.center_x(), b.center_y(), 0.0, 0.0, 0.0, a, 0.0, r;
  Eigen::VectorXd sd(state::kDim);
  sd << s.init_pos_rel * d, s.init_pos_rel * d, s.init_speed_rel * d,
      s.init_heading, s.init_turn, s.init_area_rel * a,
      s.init_area_rate_rel * a, s.init_aspect_rel * r;
  e.cov = sd.cwiseProduct(sd).asDiagonal();
  return e;
}

/// Plain linear Kalman filter; the runtime-selectable baseline motion model
/// is built on it.
struct LinearKalman {
  Eigen::VectorXd x;
  Eigen::MatrixXd p, f, q, h, r;

  void predict() {
    x = f * x;
    p = f * p * f.transpose() + q;
  }

  void update(const Eigen::VectorXd& z) {
    const Eigen::MatrixXd s = h * p * h.transpose() + r;
    const Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("LinearKalman: innovation covariance is singular");
    }
    const Eigen::MatrixXd k = llt.solve(h * p).transpose();
    x += k * (z - h * x);
    p -= k * s * k.transpose();
    p = (0.5 * (p + p.transpose())).eval();
  }
};

/// A track's motion filter behind a common interface so the tracker can swap
/// the turn-rate model for the linear baseline without branching.
class MotionModel {
 public:
  virtual ~MotionModel() = default;
  virtual void predict(double dt) = 0;
  virtual void update(const Eigen::Vector4d& z) = 0;
  /// Observation-space view [cx, cy, area, aspect] of the current state.
  virtual Eigen::Vector4d measurement() const = 0;
  virtual const StateEstimate& estimate() const = 0;

  BoundingBox box() const { return measurement_to_box(measurement()); }
};

enum class MotionModelKind { kUkf, kLinear };

class UkfCtrvModel final : public MotionModel {
 public:
  UkfCtrvModel(const UkfSettings& s, const BoundingBox& first)
      : params_(make_ukf_params(s, first)),
        estimate_(make_initial_state(s, first)) {}

  void predict(double dt) override {
    // Per-frame steps so process noise accumulates over skipped frames; the
    // turn-rate flow composes exactly, so the deterministic part is
    // unchanged.
    const int steps = std::max(1, static_cast<int>(std::lround(dt)));
    for (int i = 0; i < steps; ++i) {
      estimate_ = sut::predict(estimate_, params_, 1.0);
    }
  }
  void update(const Eigen::Vector4d& z) override {
    estimate_ = sut::update(estimate_, z, params_);
  }
  Eigen::Vector4d measurement() const override {
    return measure(estimate_.mean);
  }
  const StateEstimate& estimate() const override { return estimate_; }

 private:
  UkfParams params_;
  StateEstimate estimate_;
};

/// Constant-velocity baseline over [cx, cy, area, aspect, vx, vy, area_rate];
/// aspect follows measurements directly.
class LinearCvModel final : public MotionModel {
 public:
  LinearCvModel(const UkfSettings& s, const BoundingBox& first) {
    const double d = std::hypot(first.width(), first.height());
    const double a = first.area();
    const double r = first.aspect();
    kf_.x.resize(7);
    kf_.x << first.center_x(), first.center_y(), a, r, 0.0, 0.0, 0.0;
    Eigen::VectorXd sd(7);
    sd << s.init_pos_rel * d, s.init_pos_rel * d, s.init_area_rel * a,
        s.init_aspect_rel * r, s.init_speed_rel * d, s.init_speed_rel * d,
        s.init_area_rate_rel * a;
    kf_.p = sd.cwiseProduct(sd).asDiagonal();
    kf_.f = Eigen::MatrixXd::Identity(7, 7);
    kf_.f(0, 4) = kf_.f(1, 5) = kf_.f(2, 6) = 1.0;
    Eigen::VectorXd q(7);
    q << s.pos_process_rel * d, s.pos_process_rel * d, s.area_process_rel * a,
        s.aspect_process_rel * r, s.speed_process_rel * d,
        s.speed_process_rel * d, s.area_rate_process_rel * a;
    kf_.q = q.cwiseProduct(q).asDiagonal();
    kf_.h = Eigen::MatrixXd::Zero(4, 7);
    kf_.h(0, 0) = kf_.h(1, 1) = kf_.h(2, 2) = kf_.h(3, 3) = 1.0;
    Eigen::Vector4d m;
    m << s.pos_meas_rel * d, s.pos_meas_rel * d, s.area_meas_rel * a,
        s.aspect_meas_rel * r;
    kf_.r = m.cwiseProduct(m).asDiagonal();
    view_ = {kf_.x, kf_.p};
  }

  void predict(double dt) override {
    const int steps = std::max(1, static_cast<int>(std::lround(dt)));
    for (int i = 0; i < steps; ++i) kf_.predict();
    refresh_view();
  }
  void update(const Eigen::Vector4d& z) override {
    kf_.update(z);
    kf_.x(2) = std::max(kf_.x(2), kMinArea);
    kf_.x(3) = std::clamp(kf_.x(3), kMinAspect, kMaxAspect);
    refresh_view();
  }
  Eigen::Vector4d measurement() const override { return kf_.x.head<4>(); }
  const StateEstimate& estimate() const override { return view_; }

 private:
  void refresh_view() { view_ = {kf_.x, kf_.p}; }

  LinearKalman kf_;
  StateEstimate view_;
};

inline std::unique_ptr<MotionModel> make_motion_model(
    MotionModelKind kind, const UkfSettings& s, const BoundingBox& first) {
  if (kind == MotionModelKind::kLinear) {
    return std::make_unique<LinearCvModel>(s, first);
  }
  return std::make_unique<UkfCtrvModel>(s, first);
}

}  // namespace sut
