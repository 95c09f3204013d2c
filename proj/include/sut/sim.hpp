#pragma once

// Synthetic multi-target sequences with fish-like erratic motion, a detector
// corruption model, and summary kinematics. Each target follows mean-
// reverting random processes for speed and turn rate driving a turning-body
// integrator with reflective arena walls. Everything is a pure function of
// the parameter struct, including its seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sut/association.hpp"
#include "sut/motion.hpp"
#include "sut/rng.hpp"
#include "sut/trajectory.hpp"

namespace sut {

struct SimParams {
  int n_fish = 10;
  int n_frames = 500;
  double arena_width = 1280.0;
  double arena_height = 720.0;
  // Speed process: mean-reverting around speed_mean (px/frame).
  double speed_mean = 4.0;
  double speed_reversion = 0.1;
  double speed_sigma = 0.5;
  // Turn-rate process: mean-reverting around zero (rad/frame).
  double turn_reversion = 0.15;
  double turn_sigma = 0.08;
  // Body: area in px^2 and length/width ratio, drawn once per fish.
  double area_mean = 500.0;
  double area_jitter = 0.1;
  double aspect_mean = 2.0;
  double aspect_jitter = 0.15;
  // Detector corruption.
  double center_jitter = 0.0;  // px
  double size_jitter = 0.0;    // fractional
  double miss_prob = 0.0;
  double fp_rate = 0.0;  // expected false positives per frame
  double match_score_mean = 0.9;
  double match_score_sigma = 0.05;
  double fp_score_mean = 0.3;
  double fp_score_sigma = 0.1;
  std::uint64_t seed = 1;
  // Generator algorithm, recorded so outputs are reproducible by name.
  std::string rng = "philox4x32-10";

  void validate() const {
    if (n_fish < 0 || n_frames < 0) {
      throw std::invalid_argument("SimParams: negative counts");
    }
    if (!(arena_width > 0.0) || !(arena_height > 0.0)) {
      throw std::invalid_argument("SimParams: arena must be positive");
    }
    if (speed_mean < 0.0 || speed_sigma < 0.0 || turn_sigma < 0.0 ||
        center_jitter < 0.0 || size_jitter < 0.0 || match_score_sigma < 0.0 ||
        fp_score_sigma < 0.0 || area_jitter < 0.0 || aspect_jitter < 0.0) {
      throw std::invalid_argument("SimParams: negative noise magnitude");
    }
    if (!(area_mean > 0.0) || !(aspect_mean > 0.0)) {
      throw std::invalid_argument("SimParams: body dimensions must be positive");
    }
    if (miss_prob < 0.0 || miss_prob > 1.0 || fp_rate < 0.0) {
      throw std::invalid_argument("SimParams: bad corruption probabilities");
    }
    if (rng != "philox4x32-10") {
      throw std::invalid_argument("SimParams: unsupported rng algorithm '" +
                                  rng + "'");
    }
  }
};

namespace detail {

inline BoundingBox body_box(double cx, double cy, double heading,
                            double body_len, double body_wid) {
  // Axis-aligned bounds of the body rectangle rotated to the heading.
  const double c = std::abs(std::cos(heading));
  const double s = std::abs(std::sin(heading));
  const double bw = body_len * c + body_wid * s;
  const double bh = body_len * s + body_wid * c;
  return {cx - 0.5 * bw, cy - 0.5 * bh, cx + 0.5 * bw, cy + 0.5 * bh};
}

}  // namespace detail

/// Ground-truth trajectories: n_fish identities over n_frames, boxes derived
/// from position, heading, and per-fish body size. Deterministic in seed.
inline TrajectorySet simulate(const SimParams& p) {
  p.validate();
  constexpr double kPi = std::numbers::pi;
  TrajectorySet out;
  for (int i = 0; i < p.n_fish; ++i) {
    RandomStream rng(p.seed, static_cast<std::uint32_t>(i));
    const double area =
        p.area_mean * std::max(0.1, 1.0 + p.area_jitter * rng.normal());
    const double aspect =
        std::max(0.2, p.aspect_mean * (1.0 + p.aspect_jitter * rng.normal()));
    const double body_len = std::sqrt(area * aspect);
    const double body_wid = std::sqrt(area / aspect);
    double margin = 0.5 * std::hypot(body_len, body_wid);
    margin = std::min(margin, 0.25 * std::min(p.arena_width, p.arena_height));

    double x = rng.uniform(margin, p.arena_width - margin);
    double y = rng.uniform(margin, p.arena_height - margin);
    double heading = rng.uniform(-kPi, kPi);
    double speed = p.speed_mean;
    double omega = 0.0;

    for (int f = 1; f <= p.n_frames; ++f) {
      out.add(f, i + 1, detail::body_box(x, y, heading, body_len, body_wid));

      speed += p.speed_reversion * (p.speed_mean - speed) +
               p.speed_sigma * rng.normal();
      speed = std::max(0.0, speed);
      omega += -p.turn_reversion * omega + p.turn_sigma * rng.normal();
      heading = wrap_angle(heading + omega);
      x += speed * std::cos(heading);
      y += speed * std::sin(heading);

      if (x < margin) {
        x = 2.0 * margin - x;
        heading = wrap_angle(kPi - heading);
      } else if (x > p.arena_width - margin) {
        x = 2.0 * (p.arena_width - margin) - x;
        heading = wrap_angle(kPi - heading);
      }
      if (y < margin) {
        y = 2.0 * margin - y;
        heading = wrap_angle(-heading);
      } else if (y > p.arena_height - margin) {
        y = 2.0 * (p.arena_height - margin) - y;
        heading = wrap_angle(-heading);
      }
      x = std::clamp(x, 1.0, p.arena_width - 1.0);
      y = std::clamp(y, 1.0, p.arena_height - 1.0);
    }
  }
  return out;
}

/// Detector model over ground truth: boxes are independently dropped,
/// jittered, and scored; clutter detections are added per frame. Uses the
/// dedicated corruption stream, so the same seed that shaped the
/// trajectories yields one fixed corrupted sequence.
inline DetectionSet corrupt(const TrajectorySet& gt, const SimParams& p) {
  p.validate();
  RandomStream rng(p.seed, static_cast<std::uint32_t>(p.n_fish));
  DetectionSet out;
  for (const auto& [frame, list] : gt.frames) {
    auto& dets = out[frame];
    for (const TrackedBox& t : list) {
      if (rng.bernoulli(p.miss_prob)) continue;
      const double dx = p.center_jitter * rng.normal();
      const double dy = p.center_jitter * rng.normal();
      const double half_dw = 0.5 * t.box.width() *
                             std::max(-0.95, p.size_jitter * rng.normal());
      const double half_dh = 0.5 * t.box.height() *
                             std::max(-0.95, p.size_jitter * rng.normal());
      const BoundingBox box{t.box.x1 + dx - half_dw, t.box.y1 + dy - half_dh,
                            t.box.x2 + dx + half_dw, t.box.y2 + dy + half_dh};
      const double score = std::clamp(
          rng.normal(p.match_score_mean, p.match_score_sigma), 0.0, 1.0);
      dets.push_back({box, score, std::nullopt});
    }
    const int clutter = rng.poisson(p.fp_rate);
    for (int k = 0; k < clutter; ++k) {
      const double cx = rng.uniform(0.0, p.arena_width);
      const double cy = rng.uniform(0.0, p.arena_height);
      const double area = p.area_mean * rng.uniform(0.5, 1.5);
      const double aspect = std::max(
          0.2, p.aspect_mean * (1.0 + p.aspect_jitter * rng.normal()));
      const double w = std::sqrt(area * aspect);
      const double h = std::sqrt(area / aspect);
      const double score =
          std::clamp(rng.normal(p.fp_score_mean, p.fp_score_sigma), 0.0, 1.0);
      dets.push_back(
          {{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h},
           score,
           std::nullopt});
    }
  }
  return out;
}

/// Per-frame motion summaries of a trajectory set. Speeds are center
/// displacements between consecutive frame indices; turn is the change of
/// displacement heading, defined only where the target actually moved.
struct KinematicStats {
  std::vector<int> speed_frames;
  std::vector<double> mean_speed;
  std::vector<int> turn_frames;
  std::vector<double> mean_abs_turn;
  std::vector<long long> direction_histogram;  // bins over (-pi, pi]
};

inline KinematicStats kinematic_stats(const TrajectorySet& t,
                                      int n_bins = 16) {
  if (n_bins < 1) throw std::invalid_argument("kinematic_stats: n_bins < 1");
  constexpr double kPi = std::numbers::pi;
  constexpr double kMoveEps = 1e-12;

  // id -> frame -> center
  std::map<int, std::map<int, std::pair<double, double>>> centers;
  for (const auto& [frame, list] : t.frames) {
    for (const TrackedBox& b : list) {
      centers[b.id][frame] = {b.box.center_x(), b.box.center_y()};
    }
  }

  std::map<int, std::vector<double>> speeds_by_frame;
  std::map<int, std::vector<double>> turns_by_frame;
  KinematicStats stats;
  stats.direction_histogram.assign(n_bins, 0);

  for (const auto& [id, path] : centers) {
    double prev_heading = 0.0;
    bool prev_heading_valid = false;
    int prev_heading_frame = 0;
    for (auto it = path.begin(); it != path.end(); ++it) {
      const auto prev = path.find(it->first - 1);
      if (prev == path.end()) {
        prev_heading_valid = false;
        continue;
      }
      const double dx = it->second.first - prev->second.first;
      const double dy = it->second.second - prev->second.second;
      const double dist = std::hypot(dx, dy);
      speeds_by_frame[it->first].push_back(dist);
      if (dist <= kMoveEps) {
        prev_heading_valid = false;
        continue;
      }
      const double heading = std::atan2(dy, dx);
      const int bin = std::min(
          n_bins - 1,
          static_cast<int>((heading + kPi) / (2.0 * kPi / n_bins)));
      ++stats.direction_histogram[bin];
      if (prev_heading_valid && prev_heading_frame == it->first - 1) {
        turns_by_frame[it->first].push_back(
            std::abs(wrap_angle(heading - prev_heading)));
      }
      prev_heading = heading;
      prev_heading_valid = true;
      prev_heading_frame = it->first;
    }
  }

  for (const auto& [frame, v] : speeds_by_frame) {
    stats.speed_frames.push_back(frame);
    stats.mean_speed.push_back(
        std::accumulate(v.begin(), v.end(), 0.0) / v.size());
  }
  for (const auto& [frame, v] : turns_by_frame) {
    stats.turn_frames.push_back(frame);
    stats.mean_abs_turn.push_back(
        std::accumulate(v.begin(), v.end(), 0.0) / v.size());
  }
  return stats;
}

}  // namespace sut
