#pragma once

// The tracker: detections are associated to predicted tracks in a
// three-stage cascade. Stage one assigns high-confidence detections to all
// live tracks, stage two gives low-confidence detections a chance against
// the remainder, and stage three retries leftover high-confidence detections
// against the unmatched tracks' last observed boxes, which rescues targets
// whose motion prediction drifted during an occlusion. All stages use
// maximum-similarity Hungarian assignment, gated by a similarity floor so a
// forced pairing of distant boxes is never accepted.

#include <Eigen/Dense>

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "sut/errors.hpp"
#include "sut/geometry.hpp"
#include "sut/hungarian.hpp"
#include "sut/motion.hpp"

namespace sut {

struct Detection {
  BoundingBox box;
  double score = 1.0;
  std::optional<Eigen::VectorXd> embedding;  // unit length when present
};

/// Detections per frame, the raw-input counterpart of a TrajectorySet.
using DetectionSet = std::map<int, std::vector<Detection>>;

enum class TrackStatus { kTentative, kConfirmed, kRemoved };

enum class CascadeStage {
  kHighConfidence = 1,
  kLowConfidence = 2,
  kLastChance = 3,
};

/// Geometry term used in association costs; the scale-aware compound is the
/// default, the plain overlap family is kept for baseline comparisons.
enum class AssocMetric { kFishIou, kIou, kGiou, kDiou };

/// Appearance embeddings are smoothed per track with this momentum.
inline constexpr double kEmbeddingMomentum = 0.9;

struct TrackerConfig {
  double tau_high = 0.6;   // score at or above: first-stage detection
  double tau_low = 0.1;    // score strictly above, below tau_high: second
  double tau_iou = 0.45;   // similarity floor for accepting any match
  int max_age = 30;        // frames a track may go unobserved
  int min_hits = 3;        // consecutive hits before a track is confirmed
  FishIouParams fish_iou;
  UkfSettings ukf;
  MotionModelKind motion = MotionModelKind::kUkf;
  AssocMetric metric = AssocMetric::kFishIou;
  bool reid_enabled = false;
  double iou_cost_weight = 1.0;    // stage-1 geometry weight
  double emb_cost_weight = 0.25;   // stage-1 embedding weight
  double low_emb_weight = 0.25;    // stage-2 embedding weight
  double score_cost_weight = 0.0;  // confidence-agreement term, off by default

  void validate() const {
    if (!(tau_low >= 0.0 && tau_low < tau_high && tau_high <= 1.0)) {
      throw std::invalid_argument(
          "TrackerConfig: need 0 <= tau_low < tau_high <= 1");
    }
    if (max_age < 1) throw std::invalid_argument("TrackerConfig: max_age < 1");
    if (min_hits < 1) {
      throw std::invalid_argument("TrackerConfig: min_hits < 1");
    }
    if (iou_cost_weight < 0.0 || emb_cost_weight < 0.0 ||
        low_emb_weight < 0.0 || score_cost_weight < 0.0) {
      throw std::invalid_argument("TrackerConfig: negative fusion weight");
    }
  }
};

/// Cosine similarity of two embeddings (dot product for unit vectors).
inline double embedding_similarity(const Eigen::VectorXd& a,
                                   const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw FormatError("embedding dimension mismatch");
  }
  return a.dot(b);
}

struct Track {
  Track(int track_id, const Detection& det, const TrackerConfig& cfg)
      : id(track_id),
        motion(make_motion_model(cfg.motion, cfg.ukf, det.box)),
        score_filter(det.score, cfg.ukf.score_process, cfg.ukf.score_meas),
        last_observation(det.box),
        predicted_box(det.box),
        last_score(det.score) {
    if (cfg.reid_enabled && det.embedding) smoothed_embedding = det.embedding;
  }

  int id;
  std::unique_ptr<MotionModel> motion;
  ScoreFilter score_filter;
  BoundingBox last_observation;
  std::optional<Eigen::VectorXd> smoothed_embedding;
  int time_since_update = 0;
  int hit_streak = 1;
  TrackStatus status = TrackStatus::kTentative;
  BoundingBox predicted_box;  // refreshed at the start of every frame
  double last_score;          // score of the most recent matched detection
  bool matched_this_frame = true;
};

namespace detail {

inline double geometry_similarity(AssocMetric metric,
                                  const FishIouParams& params,
                                  const BoundingBox& a, const BoundingBox& b) {
  switch (metric) {
    case AssocMetric::kIou:
      return iou(a, b);
    case AssocMetric::kGiou:
      return giou(a, b);
    case AssocMetric::kDiou:
      return diou(a, b);
    case AssocMetric::kFishIou:
      break;
  }
  return fish_iou(a, b, params);
}

}  // namespace detail

/// Similarity of one detection/track pair at a given cascade stage. Stages
/// one and two compare against the predicted box and may fuse appearance;
/// stage three compares against the last observed box, geometry only.
inline double pair_similarity(const Detection& det, const Track& track,
                              const TrackerConfig& cfg, CascadeStage stage) {
  const BoundingBox& reference = stage == CascadeStage::kLastChance
                                     ? track.last_observation
                                     : track.predicted_box;
  const double geom =
      detail::geometry_similarity(cfg.metric, cfg.fish_iou, det.box,
                                  reference);
  double sim = geom;
  const bool fuse = cfg.reid_enabled && stage != CascadeStage::kLastChance &&
                    det.embedding.has_value() &&
                    track.smoothed_embedding.has_value();
  if (stage == CascadeStage::kHighConfidence) {
    sim = cfg.iou_cost_weight * geom;
    if (fuse) {
      sim += cfg.emb_cost_weight *
             embedding_similarity(*det.embedding, *track.smoothed_embedding);
    }
  } else if (stage == CascadeStage::kLowConfidence && fuse) {
    sim += cfg.low_emb_weight *
           embedding_similarity(*det.embedding, *track.smoothed_embedding);
  }
  if (cfg.score_cost_weight > 0.0) {
    sim += cfg.score_cost_weight *
           (1.0 - std::abs(det.score - track.score_filter.score()));
  }
  return sim;
}

/// Detection-by-track similarity matrix for one cascade stage.
inline Eigen::MatrixXd build_cost(const std::vector<Detection>& dets,
                                  const std::vector<const Track*>& tracks,
                                  const TrackerConfig& cfg,
                                  CascadeStage stage) {
  Eigen::MatrixXd sim(dets.size(), tracks.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      sim(i, j) = pair_similarity(dets[i], *tracks[j], cfg, stage);
    }
  }
  return sim;
}

struct TrackOutput {
  int id = 0;
  BoundingBox box;
  double score = 1.0;
};

/// Online tracker over one sequence. Frames must arrive in strictly
/// increasing order; a skipped frame index is treated as that many frames of
/// elapsed time. Track ids start at 1 and are never reused.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
  }

  std::vector<TrackOutput> step(int frame,
                                const std::vector<Detection>& detections) {
    if (frame <= last_frame_) {
      throw FormatError("detections out of order: frame " +
                        std::to_string(frame) + " after frame " +
                        std::to_string(last_frame_));
    }
    validate_detections(detections);
    const int dt = last_frame_ == 0 ? 1 : frame - last_frame_;
    last_frame_ = frame;
    ++steps_;

    // Advance every live track to this frame.
    for (Track& t : tracks_) {
      if (t.time_since_update > 0) t.hit_streak = 0;
      t.motion->predict(dt);
      for (int k = 0; k < dt; ++k) t.score_filter.predict();
      t.predicted_box = t.motion->box();
      t.matched_this_frame = false;
    }

    std::vector<Detection> high;
    std::vector<Detection> low;
    for (const Detection& d : detections) {
      if (d.score >= cfg_.tau_high) {
        high.push_back(d);
      } else if (d.score > cfg_.tau_low) {
        low.push_back(d);
      }
    }

    std::vector<bool> high_used(high.size(), false);

    run_stage(high, high_used, CascadeStage::kHighConfidence);
    std::vector<bool> low_used(low.size(), false);
    run_stage(low, low_used, CascadeStage::kLowConfidence);
    run_stage(high, high_used, CascadeStage::kLastChance);

    // Age what nothing claimed, retire what aged out.
    for (Track& t : tracks_) {
      if (!t.matched_this_frame) t.time_since_update += dt;
    }
    std::erase_if(tracks_, [this](Track& t) {
      if (t.time_since_update > cfg_.max_age) {
        t.status = TrackStatus::kRemoved;
        return true;
      }
      return false;
    });

    // Births from high-confidence detections nothing matched.
    for (std::size_t i = 0; i < high.size(); ++i) {
      if (!high_used[i]) tracks_.emplace_back(next_id_++, high[i], cfg_);
    }

    std::vector<TrackOutput> out;
    for (const Track& t : tracks_) {
      if (!t.matched_this_frame) continue;
      if (t.status == TrackStatus::kConfirmed || steps_ <= cfg_.min_hits) {
        out.push_back({t.id, t.last_observation, t.last_score});
      }
    }
    std::sort(out.begin(), out.end(),
              [](const TrackOutput& a, const TrackOutput& b) {
                return a.id < b.id;
              });
    return out;
  }

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return cfg_; }
  int last_frame() const { return last_frame_; }
  /// Total identities created so far (removed tracks included).
  int ids_issued() const { return next_id_ - 1; }

 private:
  void validate_detections(const std::vector<Detection>& dets) const {
    Eigen::Index dim = -1;
    for (const Detection& d : dets) {
      if (d.score < 0.0 || d.score > 1.0) {
        throw FormatError("detection score outside [0, 1]");
      }
      if (!d.embedding) continue;
      if (dim >= 0 && d.embedding->size() != dim) {
        throw FormatError("embedding dimension mismatch");
      }
      dim = d.embedding->size();
      if (std::abs(d.embedding->norm() - 1.0) > 1e-6) {
        throw FormatError("embedding is not unit length");
      }
    }
  }

  void run_stage(const std::vector<Detection>& dets,
                 std::vector<bool>& det_used, CascadeStage stage) {
    std::vector<int> det_index;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      if (!det_used[i]) det_index.push_back(static_cast<int>(i));
    }
    std::vector<Track*> open;
    for (Track& t : tracks_) {
      if (!t.matched_this_frame) open.push_back(&t);
    }
    if (det_index.empty() || open.empty()) return;

    std::vector<Detection> stage_dets;
    for (const int i : det_index) stage_dets.push_back(dets[i]);
    std::vector<const Track*> stage_tracks(open.begin(), open.end());
    const Eigen::MatrixXd sim =
        build_cost(stage_dets, stage_tracks, cfg_, stage);
    for (const auto& [row, col] : hungarian(sim).matches) {
      if (sim(row, col) > cfg_.tau_iou) {
        commit_match(*open[col], dets[det_index[row]]);
        det_used[det_index[row]] = true;
      }
    }
  }

  void commit_match(Track& t, const Detection& det) {
    t.motion->update(box_to_measurement(det.box));
    t.score_filter.update(det.score);
    t.last_observation = det.box;
    t.last_score = det.score;
    t.time_since_update = 0;
    t.hit_streak += 1;
    if (t.hit_streak >= cfg_.min_hits) t.status = TrackStatus::kConfirmed;
    t.matched_this_frame = true;
    if (cfg_.reid_enabled && det.embedding) {
      if (!t.smoothed_embedding) {
        t.smoothed_embedding = det.embedding;
      } else if (t.smoothed_embedding->size() == det.embedding->size()) {
        Eigen::VectorXd mixed = kEmbeddingMomentum * *t.smoothed_embedding +
                                (1.0 - kEmbeddingMomentum) * *det.embedding;
        const double norm = mixed.norm();
        if (norm > 1e-12) t.smoothed_embedding = mixed / norm;
      }
    }
  }

  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  int last_frame_ = 0;
  long long steps_ = 0;
};

}  // namespace sut
