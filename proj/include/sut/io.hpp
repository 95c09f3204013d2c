#pragma once

// Plain-text interchange: MOT-style detection / annotation / result tables,
// the appearance-embedding sidecar, and the INI configuration file. Parsers
// fail fast with file:line context instead of coercing malformed rows, and
// writers emit a deterministic byte sequence for a given input.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sut/association.hpp"
#include "sut/errors.hpp"
#include "sut/geometry.hpp"
#include "sut/sim.hpp"
#include "sut/trajectory.hpp"

namespace sut {

/// frame -> (0-based detection index in file order -> unit appearance vector).
using EmbeddingTable = std::map<int, std::map<int, Eigen::VectorXd>>;

namespace detail {

[[noreturn]] inline void fail_at(std::string_view name, long line,
                                 const std::string& msg) {
  throw FormatError(std::string(name) + ":" + std::to_string(line) + ": " +
                    msg);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline bool to_double(std::string_view tok, double& out) {
  tok = trim(tok);
  if (tok.empty()) return false;
  const char* last = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), last, out);
  return res.ec == std::errc() && res.ptr == last;
}

inline bool to_int(std::string_view tok, long long& out) {
  tok = trim(tok);
  if (tok.empty()) return false;
  const char* last = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), last, out);
  return res.ec == std::errc() && res.ptr == last;
}

inline double field_double(const std::vector<std::string_view>& f,
                           std::size_t i, std::string_view name, long line,
                           const char* what) {
  double v = 0.0;
  if (!to_double(f[i], v)) {
    fail_at(name, line,
            std::string("cannot parse ") + what + " '" + std::string(f[i]) +
                "'");
  }
  return v;
}

inline long long field_int(const std::vector<std::string_view>& f,
                           std::size_t i, std::string_view name, long line,
                           const char* what) {
  long long v = 0;
  if (!to_int(f[i], v)) {
    fail_at(name, line,
            std::string("cannot parse ") + what + " '" + std::string(f[i]) +
                "'");
  }
  return v;
}

/// One physical line with the trailing CR of CRLF files removed.
inline bool next_line(std::istream& in, std::string& raw, long& line_no) {
  if (!std::getline(in, raw)) return false;
  ++line_no;
  if (!raw.empty() && raw.back() == '\r') raw.pop_back();
  return true;
}

inline void append_double(std::string& s, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  s.append(buf, res.ptr);
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path + " for reading");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  return out;
}

}  // namespace detail

/// Detection table: `frame,id,left,top,width,height,conf,x,y,z` with id fixed
/// at -1. Frames may be listed sparsely and out of order; per-frame order is
/// the file order (embedding sidecars index into it).
inline DetectionSet read_detections(std::istream& in, std::string_view name) {
  DetectionSet out;
  std::string raw;
  long line_no = 0;
  while (detail::next_line(in, raw, line_no)) {
    if (detail::trim(raw).empty()) continue;
    const auto f = detail::split_fields(raw);
    if (f.size() != 10) {
      detail::fail_at(name, line_no,
                      "expected 10 fields, got " + std::to_string(f.size()));
    }
    const long long frame = detail::field_int(f, 0, name, line_no, "frame");
    const long long id = detail::field_int(f, 1, name, line_no, "id");
    if (frame < 1) detail::fail_at(name, line_no, "frame index must be >= 1");
    if (id != -1) {
      detail::fail_at(name, line_no, "detection id must be -1");
    }
    const double left = detail::field_double(f, 2, name, line_no, "left");
    const double top = detail::field_double(f, 3, name, line_no, "top");
    const double w = detail::field_double(f, 4, name, line_no, "width");
    const double h = detail::field_double(f, 5, name, line_no, "height");
    const double conf = detail::field_double(f, 6, name, line_no, "conf");
    for (std::size_t i = 7; i < 10; ++i) {
      detail::field_double(f, i, name, line_no, "world coordinate");
    }
    if (!(w > 0.0) || !(h > 0.0)) {
      detail::fail_at(name, line_no, "box width and height must be positive");
    }
    if (!(conf >= 0.0 && conf <= 1.0)) {
      detail::fail_at(name, line_no, "confidence outside [0, 1]");
    }
    Detection d;
    d.box = BoundingBox::from_ltwh(left, top, w, h);
    d.score = conf;
    out[static_cast<int>(frame)].push_back(std::move(d));
  }
  return out;
}

inline DetectionSet read_detections(const std::string& path) {
  auto in = detail::open_input(path);
  return read_detections(in, path);
}

inline void write_detections(const DetectionSet& dets, std::ostream& out) {
  std::string buf;
  for (const auto& [frame, list] : dets) {
    for (const Detection& d : list) {
      buf.clear();
      buf += std::to_string(frame);
      buf += ",-1,";
      detail::append_double(buf, d.box.x1);
      buf += ',';
      detail::append_double(buf, d.box.y1);
      buf += ',';
      detail::append_double(buf, d.box.width());
      buf += ',';
      detail::append_double(buf, d.box.height());
      buf += ',';
      detail::append_double(buf, d.score);
      buf += ",-1,-1,-1\n";
      out << buf;
    }
  }
}

inline void write_detections(const DetectionSet& dets,
                             const std::string& path) {
  auto out = detail::open_output(path);
  write_detections(dets, out);
}

/// Annotation table: `frame,id,left,top,width,height,flag,class,visibility`.
/// Rows whose consideration flag is 0 are skipped on read.
inline TrajectorySet read_gt(std::istream& in, std::string_view name) {
  TrajectorySet out;
  std::string raw;
  long line_no = 0;
  while (detail::next_line(in, raw, line_no)) {
    if (detail::trim(raw).empty()) continue;
    const auto f = detail::split_fields(raw);
    if (f.size() != 9) {
      detail::fail_at(name, line_no,
                      "expected 9 fields, got " + std::to_string(f.size()));
    }
    const long long frame = detail::field_int(f, 0, name, line_no, "frame");
    const long long id = detail::field_int(f, 1, name, line_no, "id");
    const double left = detail::field_double(f, 2, name, line_no, "left");
    const double top = detail::field_double(f, 3, name, line_no, "top");
    const double w = detail::field_double(f, 4, name, line_no, "width");
    const double h = detail::field_double(f, 5, name, line_no, "height");
    const long long flag = detail::field_int(f, 6, name, line_no, "flag");
    detail::field_int(f, 7, name, line_no, "class");
    detail::field_double(f, 8, name, line_no, "visibility");
    if (flag == 0) continue;
    if (frame < 1) detail::fail_at(name, line_no, "frame index must be >= 1");
    if (id < 1) detail::fail_at(name, line_no, "identity must be >= 1");
    if (!(w > 0.0) || !(h > 0.0)) {
      detail::fail_at(name, line_no, "box width and height must be positive");
    }
    try {
      out.add(static_cast<int>(frame), static_cast<int>(id),
              BoundingBox::from_ltwh(left, top, w, h));
    } catch (const std::invalid_argument& e) {
      detail::fail_at(name, line_no, e.what());
    }
  }
  return out;
}

inline TrajectorySet read_gt(const std::string& path) {
  auto in = detail::open_input(path);
  return read_gt(in, path);
}

inline void write_gt(const TrajectorySet& t, std::ostream& out) {
  std::string buf;
  for (const auto& [frame, list] : t.frames) {
    std::vector<const TrackedBox*> row;
    row.reserve(list.size());
    for (const TrackedBox& b : list) row.push_back(&b);
    std::sort(row.begin(), row.end(),
              [](const TrackedBox* a, const TrackedBox* b) {
                return a->id < b->id;
              });
    for (const TrackedBox* b : row) {
      buf.clear();
      buf += std::to_string(frame);
      buf += ',';
      buf += std::to_string(b->id);
      buf += ',';
      detail::append_double(buf, b->box.x1);
      buf += ',';
      detail::append_double(buf, b->box.y1);
      buf += ',';
      detail::append_double(buf, b->box.width());
      buf += ',';
      detail::append_double(buf, b->box.height());
      buf += ",1,1,1.0\n";
      out << buf;
    }
  }
}

inline void write_gt(const TrajectorySet& t, const std::string& path) {
  auto out = detail::open_output(path);
  write_gt(t, out);
}

/// Result table: `frame,id,left,top,width,height,conf,-1,-1,-1` with fixed
/// decimal formatting (2 fractional digits for coordinates, 4 for
/// confidence) so identical runs produce identical bytes.
inline void write_results(const std::map<int, std::vector<TrackOutput>>& r,
                          std::ostream& out) {
  char buf[192];
  for (const auto& [frame, list] : r) {
    std::vector<const TrackOutput*> row;
    row.reserve(list.size());
    for (const TrackOutput& t : list) row.push_back(&t);
    std::sort(row.begin(), row.end(),
              [](const TrackOutput* a, const TrackOutput* b) {
                return a->id < b->id;
              });
    for (const TrackOutput* t : row) {
      const int n = std::snprintf(
          buf, sizeof(buf), "%d,%d,%.2f,%.2f,%.2f,%.2f,%.4f,-1,-1,-1\n", frame,
          t->id, t->box.x1, t->box.y1, t->box.width(), t->box.height(),
          t->score);
      out.write(buf, n);
    }
  }
}

inline void write_results(const std::map<int, std::vector<TrackOutput>>& r,
                          const std::string& path) {
  auto out = detail::open_output(path);
  write_results(r, out);
}

inline TrajectorySet read_results(std::istream& in, std::string_view name) {
  TrajectorySet out;
  std::string raw;
  long line_no = 0;
  while (detail::next_line(in, raw, line_no)) {
    if (detail::trim(raw).empty()) continue;
    const auto f = detail::split_fields(raw);
    if (f.size() != 10) {
      detail::fail_at(name, line_no,
                      "expected 10 fields, got " + std::to_string(f.size()));
    }
    const long long frame = detail::field_int(f, 0, name, line_no, "frame");
    const long long id = detail::field_int(f, 1, name, line_no, "id");
    const double left = detail::field_double(f, 2, name, line_no, "left");
    const double top = detail::field_double(f, 3, name, line_no, "top");
    const double w = detail::field_double(f, 4, name, line_no, "width");
    const double h = detail::field_double(f, 5, name, line_no, "height");
    const double conf = detail::field_double(f, 6, name, line_no, "conf");
    if (frame < 1) detail::fail_at(name, line_no, "frame index must be >= 1");
    if (id < 1) detail::fail_at(name, line_no, "track id must be >= 1");
    if (!(w > 0.0) || !(h > 0.0)) {
      detail::fail_at(name, line_no, "box width and height must be positive");
    }
    try {
      out.add(static_cast<int>(frame), static_cast<int>(id),
              BoundingBox::from_ltwh(left, top, w, h), conf);
    } catch (const std::invalid_argument& e) {
      detail::fail_at(name, line_no, e.what());
    }
  }
  return out;
}

inline TrajectorySet read_results(const std::string& path) {
  auto in = detail::open_input(path);
  return read_results(in, path);
}

/// Embedding sidecar: `frame,det_index,v1,...,vd`. det_index is the 0-based
/// position within that frame's detection file order. The dimension d is
/// fixed by the first row; vectors are L2-normalized on load (a warning is
/// printed once if any input norm strays from 1 by more than 1e-3).
inline EmbeddingTable read_embeddings(std::istream& in, std::string_view name,
                                      std::ostream& warn = std::cerr) {
  EmbeddingTable out;
  std::string raw;
  long line_no = 0;
  std::size_t dim = 0;
  bool warned = false;
  while (detail::next_line(in, raw, line_no)) {
    if (detail::trim(raw).empty()) continue;
    const auto f = detail::split_fields(raw);
    if (f.size() < 3) {
      detail::fail_at(name, line_no,
                      "expected frame, det_index and at least one component");
    }
    if (dim == 0) {
      dim = f.size() - 2;
    } else if (f.size() - 2 != dim) {
      detail::fail_at(name, line_no,
                      "embedding dimension " + std::to_string(f.size() - 2) +
                          " does not match established dimension " +
                          std::to_string(dim));
    }
    const long long frame = detail::field_int(f, 0, name, line_no, "frame");
    const long long index =
        detail::field_int(f, 1, name, line_no, "det_index");
    if (frame < 1) detail::fail_at(name, line_no, "frame index must be >= 1");
    if (index < 0) detail::fail_at(name, line_no, "det_index must be >= 0");
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      v[static_cast<Eigen::Index>(i)] =
          detail::field_double(f, i + 2, name, line_no, "component");
    }
    const double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      detail::fail_at(name, line_no, "embedding norm must be positive");
    }
    if (std::abs(norm - 1.0) > 1e-3 && !warned) {
      warn << name << ":" << line_no << ": warning: embedding norm " << norm
           << " deviates from 1; vectors are renormalized on load\n";
      warned = true;
    }
    auto& slot = out[static_cast<int>(frame)];
    if (!slot.emplace(static_cast<int>(index), v / norm).second) {
      detail::fail_at(name, line_no,
                      "duplicate embedding for frame " +
                          std::to_string(frame) + ", det_index " +
                          std::to_string(index));
    }
  }
  return out;
}

inline EmbeddingTable read_embeddings(const std::string& path,
                                      std::ostream& warn = std::cerr) {
  auto in = detail::open_input(path);
  return read_embeddings(in, path, warn);
}

/// Pairs sidecar vectors with their detections in place. Detections without
/// a sidecar row keep an empty embedding (geometry-only cost for them).
inline void attach_embeddings(DetectionSet& dets, const EmbeddingTable& emb) {
  for (const auto& [frame, by_index] : emb) {
    const auto it = dets.find(frame);
    if (it == dets.end()) {
      throw FormatError("embeddings reference frame " +
                        std::to_string(frame) + " with no detections");
    }
    for (const auto& [index, v] : by_index) {
      if (index >= static_cast<int>(it->second.size())) {
        throw FormatError("embeddings reference det_index " +
                          std::to_string(index) + " in frame " +
                          std::to_string(frame) + " which has only " +
                          std::to_string(it->second.size()) + " detections");
      }
      it->second[static_cast<std::size_t>(index)].embedding = v;
    }
  }
}

/// Everything configurable from one file: tracker behavior and the synthetic
/// scene used by the simulator.
struct Config {
  TrackerConfig tracker;
  SimParams sim;
};

namespace detail {

inline double config_double(std::string_view value, std::string_view name,
                            long line, std::string_view key) {
  double v = 0.0;
  if (!to_double(value, v)) {
    fail_at(name, line,
            "cannot parse number '" + std::string(value) + "' for key '" +
                std::string(key) + "'");
  }
  return v;
}

inline long long config_int(std::string_view value, std::string_view name,
                            long line, std::string_view key) {
  long long v = 0;
  if (!to_int(value, v)) {
    fail_at(name, line,
            "cannot parse integer '" + std::string(value) + "' for key '" +
                std::string(key) + "'");
  }
  return v;
}

inline bool config_bool(std::string_view value, std::string_view name,
                        long line, std::string_view key) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail_at(name, line,
          "cannot parse boolean '" + std::string(value) + "' for key '" +
              std::string(key) + "' (use true/false)");
}

inline bool apply_tracker_key(TrackerConfig& t, std::string_view key,
                              std::string_view value, std::string_view name,
                              long line) {
  if (key == "tau_high") {
    t.tau_high = config_double(value, name, line, key);
  } else if (key == "tau_low") {
    t.tau_low = config_double(value, name, line, key);
  } else if (key == "tau_iou") {
    t.tau_iou = config_double(value, name, line, key);
  } else if (key == "max_age") {
    t.max_age = static_cast<int>(config_int(value, name, line, key));
  } else if (key == "min_hits") {
    t.min_hits = static_cast<int>(config_int(value, name, line, key));
  } else if (key == "reid_enabled") {
    t.reid_enabled = config_bool(value, name, line, key);
  } else if (key == "iou_cost_weight") {
    t.iou_cost_weight = config_double(value, name, line, key);
  } else if (key == "emb_cost_weight") {
    t.emb_cost_weight = config_double(value, name, line, key);
  } else if (key == "low_emb_weight") {
    t.low_emb_weight = config_double(value, name, line, key);
  } else if (key == "score_cost_weight") {
    t.score_cost_weight = config_double(value, name, line, key);
  } else if (key == "motion") {
    if (value == "ukf") {
      t.motion = MotionModelKind::kUkf;
    } else if (value == "kf") {
      t.motion = MotionModelKind::kLinear;
    } else {
      fail_at(name, line,
              "unknown motion model '" + std::string(value) +
                  "' (use ukf or kf)");
    }
  } else if (key == "assoc") {
    if (value == "fishiou") {
      t.metric = AssocMetric::kFishIou;
    } else if (value == "iou") {
      t.metric = AssocMetric::kIou;
    } else if (value == "giou") {
      t.metric = AssocMetric::kGiou;
    } else if (value == "diou") {
      t.metric = AssocMetric::kDiou;
    } else {
      fail_at(name, line,
              "unknown association metric '" + std::string(value) +
                  "' (use fishiou, iou, giou or diou)");
    }
  } else {
    return false;
  }
  return true;
}

inline bool apply_fishiou_key(FishIouParams& p, std::string_view key,
                              std::string_view value, std::string_view name,
                              long line) {
  if (key == "w1") {
    p.overlap_weight = config_double(value, name, line, key);
  } else if (key == "w2") {
    p.central_weight = config_double(value, name, line, key);
  } else if (key == "w3") {
    p.aspect_weight = config_double(value, name, line, key);
  } else if (key == "w4") {
    p.area_weight = config_double(value, name, line, key);
  } else if (key == "w5") {
    p.distance_weight = config_double(value, name, line, key);
  } else if (key == "head_inset") {
    p.head_inset = config_double(value, name, line, key);
  } else if (key == "vertical_inset") {
    p.vertical_inset = config_double(value, name, line, key);
  } else if (key == "tail_inset") {
    p.tail_inset = config_double(value, name, line, key);
  } else if (key == "area_scale") {
    p.area_scale = config_double(value, name, line, key);
  } else if (key == "front") {
    if (value == "neg_x") {
      p.front = FrontEdge::kNegX;
    } else if (value == "pos_x") {
      p.front = FrontEdge::kPosX;
    } else {
      fail_at(name, line,
              "unknown front edge '" + std::string(value) +
                  "' (use neg_x or pos_x)");
    }
  } else {
    return false;
  }
  return true;
}

inline bool apply_ukf_key(UkfSettings& u, std::string_view key,
                          std::string_view value, std::string_view name,
                          long line) {
  static const std::map<std::string_view, double UkfSettings::*> kFields = {
      {"alpha_spread", &UkfSettings::alpha_spread},
      {"beta_prior", &UkfSettings::beta_prior},
      {"kappa", &UkfSettings::kappa},
      {"pos_process_rel", &UkfSettings::pos_process_rel},
      {"speed_process_rel", &UkfSettings::speed_process_rel},
      {"heading_process", &UkfSettings::heading_process},
      {"turn_process", &UkfSettings::turn_process},
      {"area_process_rel", &UkfSettings::area_process_rel},
      {"area_rate_process_rel", &UkfSettings::area_rate_process_rel},
      {"aspect_process_rel", &UkfSettings::aspect_process_rel},
      {"pos_meas_rel", &UkfSettings::pos_meas_rel},
      {"area_meas_rel", &UkfSettings::area_meas_rel},
      {"aspect_meas_rel", &UkfSettings::aspect_meas_rel},
      {"init_pos_rel", &UkfSettings::init_pos_rel},
      {"init_speed_rel", &UkfSettings::init_speed_rel},
      {"init_heading", &UkfSettings::init_heading},
      {"init_turn", &UkfSettings::init_turn},
      {"init_area_rel", &UkfSettings::init_area_rel},
      {"init_area_rate_rel", &UkfSettings::init_area_rate_rel},
      {"init_aspect_rel", &UkfSettings::init_aspect_rel},
      {"score_process", &UkfSettings::score_process},
      {"score_meas", &UkfSettings::score_meas},
  };
  const auto it = kFields.find(key);
  if (it == kFields.end()) return false;
  u.*(it->second) = config_double(value, name, line, key);
  return true;
}

inline bool apply_sim_key(SimParams& s, std::string_view key,
                          std::string_view value, std::string_view name,
                          long line) {
  static const std::map<std::string_view, double SimParams::*> kDoubles = {
      {"arena_width", &SimParams::arena_width},
      {"arena_height", &SimParams::arena_height},
      {"speed_mean", &SimParams::speed_mean},
      {"speed_reversion", &SimParams::speed_reversion},
      {"speed_sigma", &SimParams::speed_sigma},
      {"turn_reversion", &SimParams::turn_reversion},
      {"turn_sigma", &SimParams::turn_sigma},
      {"area_mean", &SimParams::area_mean},
      {"area_jitter", &SimParams::area_jitter},
      {"aspect_mean", &SimParams::aspect_mean},
      {"aspect_jitter", &SimParams::aspect_jitter},
      {"center_jitter", &SimParams::center_jitter},
      {"size_jitter", &SimParams::size_jitter},
      {"miss_prob", &SimParams::miss_prob},
      {"fp_rate", &SimParams::fp_rate},
      {"match_score_mean", &SimParams::match_score_mean},
      {"match_score_sigma", &SimParams::match_score_sigma},
      {"fp_score_mean", &SimParams::fp_score_mean},
      {"fp_score_sigma", &SimParams::fp_score_sigma},
  };
  if (const auto it = kDoubles.find(key); it != kDoubles.end()) {
    s.*(it->second) = config_double(value, name, line, key);
    return true;
  }
  if (key == "n_fish") {
    s.n_fish = static_cast<int>(config_int(value, name, line, key));
  } else if (key == "n_frames") {
    s.n_frames = static_cast<int>(config_int(value, name, line, key));
  } else if (key == "seed") {
    const long long v = config_int(value, name, line, key);
    if (v < 0) fail_at(name, line, "seed must be non-negative");
    s.seed = static_cast<std::uint64_t>(v);
  } else if (key == "rng") {
    s.rng = std::string(value);
  } else {
    return false;
  }
  return true;
}

inline void validate_config(const Config& cfg, std::string_view name) {
  try {
    cfg.tracker.validate();
    cfg.sim.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string(name) + ": " + e.what());
  }
  const FishIouParams& p = cfg.tracker.fish_iou;
  if (p.head_inset < 0.0 || p.vertical_inset < 0.0 || p.tail_inset < 0.0 ||
      !(p.head_inset + p.tail_inset < 1.0) ||
      !(2.0 * p.vertical_inset < 1.0)) {
    throw FormatError(std::string(name) +
                      ": fishiou insets must be non-negative with "
                      "head_inset + tail_inset < 1 and vertical_inset < 0.5");
  }
  if (p.overlap_weight < 0.0 || p.central_weight < 0.0 ||
      p.aspect_weight < 0.0 || p.area_weight < 0.0 ||
      p.distance_weight < 0.0 || !(p.area_scale > 0.0)) {
    throw FormatError(std::string(name) +
                      ": fishiou weights must be non-negative and "
                      "area_scale positive");
  }
}

}  // namespace detail

/// INI-style configuration with sections [tracker], [fishiou], [ukf] and
/// [sim]. Every default is overridable; unknown sections or keys are errors.
/// `#` and `;` start comments. An empty stream yields the built-in defaults.
inline Config parse_config(std::istream& in, std::string_view name) {
  Config cfg;
  std::string raw;
  long line_no = 0;
  std::string section;
  while (detail::next_line(in, raw, line_no)) {
    std::string_view line = raw;
    if (const auto pos = line.find_first_of("#;");
        pos != std::string_view::npos) {
      line = line.substr(0, pos);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        detail::fail_at(name, line_no, "unterminated section header");
      }
      const std::string_view sec =
          detail::trim(line.substr(1, line.size() - 2));
      if (sec != "tracker" && sec != "fishiou" && sec != "ukf" &&
          sec != "sim") {
        detail::fail_at(name, line_no,
                        "unknown section [" + std::string(sec) + "]");
      }
      section = std::string(sec);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      detail::fail_at(name, line_no, "expected key=value");
    }
    const std::string_view key = detail::trim(line.substr(0, eq));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (key.empty()) detail::fail_at(name, line_no, "empty key");
    if (section.empty()) {
      detail::fail_at(name, line_no,
                      "key '" + std::string(key) + "' outside any section");
    }
    bool known = false;
    if (section == "tracker") {
      known = detail::apply_tracker_key(cfg.tracker, key, value, name,
                                        line_no);
    } else if (section == "fishiou") {
      known = detail::apply_fishiou_key(cfg.tracker.fish_iou, key, value,
                                        name, line_no);
    } else if (section == "ukf") {
      known = detail::apply_ukf_key(cfg.tracker.ukf, key, value, name,
                                    line_no);
    } else {
      known = detail::apply_sim_key(cfg.sim, key, value, name, line_no);
    }
    if (!known) {
      detail::fail_at(name, line_no,
                      "unknown key '" + std::string(key) + "' in [" +
                          section + "]");
    }
  }
  detail::validate_config(cfg, name);
  return cfg;
}

inline Config load_config(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_config(in, path);
}

/// One sequence's worth of input, ready to feed the tracker.
struct SequenceBundle {
  DetectionSet detections;
  std::optional<TrajectorySet> gt;
  EmbeddingTable embeddings;
  int frame_count = 0;
  double fps = 25.0;
};

inline SequenceBundle load_sequence(
    const std::string& dets_path,
    const std::optional<std::string>& gt_path = std::nullopt,
    const std::optional<std::string>& emb_path = std::nullopt) {
  SequenceBundle b;
  b.detections = read_detections(dets_path);
  if (gt_path) b.gt = read_gt(*gt_path);
  if (emb_path) {
    b.embeddings = read_embeddings(*emb_path);
    attach_embeddings(b.detections, b.embeddings);
  }
  if (!b.detections.empty()) {
    b.frame_count = b.detections.rbegin()->first;
  }
  if (b.gt && !b.gt->frames.empty()) {
    b.frame_count = std::max(b.frame_count, b.gt->frames.rbegin()->first);
  }
  return b;
}

}  // namespace sut
