#pragma once

// Per-sequence trajectory container: frame index -> identified boxes. Ground
// truth, tracker output, the evaluator, and the simulator all speak this
// type.

#include <cstddef>
#include <map>
#include <stdexcept>
#include <vector>

#include "sut/geometry.hpp"

namespace sut {

struct TrackedBox {
  int id = 0;
  BoundingBox box;
  double score = 1.0;
};

/// Frames are 1-based; within one frame every identity appears at most once.
struct TrajectorySet {
  std::map<int, std::vector<TrackedBox>> frames;

  void add(int frame, int id, const BoundingBox& box, double score = 1.0) {
    if (frame < 1) {
      throw std::invalid_argument("TrajectorySet: frame indices start at 1");
    }
    auto& list = frames[frame];
    for (const TrackedBox& t : list) {
      if (t.id == id) {
        throw std::invalid_argument(
            "TrajectorySet: duplicate identity within a frame");
      }
    }
    list.push_back({id, box, score});
  }

  std::size_t entry_count() const {
    std::size_t n = 0;
    for (const auto& [frame, list] : frames) n += list.size();
    return n;
  }

  bool empty() const { return entry_count() == 0; }
};

}  // namespace sut
