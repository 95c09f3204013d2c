#pragma once

#include <algorithm>
#include <cmath>

namespace sut {

/// Axis-aligned box in corner form. Valid boxes have x2 > x1 and y2 > y1;
/// MOT-style (left, top, width, height) tuples are converted at the I/O
/// boundary via from_ltwh().
struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  static BoundingBox from_ltwh(double left, double top, double w, double h) {
    return {left, top, left + w, top + h};
  }

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double aspect() const { return width() / height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }

  bool valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
           std::isfinite(y2) && x2 > x1 && y2 > y1;
  }

  bool operator==(const BoundingBox&) const = default;
};

/// Which horizontal edge of a box faces the direction of travel. The larger
/// head-side trim of central_region() is applied opposite to this edge's
/// inset partner; swapping the convention mirrors the central region.
enum class FrontEdge { kNegX, kPosX };

/// Tunables of the composite box similarity. Defaults follow the reference
/// configuration this tracker was calibrated with.
struct FishIouParams {
  double head_inset = 0.15;      ///< width fraction trimmed at the front edge
  double vertical_inset = 0.30;  ///< height fraction trimmed top and bottom
  double tail_inset = 0.25;      ///< width fraction trimmed at the rear edge
  double overlap_weight = 1.0;   ///< plain IoU term
  double central_weight = 0.3;   ///< central-region IoU term
  double aspect_weight = 0.1;    ///< aspect-ratio consistency term
  double area_weight = 0.2;      ///< area-ratio consistency term
  double distance_weight = 0.4;  ///< center-distance penalty term
  double area_scale = 1000.0;    ///< px^2, attenuates the penalty for small boxes
  FrontEdge front = FrontEdge::kNegX;
};

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

inline BoundingBox enclosing_box(const BoundingBox& a, const BoundingBox& b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
          std::max(a.y2, b.y2)};
}

inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  return inter / (a.area() + b.area() - inter);
}

/// Squared center distance normalized by the squared diagonal of the minimal
/// enclosing box. 0 for concentric boxes, strictly below 1 otherwise.
inline double center_distance_penalty(const BoundingBox& a,
                                      const BoundingBox& b) {
  const double dx = a.center_x() - b.center_x();
  const double dy = a.center_y() - b.center_y();
  const BoundingBox c = enclosing_box(a, b);
  const double diag2 = c.width() * c.width() + c.height() * c.height();
  return (dx * dx + dy * dy) / diag2;
}

/// Trunk region of an elongated body box: the head-side inset trims more than
/// the overlap-prone fins would suggest, the tail inset more still, and the
/// vertical inset removes the dorsal/ventral margins. Requires
/// head_inset + tail_inset < 1 and vertical_inset < 0.5.
inline BoundingBox central_region(const BoundingBox& b,
                                  const FishIouParams& p = {}) {
  const double w = b.width();
  const double h = b.height();
  double lead = p.head_inset;
  double trail = p.tail_inset;
  if (p.front == FrontEdge::kPosX) std::swap(lead, trail);
  return {b.x1 + lead * w, b.y1 + p.vertical_inset * h, b.x2 - trail * w,
          b.y2 - p.vertical_inset * h};
}

inline double central_iou(const BoundingBox& a, const BoundingBox& b,
                          const FishIouParams& p = {}) {
  return iou(central_region(a, p), central_region(b, p));
}

/// min/max ratio of the two aspect ratios, in (0, 1]; 1 iff equal shapes.
inline double aspect_ratio_consistency(const BoundingBox& a,
                                       const BoundingBox& b) {
  const double ra = a.aspect();
  const double rb = b.aspect();
  return std::min(ra, rb) / std::max(ra, rb);
}

/// min/max ratio of the two areas, in (0, 1]; 1 iff equal sizes.
inline double area_ratio_consistency(const BoundingBox& a,
                                     const BoundingBox& b) {
  const double aa = a.area();
  const double ab = b.area();
  return std::min(aa, ab) / std::max(aa, ab);
}

/// Attenuation of the distance penalty for small targets: approaches 0 as the
/// smaller box shrinks, approaches 1 for boxes much larger than area_scale.
inline double small_target_scale(const BoundingBox& a, const BoundingBox& b,
                                 const FishIouParams& p = {}) {
  return 1.0 - std::exp(-std::min(a.area(), b.area()) / p.area_scale);
}

/// Composite similarity for erratic elongated targets: overlap plus trunk
/// overlap plus shape/size consistency, minus a size-scaled center-distance
/// penalty. With default weights the value lies in (-0.4, 1.6], and
/// fish_iou(b, b) == 1.6.
inline double fish_iou(const BoundingBox& a, const BoundingBox& b,
                       const FishIouParams& p = {}) {
  return p.overlap_weight * iou(a, b) +
         p.central_weight * central_iou(a, b, p) +
         p.aspect_weight * aspect_ratio_consistency(a, b) +
         p.area_weight * area_ratio_consistency(a, b) -
         p.distance_weight * small_target_scale(a, b, p) *
             center_distance_penalty(a, b);
}

/// IoU minus the normalized area of the enclosing-box slack; in (-1, 1].
inline double giou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  const double hull = enclosing_box(a, b).area();
  return inter / uni - (hull - uni) / hull;
}

/// IoU minus the normalized squared center distance; in (-1, 1].
inline double diou(const BoundingBox& a, const BoundingBox& b) {
  return iou(a, b) - center_distance_penalty(a, b);
}

}  // namespace sut
