#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "smctrack/embedding.hpp"

namespace smctrack {

/// Pixel-space box, top-left + size convention (the MOT CSV wire format).
struct BoundingBox {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;

  double right() const { return left + width; }
  double bottom() const { return top + height; }
  double area() const { return width * height; }
  double center_x() const { return left + 0.5 * width; }
  double center_y() const { return top + 0.5 * height; }
  double aspect_ratio() const { return width / height; }

  bool valid() const { return width > 0.0 && height > 0.0; }

  static BoundingBox from_center(double cx, double cy, double w, double h) {
    return BoundingBox{cx - 0.5 * w, cy - 0.5 * h, w, h};
  }
};

struct Detection {
  BoundingBox box;
  double score = 0.0;  // in [0, 1]
  int frame = 0;
  std::optional<Embedding> embedding;
};

/// All detections observed in one frame, in file order.
struct FrameObservations {
  int frame = 0;
  std::vector<Detection> detections;
};

/// Intersection-over-union; 0 for disjoint boxes, symmetric by construction.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Entry (i, j) = 1 - iou(predicted_boxes[i], detections[j].box).
/// Empty inputs yield an empty (possibly 0xN) matrix.
Eigen::MatrixXd iou_distance_matrix(const std::vector<BoundingBox>& predicted_boxes,
                                    const std::vector<Detection>& detections);

}  // namespace smctrack
