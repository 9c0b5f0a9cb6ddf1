#include "smctrack/geometry.hpp"

#include <algorithm>

namespace smctrack {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.left, b.left));
  const double iy = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top));
  const double inter = ix * iy;
  if (inter <= 0.0) {
    return 0.0;
  }
  const double uni = a.area() + b.area() - inter;
  return inter / uni;
}

Eigen::MatrixXd iou_distance_matrix(const std::vector<BoundingBox>& predicted_boxes,
                                    const std::vector<Detection>& detections) {
  Eigen::MatrixXd dist(predicted_boxes.size(), detections.size());
  for (Eigen::Index i = 0; i < dist.rows(); ++i) {
    for (Eigen::Index j = 0; j < dist.cols(); ++j) {
      dist(i, j) = 1.0 - iou(predicted_boxes[static_cast<std::size_t>(i)],
                             detections[static_cast<std::size_t>(j)].box);
    }
  }
  return dist;
}

}  // namespace smctrack
