#pragma once

#include <string>
#include <vector>

#include "smctrack/geometry.hpp"
#include "smctrack/hungarian.hpp"

namespace smctrack {

enum class FusionMode { Gate, Weighted, Eq4Literal, IouOnly };
enum class SplitMode { AdaptiveMean, Fixed };

std::string to_string(FusionMode mode);
std::string to_string(SplitMode mode);
FusionMode parse_fusion_mode(const std::string& name);
SplitMode parse_split_mode(const std::string& name);

/// Adaptive split threshold: mean score of the lower ceil(N/2) detections.
/// Empty input falls back to det_floor; Fixed mode returns fixed_threshold.
double compute_split_threshold(const std::vector<Detection>& detections,
                               SplitMode mode, double det_floor,
                               double fixed_threshold);

/// Indices into the input partitioned by score: > threshold goes high,
/// [det_floor, threshold] goes low, < det_floor is discarded as background.
struct DetectionPartition {
  std::vector<int> high;
  std::vector<int> low;
  std::vector<int> discarded;
};

DetectionPartition partition_detections(const std::vector<Detection>& detections,
                                        double threshold, double det_floor);

/// Gate fusion: pairs with appearance similarity below epsilon are
/// infeasible. Feasible pairs cost motion_distance + (1 - appearance) by
/// default, or motion_distance - (1 - appearance) in the literal variant.
CostMatrix fuse_gate(const Eigen::MatrixXd& motion_distance,
                     const Eigen::MatrixXd& appearance_similarity, double epsilon,
                     bool literal_sign = false);

/// Weighted fusion: cost = 1 - (alpha * iou + (1 - alpha) * appearance).
CostMatrix fuse_weighted(const Eigen::MatrixXd& iou_similarity,
                         const Eigen::MatrixXd& appearance_similarity, double alpha);

}  // namespace smctrack
