#include "smctrack/fusion.hpp"

#include <algorithm>
#include <numeric>

#include "smctrack/errors.hpp"

namespace smctrack {

std::string to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::Gate: return "gate";
    case FusionMode::Weighted: return "weighted";
    case FusionMode::Eq4Literal: return "eq4-literal";
    case FusionMode::IouOnly: return "iou-only";
  }
  return "gate";
}

std::string to_string(SplitMode mode) {
  return mode == SplitMode::AdaptiveMean ? "adaptive-mean" : "fixed";
}

FusionMode parse_fusion_mode(const std::string& name) {
  if (name == "gate") return FusionMode::Gate;
  if (name == "weighted") return FusionMode::Weighted;
  if (name == "eq4-literal") return FusionMode::Eq4Literal;
  if (name == "iou-only") return FusionMode::IouOnly;
  throw ConfigError("unknown fusion mode: " + name);
}

SplitMode parse_split_mode(const std::string& name) {
  if (name == "adaptive-mean") return SplitMode::AdaptiveMean;
  if (name == "fixed") return SplitMode::Fixed;
  throw ConfigError("unknown split mode: " + name);
}

double compute_split_threshold(const std::vector<Detection>& detections,
                               SplitMode mode, double det_floor,
                               double fixed_threshold) {
  if (mode == SplitMode::Fixed) {
    return fixed_threshold;
  }
  if (detections.empty()) {
    return det_floor;
  }
  std::vector<double> scores;
  scores.reserve(detections.size());
  for (const auto& det : detections) {
    scores.push_back(det.score);
  }
  std::sort(scores.begin(), scores.end());
  const std::size_t half = (scores.size() + 1) / 2;
  const double sum = std::accumulate(scores.begin(),
                                     scores.begin() + static_cast<std::ptrdiff_t>(half), 0.0);
  return sum / static_cast<double>(half);
}

DetectionPartition partition_detections(const std::vector<Detection>& detections,
                                        double threshold, double det_floor) {
  DetectionPartition partition;
  for (int i = 0; i < static_cast<int>(detections.size()); ++i) {
    const double score = detections[static_cast<std::size_t>(i)].score;
    if (score < det_floor) {
      partition.discarded.push_back(i);
    } else if (score > threshold) {
      partition.high.push_back(i);
    } else {
      partition.low.push_back(i);
    }
  }
  return partition;
}

CostMatrix fuse_gate(const Eigen::MatrixXd& motion_distance,
                     const Eigen::MatrixXd& appearance_similarity, double epsilon,
                     bool literal_sign) {
  if (motion_distance.rows() != appearance_similarity.rows() ||
      motion_distance.cols() != appearance_similarity.cols()) {
    throw ConfigError("motion and appearance matrices must agree in shape");
  }
  CostMatrix cost(Eigen::MatrixXd(motion_distance.rows(), motion_distance.cols()));
  for (Eigen::Index i = 0; i < motion_distance.rows(); ++i) {
    for (Eigen::Index j = 0; j < motion_distance.cols(); ++j) {
      const double appearance = appearance_similarity(i, j);
      if (appearance < epsilon) {
        cost.values(i, j) = CostMatrix::kInfeasible;
      } else if (literal_sign) {
        cost.values(i, j) = motion_distance(i, j) - (1.0 - appearance);
      } else {
        cost.values(i, j) = motion_distance(i, j) + (1.0 - appearance);
      }
    }
  }
  return cost;
}

CostMatrix fuse_weighted(const Eigen::MatrixXd& iou_similarity,
                         const Eigen::MatrixXd& appearance_similarity, double alpha) {
  if (iou_similarity.rows() != appearance_similarity.rows() ||
      iou_similarity.cols() != appearance_similarity.cols()) {
    throw ConfigError("motion and appearance matrices must agree in shape");
  }
  CostMatrix cost(Eigen::MatrixXd(
      (1.0 - (alpha * iou_similarity + (1.0 - alpha) * appearance_similarity).array())
          .matrix()));
  return cost;
}

}  // namespace smctrack
