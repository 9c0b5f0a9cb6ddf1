#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "smctrack/geometry.hpp"
#include "smctrack/tracker.hpp"

namespace smctrack {

struct GroundTruthEntry {
  int frame = 0;
  std::int64_t identity = 0;
  BoundingBox box;
};

/// Raw CLEAR tallies plus per-identity coverage, before any ratios.
struct ClearMotTally {
  std::int64_t false_positives = 0;
  std::int64_t false_negatives = 0;
  std::int64_t id_switches = 0;
  std::int64_t gt_boxes = 0;
  double matched_iou_sum = 0.0;
  std::int64_t matched_boxes = 0;
  std::map<std::int64_t, int> gt_frames;       // per gt identity
  std::map<std::int64_t, int> matched_frames;  // per gt identity

  double mean_matched_iou() const {
    return matched_boxes > 0 ? matched_iou_sum / static_cast<double>(matched_boxes) : 0.0;
  }
};

struct IdentityCounts {
  std::int64_t idtp = 0;
  std::int64_t idfp = 0;
  std::int64_t idfn = 0;
  double idf1 = 0.0;
};

struct MetricsReport {
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t idsw = 0;
  std::int64_t gt = 0;
  double mota = 0.0;
  std::int64_t idtp = 0;
  std::int64_t idfp = 0;
  std::int64_t idfn = 0;
  double idf1 = 0.0;
  double mostly_tracked = 0.0;
  double mostly_lost = 0.0;
  double mean_matched_iou = 0.0;
};

/// Frame-by-frame CLEAR matching: previous correspondences are kept while
/// they still overlap above the threshold, the rest is re-matched by maximum
/// IoU, and a correspondence change for a ground-truth identity counts one
/// identity switch.
ClearMotTally clear_mot_evaluate(const std::vector<GroundTruthEntry>& ground_truth,
                                 const std::vector<TrackOutput>& results,
                                 double iou_threshold = 0.5);

/// 1 - (FN + FP + IDSW) / GT; throws UndefinedMetricError when GT is zero.
double compute_mota(std::int64_t fn, std::int64_t fp, std::int64_t idsw,
                    std::int64_t gt);

/// Global identity mapping maximizing per-frame box matches, then the usual
/// IDTP / IDFP / IDFN split.
IdentityCounts compute_idf1(const std::vector<GroundTruthEntry>& ground_truth,
                            const std::vector<TrackOutput>& results,
                            double iou_threshold = 0.5);

/// (MT, ML): share of ground-truth identities covered > 80% / < 20%.
std::pair<double, double> compute_mt_ml(const std::vector<GroundTruthEntry>& ground_truth,
                                        const std::vector<TrackOutput>& results,
                                        double iou_threshold = 0.5);

MetricsReport evaluate_tracking(const std::vector<GroundTruthEntry>& ground_truth,
                                const std::vector<TrackOutput>& results,
                                double iou_threshold = 0.5);

std::string format_metrics_text(const MetricsReport& report);
std::string format_metrics_csv(const MetricsReport& report);

}  // namespace smctrack
