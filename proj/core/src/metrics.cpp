#include "smctrack/metrics.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "smctrack/errors.hpp"
#include "smctrack/hungarian.hpp"

namespace smctrack {

namespace {

using FrameMap = std::map<int, std::vector<std::size_t>>;

FrameMap group_gt_by_frame(const std::vector<GroundTruthEntry>& entries) {
  FrameMap by_frame;
  std::set<std::pair<int, std::int64_t>> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!seen.emplace(entries[i].frame, entries[i].identity).second) {
      throw std::invalid_argument("duplicate (frame, identity) in ground truth");
    }
    by_frame[entries[i].frame].push_back(i);
  }
  return by_frame;
}

FrameMap group_results_by_frame(const std::vector<TrackOutput>& results) {
  FrameMap by_frame;
  std::set<std::pair<int, std::int64_t>> seen;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!seen.emplace(results[i].frame, results[i].id).second) {
      throw std::invalid_argument("duplicate (frame, id) in results");
    }
    by_frame[results[i].frame].push_back(i);
  }
  return by_frame;
}

}  // namespace

ClearMotTally clear_mot_evaluate(const std::vector<GroundTruthEntry>& ground_truth,
                                 const std::vector<TrackOutput>& results,
                                 double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw ConfigError("iou_threshold must lie in (0, 1]");
  }
  const FrameMap gt_by_frame = group_gt_by_frame(ground_truth);
  const FrameMap res_by_frame = group_results_by_frame(results);

  std::set<int> frames;
  for (const auto& [frame, _] : gt_by_frame) frames.insert(frame);
  for (const auto& [frame, _] : res_by_frame) frames.insert(frame);

  ClearMotTally tally;
  for (const auto& entry : ground_truth) {
    ++tally.gt_frames[entry.identity];
  }

  std::map<std::int64_t, std::int64_t> correspondence;  // gt identity -> track id

  for (int frame : frames) {
    std::vector<std::size_t> gt_idx;
    if (auto it = gt_by_frame.find(frame); it != gt_by_frame.end()) gt_idx = it->second;
    std::vector<std::size_t> res_idx;
    if (auto it = res_by_frame.find(frame); it != res_by_frame.end()) res_idx = it->second;

    tally.gt_boxes += static_cast<std::int64_t>(gt_idx.size());

    std::vector<bool> gt_used(gt_idx.size(), false);
    std::vector<bool> res_used(res_idx.size(), false);

    std::map<std::int64_t, std::size_t> res_by_id;
    for (std::size_t j = 0; j < res_idx.size(); ++j) {
      res_by_id[results[res_idx[j]].id] = j;
    }

    auto record_match = [&](std::size_t gi, std::size_t rj, double overlap) {
      const auto& gt_entry = ground_truth[gt_idx[gi]];
      const auto track_id = results[res_idx[rj]].id;
      auto it = correspondence.find(gt_entry.identity);
      if (it != correspondence.end() && it->second != track_id) {
        ++tally.id_switches;
      }
      correspondence[gt_entry.identity] = track_id;
      gt_used[gi] = true;
      res_used[rj] = true;
      ++tally.matched_frames[gt_entry.identity];
      tally.matched_iou_sum += overlap;
      ++tally.matched_boxes;
    };

    // Keep yesterday's correspondences while they still overlap.
    for (std::size_t gi = 0; gi < gt_idx.size(); ++gi) {
      const auto& gt_entry = ground_truth[gt_idx[gi]];
      auto corr = correspondence.find(gt_entry.identity);
      if (corr == correspondence.end()) continue;
      auto rj_it = res_by_id.find(corr->second);
      if (rj_it == res_by_id.end() || res_used[rj_it->second]) continue;
      const double overlap = iou(gt_entry.box, results[res_idx[rj_it->second]].box);
      if (overlap >= iou_threshold) {
        record_match(gi, rj_it->second, overlap);
      }
    }

    // Hungarian over what is left, maximizing IoU above the threshold.
    std::vector<std::size_t> free_gt, free_res;
    for (std::size_t gi = 0; gi < gt_idx.size(); ++gi) {
      if (!gt_used[gi]) free_gt.push_back(gi);
    }
    for (std::size_t rj = 0; rj < res_idx.size(); ++rj) {
      if (!res_used[rj]) free_res.push_back(rj);
    }
    if (!free_gt.empty() && !free_res.empty()) {
      Eigen::MatrixXd cost(free_gt.size(), free_res.size());
      for (std::size_t a = 0; a < free_gt.size(); ++a) {
        for (std::size_t b = 0; b < free_res.size(); ++b) {
          const double overlap =
              iou(ground_truth[gt_idx[free_gt[a]]].box, results[res_idx[free_res[b]]].box);
          cost(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
              overlap >= iou_threshold ? 1.0 - overlap : CostMatrix::kInfeasible;
        }
      }
      const AssignmentResult assignment = hungarian_solve(CostMatrix(cost));
      for (const auto& [a, b] : assignment.matches) {
        record_match(free_gt[static_cast<std::size_t>(a)],
                     free_res[static_cast<std::size_t>(b)],
                     1.0 - cost(a, b));
      }
    }

    for (std::size_t gi = 0; gi < gt_idx.size(); ++gi) {
      if (!gt_used[gi]) ++tally.false_negatives;
    }
    for (std::size_t rj = 0; rj < res_idx.size(); ++rj) {
      if (!res_used[rj]) ++tally.false_positives;
    }
  }
  return tally;
}

double compute_mota(std::int64_t fn, std::int64_t fp, std::int64_t idsw,
                    std::int64_t gt) {
  if (gt <= 0) {
    throw UndefinedMetricError("MOTA is undefined without ground-truth boxes");
  }
  return 1.0 - static_cast<double>(fn + fp + idsw) / static_cast<double>(gt);
}

IdentityCounts compute_idf1(const std::vector<GroundTruthEntry>& ground_truth,
                            const std::vector<TrackOutput>& results,
                            double iou_threshold) {
  const FrameMap gt_by_frame = group_gt_by_frame(ground_truth);
  const FrameMap res_by_frame = group_results_by_frame(results);

  std::vector<std::int64_t> gt_ids, res_ids;
  for (const auto& entry : ground_truth) gt_ids.push_back(entry.identity);
  for (const auto& out : results) res_ids.push_back(out.id);
  std::sort(gt_ids.begin(), gt_ids.end());
  gt_ids.erase(std::unique(gt_ids.begin(), gt_ids.end()), gt_ids.end());
  std::sort(res_ids.begin(), res_ids.end());
  res_ids.erase(std::unique(res_ids.begin(), res_ids.end()), res_ids.end());

  // Per identity pair: number of frames where the two boxes overlap enough.
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> overlap_frames;
  for (const auto& [frame, gt_list] : gt_by_frame) {
    auto res_it = res_by_frame.find(frame);
    if (res_it == res_by_frame.end()) continue;
    for (std::size_t gi : gt_list) {
      for (std::size_t rj : res_it->second) {
        if (iou(ground_truth[gi].box, results[rj].box) >= iou_threshold) {
          ++overlap_frames[{ground_truth[gi].identity, results[rj].id}];
        }
      }
    }
  }

  const std::int64_t total_gt = static_cast<std::int64_t>(ground_truth.size());
  const std::int64_t total_res = static_cast<std::int64_t>(results.size());
  if (total_gt + total_res == 0) {
    throw UndefinedMetricError("IDF1 is undefined without boxes on either side");
  }

  std::int64_t idtp = 0;
  if (!gt_ids.empty() && !res_ids.empty()) {
    Eigen::MatrixXd cost(gt_ids.size(), res_ids.size());
    for (std::size_t a = 0; a < gt_ids.size(); ++a) {
      for (std::size_t b = 0; b < res_ids.size(); ++b) {
        std::int64_t m = 0;
        if (auto it = overlap_frames.find({gt_ids[a], res_ids[b]});
            it != overlap_frames.end()) {
          m = it->second;
        }
        cost(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            -static_cast<double>(m);
      }
    }
    const AssignmentResult assignment = hungarian_solve(CostMatrix(cost));
    for (const auto& [a, b] : assignment.matches) {
      idtp += static_cast<std::int64_t>(-cost(a, b));
    }
  }

  IdentityCounts counts;
  counts.idtp = idtp;
  counts.idfp = total_res - idtp;
  counts.idfn = total_gt - idtp;
  counts.idf1 = 2.0 * static_cast<double>(counts.idtp) /
                static_cast<double>(2 * counts.idtp + counts.idfp + counts.idfn);
  return counts;
}

std::pair<double, double> compute_mt_ml(const std::vector<GroundTruthEntry>& ground_truth,
                                        const std::vector<TrackOutput>& results,
                                        double iou_threshold) {
  const ClearMotTally tally = clear_mot_evaluate(ground_truth, results, iou_threshold);
  if (tally.gt_frames.empty()) {
    throw UndefinedMetricError("MT/ML are undefined without ground-truth identities");
  }
  std::int64_t mostly_tracked = 0;
  std::int64_t mostly_lost = 0;
  for (const auto& [identity, total] : tally.gt_frames) {
    int matched = 0;
    if (auto it = tally.matched_frames.find(identity); it != tally.matched_frames.end()) {
      matched = it->second;
    }
    const double coverage = static_cast<double>(matched) / static_cast<double>(total);
    if (coverage > 0.8) ++mostly_tracked;
    if (coverage < 0.2) ++mostly_lost;
  }
  const double identities = static_cast<double>(tally.gt_frames.size());
  return {static_cast<double>(mostly_tracked) / identities,
          static_cast<double>(mostly_lost) / identities};
}

MetricsReport evaluate_tracking(const std::vector<GroundTruthEntry>& ground_truth,
                                const std::vector<TrackOutput>& results,
                                double iou_threshold) {
  const ClearMotTally tally = clear_mot_evaluate(ground_truth, results, iou_threshold);
  const IdentityCounts identity = compute_idf1(ground_truth, results, iou_threshold);
  const auto [mt, ml] = compute_mt_ml(ground_truth, results, iou_threshold);

  MetricsReport report;
  report.fp = tally.false_positives;
  report.fn = tally.false_negatives;
  report.idsw = tally.id_switches;
  report.gt = tally.gt_boxes;
  report.mota = compute_mota(report.fn, report.fp, report.idsw, report.gt);
  report.idtp = identity.idtp;
  report.idfp = identity.idfp;
  report.idfn = identity.idfn;
  report.idf1 = identity.idf1;
  report.mostly_tracked = mt;
  report.mostly_lost = ml;
  report.mean_matched_iou = tally.mean_matched_iou();
  return report;
}

std::string format_metrics_text(const MetricsReport& report) {
  std::ostringstream out;
  out << "MOTA  " << report.mota << "\n"
      << "IDF1  " << report.idf1 << "\n"
      << "IDs   " << report.idsw << "\n"
      << "FP    " << report.fp << "\n"
      << "FN    " << report.fn << "\n"
      << "GT    " << report.gt << "\n"
      << "MT    " << report.mostly_tracked << "\n"
      << "ML    " << report.mostly_lost << "\n"
      << "mIoU  " << report.mean_matched_iou << "\n";
  return out.str();
}

std::string format_metrics_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "metric,value\n"
      << "MOTA," << report.mota << "\n"
      << "IDF1," << report.idf1 << "\n"
      << "IDSW," << report.idsw << "\n"
      << "FP," << report.fp << "\n"
      << "FN," << report.fn << "\n"
      << "GT," << report.gt << "\n"
      << "IDTP," << report.idtp << "\n"
      << "IDFP," << report.idfp << "\n"
      << "IDFN," << report.idfn << "\n"
      << "MT," << report.mostly_tracked << "\n"
      << "ML," << report.mostly_lost << "\n"
      << "MEAN_IOU," << report.mean_matched_iou << "\n";
  return out.str();
}

}  // namespace smctrack
