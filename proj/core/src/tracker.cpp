#include "smctrack/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "smctrack/errors.hpp"
#include "smctrack/hungarian.hpp"

namespace smctrack {

void TrackerConfig::validate() const {
  if (!(det_floor >= 0.0) || !(det_floor < new_track_threshold) ||
      !(new_track_threshold <= 1.0)) {
    throw ConfigError("require 0 <= det_floor < new_track_threshold <= 1");
  }
  if (!(gate_epsilon >= 0.0) || !(gate_epsilon <= 1.0)) {
    throw ConfigError("gate_epsilon must lie in [0, 1]");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1)");
  }
  if (lost_ttl < 1) {
    throw ConfigError("lost_ttl must be at least 1 frame");
  }
  if (bank_capacity == 0) {
    throw ConfigError("bank_capacity must be positive");
  }
  if (!std::isfinite(match_cost_cap)) {
    throw ConfigError("match_cost_cap must be finite");
  }
  if (!(fixed_split_threshold >= 0.0) || !(fixed_split_threshold <= 1.0)) {
    throw ConfigError("fixed_split_threshold must lie in [0, 1]");
  }
  if (!(motion.position_std_factor > 0.0) || !(motion.velocity_std_factor > 0.0)) {
    throw ConfigError("motion noise factors must be positive");
  }
}

SmcTracker::SmcTracker(TrackerConfig config) : config_(std::move(config)) {
  config_.validate();
}

SmcTracker::StageOutcome SmcTracker::associate(
    const std::vector<int>& track_indices, const std::vector<int>& detection_indices,
    const std::vector<BoundingBox>& predicted_boxes, const FrameObservations& frame,
    bool stage_two) {
  const std::size_t n_tracks = track_indices.size();
  const std::size_t n_dets = detection_indices.size();

  std::vector<BoundingBox> boxes;
  boxes.reserve(n_tracks);
  for (int ti : track_indices) {
    boxes.push_back(predicted_boxes[static_cast<std::size_t>(ti)]);
  }
  std::vector<Detection> dets;
  dets.reserve(n_dets);
  for (int dj : detection_indices) {
    dets.push_back(frame.detections[static_cast<std::size_t>(dj)]);
  }

  const Eigen::MatrixXd motion_distance = iou_distance_matrix(boxes, dets);

  const bool use_appearance =
      config_.fusion_mode != FusionMode::IouOnly && (!stage_two || config_.stage2_appearance);

  CostMatrix cost;
  Eigen::MatrixXd appearance;
  Eigen::MatrixXd has_evidence;
  if (use_appearance) {
    appearance.resize(static_cast<Eigen::Index>(n_tracks), static_cast<Eigen::Index>(n_dets));
    has_evidence = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_tracks),
                                         static_cast<Eigen::Index>(n_dets));
    for (std::size_t i = 0; i < n_tracks; ++i) {
      const Track& track = tracks_[static_cast<std::size_t>(track_indices[i])];
      for (std::size_t j = 0; j < n_dets; ++j) {
        const auto& det_embedding = dets[j].embedding;
        double similarity = 0.0;
        bool evidence = false;
        if (det_embedding.has_value()) {
          if (stage_two) {
            if (!track.bank.empty()) {
              similarity = track.bank.max_similarity(*det_embedding);
              evidence = true;
            }
          } else if (track.last_embedding.has_value()) {
            similarity = cosine_similarity(*track.last_embedding, *det_embedding);
            evidence = true;
          }
        }
        // Pairs without appearance evidence contribute motion cost only:
        // similarity 1 nullifies the gate/literal term, the pair's own IoU
        // similarity nullifies the weighted term.
        if (!evidence) {
          similarity = config_.fusion_mode == FusionMode::Weighted
                           ? 1.0 - motion_distance(static_cast<Eigen::Index>(i),
                                                   static_cast<Eigen::Index>(j))
                           : 1.0;
        }
        appearance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = similarity;
        has_evidence(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            evidence ? 1.0 : 0.0;
      }
    }
    switch (config_.fusion_mode) {
      case FusionMode::Gate:
        cost = fuse_gate(motion_distance, appearance, config_.gate_epsilon, false);
        break;
      case FusionMode::Eq4Literal:
        cost = fuse_gate(motion_distance, appearance, config_.gate_epsilon, true);
        break;
      case FusionMode::Weighted: {
        const Eigen::MatrixXd iou_similarity =
            (1.0 - motion_distance.array()).matrix();
        cost = fuse_weighted(iou_similarity, appearance, config_.alpha);
        break;
      }
      case FusionMode::IouOnly:
        break;
    }
  } else {
    cost = CostMatrix(motion_distance);
  }

  StageMatrices& stage_matrices = stage_two ? diagnostics_.stage2 : diagnostics_.stage1;
  stage_matrices.motion_distance = motion_distance;
  stage_matrices.appearance_similarity =
      use_appearance ? appearance
                     : Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n_tracks),
                                             static_cast<Eigen::Index>(n_dets));
  stage_matrices.fused = cost;

  const AssignmentResult assignment = hungarian_solve(cost, config_.match_cost_cap);

  StageOutcome outcome;
  for (const auto& [row, col] : assignment.matches) {
    outcome.matches.emplace_back(track_indices[static_cast<std::size_t>(row)],
                                 detection_indices[static_cast<std::size_t>(col)]);
    if (!stage_two && use_appearance &&
        has_evidence(row, col) != 0.0) {
      diagnostics_.stage1_matched_appearance.push_back(appearance(row, col));
    }
  }
  for (int row : assignment.unmatched_rows) {
    outcome.unmatched_tracks.push_back(track_indices[static_cast<std::size_t>(row)]);
  }
  for (int col : assignment.unmatched_cols) {
    outcome.unmatched_detections.push_back(detection_indices[static_cast<std::size_t>(col)]);
  }
  return outcome;
}

void SmcTracker::apply_match(Track& track, const Detection& detection, int frame_index,
                             double split_threshold, bool high_confidence) {
  track.kalman = kf_update(track.kalman, detection.box, config_.motion);
  track.status = TrackStatus::Active;
  track.frames_since_update = 0;
  track.last_score = detection.score;
  track.last_matched_frame = frame_index;
  if (detection.embedding.has_value()) {
    track.bank.insert(*detection.embedding, detection.score, split_threshold);
    if (high_confidence) {
      track.last_embedding = detection.embedding;
    }
  }
}

std::vector<TrackOutput> SmcTracker::step(const FrameObservations& frame) {
  if (started_ && frame.frame <= last_frame_) {
    throw SequencingError("frame " + std::to_string(frame.frame) +
                          " arrived after frame " + std::to_string(last_frame_));
  }
  for (const auto& det : frame.detections) {
    if (det.frame != frame.frame) {
      throw SequencingError("detection frame index does not match its container");
    }
  }
  started_ = true;
  last_frame_ = frame.frame;

  diagnostics_ = StepDiagnostics{};
  diagnostics_.frame = frame.frame;
  diagnostics_.detections = frame.detections.size();

  // Lost tracks ride along in the working list and keep receiving predictions
  // so re-association sees a current box.
  std::vector<BoundingBox> predicted_boxes(tracks_.size());
  std::vector<int> working;
  working.reserve(tracks_.size());
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    tracks_[i].kalman = kf_predict(tracks_[i].kalman, config_.motion);
    predicted_boxes[i] = state_to_box(tracks_[i].kalman);
    working.push_back(static_cast<int>(i));
  }

  const double split_threshold =
      compute_split_threshold(frame.detections, config_.split_mode, config_.det_floor,
                              config_.fixed_split_threshold);
  const DetectionPartition partition =
      partition_detections(frame.detections, split_threshold, config_.det_floor);
  diagnostics_.split_threshold = split_threshold;
  diagnostics_.high_count = partition.high.size();
  diagnostics_.low_count = partition.low.size();
  diagnostics_.discarded_count = partition.discarded.size();

  // Stage I: all tracks against the high-score detections.
  const StageOutcome stage1 =
      associate(working, partition.high, predicted_boxes, frame, /*stage_two=*/false);
  for (const auto& [ti, dj] : stage1.matches) {
    apply_match(tracks_[static_cast<std::size_t>(ti)],
                frame.detections[static_cast<std::size_t>(dj)], frame.frame,
                split_threshold, /*high_confidence=*/true);
  }
  diagnostics_.stage1_matches = stage1.matches.size();

  // Stage II: leftovers against the low-score detections.
  const std::vector<int> no_low;
  const StageOutcome stage2 =
      associate(stage1.unmatched_tracks, config_.stage2_enabled ? partition.low : no_low,
                predicted_boxes, frame, /*stage_two=*/true);
  for (const auto& [ti, dj] : stage2.matches) {
    apply_match(tracks_[static_cast<std::size_t>(ti)],
                frame.detections[static_cast<std::size_t>(dj)], frame.frame,
                split_threshold, /*high_confidence=*/false);
  }
  diagnostics_.stage2_matches = stage2.matches.size();
  // stage2.unmatched_detections is background by definition; nothing to do.

  // Unmatched high-score detections above H found new tracks.
  for (int dj : stage1.unmatched_detections) {
    const Detection& det = frame.detections[static_cast<std::size_t>(dj)];
    if (det.score <= config_.new_track_threshold) {
      continue;
    }
    Track track;
    track.id = next_id_++;
    track.kalman = kf_initiate(det.box, config_.motion);
    track.bank = FeatureBank(config_.bank_capacity);
    track.status = TrackStatus::Active;
    track.frames_since_update = 0;
    track.last_score = det.score;
    track.start_frame = frame.frame;
    track.last_matched_frame = frame.frame;
    if (det.embedding.has_value()) {
      track.bank.insert(*det.embedding, det.score, split_threshold);
      track.last_embedding = det.embedding;
    }
    tracks_.push_back(std::move(track));
    ++diagnostics_.new_tracks;
  }

  // Remaining tracks go (or stay) lost; overdue ones are deleted.
  for (int ti : stage2.unmatched_tracks) {
    Track& track = tracks_[static_cast<std::size_t>(ti)];
    track.status = TrackStatus::Lost;
    ++track.frames_since_update;
  }
  const auto overdue = [this](const Track& track) {
    return track.frames_since_update > config_.lost_ttl;
  };
  const std::size_t before = tracks_.size();
  std::erase_if(tracks_, overdue);
  diagnostics_.deleted_tracks = before - tracks_.size();
  total_deleted_ += static_cast<std::int64_t>(diagnostics_.deleted_tracks);
  diagnostics_.lost_tracks =
      static_cast<std::size_t>(std::count_if(tracks_.begin(), tracks_.end(),
                                             [](const Track& t) {
                                               return t.status == TrackStatus::Lost;
                                             }));

  std::vector<TrackOutput> outputs;
  for (const Track& track : tracks_) {
    if (track.status == TrackStatus::Active && track.last_matched_frame == frame.frame) {
      outputs.push_back(TrackOutput{frame.frame, track.id, state_to_box(track.kalman),
                                    track.last_score});
    }
  }
  return outputs;
}

std::vector<TrackOutput> run_sequence(const std::vector<FrameObservations>& frames,
                                      const TrackerConfig& config) {
  SmcTracker tracker(config);
  std::vector<TrackOutput> results;
  for (const auto& frame : frames) {
    auto outputs = tracker.step(frame);
    results.insert(results.end(), outputs.begin(), outputs.end());
  }
  return results;
}

}  // namespace smctrack
