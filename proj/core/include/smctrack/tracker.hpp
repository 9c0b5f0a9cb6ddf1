#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "smctrack/feature_bank.hpp"
#include "smctrack/fusion.hpp"
#include "smctrack/geometry.hpp"
#include "smctrack/kalman.hpp"

namespace smctrack {

struct TrackerConfig {
  double gate_epsilon = 0.7;        // appearance feasibility gate
  double new_track_threshold = 0.7; // H: minimum score to initialize a track
  double match_cost_cap = 0.2;      // reject assignments costlier than this
  double det_floor = 0.1;           // scores below are background
  int lost_ttl = 30;                // frames a lost track survives unmatched
  std::size_t bank_capacity = 50;
  FusionMode fusion_mode = FusionMode::Gate;
  double alpha = 0.5;               // weighted-fusion blend
  bool stage2_enabled = true;       // run the low-score association at all
  bool stage2_appearance = false;   // multi-template similarity in stage 2
  SplitMode split_mode = SplitMode::AdaptiveMean;
  double fixed_split_threshold = 0.6;
  MotionNoiseConfig motion;

  void validate() const;  // throws ConfigError
};

enum class TrackStatus { Active, Lost };

struct Track {
  std::int64_t id = 0;
  KalmanState kalman;
  FeatureBank bank;
  std::optional<Embedding> last_embedding;  // most recent high-score embedding
  TrackStatus status = TrackStatus::Active;
  int frames_since_update = 0;
  double last_score = 0.0;
  int start_frame = 0;
  int last_matched_frame = 0;
};

struct TrackOutput {
  int frame = 0;
  std::int64_t id = 0;
  BoundingBox box;
  double score = 0.0;
};

/// Motion distance, appearance similarity and the fused cost handed to the
/// assignment solver for one association stage.
struct StageMatrices {
  Eigen::MatrixXd motion_distance;        // entries in [0, 1]
  Eigen::MatrixXd appearance_similarity;  // entries in [-1, 1]
  CostMatrix fused;
};

/// Per-step bookkeeping surfaced for tests and the CLI summary.
struct StepDiagnostics {
  int frame = 0;
  double split_threshold = 0.0;
  std::size_t detections = 0;
  std::size_t high_count = 0;
  std::size_t low_count = 0;
  std::size_t discarded_count = 0;
  std::size_t stage1_matches = 0;
  std::size_t stage2_matches = 0;
  std::size_t new_tracks = 0;
  std::size_t lost_tracks = 0;
  std::size_t deleted_tracks = 0;
  std::vector<double> stage1_matched_appearance;  // gated M_a of accepted matches
  StageMatrices stage1;
  StageMatrices stage2;
};

/// Two-stage similarity matching cascade over one detection stream.
/// Single-threaded; one instance per sequence.
class SmcTracker {
public:
  explicit SmcTracker(TrackerConfig config);

  /// Advances one frame and returns the boxes emitted for it. Frames must
  /// arrive strictly increasing.
  std::vector<TrackOutput> step(const FrameObservations& frame);

  const std::vector<Track>& tracks() const { return tracks_; }
  const StepDiagnostics& last_diagnostics() const { return diagnostics_; }
  const TrackerConfig& config() const { return config_; }

  std::int64_t ids_created() const { return next_id_ - 1; }
  std::int64_t tracks_deleted() const { return total_deleted_; }

private:
  struct StageOutcome {
    std::vector<std::pair<int, int>> matches;  // (track index, detection index)
    std::vector<int> unmatched_tracks;
    std::vector<int> unmatched_detections;
  };

  StageOutcome associate(const std::vector<int>& track_indices,
                         const std::vector<int>& detection_indices,
                         const std::vector<BoundingBox>& predicted_boxes,
                         const FrameObservations& frame, bool stage_two);

  void apply_match(Track& track, const Detection& detection, int frame_index,
                   double split_threshold, bool high_confidence);

  TrackerConfig config_;
  std::vector<Track> tracks_;
  std::int64_t next_id_ = 1;
  std::int64_t total_deleted_ = 0;
  int last_frame_ = -1;
  bool started_ = false;
  StepDiagnostics diagnostics_;
};

/// Folds SmcTracker::step over an ordered sequence.
std::vector<TrackOutput> run_sequence(const std::vector<FrameObservations>& frames,
                                      const TrackerConfig& config);

}  // namespace smctrack
