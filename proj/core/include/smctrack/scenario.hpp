#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <vector>

#include "smctrack/geometry.hpp"
#include "smctrack/metrics.hpp"

namespace smctrack {

/// Frame indices inside a spec are 0-based (t in [0, frames)); generated
/// ground truth and detections use the 1-based MOT convention (frame = t+1).
struct Waypoint {
  int frame = 0;
  double cx = 0.0;
  double cy = 0.0;
};

struct IdentityPlan {
  std::int64_t identity = 0;
  double box_width = 40.0;
  double box_height = 80.0;
  double base_score = 0.9;
  std::vector<Waypoint> waypoints;  // sorted by frame; present on [first, last]
};

struct ScoreDip {
  std::int64_t identity = 0;
  int first_frame = 0;
  int last_frame = 0;
  double score = 0.0;
};

/// Declared crossings are verified against the generated geometry: the two
/// identities' boxes must reach IoU > 0.5 somewhere in the span.
struct CrossingEvent {
  std::int64_t a = 0;
  std::int64_t b = 0;
  int first_frame = 0;
  int last_frame = 0;
};

/// Pins the cosine between two identities' appearance vectors.
struct AppearanceRelation {
  std::int64_t a = 0;
  std::int64_t b = 0;
  double cosine = 0.0;
};

struct ScenarioSpec {
  int frames = 0;
  std::uint64_t seed = 1;
  int embedding_dim = 16;
  // Perturbation with expected norm sigma relative to the unit identity
  // vector (per-coordinate std sigma / sqrt(d)).
  double appearance_noise_sigma = 0.0;
  double detector_miss_rate = 0.0;
  std::vector<IdentityPlan> identities;
  std::vector<ScoreDip> dips;
  std::vector<CrossingEvent> crossings;
  std::vector<AppearanceRelation> relations;

  void validate() const;  // throws ConfigError
};

struct GeneratedScenario {
  std::vector<GroundTruthEntry> ground_truth;
  std::vector<FrameObservations> detections;  // embeddings attached
  std::map<std::int64_t, Embedding> identity_embeddings;
};

/// Deterministic given the spec seed.
GeneratedScenario generate_scenario(const ScenarioSpec& spec);

ScenarioSpec parse_scenario_spec(std::istream& in, const std::string& source);
ScenarioSpec load_scenario_spec(const std::filesystem::path& path);

// Canned scenarios used by tests and the synthetic harness.

/// Two identities with orthogonal appearance passing through each other once.
ScenarioSpec crossing_scenario(std::uint64_t seed);

/// Two look-alike identities (cos 0.7) that meet and exchange trajectories,
/// so constant-velocity prediction favors the wrong pairing after the meet.
ScenarioSpec adversarial_bounce_scenario(std::uint64_t seed);

/// One identity whose score dips to 0.3 for three frames while it reverses
/// direction; recovering it needs the low-score stage.
ScenarioSpec occlusion_dip_scenario(std::uint64_t seed);

/// identities on separated horizontal lanes (pairwise IoU 0 in every frame).
ScenarioSpec lane_scenario(int identities, int frames, std::uint64_t seed,
                           double miss_rate, double sigma);

/// Randomized lane scenario (size, spans, dips, miss rate drawn from seed).
ScenarioSpec random_lane_scenario(std::uint64_t seed);

}  // namespace smctrack
