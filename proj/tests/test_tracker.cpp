#include <doctest.h>

#include <map>
#include <set>

#include "smctrack/errors.hpp"
#include "smctrack/metrics.hpp"
#include "smctrack/random.hpp"
#include "smctrack/scenario.hpp"
#include "smctrack/tracker.hpp"

using namespace smctrack;

namespace {

TrackerConfig scenario_config() {
  TrackerConfig cfg;
  cfg.split_mode = SplitMode::Fixed;
  cfg.fixed_split_threshold = 0.6;
  return cfg;
}

Detection plain_detection(int frame, double cx, double cy, double score,
                          std::optional<Embedding> embedding = std::nullopt) {
  return Detection{BoundingBox::from_center(cx, cy, 40, 80), score, frame,
                   std::move(embedding)};
}

std::set<std::int64_t> distinct_ids(const std::vector<TrackOutput>& results) {
  std::set<std::int64_t> ids;
  for (const auto& r : results) ids.insert(r.id);
  return ids;
}

}  // namespace

TEST_CASE("an empty frame on an empty state does nothing") {
  SmcTracker tracker(scenario_config());
  const auto out = tracker.step(FrameObservations{1, {}});
  CHECK(out.empty());
  CHECK(tracker.tracks().empty());
  CHECK(tracker.ids_created() == 0);
}

TEST_CASE("a confident detection initializes a fresh track") {
  SmcTracker tracker(scenario_config());
  const auto out = tracker.step(FrameObservations{1, {plain_detection(1, 100, 100, 0.9)}});
  REQUIRE(out.size() == 1);
  CHECK(out[0].id == 1);
  CHECK(out[0].frame == 1);
  CHECK(out[0].score == 0.9);
  CHECK(tracker.tracks().size() == 1);
  CHECK(tracker.tracks()[0].status == TrackStatus::Active);
}

TEST_CASE("detections below the new-track threshold never initialize") {
  SmcTracker tracker(scenario_config());
  // Above the split threshold (0.6) but at the init threshold (0.7).
  const auto out = tracker.step(FrameObservations{1, {plain_detection(1, 100, 100, 0.7)}});
  CHECK(out.empty());
  CHECK(tracker.tracks().empty());
}

TEST_CASE("frames must arrive strictly increasing") {
  SmcTracker tracker(scenario_config());
  tracker.step(FrameObservations{3, {}});
  CHECK_THROWS_AS(tracker.step(FrameObservations{3, {}}), SequencingError);
  CHECK_THROWS_AS(tracker.step(FrameObservations{2, {}}), SequencingError);
}

TEST_CASE("detections must carry their container's frame index") {
  SmcTracker tracker(scenario_config());
  CHECK_THROWS_AS(tracker.step(FrameObservations{1, {plain_detection(2, 0, 0, 0.9)}}),
                  SequencingError);
}

TEST_CASE("a lost track is re-associated from the lost list") {
  TrackerConfig cfg = scenario_config();
  SmcTracker tracker(cfg);
  tracker.step(FrameObservations{1, {plain_detection(1, 100, 100, 0.9)}});
  tracker.step(FrameObservations{2, {plain_detection(2, 102, 100, 0.9)}});
  tracker.step(FrameObservations{3, {plain_detection(3, 104, 100, 0.9)}});

  // Two missed frames: the track goes lost but keeps predicting.
  CHECK(tracker.step(FrameObservations{4, {}}).empty());
  CHECK(tracker.tracks()[0].status == TrackStatus::Lost);
  CHECK(tracker.step(FrameObservations{5, {}}).empty());
  CHECK(tracker.tracks()[0].frames_since_update == 2);

  const auto out = tracker.step(FrameObservations{6, {plain_detection(6, 110, 100, 0.9)}});
  REQUIRE(out.size() == 1);
  CHECK(out[0].id == 1);
  CHECK(tracker.ids_created() == 1);
  CHECK(tracker.tracks()[0].status == TrackStatus::Active);
}

TEST_CASE("tracks are deleted once they outlive the ttl") {
  TrackerConfig cfg = scenario_config();
  cfg.lost_ttl = 2;
  SmcTracker tracker(cfg);
  tracker.step(FrameObservations{1, {plain_detection(1, 100, 100, 0.9)}});
  tracker.step(FrameObservations{2, {}});
  tracker.step(FrameObservations{3, {}});
  CHECK(tracker.tracks().size() == 1);
  CHECK(tracker.tracks()[0].frames_since_update == 2);
  tracker.step(FrameObservations{4, {}});
  CHECK(tracker.tracks().empty());
  CHECK(tracker.tracks_deleted() == 1);

  // The old id is never reused.
  const auto out = tracker.step(FrameObservations{5, {plain_detection(5, 100, 100, 0.9)}});
  REQUIRE(out.size() == 1);
  CHECK(out[0].id == 2);
}

TEST_CASE("occlusion dip is survived only with the low-score stage") {
  const ScenarioSpec spec = occlusion_dip_scenario(11);
  const GeneratedScenario scenario = generate_scenario(spec);

  TrackerConfig with_stage2 = scenario_config();
  const auto full = run_sequence(scenario.detections, with_stage2);
  CHECK(distinct_ids(full).size() == 1);
  // Matched through the dip: one emission for every frame.
  CHECK(full.size() == static_cast<std::size_t>(spec.frames));

  TrackerConfig without_stage2 = scenario_config();
  without_stage2.stage2_enabled = false;
  const auto ablated = run_sequence(scenario.detections, without_stage2);
  CHECK(distinct_ids(ablated).size() >= 2);
}

TEST_CASE("gate fusion survives the crossing; weighted fusion swaps on the bounce") {
  {
    const GeneratedScenario scenario = generate_scenario(crossing_scenario(21));
    TrackerConfig cfg = scenario_config();
    cfg.fusion_mode = FusionMode::Gate;
    const auto results = run_sequence(scenario.detections, cfg);
    const MetricsReport report = evaluate_tracking(scenario.ground_truth, results);
    CHECK(report.idsw == 0);
    CHECK(report.idf1 == 1.0);
  }
  {
    const GeneratedScenario scenario = generate_scenario(adversarial_bounce_scenario(22));
    TrackerConfig cfg = scenario_config();
    cfg.fusion_mode = FusionMode::Weighted;
    const auto results = run_sequence(scenario.detections, cfg);
    const MetricsReport report = evaluate_tracking(scenario.ground_truth, results);
    CHECK(report.idsw >= 1);
  }
}

TEST_CASE("stage matrices keep their ranges and agree in shape") {
  const GeneratedScenario scenario = generate_scenario(occlusion_dip_scenario(33));
  TrackerConfig cfg = scenario_config();
  cfg.stage2_appearance = true;
  SmcTracker tracker(cfg);
  bool saw_stage2_appearance = false;
  for (const auto& frame : scenario.detections) {
    std::optional<FeatureBank> bank_before;
    if (!tracker.tracks().empty()) bank_before = tracker.tracks()[0].bank;

    tracker.step(frame);
    const auto& diag = tracker.last_diagnostics();
    for (const StageMatrices* mats : {&diag.stage1, &diag.stage2}) {
      REQUIRE(mats->motion_distance.rows() == mats->appearance_similarity.rows());
      REQUIRE(mats->motion_distance.cols() == mats->appearance_similarity.cols());
      REQUIRE(mats->motion_distance.rows() == mats->fused.values.rows());
      REQUIRE(mats->motion_distance.cols() == mats->fused.values.cols());
      for (Eigen::Index i = 0; i < mats->motion_distance.size(); ++i) {
        CHECK(mats->motion_distance(i) >= 0.0);
        CHECK(mats->motion_distance(i) <= 1.0);
        CHECK(mats->appearance_similarity(i) >= -1.0);
        CHECK(mats->appearance_similarity(i) <= 1.0 + 1e-12);
      }
    }

    // Stage-2 appearance comes from the bank as it stood before this step.
    if (diag.stage2.appearance_similarity.size() == 1 && bank_before.has_value() &&
        !bank_before->empty() && !frame.detections.empty() &&
        frame.detections[0].embedding.has_value()) {
      CHECK(diag.stage2.appearance_similarity(0, 0) ==
            bank_before->max_similarity(*frame.detections[0].embedding));
      saw_stage2_appearance = true;
    }
  }
  CHECK(saw_stage2_appearance);
}

TEST_CASE("stage-1 matches honor the appearance gate") {
  const GeneratedScenario scenario = generate_scenario(crossing_scenario(23));
  TrackerConfig cfg = scenario_config();
  SmcTracker tracker(cfg);
  for (const auto& frame : scenario.detections) {
    tracker.step(frame);
    for (double appearance : tracker.last_diagnostics().stage1_matched_appearance) {
      CHECK(appearance >= cfg.gate_epsilon);
    }
  }
}

TEST_CASE("iou-only equals the full pipeline when motion is unambiguous") {
  const ScenarioSpec spec = lane_scenario(4, 40, 31, /*miss_rate=*/0.0, /*sigma=*/0.0);
  const GeneratedScenario scenario = generate_scenario(spec);

  TrackerConfig gate_cfg = scenario_config();
  gate_cfg.fusion_mode = FusionMode::Gate;
  const auto gate_results = run_sequence(scenario.detections, gate_cfg);

  TrackerConfig iou_cfg = scenario_config();
  iou_cfg.fusion_mode = FusionMode::IouOnly;
  const auto iou_results = run_sequence(scenario.detections, iou_cfg);

  REQUIRE(gate_results.size() == iou_results.size());
  for (std::size_t i = 0; i < gate_results.size(); ++i) {
    CHECK(gate_results[i].frame == iou_results[i].frame);
    CHECK(gate_results[i].id == iou_results[i].id);
    CHECK(gate_results[i].box.left == iou_results[i].box.left);
    CHECK(gate_results[i].box.top == iou_results[i].box.top);
  }
}

TEST_CASE("missing embeddings degrade gate fusion to motion-only") {
  const ScenarioSpec spec = lane_scenario(3, 30, 32, 0.0, 0.0);
  GeneratedScenario scenario = generate_scenario(spec);
  for (auto& frame : scenario.detections) {
    for (auto& det : frame.detections) det.embedding.reset();
  }

  TrackerConfig gate_cfg = scenario_config();
  const auto gate_results = run_sequence(scenario.detections, gate_cfg);

  TrackerConfig iou_cfg = scenario_config();
  iou_cfg.fusion_mode = FusionMode::IouOnly;
  const auto iou_results = run_sequence(scenario.detections, iou_cfg);

  REQUIRE(gate_results.size() == iou_results.size());
  for (std::size_t i = 0; i < gate_results.size(); ++i) {
    CHECK(gate_results[i].id == iou_results[i].id);
  }
  const MetricsReport report = evaluate_tracking(scenario.ground_truth, gate_results);
  CHECK(report.idsw == 0);
}

TEST_CASE("eq4-literal fusion is exposed as a mode") {
  const GeneratedScenario scenario = generate_scenario(crossing_scenario(24));
  TrackerConfig cfg = scenario_config();
  cfg.fusion_mode = FusionMode::Eq4Literal;
  // The literal sign rewards low appearance similarity among gated pairs;
  // on this scenario the gate still holds the pairing together.
  const auto results = run_sequence(scenario.detections, cfg);
  CHECK(!results.empty());
  CHECK(distinct_ids(results).size() >= 2);
}

TEST_CASE("lifecycle invariants hold across seeded random scenarios") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ScenarioSpec spec = random_lane_scenario(seed);
    const GeneratedScenario scenario = generate_scenario(spec);

    TrackerConfig cfg = scenario_config();
    SmcTracker tracker(cfg);
    std::set<std::int64_t> ever_seen;
    std::int64_t max_id = 0;

    for (const auto& frame : scenario.detections) {
      const auto emitted = tracker.step(frame);
      const auto& diag = tracker.last_diagnostics();

      // Partition completeness.
      CHECK(diag.high_count + diag.low_count + diag.discarded_count == diag.detections);

      // One box per id per frame, ids never reused after deletion.
      std::set<std::int64_t> frame_ids;
      for (const auto& out : emitted) {
        CHECK(frame_ids.insert(out.id).second);
        CHECK(out.frame == frame.frame);
      }

      // Emitted tracks were matched this frame; lost tracks are silent.
      std::map<std::int64_t, const Track*> by_id;
      for (const auto& track : tracker.tracks()) {
        by_id[track.id] = &track;
        max_id = std::max(max_id, track.id);
        CHECK(track.frames_since_update <= cfg.lost_ttl);
        if (track.status == TrackStatus::Lost) {
          CHECK(track.frames_since_update >= 1);
          CHECK(!frame_ids.count(track.id));
        }
      }
      for (const auto& out : emitted) {
        REQUIRE(by_id.count(out.id));
        CHECK(by_id[out.id]->status == TrackStatus::Active);
        CHECK(by_id[out.id]->last_matched_frame == frame.frame);
      }

      // A deleted id must never come back.
      for (std::int64_t id : frame_ids) {
        ever_seen.insert(id);
      }
      CHECK(max_id == tracker.ids_created());
    }
  }
}

TEST_CASE("adaptive splitting tracks the strong half of a crowded scene") {
  // Four confident targets plus four low-score clutter identities. The
  // adaptive threshold lands at 0.275: clutter either stays low or is too
  // weak to found tracks, and the four strong targets are tracked cleanly.
  ScenarioSpec spec;
  spec.frames = 30;
  spec.seed = 71;
  spec.appearance_noise_sigma = 0.05;
  const double strong_scores[] = {0.92, 0.9, 0.88, 0.86};
  const double clutter_scores[] = {0.2, 0.25, 0.3, 0.35};
  for (int i = 0; i < 8; ++i) {
    IdentityPlan plan;
    plan.identity = i + 1;
    plan.base_score = i < 4 ? strong_scores[i] : clutter_scores[i - 4];
    const double y = 100.0 + 120.0 * i;
    plan.waypoints = {{0, 200.0, y}, {29, 260.0, y}};
    spec.identities.push_back(plan);
  }
  const GeneratedScenario scenario = generate_scenario(spec);

  TrackerConfig cfg;  // defaults: adaptive-mean split
  SmcTracker tracker(cfg);
  std::vector<TrackOutput> results;
  for (const auto& frame : scenario.detections) {
    auto emitted = tracker.step(frame);
    const auto& diag = tracker.last_diagnostics();
    CHECK(diag.split_threshold == doctest::Approx(0.275));
    results.insert(results.end(), emitted.begin(), emitted.end());
  }
  CHECK(tracker.ids_created() == 4);

  std::vector<GroundTruthEntry> strong_gt;
  for (const auto& e : scenario.ground_truth) {
    if (e.identity <= 4) strong_gt.push_back(e);
  }
  const MetricsReport report = evaluate_tracking(strong_gt, results);
  CHECK(report.mota == 1.0);
  CHECK(report.idf1 == 1.0);
  CHECK(report.idsw == 0);
}

TEST_CASE("feature banks stay within their capacity on long runs") {
  const GeneratedScenario scenario =
      generate_scenario(lane_scenario(3, 80, 61, 0.0, 0.05));
  TrackerConfig cfg = scenario_config();
  cfg.bank_capacity = 10;  // force eviction well before the sequence ends
  SmcTracker tracker(cfg);
  for (const auto& frame : scenario.detections) {
    tracker.step(frame);
    for (const auto& track : tracker.tracks()) {
      CHECK(track.bank.size() <= cfg.bank_capacity);
    }
  }
  for (const auto& track : tracker.tracks()) {
    CHECK(track.bank.size() == cfg.bank_capacity);
  }
}

TEST_CASE("enabling stage two never increases deletions on the scenario batch") {
  for (std::uint64_t seed = 100; seed < 115; ++seed) {
    const GeneratedScenario scenario = generate_scenario(random_lane_scenario(seed));

    TrackerConfig on = scenario_config();
    SmcTracker tracker_on(on);
    TrackerConfig off = scenario_config();
    off.stage2_enabled = false;
    SmcTracker tracker_off(off);

    for (const auto& frame : scenario.detections) {
      tracker_on.step(frame);
      tracker_off.step(frame);
    }
    CHECK(tracker_on.tracks_deleted() <= tracker_off.tracks_deleted());
  }
}

TEST_CASE("one clean identity stays one track for the whole sequence") {
  const GeneratedScenario scenario =
      generate_scenario(lane_scenario(1, 20, 44, 0.0, 0.05));
  const auto results = run_sequence(scenario.detections, scenario_config());
  CHECK(results.size() == 20);
  CHECK(distinct_ids(results) == std::set<std::int64_t>{1});
  const MetricsReport report = evaluate_tracking(scenario.ground_truth, results);
  CHECK(report.mota == 1.0);
}

TEST_CASE("run_sequence is deterministic") {
  const GeneratedScenario scenario = generate_scenario(random_lane_scenario(7));
  const auto a = run_sequence(scenario.detections, scenario_config());
  const auto b = run_sequence(scenario.detections, scenario_config());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].frame == b[i].frame);
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].box.left == b[i].box.left);
    CHECK(a[i].box.top == b[i].box.top);
    CHECK(a[i].box.width == b[i].box.width);
    CHECK(a[i].box.height == b[i].box.height);
    CHECK(a[i].score == b[i].score);
  }
  CHECK(run_sequence({}, scenario_config()).empty());
}

TEST_CASE("config validation rejects inconsistent settings") {
  TrackerConfig cfg;
  cfg.det_floor = 0.8;  // above the new-track threshold
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = TrackerConfig{};
  cfg.alpha = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = TrackerConfig{};
  cfg.lost_ttl = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = TrackerConfig{};
  cfg.gate_epsilon = 1.2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
