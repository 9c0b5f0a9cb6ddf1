#include "smctrack/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "smctrack/errors.hpp"
#include "smctrack/random.hpp"
#include "text_util.hpp"

namespace smctrack {

namespace {

using detail::parse_double;
using detail::parse_int;
using detail::split;
using detail::trim;

BoundingBox plan_box_at(const IdentityPlan& plan, int t) {
  const auto& wps = plan.waypoints;
  double cx = wps.front().cx;
  double cy = wps.front().cy;
  if (t >= wps.back().frame) {
    cx = wps.back().cx;
    cy = wps.back().cy;
  } else {
    for (std::size_t i = 0; i + 1 < wps.size(); ++i) {
      if (t >= wps[i].frame && t < wps[i + 1].frame) {
        const double span = static_cast<double>(wps[i + 1].frame - wps[i].frame);
        const double alpha = static_cast<double>(t - wps[i].frame) / span;
        cx = wps[i].cx + alpha * (wps[i + 1].cx - wps[i].cx);
        cy = wps[i].cy + alpha * (wps[i + 1].cy - wps[i].cy);
        break;
      }
    }
  }
  return BoundingBox::from_center(cx, cy, plan.box_width, plan.box_height);
}

Eigen::VectorXd random_unit_vector(int dim, Rng& rng) {
  Eigen::VectorXd v(dim);
  double norm_sq = 0.0;
  do {
    for (int i = 0; i < dim; ++i) {
      v(i) = rng.gaussian();
    }
    norm_sq = v.squaredNorm();
  } while (norm_sq < 1e-12);
  return v / std::sqrt(norm_sq);
}

}  // namespace

void ScenarioSpec::validate() const {
  if (frames <= 0) {
    throw ConfigError("scenario needs a positive frame count");
  }
  if (embedding_dim < 2) {
    throw ConfigError("embedding dimension must be at least 2");
  }
  if (appearance_noise_sigma < 0.0) {
    throw ConfigError("appearance noise sigma must be non-negative");
  }
  if (detector_miss_rate < 0.0 || detector_miss_rate >= 1.0) {
    throw ConfigError("detector miss rate must lie in [0, 1)");
  }
  if (identities.empty()) {
    throw ConfigError("scenario needs at least one identity");
  }
  std::set<std::int64_t> ids;
  for (const auto& plan : identities) {
    if (plan.identity < 1) {
      throw ConfigError("identities must be numbered from 1");
    }
    if (!ids.insert(plan.identity).second) {
      throw ConfigError("duplicate identity " + std::to_string(plan.identity));
    }
    if (plan.waypoints.empty()) {
      throw ConfigError("identity " + std::to_string(plan.identity) + " has no waypoints");
    }
    if (!(plan.box_width > 0.0) || !(plan.box_height > 0.0)) {
      throw ConfigError("boxes must have positive size");
    }
    if (plan.base_score < 0.0 || plan.base_score > 1.0) {
      throw ConfigError("base score must lie in [0, 1]");
    }
    int prev = -1;
    for (const auto& wp : plan.waypoints) {
      if (wp.frame < 0 || wp.frame >= frames) {
        throw ConfigError("waypoint frame outside [0, frames)");
      }
      if (wp.frame <= prev) {
        throw ConfigError("waypoints must be strictly increasing in frame");
      }
      prev = wp.frame;
    }
  }
  auto check_span = [this](int first, int last, const char* what) {
    if (first < 0 || last >= frames || first > last) {
      throw ConfigError(std::string(what) + " span outside [0, frames)");
    }
  };
  for (const auto& dip : dips) {
    check_span(dip.first_frame, dip.last_frame, "dip");
    if (!ids.count(dip.identity)) {
      throw ConfigError("dip references unknown identity");
    }
    if (dip.score < 0.0 || dip.score > 1.0) {
      throw ConfigError("dip score must lie in [0, 1]");
    }
  }
  for (const auto& crossing : crossings) {
    check_span(crossing.first_frame, crossing.last_frame, "crossing");
    if (!ids.count(crossing.a) || !ids.count(crossing.b)) {
      throw ConfigError("crossing references unknown identity");
    }
  }
  for (const auto& relation : relations) {
    if (!ids.count(relation.a) || !ids.count(relation.b)) {
      throw ConfigError("appearance relation references unknown identity");
    }
    if (relation.cosine < -1.0 || relation.cosine > 1.0) {
      throw ConfigError("appearance cosine must lie in [-1, 1]");
    }
  }
}

GeneratedScenario generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int dim = spec.embedding_dim;

  GeneratedScenario out;

  // Identity appearance vectors, honoring pinned pairwise cosines.
  for (const auto& plan : spec.identities) {
    const AppearanceRelation* relation = nullptr;
    for (const auto& r : spec.relations) {
      if (r.b == plan.identity && out.identity_embeddings.count(r.a)) {
        relation = &r;
        break;
      }
    }
    Eigen::VectorXd v;
    if (relation != nullptr) {
      const Eigen::VectorXd& anchor = out.identity_embeddings.at(relation->a).values;
      Eigen::VectorXd ortho;
      do {
        ortho = random_unit_vector(dim, rng);
        ortho -= ortho.dot(anchor) * anchor;
      } while (ortho.norm() < 1e-6);
      ortho.normalize();
      const double c = relation->cosine;
      v = c * anchor + std::sqrt(1.0 - c * c) * ortho;
    } else {
      v = random_unit_vector(dim, rng);
    }
    out.identity_embeddings.emplace(plan.identity, Embedding::unit(v));
  }

  // Per-coordinate noise std so the perturbation's expected norm is sigma.
  const double coord_sigma =
      spec.appearance_noise_sigma / std::sqrt(static_cast<double>(dim));

  std::map<int, FrameObservations> detections_by_frame;
  for (int t = 0; t < spec.frames; ++t) {
    const int wire_frame = t + 1;
    detections_by_frame[wire_frame].frame = wire_frame;  // emit empty frames too
    for (const auto& plan : spec.identities) {
      if (t < plan.waypoints.front().frame || t > plan.waypoints.back().frame) {
        continue;
      }
      const BoundingBox box = plan_box_at(plan, t);
      out.ground_truth.push_back(GroundTruthEntry{wire_frame, plan.identity, box});

      double score = plan.base_score;
      for (const auto& dip : spec.dips) {
        if (dip.identity == plan.identity && t >= dip.first_frame && t <= dip.last_frame) {
          score = dip.score;
        }
      }

      if (spec.detector_miss_rate > 0.0 && rng.bernoulli(spec.detector_miss_rate)) {
        continue;
      }

      Eigen::VectorXd noisy = out.identity_embeddings.at(plan.identity).values;
      if (spec.appearance_noise_sigma > 0.0) {
        for (int i = 0; i < dim; ++i) {
          noisy(i) += coord_sigma * rng.gaussian();
        }
      }
      auto& frame = detections_by_frame[wire_frame];
      frame.frame = wire_frame;
      frame.detections.push_back(
          Detection{box, score, wire_frame, Embedding::unit(noisy)});
    }
  }

  for (auto& [_, frame] : detections_by_frame) {
    out.detections.push_back(std::move(frame));
  }

  // Declared crossings must actually materialize from the waypoint geometry.
  for (const auto& crossing : spec.crossings) {
    const IdentityPlan* plan_a = nullptr;
    const IdentityPlan* plan_b = nullptr;
    for (const auto& plan : spec.identities) {
      if (plan.identity == crossing.a) plan_a = &plan;
      if (plan.identity == crossing.b) plan_b = &plan;
    }
    double best = 0.0;
    for (int t = crossing.first_frame; t <= crossing.last_frame; ++t) {
      best = std::max(best, iou(plan_box_at(*plan_a, t), plan_box_at(*plan_b, t)));
    }
    if (!(best > 0.5)) {
      throw ConfigError("declared crossing between " + std::to_string(crossing.a) +
                        " and " + std::to_string(crossing.b) +
                        " never reaches IoU > 0.5");
    }
  }
  return out;
}

ScenarioSpec parse_scenario_spec(std::istream& in, const std::string& source) {
  ScenarioSpec spec;
  std::map<std::int64_t, IdentityPlan> plans;
  std::vector<std::int64_t> plan_order;

  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;

    std::vector<std::string_view> tok;
    for (auto piece : split(trimmed, ' ')) {
      piece = trim(piece);
      if (!piece.empty()) tok.push_back(piece);
    }
    const auto& keyword = tok[0];

    auto want = [&](std::size_t n) {
      if (tok.size() != n) {
        throw ParseError(source, line_number,
                         std::string(keyword) + " expects " + std::to_string(n - 1) +
                             " arguments");
      }
    };
    auto as_int = [&](std::string_view text) {
      long long v = 0;
      if (!parse_int(text, v)) {
        throw ParseError(source, line_number, "expected integer, got " + std::string(text));
      }
      return v;
    };
    auto as_double = [&](std::string_view text) {
      double v = 0.0;
      if (!parse_double(text, v)) {
        throw ParseError(source, line_number, "expected number, got " + std::string(text));
      }
      return v;
    };

    if (keyword == "frames") {
      want(2);
      spec.frames = static_cast<int>(as_int(tok[1]));
    } else if (keyword == "seed") {
      want(2);
      spec.seed = static_cast<std::uint64_t>(as_int(tok[1]));
    } else if (keyword == "embedding_dim") {
      want(2);
      spec.embedding_dim = static_cast<int>(as_int(tok[1]));
    } else if (keyword == "appearance_noise_sigma") {
      want(2);
      spec.appearance_noise_sigma = as_double(tok[1]);
    } else if (keyword == "detector_miss_rate") {
      want(2);
      spec.detector_miss_rate = as_double(tok[1]);
    } else if (keyword == "identity") {
      want(5);
      IdentityPlan plan;
      plan.identity = as_int(tok[1]);
      plan.box_width = as_double(tok[2]);
      plan.box_height = as_double(tok[3]);
      plan.base_score = as_double(tok[4]);
      if (plans.count(plan.identity)) {
        throw ParseError(source, line_number, "identity declared twice");
      }
      plans[plan.identity] = plan;
      plan_order.push_back(plan.identity);
    } else if (keyword == "waypoint") {
      want(5);
      const std::int64_t id = as_int(tok[1]);
      auto it = plans.find(id);
      if (it == plans.end()) {
        throw ParseError(source, line_number, "waypoint before identity declaration");
      }
      it->second.waypoints.push_back(Waypoint{static_cast<int>(as_int(tok[2])),
                                              as_double(tok[3]), as_double(tok[4])});
    } else if (keyword == "dip") {
      want(5);
      spec.dips.push_back(ScoreDip{as_int(tok[1]), static_cast<int>(as_int(tok[2])),
                                   static_cast<int>(as_int(tok[3])), as_double(tok[4])});
    } else if (keyword == "crossing") {
      want(5);
      spec.crossings.push_back(CrossingEvent{as_int(tok[1]), as_int(tok[2]),
                                             static_cast<int>(as_int(tok[3])),
                                             static_cast<int>(as_int(tok[4]))});
    } else if (keyword == "appearance_cos") {
      want(4);
      spec.relations.push_back(
          AppearanceRelation{as_int(tok[1]), as_int(tok[2]), as_double(tok[3])});
    } else {
      throw ParseError(source, line_number, "unknown keyword: " + std::string(keyword));
    }
  }

  for (std::int64_t id : plan_order) {
    spec.identities.push_back(plans.at(id));
  }
  spec.validate();
  return spec;
}

ScenarioSpec load_scenario_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string() + " for reading");
  }
  return parse_scenario_spec(in, path.string());
}

ScenarioSpec crossing_scenario(std::uint64_t seed) {
  ScenarioSpec spec;
  spec.frames = 20;
  spec.seed = seed;
  spec.appearance_noise_sigma = 0.05;

  IdentityPlan a;
  a.identity = 1;
  a.base_score = 0.9;
  a.waypoints = {{0, 100.0, 300.0}, {19, 138.0, 300.0}};
  IdentityPlan b;
  b.identity = 2;
  b.base_score = 0.9;
  b.waypoints = {{0, 138.0, 300.0}, {19, 100.0, 300.0}};
  spec.identities = {a, b};

  spec.relations.push_back(AppearanceRelation{1, 2, 0.0});
  spec.crossings.push_back(CrossingEvent{1, 2, 7, 12});
  return spec;
}

ScenarioSpec adversarial_bounce_scenario(std::uint64_t seed) {
  ScenarioSpec spec;
  spec.frames = 20;
  spec.seed = seed;
  spec.appearance_noise_sigma = 0.05;

  // Equal speeds, meeting at t=10, then each continues the other's line:
  // the wrong pairing is the one consistent with constant velocity.
  IdentityPlan a;
  a.identity = 1;
  a.base_score = 0.9;
  a.waypoints = {{0, 100.0, 300.0}, {10, 160.0, 300.0}, {19, 106.0, 300.0}};
  IdentityPlan b;
  b.identity = 2;
  b.base_score = 0.9;
  b.waypoints = {{0, 220.0, 300.0}, {10, 160.0, 300.0}, {19, 214.0, 300.0}};
  spec.identities = {a, b};

  // Look-alike appearance: close enough that IoU can outvote it in a
  // weighted sum, far enough that the similarity gate rejects it.
  spec.relations.push_back(AppearanceRelation{1, 2, 0.7});
  spec.crossings.push_back(CrossingEvent{1, 2, 8, 12});
  return spec;
}

ScenarioSpec occlusion_dip_scenario(std::uint64_t seed) {
  ScenarioSpec spec;
  spec.frames = 20;
  spec.seed = seed;
  spec.appearance_noise_sigma = 0.05;

  // Moves right at 1.5 px/frame, reverses exactly when the score dips.
  IdentityPlan a;
  a.identity = 1;
  a.base_score = 0.9;
  a.waypoints = {{0, 200.0, 300.0}, {8, 212.0, 300.0}, {19, 195.5, 300.0}};
  spec.identities = {a};

  spec.dips.push_back(ScoreDip{1, 8, 10, 0.3});
  return spec;
}

ScenarioSpec lane_scenario(int identities, int frames, std::uint64_t seed,
                           double miss_rate, double sigma) {
  ScenarioSpec spec;
  spec.frames = frames;
  spec.seed = seed;
  spec.appearance_noise_sigma = sigma;
  spec.detector_miss_rate = miss_rate;

  Rng layout(seed ^ 0x9e3779b97f4a7c15ull);
  for (int i = 0; i < identities; ++i) {
    IdentityPlan plan;
    plan.identity = i + 1;
    plan.base_score = layout.uniform(0.8, 0.95);
    const double y = 100.0 + 120.0 * i;
    const double x0 = layout.uniform(100.0, 400.0);
    const double speed = layout.uniform(1.0, 3.0) * (layout.bernoulli(0.5) ? 1.0 : -1.0);
    plan.waypoints = {{0, x0, y}, {frames - 1, x0 + speed * (frames - 1), y}};
    spec.identities.push_back(plan);
  }
  return spec;
}

ScenarioSpec random_lane_scenario(std::uint64_t seed) {
  Rng rng(seed);
  const int identities = static_cast<int>(rng.uniform_int(1, 10));
  const int frames = static_cast<int>(rng.uniform_int(20, 100));

  ScenarioSpec spec;
  spec.frames = frames;
  spec.seed = seed ^ 0xc2b2ae3d27d4eb4full;
  spec.appearance_noise_sigma = 0.05;
  spec.detector_miss_rate = rng.uniform(0.0, 0.15);

  for (int i = 0; i < identities; ++i) {
    IdentityPlan plan;
    plan.identity = i + 1;
    plan.base_score = rng.uniform(0.75, 0.95);
    const double y = 100.0 + 120.0 * i;
    const double x0 = rng.uniform(100.0, 600.0);
    const double speed = rng.uniform(0.5, 3.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);

    // Some identities enter late or leave early.
    int first = 0;
    int last = frames - 1;
    if (rng.bernoulli(0.3)) {
      first = static_cast<int>(rng.uniform_int(0, frames / 3));
    }
    if (rng.bernoulli(0.3)) {
      last = static_cast<int>(rng.uniform_int(2 * frames / 3, frames - 1));
    }
    plan.waypoints = {{first, x0, y},
                      {last, x0 + speed * (last - first), y}};
    spec.identities.push_back(plan);

    if (rng.bernoulli(0.3) && last - first > 8) {
      const int dip_start = first + static_cast<int>(rng.uniform_int(3, last - first - 4));
      const int dip_len = static_cast<int>(rng.uniform_int(1, 3));
      spec.dips.push_back(ScoreDip{plan.identity, dip_start,
                                   std::min(last, dip_start + dip_len),
                                   rng.uniform(0.25, 0.45)});
    }
  }
  return spec;
}

}  // namespace smctrack
