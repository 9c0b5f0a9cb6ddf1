#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include "smctrack/config_io.hpp"
#include "smctrack/errors.hpp"
#include "smctrack/metrics.hpp"
#include "smctrack/mot_csv.hpp"
#include "smctrack/oracle.hpp"
#include "smctrack/random.hpp"
#include "smctrack/scenario.hpp"
#include "smctrack/sidecar.hpp"
#include "smctrack/svg_report.hpp"
#include "smctrack/tracker.hpp"

namespace smctrack::cli {

namespace {

namespace fs = std::filesystem;

std::optional<std::uint64_t> env_seed() {
  const char* value = std::getenv("SMCTRACK_SEED");
  if (value == nullptr) return std::nullopt;
  char* end = nullptr;
  const unsigned long long parsed = std::strtoull(value, &end, 10);
  if (end == value || *end != '\0') return std::nullopt;
  return static_cast<std::uint64_t>(parsed);
}

void require_readable(const fs::path& path, const char* what) {
  if (!fs::exists(path)) {
    throw IoError(std::string(what) + " file not found: " + path.string());
  }
}

struct TrackOptions {
  std::string det_path;
  std::string out_path;
  std::string emb_path;
  std::string config_path;
  std::string fusion;
  std::optional<std::uint64_t> seed;
};

int run_track(const TrackOptions& opts, std::ostream& out) {
  require_readable(opts.det_path, "detection");

  TrackerConfig config;
  if (!opts.config_path.empty()) {
    require_readable(opts.config_path, "config");
    config = load_tracker_config(opts.config_path);
  }
  if (!opts.fusion.empty()) {
    config.fusion_mode = parse_fusion_mode(opts.fusion);
  }
  config.validate();

  auto frames = parse_detection_csv(opts.det_path);
  if (!opts.emb_path.empty()) {
    require_readable(opts.emb_path, "embedding sidecar");
    attach_embeddings(frames, parse_sidecar_csv(opts.emb_path));
  }

  const auto start = std::chrono::steady_clock::now();
  SmcTracker tracker(config);
  std::vector<TrackOutput> results;
  for (const auto& frame : frames) {
    auto emitted = tracker.step(frame);
    results.insert(results.end(), emitted.begin(), emitted.end());
  }
  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();

  write_results_csv(results, opts.out_path);

  std::set<std::int64_t> distinct_ids;
  for (const auto& r : results) distinct_ids.insert(r.id);
  const double fps =
      elapsed > 0.0 ? static_cast<double>(frames.size()) / elapsed : 0.0;
  out << "frames          " << frames.size() << "\n"
      << "emitted boxes   " << results.size() << "\n"
      << "tracks created  " << tracker.ids_created() << "\n"
      << "distinct ids    " << distinct_ids.size() << "\n"
      << "fusion          " << to_string(config.fusion_mode) << "\n"
      << "frames/sec      " << fps << "\n";
  return 0;
}

struct EvalOptions {
  std::string gt_path;
  std::string res_path;
  double iou_threshold = 0.5;
  std::string report_path;
};

int run_eval(const EvalOptions& opts, std::ostream& out) {
  require_readable(opts.gt_path, "ground-truth");
  require_readable(opts.res_path, "result");

  const auto ground_truth = parse_ground_truth_csv(opts.gt_path);
  const auto results = parse_results_csv(opts.res_path);

  if (!ground_truth.empty() && !results.empty()) {
    int gt_min = ground_truth.front().frame, gt_max = gt_min;
    for (const auto& e : ground_truth) {
      gt_min = std::min(gt_min, e.frame);
      gt_max = std::max(gt_max, e.frame);
    }
    for (const auto& r : results) {
      if (r.frame < gt_min || r.frame > gt_max) {
        throw ConfigError("result frame " + std::to_string(r.frame) +
                          " lies outside the ground-truth range [" +
                          std::to_string(gt_min) + ", " + std::to_string(gt_max) + "]");
      }
    }
  }

  const MetricsReport report =
      evaluate_tracking(ground_truth, results, opts.iou_threshold);
  out << format_metrics_text(report);

  if (!opts.report_path.empty()) {
    std::ofstream csv(opts.report_path, std::ios::binary);
    if (!csv) {
      throw IoError("cannot open " + opts.report_path + " for writing");
    }
    csv << format_metrics_csv(report);
    fs::path svg_path(opts.report_path);
    svg_path.replace_extension(".svg");
    write_metrics_svg(report, svg_path);
    out << "report          " << opts.report_path << "\n"
        << "chart           " << svg_path.string() << "\n";
  }
  return 0;
}

struct SynthOptions {
  std::string spec_path;
  std::string gt_path;
  std::string det_path;
  std::string emb_path;
  std::optional<std::uint64_t> seed;
};

int run_synth(const SynthOptions& opts, std::ostream& out) {
  require_readable(opts.spec_path, "scenario spec");
  ScenarioSpec spec = load_scenario_spec(opts.spec_path);
  if (opts.seed.has_value()) {
    spec.seed = *opts.seed;
  }

  const GeneratedScenario scenario = generate_scenario(spec);
  write_ground_truth_csv(scenario.ground_truth, opts.gt_path);
  write_detection_csv(scenario.detections, opts.det_path);
  if (!opts.emb_path.empty()) {
    write_sidecar_csv(sidecar_from_frames(scenario.detections), opts.emb_path);
  }

  out << "identities      " << spec.identities.size() << "\n"
      << "frames          " << spec.frames << "\n"
      << "gt boxes        " << scenario.ground_truth.size() << "\n"
      << "seed            " << spec.seed << "\n";
  return 0;
}

int run_selfcheck(std::ostream& out) {
  struct Suite {
    const char* name;
    bool passed;
    std::string detail;
  };
  std::vector<Suite> suites;

  {  // Assignment vs exhaustive search.
    Rng rng(20240817);
    bool ok = true;
    std::string detail;
    for (int trial = 0; trial < 60 && ok; ++trial) {
      const int rows = static_cast<int>(rng.uniform_int(1, 6));
      const int cols = static_cast<int>(rng.uniform_int(1, 6));
      Eigen::MatrixXd m(rows, cols);
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
          m(i, j) = rng.bernoulli(0.15) ? CostMatrix::kInfeasible : rng.uniform();
        }
      }
      const double cap = rng.bernoulli(0.5) ? rng.uniform(0.3, 1.0)
                                            : CostMatrix::kInfeasible;
      const auto fast = hungarian_solve(CostMatrix(m), cap);
      const auto slow = oracle::brute_force_assignment(CostMatrix(m), cap);
      if (fast.matches.size() != slow.matches.size() ||
          std::abs(fast.total_cost - slow.total_cost) > 1e-9) {
        ok = false;
        detail = "mismatch on trial " + std::to_string(trial);
      }
    }
    suites.push_back({"hungarian-bruteforce", ok, detail});
  }

  {  // Attention row sums and direct evaluation.
    Rng rng(77001);
    bool ok = true;
    std::string detail;
    for (int trial = 0; trial < 100 && ok; ++trial) {
      const int q_rows = static_cast<int>(rng.uniform_int(1, 6));
      const int kv_rows = static_cast<int>(rng.uniform_int(1, 6));
      const int dk = static_cast<int>(rng.uniform_int(1, 5));
      Eigen::MatrixXd q(q_rows, dk), k(kv_rows, dk), v(kv_rows, 3);
      for (auto* m : {&q, &k}) {
        for (Eigen::Index i = 0; i < m->size(); ++i) (*m)(i) = rng.gaussian();
      }
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.gaussian();

      const Eigen::MatrixXd rows_as_weights =
          qkv_attention(q, k, Eigen::MatrixXd::Identity(kv_rows, kv_rows));
      for (Eigen::Index r = 0; r < rows_as_weights.rows(); ++r) {
        if (std::abs(rows_as_weights.row(r).sum() - 1.0) > 1e-9) {
          ok = false;
          detail = "softmax row sum off on trial " + std::to_string(trial);
        }
      }
      const Eigen::MatrixXd got = qkv_attention(q, k, v);
      const Eigen::MatrixXd want = oracle::attention_reference(q, k, v);
      if ((got - want).cwiseAbs().maxCoeff() > 1e-10) {
        ok = false;
        detail = "reference mismatch on trial " + std::to_string(trial);
      }
    }
    suites.push_back({"attention-rowsums", ok, detail});
  }

  {  // Analytic vs finite-difference gradients.
    const double err = oracle::siamese_gradient_max_rel_error(4242);
    suites.push_back({"gradient-check", err < 1e-3,
                      "max relative error " + std::to_string(err)});
  }

  {  // Metric hand cases.
    bool ok = true;
    std::string detail;
    if (compute_mota(0, 0, 0, 100) != 1.0) {
      ok = false;
      detail = "perfect MOTA";
    }
    if (std::abs(compute_mota(50, 50, 10, 100) - (-0.1)) > 1e-12) {
      ok = false;
      detail = "negative MOTA";
    }
    std::vector<GroundTruthEntry> gt;
    std::vector<TrackOutput> self;
    for (int frame = 1; frame <= 10; ++frame) {
      for (int id = 1; id <= 3; ++id) {
        const BoundingBox box{100.0 * id, 50.0 * id, 40.0, 80.0};
        gt.push_back(GroundTruthEntry{frame, id, box});
        self.push_back(TrackOutput{frame, id + 10, box, 1.0});
      }
    }
    const MetricsReport report = evaluate_tracking(gt, self);
    if (report.mota != 1.0 || report.idf1 != 1.0 || report.idsw != 0) {
      ok = false;
      detail = "gt-vs-itself";
    }
    const IdentityCounts exhaustive = oracle::idf1_brute_force(gt, self);
    const IdentityCounts fast = compute_idf1(gt, self);
    if (exhaustive.idtp != fast.idtp) {
      ok = false;
      detail = "idf1 mapping";
    }
    suites.push_back({"metrics-hand-cases", ok, detail});
  }

  bool all_ok = true;
  for (const auto& suite : suites) {
    out << suite.name << ": " << (suite.passed ? "PASS" : "FAIL");
    if (!suite.detail.empty()) out << " (" << suite.detail << ")";
    out << "\n";
    all_ok = all_ok && suite.passed;
  }
  if (!all_ok) {
    out << "selfcheck failed\n";
    return 1;
  }
  out << "selfcheck ok\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"SMC tracking-by-detection toolkit"};
  app.require_subcommand(1);

  TrackOptions track_opts;
  auto* track = app.add_subcommand("track", "Associate detections into tracks");
  track->add_option("--det", track_opts.det_path, "detection CSV (MOT layout)")->required();
  track->add_option("--out", track_opts.out_path, "output results CSV")->required();
  track->add_option("--emb", track_opts.emb_path, "embedding sidecar CSV");
  track->add_option("--config", track_opts.config_path, "key=value tracker config");
  track->add_option("--fusion", track_opts.fusion,
                    "gate|weighted|eq4-literal|iou-only");
  std::uint64_t track_seed = 0;
  auto* track_seed_opt = track->add_option("--seed", track_seed, "run seed");

  EvalOptions eval_opts;
  auto* eval = app.add_subcommand("eval", "Score results against ground truth");
  eval->add_option("--gt", eval_opts.gt_path, "ground-truth CSV")->required();
  eval->add_option("--res", eval_opts.res_path, "results CSV")->required();
  eval->add_option("--iou-thresh", eval_opts.iou_threshold, "match threshold");
  eval->add_option("--report", eval_opts.report_path, "CSV report path (+ .svg chart)");

  SynthOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "Materialize a synthetic scenario");
  synth->add_option("--spec", synth_opts.spec_path, "scenario spec file")->required();
  synth->add_option("--out-gt", synth_opts.gt_path, "ground-truth CSV")->required();
  synth->add_option("--out-det", synth_opts.det_path, "detection CSV")->required();
  synth->add_option("--out-emb", synth_opts.emb_path, "embedding sidecar CSV");
  std::uint64_t synth_seed = 0;
  auto* synth_seed_opt = synth->add_option("--seed", synth_seed, "override spec seed");

  auto* selfcheck = app.add_subcommand("selfcheck", "Run the embedded oracle suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      return app.exit(e, out, err);
    }
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (track->parsed()) {
      if (track_seed_opt->count() > 0) {
        track_opts.seed = track_seed;
      } else {
        track_opts.seed = env_seed();
      }
      return run_track(track_opts, out);
    }
    if (eval->parsed()) {
      return run_eval(eval_opts, out);
    }
    if (synth->parsed()) {
      if (synth_seed_opt->count() > 0) {
        synth_opts.seed = synth_seed;
      } else {
        synth_opts.seed = env_seed();
      }
      return run_synth(synth_opts, out);
    }
    if (selfcheck->parsed()) {
      return run_selfcheck(out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace smctrack::cli
