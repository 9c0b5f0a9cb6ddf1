#include "smctrack/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "smctrack/random.hpp"

namespace smctrack::oracle {

namespace {

bool feasible_entry(double value, double max_cost) {
  return std::isfinite(value) && value <= max_cost;
}

struct SearchState {
  int best_cardinality = -1;
  double best_cost = 0.0;
  std::vector<int> best_assignment;  // row -> col or -1
};

void search(const CostMatrix& cost, double max_cost, int row, int cardinality,
            double total, std::vector<int>& assignment, std::vector<bool>& col_used,
            SearchState& state) {
  if (row == cost.rows()) {
    if (cardinality > state.best_cardinality ||
        (cardinality == state.best_cardinality && total < state.best_cost)) {
      state.best_cardinality = cardinality;
      state.best_cost = total;
      state.best_assignment = assignment;
    }
    return;
  }
  for (int col = 0; col < cost.cols(); ++col) {
    if (col_used[static_cast<std::size_t>(col)]) continue;
    const double value = cost.values(row, col);
    if (!feasible_entry(value, max_cost)) continue;
    col_used[static_cast<std::size_t>(col)] = true;
    assignment[static_cast<std::size_t>(row)] = col;
    search(cost, max_cost, row + 1, cardinality + 1, total + value, assignment,
           col_used, state);
    col_used[static_cast<std::size_t>(col)] = false;
  }
  assignment[static_cast<std::size_t>(row)] = -1;
  search(cost, max_cost, row + 1, cardinality, total, assignment, col_used, state);
}

}  // namespace

AssignmentResult brute_force_assignment(const CostMatrix& cost, double max_cost) {
  SearchState state;
  std::vector<int> assignment(static_cast<std::size_t>(cost.rows()), -1);
  std::vector<bool> col_used(static_cast<std::size_t>(cost.cols()), false);
  search(cost, max_cost, 0, 0, 0.0, assignment, col_used, state);

  AssignmentResult result;
  std::vector<bool> col_matched(static_cast<std::size_t>(cost.cols()), false);
  for (int row = 0; row < cost.rows(); ++row) {
    const int col = state.best_assignment[static_cast<std::size_t>(row)];
    if (col >= 0) {
      result.matches.emplace_back(row, col);
      result.total_cost += cost.values(row, col);
      col_matched[static_cast<std::size_t>(col)] = true;
    } else {
      result.unmatched_rows.push_back(row);
    }
  }
  for (int col = 0; col < cost.cols(); ++col) {
    if (!col_matched[static_cast<std::size_t>(col)]) result.unmatched_cols.push_back(col);
  }
  return result;
}

Eigen::MatrixXd attention_reference(const Eigen::MatrixXd& queries,
                                    const Eigen::MatrixXd& keys,
                                    const Eigen::MatrixXd& values) {
  const long rows = queries.rows();
  const long keys_n = keys.rows();
  const long dk = queries.cols();
  const long dv = values.cols();
  const long double scale = 1.0L / std::sqrt(static_cast<long double>(dk));

  Eigen::MatrixXd out(rows, dv);
  for (long r = 0; r < rows; ++r) {
    std::vector<long double> weights(static_cast<std::size_t>(keys_n), 0.0L);
    long double denom = 0.0L;
    for (long j = 0; j < keys_n; ++j) {
      long double logit = 0.0L;
      for (long c = 0; c < dk; ++c) {
        logit += static_cast<long double>(queries(r, c)) *
                 static_cast<long double>(keys(j, c));
      }
      weights[static_cast<std::size_t>(j)] = std::exp(logit * scale);
      denom += weights[static_cast<std::size_t>(j)];
    }
    for (long c = 0; c < dv; ++c) {
      long double acc = 0.0L;
      for (long j = 0; j < keys_n; ++j) {
        acc += weights[static_cast<std::size_t>(j)] / denom *
               static_cast<long double>(values(j, c));
      }
      out(r, c) = static_cast<double>(acc);
    }
  }
  return out;
}

Embedding isa_reference(const SliceSet& slices, const AttentionParams& params) {
  const int dk = params.key_dim();
  const int tokens = slices.tokens();
  const int channels = slices.channels();

  auto project = [&](const Eigen::MatrixXd& slice, const Eigen::MatrixXd& weight) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(tokens, dk);
    for (int t = 0; t < tokens; ++t) {
      for (int d = 0; d < dk; ++d) {
        long double acc = 0.0L;
        for (int c = 0; c < channels; ++c) {
          acc += static_cast<long double>(slice(t, c)) *
                 static_cast<long double>(weight(c, d));
        }
        out(t, d) = static_cast<double>(acc);
      }
    }
    return out;
  };

  std::array<Eigen::MatrixXd, 4> q, k, v;
  for (std::size_t i = 0; i < 4; ++i) {
    q[i] = project(slices.slices[i], params.w_query[i]);
    k[i] = project(slices.slices[i], params.w_key[i]);
    v[i] = project(slices.slices[i], params.w_value[i]);
  }

  Eigen::VectorXd pooled(4 * dk);
  for (std::size_t i = 0; i < 4; ++i) {
    Eigen::MatrixXd summed = Eigen::MatrixXd::Zero(tokens, dk);
    for (std::size_t j = 0; j < 4; ++j) {
      summed += attention_reference(q[i], k[j], v[j]);
    }
    for (int d = 0; d < dk; ++d) {
      long double acc = 0.0L;
      for (int t = 0; t < tokens; ++t) {
        acc += static_cast<long double>(summed(t, d));
      }
      pooled(static_cast<Eigen::Index>(i) * dk + d) =
          static_cast<double>(acc / static_cast<long double>(tokens));
    }
  }

  const int d_out = params.embedding_dim();
  Eigen::VectorXd raw(d_out);
  for (int r = 0; r < d_out; ++r) {
    long double acc = 0.0L;
    for (int c = 0; c < 4 * dk; ++c) {
      acc += static_cast<long double>(params.w_fc(r, c)) *
             static_cast<long double>(pooled(c));
    }
    raw(r) = static_cast<double>(acc);
  }
  return Embedding::unit(raw);
}

LabeledSlicePair make_toy_pair(std::uint64_t seed, int channels, int token_rows,
                               int token_cols) {
  Rng rng(seed);
  auto random_slices = [&]() {
    FeatureMap fm = FeatureMap::zeros(channels, 2 * token_rows, 2 * token_cols);
    for (auto& value : fm.values) {
      value = 0.5 * rng.gaussian();
    }
    return slice_feature_map(fm);
  };
  LabeledSlicePair pair;
  pair.a = random_slices();
  pair.b = random_slices();
  pair.target = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return pair;
}

double siamese_gradient_max_rel_error(std::uint64_t seed) {
  constexpr int kChannels = 3;
  constexpr int kKeyDim = 4;
  constexpr int kEmbeddingDim = 5;
  constexpr double kStep = 1e-5;

  // 2 tokens per slice: 1x2 quadrants from a 2x4 map.
  const LabeledSlicePair pair = make_toy_pair(seed, kChannels, 1, 2);
  AttentionParams params =
      make_random_attention_params(kChannels, kKeyDim, kEmbeddingDim, seed ^ 0xabcdef);

  SiameseGradients analytic = SiameseGradients::zeros_like(params);
  siamese_pair_loss(pair, params, &analytic);

  double max_rel_error = 0.0;
  auto check_matrix = [&](Eigen::MatrixXd& weights, const Eigen::MatrixXd& grad) {
    for (Eigen::Index r = 0; r < weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < weights.cols(); ++c) {
        const double saved = weights(r, c);
        weights(r, c) = saved + kStep;
        const double plus = siamese_pair_loss(pair, params, nullptr);
        weights(r, c) = saved - kStep;
        const double minus = siamese_pair_loss(pair, params, nullptr);
        weights(r, c) = saved;
        const double fd = (plus - minus) / (2.0 * kStep);
        const double denom = std::max({std::abs(fd), std::abs(grad(r, c)), 1e-4});
        max_rel_error = std::max(max_rel_error, std::abs(fd - grad(r, c)) / denom);
      }
    }
  };

  for (std::size_t i = 0; i < 4; ++i) {
    check_matrix(params.w_query[i], analytic.w_query[i]);
    check_matrix(params.w_key[i], analytic.w_key[i]);
    check_matrix(params.w_value[i], analytic.w_value[i]);
  }
  check_matrix(params.w_fc, analytic.w_fc);
  return max_rel_error;
}

IdentityCounts idf1_brute_force(const std::vector<GroundTruthEntry>& ground_truth,
                                const std::vector<TrackOutput>& results,
                                double iou_threshold) {
  std::set<std::int64_t> gt_id_set, res_id_set;
  for (const auto& entry : ground_truth) gt_id_set.insert(entry.identity);
  for (const auto& out : results) res_id_set.insert(out.id);
  const std::vector<std::int64_t> gt_ids(gt_id_set.begin(), gt_id_set.end());
  const std::vector<std::int64_t> res_ids(res_id_set.begin(), res_id_set.end());

  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> overlap;
  std::map<int, std::vector<const GroundTruthEntry*>> gt_by_frame;
  for (const auto& entry : ground_truth) gt_by_frame[entry.frame].push_back(&entry);
  std::map<int, std::vector<const TrackOutput*>> res_by_frame;
  for (const auto& out : results) res_by_frame[out.frame].push_back(&out);
  for (const auto& [frame, gts] : gt_by_frame) {
    auto it = res_by_frame.find(frame);
    if (it == res_by_frame.end()) continue;
    for (const auto* g : gts) {
      for (const auto* r : it->second) {
        if (iou(g->box, r->box) >= iou_threshold) {
          ++overlap[{g->identity, r->id}];
        }
      }
    }
  }

  std::int64_t best = 0;
  std::vector<bool> used(res_ids.size(), false);
  // Recursion over gt identities; each picks a result identity or none.
  auto recurse = [&](auto&& self, std::size_t gi, std::int64_t acc) -> void {
    if (gi == gt_ids.size()) {
      best = std::max(best, acc);
      return;
    }
    self(self, gi + 1, acc);
    for (std::size_t rj = 0; rj < res_ids.size(); ++rj) {
      if (used[rj]) continue;
      std::int64_t m = 0;
      if (auto it = overlap.find({gt_ids[gi], res_ids[rj]}); it != overlap.end()) {
        m = it->second;
      }
      used[rj] = true;
      self(self, gi + 1, acc + m);
      used[rj] = false;
    }
  };
  recurse(recurse, 0, 0);

  IdentityCounts counts;
  counts.idtp = best;
  counts.idfp = static_cast<std::int64_t>(results.size()) - best;
  counts.idfn = static_cast<std::int64_t>(ground_truth.size()) - best;
  const std::int64_t denom = 2 * counts.idtp + counts.idfp + counts.idfn;
  counts.idf1 = denom > 0
                    ? 2.0 * static_cast<double>(counts.idtp) / static_cast<double>(denom)
                    : 0.0;
  return counts;
}

}  // namespace smctrack::oracle
