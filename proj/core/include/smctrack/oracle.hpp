#pragma once

#include <cstdint>

#include "smctrack/attention.hpp"
#include "smctrack/hungarian.hpp"
#include "smctrack/metrics.hpp"
#include "smctrack/slm.hpp"

namespace smctrack::oracle {

/// Exhaustive assignment search: maximum feasible cardinality first, then
/// minimum total cost. Only sensible for small matrices (<= ~8 per side).
AssignmentResult brute_force_assignment(const CostMatrix& cost,
                                        double max_cost = CostMatrix::kInfeasible);

/// Direct scalar-loop evaluation of softmax(Q K^T / sqrt(d_k)) V in long
/// double, independent of the production implementation.
Eigen::MatrixXd attention_reference(const Eigen::MatrixXd& queries,
                                    const Eigen::MatrixXd& keys,
                                    const Eigen::MatrixXd& values);

/// Straight-line scalar re-evaluation of the full ISA forward pass.
Embedding isa_reference(const SliceSet& slices, const AttentionParams& params);

/// Central finite differences (step 1e-5) against the analytic gradients on
/// a seeded toy instance (2 tokens per slice, d_k = 4). Returns the max
/// relative error over every parameter entry.
double siamese_gradient_max_rel_error(std::uint64_t seed);

/// Exhaustive identity-mapping search for IDF1 (small identity counts only).
IdentityCounts idf1_brute_force(const std::vector<GroundTruthEntry>& ground_truth,
                                const std::vector<TrackOutput>& results,
                                double iou_threshold = 0.5);

/// Seeded random toy instance shared by the gradient check and its tests.
LabeledSlicePair make_toy_pair(std::uint64_t seed, int channels, int token_rows,
                               int token_cols);

}  // namespace smctrack::oracle
