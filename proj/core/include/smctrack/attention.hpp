#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>

#include "smctrack/embedding.hpp"
#include "smctrack/feature_map.hpp"

namespace smctrack {

/// Per-slice Q/K/V projections plus the shared output head. d_k is common to
/// all four slices so queries from one slice can attend into any other.
struct AttentionParams {
  std::array<Eigen::MatrixXd, 4> w_query;  // channels x d_k
  std::array<Eigen::MatrixXd, 4> w_key;    // channels x d_k
  std::array<Eigen::MatrixXd, 4> w_value;  // channels x d_k
  Eigen::MatrixXd w_fc;                    // d x 4*d_k

  int channels() const { return static_cast<int>(w_query[0].rows()); }
  int key_dim() const { return static_cast<int>(w_query[0].cols()); }
  int embedding_dim() const { return static_cast<int>(w_fc.rows()); }

  void validate() const;
};

/// Seeded gaussian init scaled by 1/sqrt(fan_in).
AttentionParams make_random_attention_params(int channels, int d_k, int d,
                                             std::uint64_t seed);

/// softmax(Q K^T / sqrt(d_k)) V with a row-wise numerically stable softmax.
Eigen::MatrixXd qkv_attention(const Eigen::MatrixXd& queries,
                              const Eigen::MatrixXd& keys,
                              const Eigen::MatrixXd& values);

/// Full ISA block: per-slice projections, self-attention plus cross-attention
/// into every other slice, token mean-pooling, concat, output head,
/// L2 normalization.
Embedding isa_forward(const SliceSet& slices, const AttentionParams& params);

}  // namespace smctrack
