#include "smctrack/attention.hpp"

#include <cassert>
#include <cmath>

#include "smctrack/errors.hpp"
#include "smctrack/random.hpp"

namespace smctrack {

void AttentionParams::validate() const {
  const int c = channels();
  const int dk = key_dim();
  for (int i = 0; i < 4; ++i) {
    const auto& q = w_query[static_cast<std::size_t>(i)];
    const auto& k = w_key[static_cast<std::size_t>(i)];
    const auto& v = w_value[static_cast<std::size_t>(i)];
    if (q.rows() != c || q.cols() != dk || k.rows() != c || k.cols() != dk ||
        v.rows() != c || v.cols() != dk) {
      throw ConfigError("attention projection shapes are inconsistent across slices");
    }
    if (!q.allFinite() || !k.allFinite() || !v.allFinite()) {
      throw ConfigError("attention projection weights must be finite");
    }
  }
  if (w_fc.cols() != 4 * dk) {
    throw ConfigError("output head expects a 4*d_k pooled input");
  }
  if (!w_fc.allFinite()) {
    throw ConfigError("output head weights must be finite");
  }
}

AttentionParams make_random_attention_params(int channels, int d_k, int d,
                                             std::uint64_t seed) {
  Rng rng(seed);
  auto gaussian_matrix = [&rng](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        m(r, c) = scale * rng.gaussian();
      }
    }
    return m;
  };

  AttentionParams params;
  for (int i = 0; i < 4; ++i) {
    params.w_query[static_cast<std::size_t>(i)] = gaussian_matrix(channels, d_k);
    params.w_key[static_cast<std::size_t>(i)] = gaussian_matrix(channels, d_k);
    params.w_value[static_cast<std::size_t>(i)] = gaussian_matrix(channels, d_k);
  }
  params.w_fc = gaussian_matrix(d, 4 * d_k);
  return params;
}

Eigen::MatrixXd qkv_attention(const Eigen::MatrixXd& queries,
                              const Eigen::MatrixXd& keys,
                              const Eigen::MatrixXd& values) {
  assert(queries.cols() == keys.cols());
  assert(keys.rows() == values.rows());

  const double scale = 1.0 / std::sqrt(static_cast<double>(queries.cols()));
  Eigen::MatrixXd logits = scale * (queries * keys.transpose());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double row_max = logits.row(r).maxCoeff();
    logits.row(r) = (logits.row(r).array() - row_max).exp();
    logits.row(r) /= logits.row(r).sum();
#ifndef NDEBUG
    assert(std::abs(logits.row(r).sum() - 1.0) < 1e-9);
#endif
  }
  return logits * values;
}

Embedding isa_forward(const SliceSet& slices, const AttentionParams& params) {
  const int dk = params.key_dim();

  std::array<Eigen::MatrixXd, 4> q, k, v;
  for (int i = 0; i < 4; ++i) {
    const auto& s = slices.slices[static_cast<std::size_t>(i)];
    q[static_cast<std::size_t>(i)] = s * params.w_query[static_cast<std::size_t>(i)];
    k[static_cast<std::size_t>(i)] = s * params.w_key[static_cast<std::size_t>(i)];
    v[static_cast<std::size_t>(i)] = s * params.w_value[static_cast<std::size_t>(i)];
  }

  Eigen::VectorXd pooled(4 * dk);
  for (int i = 0; i < 4; ++i) {
    Eigen::MatrixXd mixed = Eigen::MatrixXd::Zero(slices.tokens(), dk);
    for (int j = 0; j < 4; ++j) {
      mixed += qkv_attention(q[static_cast<std::size_t>(i)],
                             k[static_cast<std::size_t>(j)],
                             v[static_cast<std::size_t>(j)]);
    }
    pooled.segment(i * dk, dk) = mixed.colwise().mean().transpose();
  }

  return Embedding::unit(params.w_fc * pooled);
}

}  // namespace smctrack
