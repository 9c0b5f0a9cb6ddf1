#include "smctrack/slm.hpp"

#include <cmath>
#include <limits>

#include "smctrack/errors.hpp"
#include "smctrack/random.hpp"

namespace smctrack {

SlmModel make_default_slm_model(std::uint64_t seed) {
  SlmModel model;
  model.extractor = StubExtractorConfig{8, 8, 8, seed};
  model.attention = make_random_attention_params(8, 16, 128, seed ^ 0x510cb5ed);
  return model;
}

SlmPipeline::SlmPipeline(SlmModel model)
    : model_(std::move(model)), extractor_(model_.extractor) {
  model_.attention.validate();
}

Embedding SlmPipeline::embed(const Image& crop) const {
  return isa_forward(slice_feature_map(extractor_.extract(crop)), model_.attention);
}

double SlmPipeline::similarity(const Image& a, const Image& b) const {
  return cosine_similarity(embed(a), embed(b));
}

double slm_similarity(const Image& a, const Image& b, const SlmModel& model) {
  return SlmPipeline(model).similarity(a, b);
}

SiameseGradients SiameseGradients::zeros_like(const AttentionParams& params) {
  SiameseGradients grads;
  for (std::size_t i = 0; i < 4; ++i) {
    grads.w_query[i] = Eigen::MatrixXd::Zero(params.w_query[i].rows(), params.w_query[i].cols());
    grads.w_key[i] = Eigen::MatrixXd::Zero(params.w_key[i].rows(), params.w_key[i].cols());
    grads.w_value[i] = Eigen::MatrixXd::Zero(params.w_value[i].rows(), params.w_value[i].cols());
  }
  grads.w_fc = Eigen::MatrixXd::Zero(params.w_fc.rows(), params.w_fc.cols());
  return grads;
}

void SiameseGradients::scale(double factor) {
  for (std::size_t i = 0; i < 4; ++i) {
    w_query[i] *= factor;
    w_key[i] *= factor;
    w_value[i] *= factor;
  }
  w_fc *= factor;
}

namespace {

// One branch's forward intermediates, kept for the backward pass.
struct BranchCache {
  std::array<Eigen::MatrixXd, 4> q, k, v;
  std::array<std::array<Eigen::MatrixXd, 4>, 4> attn;  // attn[i][j]: softmax rows
  Eigen::VectorXd pooled;
  Eigen::VectorXd raw;
  double norm = 0.0;
  Eigen::VectorXd embedding;
};

Eigen::MatrixXd stable_softmax_rows(Eigen::MatrixXd logits) {
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double row_max = logits.row(r).maxCoeff();
    logits.row(r) = (logits.row(r).array() - row_max).exp();
    logits.row(r) /= logits.row(r).sum();
  }
  return logits;
}

BranchCache forward_branch(const SliceSet& slices, const AttentionParams& params) {
  const int dk = params.key_dim();
  const int tokens = slices.tokens();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  BranchCache cache;
  for (std::size_t i = 0; i < 4; ++i) {
    cache.q[i] = slices.slices[i] * params.w_query[i];
    cache.k[i] = slices.slices[i] * params.w_key[i];
    cache.v[i] = slices.slices[i] * params.w_value[i];
  }

  cache.pooled.resize(4 * dk);
  for (std::size_t i = 0; i < 4; ++i) {
    Eigen::MatrixXd mixed = Eigen::MatrixXd::Zero(tokens, dk);
    for (std::size_t j = 0; j < 4; ++j) {
      cache.attn[i][j] = stable_softmax_rows(scale * (cache.q[i] * cache.k[j].transpose()));
      mixed += cache.attn[i][j] * cache.v[j];
    }
    cache.pooled.segment(static_cast<Eigen::Index>(i) * dk, dk) =
        mixed.colwise().mean().transpose();
  }

  cache.raw = params.w_fc * cache.pooled;
  cache.norm = cache.raw.norm();
  if (!(cache.norm > 1e-12)) {
    throw DegenerateStateError("embedding collapsed to zero during the forward pass");
  }
  cache.embedding = cache.raw / cache.norm;
  return cache;
}

void backward_branch(const SliceSet& slices, const AttentionParams& params,
                     const BranchCache& cache, const Eigen::VectorXd& d_embedding,
                     SiameseGradients& grads) {
  const int dk = params.key_dim();
  const int tokens = slices.tokens();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  // Through the L2 normalization: d_raw = (I - e e^T) d_e / |raw|.
  const Eigen::VectorXd d_raw =
      (d_embedding - cache.embedding * cache.embedding.dot(d_embedding)) / cache.norm;

  grads.w_fc += d_raw * cache.pooled.transpose();
  const Eigen::VectorXd d_pooled = params.w_fc.transpose() * d_raw;

  std::array<Eigen::MatrixXd, 4> d_q, d_k, d_v;
  for (std::size_t i = 0; i < 4; ++i) {
    d_q[i] = Eigen::MatrixXd::Zero(tokens, dk);
    d_k[i] = Eigen::MatrixXd::Zero(tokens, dk);
    d_v[i] = Eigen::MatrixXd::Zero(tokens, dk);
  }

  for (std::size_t i = 0; i < 4; ++i) {
    // Mean pooling spreads the pooled gradient evenly over tokens.
    const Eigen::RowVectorXd d_row =
        d_pooled.segment(static_cast<Eigen::Index>(i) * dk, dk).transpose() /
        static_cast<double>(tokens);
    Eigen::MatrixXd d_mixed(tokens, dk);
    d_mixed.rowwise() = d_row;

    for (std::size_t j = 0; j < 4; ++j) {
      const Eigen::MatrixXd& attn = cache.attn[i][j];
      d_v[j] += attn.transpose() * d_mixed;

      const Eigen::MatrixXd d_attn = d_mixed * cache.v[j].transpose();
      Eigen::MatrixXd d_logits(attn.rows(), attn.cols());
      for (Eigen::Index r = 0; r < attn.rows(); ++r) {
        const double inner = d_attn.row(r).dot(attn.row(r));
        d_logits.row(r) =
            attn.row(r).array() * (d_attn.row(r).array() - inner);
      }
      d_q[i] += scale * (d_logits * cache.k[j]);
      d_k[j] += scale * (d_logits.transpose() * cache.q[i]);
    }
  }

  for (std::size_t i = 0; i < 4; ++i) {
    grads.w_query[i] += slices.slices[i].transpose() * d_q[i];
    grads.w_key[i] += slices.slices[i].transpose() * d_k[i];
    grads.w_value[i] += slices.slices[i].transpose() * d_v[i];
  }
}

}  // namespace

double siamese_pair_loss(const LabeledSlicePair& pair, const AttentionParams& params,
                         SiameseGradients* grads) {
  BranchCache branch_a, branch_b;
  try {
    branch_a = forward_branch(pair.a, params);
    branch_b = forward_branch(pair.b, params);
  } catch (const DegenerateStateError&) {
    // Collapsed embeddings surface as a non-finite loss so training can
    // report the diverging epoch instead of dying mid-batch.
    return std::numeric_limits<double>::quiet_NaN();
  }

  const double score = branch_a.embedding.dot(branch_b.embedding);
  const double residual = score - pair.target;
  const double loss = residual * residual;

  if (grads != nullptr) {
    const double d_score = 2.0 * residual;
    backward_branch(pair.a, params, branch_a, d_score * branch_b.embedding, *grads);
    backward_branch(pair.b, params, branch_b, d_score * branch_a.embedding, *grads);
  }
  return loss;
}

LrSchedule cosine_annealing_schedule(double initial_lr, int total_epochs) {
  return [initial_lr, total_epochs](int epoch) {
    const double progress =
        static_cast<double>(epoch) / static_cast<double>(std::max(1, total_epochs));
    return initial_lr * 0.5 * (1.0 + std::cos(M_PI * progress));
  };
}

ToyTrainReport train_siamese_toy(const std::vector<LabeledSlicePair>& pairs,
                                 AttentionParams& params, int epochs,
                                 const LrSchedule& schedule) {
  if (pairs.empty()) {
    throw ConfigError("training requires at least one labeled pair");
  }
  params.validate();

  ToyTrainReport report;
  report.epoch_loss.reserve(static_cast<std::size_t>(epochs));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    SiameseGradients grads = SiameseGradients::zeros_like(params);
    double loss_sum = 0.0;
    for (const auto& pair : pairs) {
      loss_sum += siamese_pair_loss(pair, params, &grads);
    }
    const double mean_loss = loss_sum / static_cast<double>(pairs.size());
    if (!std::isfinite(mean_loss)) {
      throw DivergenceError(epoch, "mean training loss is not finite");
    }
    report.epoch_loss.push_back(mean_loss);

    const double lr = schedule(epoch);
    if (lr != 0.0) {
      grads.scale(lr / static_cast<double>(pairs.size()));
      for (std::size_t i = 0; i < 4; ++i) {
        params.w_query[i] -= grads.w_query[i];
        params.w_key[i] -= grads.w_key[i];
        params.w_value[i] -= grads.w_value[i];
      }
      params.w_fc -= grads.w_fc;
    }
  }
  return report;
}

Image make_synthetic_crop(const CropSpec& spec, std::uint64_t identity_seed,
                          std::uint64_t instance_seed, double noise) {
  // Identity pattern: a small bank of seeded 2D sinusoids.
  Rng identity_rng(identity_seed);
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::array<Wave, 4> waves;
  for (auto& wave : waves) {
    wave.fx = identity_rng.uniform(0.5, 3.0);
    wave.fy = identity_rng.uniform(0.5, 3.0);
    wave.phase = identity_rng.uniform(0.0, 2.0 * M_PI);
    wave.amp = identity_rng.uniform(0.3, 1.0);
  }

  Rng instance_rng(instance_seed);
  Image crop = Image::filled(spec.width, spec.height, 0.0);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const double u = static_cast<double>(x) / spec.width;
      const double v = static_cast<double>(y) / spec.height;
      double value = 0.5;
      for (const auto& wave : waves) {
        value += 0.125 * wave.amp *
                 std::sin(2.0 * M_PI * (wave.fx * u + wave.fy * v) + wave.phase);
      }
      value += noise * instance_rng.gaussian();
      crop.at(x, y) = std::clamp(value, 0.0, 1.0);
    }
  }
  return crop;
}

}  // namespace smctrack
