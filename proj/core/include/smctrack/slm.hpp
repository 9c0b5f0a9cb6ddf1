#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "smctrack/attention.hpp"
#include "smctrack/feature_map.hpp"

namespace smctrack {

/// Everything needed to turn a crop into an embedding: the stand-in backbone
/// configuration and the attention weights.
struct SlmModel {
  StubExtractorConfig extractor;
  AttentionParams attention;
};

/// Stock model for 80x224 crops: 8x8 patch averaging into 8 channels on a
/// 10x28 grid, d_k 16, 128-dimensional embeddings.
SlmModel make_default_slm_model(std::uint64_t seed);

/// Siamese crop scorer; both branches share the same model by construction.
class SlmPipeline {
public:
  explicit SlmPipeline(SlmModel model);

  Embedding embed(const Image& crop) const;
  double similarity(const Image& a, const Image& b) const;

  const SlmModel& model() const { return model_; }

private:
  SlmModel model_;
  StubExtractor extractor_;
};

double slm_similarity(const Image& a, const Image& b, const SlmModel& model);

/// Gradient accumulator shaped like AttentionParams.
struct SiameseGradients {
  std::array<Eigen::MatrixXd, 4> w_query;
  std::array<Eigen::MatrixXd, 4> w_key;
  std::array<Eigen::MatrixXd, 4> w_value;
  Eigen::MatrixXd w_fc;

  static SiameseGradients zeros_like(const AttentionParams& params);
  void scale(double factor);
};

struct LabeledSlicePair {
  SliceSet a;
  SliceSet b;
  double target = 0.0;  // 1 same identity, 0 different
};

/// Squared error between the Siamese cosine score and the label. When grads
/// is non-null the analytic gradients of the loss w.r.t. every attention
/// parameter are accumulated into it (both branches, shared weights).
double siamese_pair_loss(const LabeledSlicePair& pair, const AttentionParams& params,
                         SiameseGradients* grads);

using LrSchedule = std::function<double(int epoch)>;

LrSchedule cosine_annealing_schedule(double initial_lr, int total_epochs);

struct ToyTrainReport {
  std::vector<double> epoch_loss;  // mean pair loss per epoch, pre-update

  double initial_loss() const { return epoch_loss.front(); }
  double final_loss() const { return epoch_loss.back(); }
};

/// Full-batch gradient descent on the MSE similarity loss. Throws
/// DivergenceError naming the epoch if the loss goes non-finite.
ToyTrainReport train_siamese_toy(const std::vector<LabeledSlicePair>& pairs,
                                 AttentionParams& params, int epochs,
                                 const LrSchedule& schedule);

/// Seeded crop with an identity-specific smooth pattern plus per-instance
/// pixel noise; used to build toy training sets.
Image make_synthetic_crop(const CropSpec& spec, std::uint64_t identity_seed,
                          std::uint64_t instance_seed, double noise);

}  // namespace smctrack
