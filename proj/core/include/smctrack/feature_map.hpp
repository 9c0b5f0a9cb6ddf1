#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace smctrack {

/// Fixed size every crop is resized to before feature extraction.
struct CropSpec {
  int width = 80;
  int height = 224;
};

/// Grayscale crop, row-major pixels in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

  static Image filled(int width, int height, double value);
};

/// C x H x W activation tensor; H and W stay even so quadrant slicing is exact.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  double at(int c, int y, int x) const {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double& at(int c, int y, int x) {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }

  static FeatureMap zeros(int channels, int height, int width);
};

/// Quadrant slices flattened to (tokens x channels) matrices, with the
/// positional code k = 1..4 already added to every entry of slice k.
/// Order: top-left, top-right, bottom-left, bottom-right.
struct SliceSet {
  std::array<Eigen::MatrixXd, 4> slices;
  int token_rows = 0;  // quadrant height
  int token_cols = 0;  // quadrant width

  int tokens() const { return token_rows * token_cols; }
  int channels() const { return static_cast<int>(slices[0].cols()); }
};

SliceSet slice_feature_map(const FeatureMap& fm);

/// Pluggable backbone replacement.
class FeatureExtractor {
public:
  virtual ~FeatureExtractor() = default;
  virtual FeatureMap extract(const Image& crop) const = 0;
};

struct StubExtractorConfig {
  int channels = 8;
  int patch_width = 8;
  int patch_height = 8;
  std::uint64_t seed = 1;
};

/// Deterministic stand-in backbone: non-overlapping patch averaging followed
/// by a seeded random per-channel affine projection.
class StubExtractor : public FeatureExtractor {
public:
  explicit StubExtractor(const StubExtractorConfig& cfg);

  FeatureMap extract(const Image& crop) const override;

  const StubExtractorConfig& config() const { return cfg_; }

private:
  StubExtractorConfig cfg_;
  std::vector<double> channel_weights_;
  std::vector<double> channel_biases_;
};

/// Runs the extractor and checks the even-dimension contract on its output.
FeatureMap extract_feature_map(const Image& crop, const FeatureExtractor& extractor);

/// Precomputed-map entry point: validates shape, parity and finiteness.
FeatureMap extract_feature_map(FeatureMap precomputed);

// Textual tensor file for precomputed maps; round-trips exactly.
std::string format_feature_map(const FeatureMap& fm);
void save_feature_map(const FeatureMap& fm, const std::filesystem::path& path);
FeatureMap parse_feature_map(std::istream& in, const std::string& source);
FeatureMap load_feature_map(const std::filesystem::path& path);

}  // namespace smctrack
