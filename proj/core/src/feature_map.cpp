#include "smctrack/feature_map.hpp"

#include <cmath>
#include <fstream>

#include "smctrack/errors.hpp"
#include "smctrack/random.hpp"
#include "text_util.hpp"

namespace smctrack {

Image Image::filled(int width, int height, double value) {
  Image img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, value);
  return img;
}

FeatureMap FeatureMap::zeros(int channels, int height, int width) {
  FeatureMap fm;
  fm.channels = channels;
  fm.height = height;
  fm.width = width;
  fm.values.assign(static_cast<std::size_t>(channels) * height * width, 0.0);
  return fm;
}

SliceSet slice_feature_map(const FeatureMap& fm) {
  if (fm.height % 2 != 0 || fm.width % 2 != 0) {
    throw ConfigError("feature map height and width must be even for quadrant slicing");
  }
  const int half_h = fm.height / 2;
  const int half_w = fm.width / 2;
  const int tokens = half_h * half_w;

  SliceSet set;
  set.token_rows = half_h;
  set.token_cols = half_w;

  const std::array<std::pair<int, int>, 4> origins = {
      std::pair{0, 0}, {0, half_w}, {half_h, 0}, {half_h, half_w}};
  for (int k = 0; k < 4; ++k) {
    const auto [oy, ox] = origins[static_cast<std::size_t>(k)];
    Eigen::MatrixXd slice(tokens, fm.channels);
    const double positional_code = static_cast<double>(k + 1);
    for (int y = 0; y < half_h; ++y) {
      for (int x = 0; x < half_w; ++x) {
        const int token = y * half_w + x;
        for (int c = 0; c < fm.channels; ++c) {
          slice(token, c) = fm.at(c, oy + y, ox + x) + positional_code;
        }
      }
    }
    set.slices[static_cast<std::size_t>(k)] = std::move(slice);
  }
  return set;
}

StubExtractor::StubExtractor(const StubExtractorConfig& cfg) : cfg_(cfg) {
  if (cfg.channels <= 0 || cfg.patch_width <= 0 || cfg.patch_height <= 0) {
    throw ConfigError("stub extractor dimensions must be positive");
  }
  Rng rng(cfg.seed);
  channel_weights_.resize(static_cast<std::size_t>(cfg.channels));
  channel_biases_.resize(static_cast<std::size_t>(cfg.channels));
  for (int c = 0; c < cfg.channels; ++c) {
    channel_weights_[static_cast<std::size_t>(c)] = rng.gaussian();
    channel_biases_[static_cast<std::size_t>(c)] = 0.1 * rng.gaussian();
  }
}

FeatureMap extract_feature_map(const Image& crop, const FeatureExtractor& extractor) {
  return extract_feature_map(extractor.extract(crop));
}

FeatureMap extract_feature_map(FeatureMap precomputed) {
  if (precomputed.channels <= 0 || precomputed.height <= 0 || precomputed.width <= 0) {
    throw ConfigError("feature map dimensions must be positive");
  }
  if (precomputed.height % 2 != 0 || precomputed.width % 2 != 0) {
    throw ConfigError("feature map height and width must be even");
  }
  const std::size_t expected = static_cast<std::size_t>(precomputed.channels) *
                               precomputed.height * precomputed.width;
  if (precomputed.values.size() != expected) {
    throw ConfigError("feature map value count disagrees with its dimensions");
  }
  for (double v : precomputed.values) {
    if (!std::isfinite(v)) {
      throw ConfigError("feature map values must be finite");
    }
  }
  return precomputed;
}

std::string format_feature_map(const FeatureMap& fm) {
  std::string out = "smctrack-fmap v1\n";
  out += "dims " + std::to_string(fm.channels) + " " + std::to_string(fm.height) +
         " " + std::to_string(fm.width) + "\n";
  for (int c = 0; c < fm.channels; ++c) {
    for (int y = 0; y < fm.height; ++y) {
      for (int x = 0; x < fm.width; ++x) {
        if (x > 0) out += ' ';
        out += detail::format_double(fm.at(c, y, x));
      }
      out += '\n';
    }
  }
  out += "end\n";
  return out;
}

void save_feature_map(const FeatureMap& fm, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << format_feature_map(fm);
  if (!out) {
    throw IoError("failed while writing " + path.string());
  }
}

FeatureMap parse_feature_map(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_number = 0;
  auto next_line = [&]() -> std::string_view {
    while (std::getline(in, line)) {
      ++line_number;
      const auto trimmed = detail::trim(line);
      if (!trimmed.empty()) return trimmed;
    }
    throw ParseError(source, line_number, "unexpected end of feature map file");
  };

  if (next_line() != "smctrack-fmap v1") {
    throw ParseError(source, line_number, "not a smctrack-fmap v1 file");
  }
  const auto dims_fields = detail::split(next_line(), ' ');
  long long channels = 0, height = 0, width = 0;
  if (dims_fields.size() != 4 || dims_fields[0] != "dims" ||
      !detail::parse_int(dims_fields[1], channels) ||
      !detail::parse_int(dims_fields[2], height) ||
      !detail::parse_int(dims_fields[3], width)) {
    throw ParseError(source, line_number, "expected 'dims <C> <H> <W>'");
  }
  if (channels <= 0 || height <= 0 || width <= 0) {
    throw ParseError(source, line_number, "feature map dimensions must be positive");
  }

  FeatureMap fm = FeatureMap::zeros(static_cast<int>(channels), static_cast<int>(height),
                                    static_cast<int>(width));
  for (int c = 0; c < fm.channels; ++c) {
    for (int y = 0; y < fm.height; ++y) {
      const auto fields = detail::split(next_line(), ' ');
      if (static_cast<long long>(fields.size()) != width) {
        throw ParseError(source, line_number,
                         "expected " + std::to_string(width) + " values per row");
      }
      for (int x = 0; x < fm.width; ++x) {
        double v = 0.0;
        if (!detail::parse_double(fields[static_cast<std::size_t>(x)], v)) {
          throw ParseError(source, line_number, "feature value is not a number");
        }
        fm.at(c, y, x) = v;
      }
    }
  }
  if (next_line() != "end") {
    throw ParseError(source, line_number, "expected 'end'");
  }
  return extract_feature_map(std::move(fm));
}

FeatureMap load_feature_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string() + " for reading");
  }
  return parse_feature_map(in, path.string());
}

FeatureMap StubExtractor::extract(const Image& crop) const {
  if (crop.width % cfg_.patch_width != 0 || crop.height % cfg_.patch_height != 0) {
    throw ConfigError("crop size is not a multiple of the stub patch size");
  }
  const int out_h = crop.height / cfg_.patch_height;
  const int out_w = crop.width / cfg_.patch_width;
  if (out_h % 2 != 0 || out_w % 2 != 0) {
    throw ConfigError("stub extractor output dimensions must be even");
  }

  FeatureMap fm = FeatureMap::zeros(cfg_.channels, out_h, out_w);
  const double patch_area = static_cast<double>(cfg_.patch_width) * cfg_.patch_height;
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double sum = 0.0;
      for (int py = 0; py < cfg_.patch_height; ++py) {
        for (int px = 0; px < cfg_.patch_width; ++px) {
          sum += crop.at(x * cfg_.patch_width + px, y * cfg_.patch_height + py);
        }
      }
      const double mean = sum / patch_area;
      for (int c = 0; c < cfg_.channels; ++c) {
        fm.at(c, y, x) = channel_weights_[static_cast<std::size_t>(c)] * mean +
                         channel_biases_[static_cast<std::size_t>(c)];
      }
    }
  }
  return fm;
}

}  // namespace smctrack
