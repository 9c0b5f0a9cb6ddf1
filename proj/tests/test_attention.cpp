#include <doctest.h>

#include <limits>
#include <sstream>

#include "smctrack/attention.hpp"
#include "smctrack/errors.hpp"
#include "smctrack/oracle.hpp"
#include "smctrack/random.hpp"

using namespace smctrack;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = scale * rng.gaussian();
  return m;
}

FeatureMap random_feature_map(Rng& rng, int channels, int height, int width) {
  FeatureMap fm = FeatureMap::zeros(channels, height, width);
  for (auto& v : fm.values) v = rng.gaussian();
  return fm;
}

}  // namespace

TEST_CASE("slicing zeros yields the positional codes") {
  const FeatureMap fm = FeatureMap::zeros(3, 4, 6);
  const SliceSet set = slice_feature_map(fm);
  CHECK(set.tokens() == 6);
  CHECK(set.channels() == 3);
  for (int k = 0; k < 4; ++k) {
    const auto& slice = set.slices[static_cast<std::size_t>(k)];
    CHECK((slice.array() == static_cast<double>(k + 1)).all());
  }
}

TEST_CASE("slicing the smallest map") {
  FeatureMap fm = FeatureMap::zeros(1, 2, 2);
  fm.at(0, 0, 0) = 10.0;  // a
  fm.at(0, 0, 1) = 20.0;  // b
  fm.at(0, 1, 0) = 30.0;  // c
  fm.at(0, 1, 1) = 40.0;  // d
  const SliceSet set = slice_feature_map(fm);
  CHECK(set.slices[0](0, 0) == 11.0);
  CHECK(set.slices[1](0, 0) == 22.0);
  CHECK(set.slices[2](0, 0) == 33.0);
  CHECK(set.slices[3](0, 0) == 44.0);
}

TEST_CASE("slice quadrants match index arithmetic") {
  Rng rng(12);
  const FeatureMap fm = random_feature_map(rng, 4, 8, 8);
  const SliceSet set = slice_feature_map(fm);
  const int half = 4;
  const std::pair<int, int> origins[4] = {{0, 0}, {0, half}, {half, 0}, {half, half}};
  for (int k = 0; k < 4; ++k) {
    for (int y = 0; y < half; ++y) {
      for (int x = 0; x < half; ++x) {
        for (int c = 0; c < 4; ++c) {
          const double expect =
              fm.at(c, origins[k].first + y, origins[k].second + x) + (k + 1);
          CHECK(set.slices[static_cast<std::size_t>(k)](y * half + x, c) == expect);
        }
      }
    }
  }
}

TEST_CASE("odd feature maps cannot be sliced") {
  CHECK_THROWS_AS(slice_feature_map(FeatureMap::zeros(1, 3, 4)), ConfigError);
  CHECK_THROWS_AS(slice_feature_map(FeatureMap::zeros(1, 4, 5)), ConfigError);
}

TEST_CASE("a single matching key passes the value through") {
  Rng rng(7);
  const Eigen::MatrixXd q = random_matrix(rng, 1, 4);
  const Eigen::MatrixXd v = random_matrix(rng, 1, 6);
  const Eigen::MatrixXd out = qkv_attention(q, q, v);
  for (Eigen::Index c = 0; c < 6; ++c) {
    CHECK(out(0, c) == v(0, c));
  }
}

TEST_CASE("a hugely aligned key saturates the softmax") {
  Eigen::MatrixXd q(1, 2);
  q << 1.0, 0.0;
  Eigen::MatrixXd k(2, 2);
  k << 1e4, 0.0,  // aligned and huge
      0.0, 1.0;   // orthogonal
  Eigen::MatrixXd v(2, 3);
  v << 1.0, 2.0, 3.0, -5.0, -6.0, -7.0;
  const Eigen::MatrixXd out = qkv_attention(q, k, v);
  CHECK(out(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out(0, 1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(out(0, 2) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("attention matches the straight-line reference") {
  Rng rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const int q_rows = static_cast<int>(rng.uniform_int(1, 5));
    const int kv_rows = static_cast<int>(rng.uniform_int(1, 5));
    const int dk = static_cast<int>(rng.uniform_int(1, 6));
    const Eigen::MatrixXd q = random_matrix(rng, q_rows, dk);
    const Eigen::MatrixXd k = random_matrix(rng, kv_rows, dk);
    const Eigen::MatrixXd v = random_matrix(rng, kv_rows, 5);
    const Eigen::MatrixXd got = qkv_attention(q, k, v);
    const Eigen::MatrixXd want = oracle::attention_reference(q, k, v);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10);

    // Row-sum check via an identity value matrix exposing the softmax rows.
    const Eigen::MatrixXd weights =
        qkv_attention(q, k, Eigen::MatrixXd::Identity(kv_rows, kv_rows));
    for (Eigen::Index r = 0; r < weights.rows(); ++r) {
      CHECK(std::abs(weights.row(r).sum() - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("identical slices with shared projections collapse to self-attention") {
  Rng rng(91);
  const int channels = 3, dk = 4, d = 6;
  const Eigen::MatrixXd content = random_matrix(rng, 5, channels);

  SliceSet set;
  set.token_rows = 1;
  set.token_cols = 5;
  for (auto& s : set.slices) s = content;

  AttentionParams params = make_random_attention_params(channels, dk, d, 5);
  for (int i = 1; i < 4; ++i) {
    params.w_query[static_cast<std::size_t>(i)] = params.w_query[0];
    params.w_key[static_cast<std::size_t>(i)] = params.w_key[0];
    params.w_value[static_cast<std::size_t>(i)] = params.w_value[0];
  }

  // Each pre-concat output is four times the self-attention term, so the
  // pooled vector is four stacked copies of the same segment.
  const Eigen::MatrixXd self_term = qkv_attention(
      content * params.w_query[0], content * params.w_key[0], content * params.w_value[0]);
  Eigen::VectorXd pooled(4 * dk);
  const Eigen::VectorXd segment = 4.0 * self_term.colwise().mean().transpose();
  for (int i = 0; i < 4; ++i) pooled.segment(i * dk, dk) = segment;
  const Eigen::VectorXd expected_raw = params.w_fc * pooled;

  const Embedding got = isa_forward(set, params);
  const Eigen::VectorXd expected = expected_raw / expected_raw.norm();
  CHECK((got.values - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("positional codes make slice placement matter") {
  Rng rng(92);
  const AttentionParams params = make_random_attention_params(3, 4, 8, 17);
  for (int trial = 0; trial < 10; ++trial) {
    const FeatureMap fm = random_feature_map(rng, 3, 4, 4);
    const SliceSet original = slice_feature_map(fm);

    // Move top-left content into the top-right slot and vice versa; each
    // slot keeps its own positional code.
    SliceSet swapped = original;
    swapped.slices[0] = (original.slices[1].array() - 2.0 + 1.0).matrix();
    swapped.slices[1] = (original.slices[0].array() - 1.0 + 2.0).matrix();

    const Embedding a = isa_forward(original, params);
    const Embedding b = isa_forward(swapped, params);
    CHECK((a.values - b.values).norm() > 1e-9);
  }
}

TEST_CASE("isa matches the scalar reference on seeded input") {
  Rng rng(93);
  for (int trial = 0; trial < 10; ++trial) {
    const FeatureMap fm = random_feature_map(rng, 5, 6, 8);
    const SliceSet set = slice_feature_map(fm);
    const AttentionParams params =
        make_random_attention_params(5, 7, 16, 1000 + static_cast<std::uint64_t>(trial));
    const Embedding got = isa_forward(set, params);
    const Embedding want = oracle::isa_reference(set, params);
    CHECK((got.values - want.values).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(got.values.norm() - 1.0) < 1e-6);
  }
}

TEST_CASE("isa is deterministic") {
  Rng rng(94);
  const FeatureMap fm = random_feature_map(rng, 4, 4, 6);
  const SliceSet set = slice_feature_map(fm);
  const AttentionParams params = make_random_attention_params(4, 5, 12, 2024);
  const Embedding a = isa_forward(set, params);
  const Embedding b = isa_forward(set, params);
  CHECK(a.values == b.values);
}

TEST_CASE("precomputed feature maps are validated and round-trip through files") {
  Rng rng(95);
  const FeatureMap fm = random_feature_map(rng, 3, 6, 4);

  // Pass-through validation accepts a well-formed map untouched.
  const FeatureMap same = extract_feature_map(fm);
  CHECK(same.values == fm.values);

  FeatureMap odd = fm;
  odd.height = 5;
  odd.values.resize(static_cast<std::size_t>(3 * 5 * 4));
  CHECK_THROWS_AS(extract_feature_map(odd), ConfigError);

  FeatureMap short_values = fm;
  short_values.values.pop_back();
  CHECK_THROWS_AS(extract_feature_map(short_values), ConfigError);

  FeatureMap poisoned = fm;
  poisoned.values[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(extract_feature_map(poisoned), ConfigError);

  const std::string text = format_feature_map(fm);
  std::istringstream in(text);
  const FeatureMap parsed = parse_feature_map(in, "inline");
  CHECK(parsed.channels == fm.channels);
  CHECK(parsed.height == fm.height);
  CHECK(parsed.width == fm.width);
  CHECK(parsed.values == fm.values);

  std::istringstream bad("smctrack-fmap v1\ndims 1 2\n");
  CHECK_THROWS_AS(parse_feature_map(bad, "inline"), ParseError);
}

TEST_CASE("the extractor entry point enforces the even-dimension contract") {
  const StubExtractor extractor(StubExtractorConfig{2, 4, 4, 5});
  const Image crop = Image::filled(16, 16, 0.5);
  const FeatureMap via_entry = extract_feature_map(crop, extractor);
  const FeatureMap direct = extractor.extract(crop);
  CHECK(via_entry.values == direct.values);
}

TEST_CASE("parameter validation catches shape drift") {
  AttentionParams params = make_random_attention_params(3, 4, 8, 5);
  params.validate();
  params.w_key[2] = Eigen::MatrixXd::Zero(3, 5);
  CHECK_THROWS_AS(params.validate(), ConfigError);
}
