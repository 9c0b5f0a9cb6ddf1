#pragma once

#include <cstdint>
#include <deque>

#include "smctrack/embedding.hpp"

namespace smctrack {

/// Per-track template store split into high/low confidence sub-banks with a
/// joint capacity. Eviction drops the globally oldest template, which is also
/// the oldest of its sub-bank.
class FeatureBank {
public:
  struct Entry {
    Embedding embedding;
    double score = 0.0;
    std::uint64_t sequence = 0;
  };

  explicit FeatureBank(std::size_t capacity = 50);

  /// Routes to the high sub-bank when det_score >= high_low_threshold.
  void insert(Embedding embedding, double det_score, double high_low_threshold);

  /// Max cosine similarity over both sub-banks; 0 for an empty bank.
  double max_similarity(const Embedding& query) const;

  std::size_t size() const { return high_.size() + low_.size(); }
  bool empty() const { return high_.empty() && low_.empty(); }
  std::size_t capacity() const { return capacity_; }

  const std::deque<Entry>& high_templates() const { return high_; }
  const std::deque<Entry>& low_templates() const { return low_; }

private:
  std::size_t capacity_;
  std::uint64_t next_sequence_ = 0;
  std::deque<Entry> high_;
  std::deque<Entry> low_;
};

}  // namespace smctrack
