#include "smctrack/feature_bank.hpp"

#include <algorithm>

#include "smctrack/errors.hpp"

namespace smctrack {

FeatureBank::FeatureBank(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) {
    throw ConfigError("feature bank capacity must be positive");
  }
}

void FeatureBank::insert(Embedding embedding, double det_score,
                         double high_low_threshold) {
  if (size() >= capacity_) {
    const bool low_is_oldest =
        !low_.empty() &&
        (high_.empty() || low_.front().sequence < high_.front().sequence);
    if (low_is_oldest) {
      low_.pop_front();
    } else {
      high_.pop_front();
    }
  }
  Entry entry{std::move(embedding), det_score, next_sequence_++};
  if (det_score >= high_low_threshold) {
    high_.push_back(std::move(entry));
  } else {
    low_.push_back(std::move(entry));
  }
}

double FeatureBank::max_similarity(const Embedding& query) const {
  if (empty()) {
    return 0.0;
  }
  double best = -1.0;
  for (const auto& entry : high_) {
    best = std::max(best, cosine_similarity(entry.embedding, query));
  }
  for (const auto& entry : low_) {
    best = std::max(best, cosine_similarity(entry.embedding, query));
  }
  return best;
}

}  // namespace smctrack
