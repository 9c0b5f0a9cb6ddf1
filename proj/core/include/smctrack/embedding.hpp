#pragma once

#include <Eigen/Dense>

#include "smctrack/errors.hpp"

namespace smctrack {

/// Unit-norm appearance vector. Construct through unit() so the norm
/// invariant holds everywhere downstream.
struct Embedding {
  Eigen::VectorXd values;

  int dim() const { return static_cast<int>(values.size()); }

  /// Normalizes v to unit length. Vectors already unit within 1e-12 are kept
  /// bit-identical so file round-trips stay exact.
  static Embedding unit(Eigen::VectorXd v) {
    const double norm = v.norm();
    if (!(norm > 1e-12)) {
      throw DegenerateStateError("cannot normalize a (near-)zero embedding vector");
    }
    if (std::abs(norm - 1.0) > 1e-12) {
      v /= norm;
    }
    return Embedding{std::move(v)};
  }
};

inline double cosine_similarity(const Embedding& a, const Embedding& b) {
  return a.values.dot(b.values);
}

}  // namespace smctrack
