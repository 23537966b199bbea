#pragma once

#include <stdexcept>
#include <string>

namespace aoii {

// Symmetric two-state Markov source with per-slot flip probability p.
// Only 0 < p < 1/2 is supported: at p = 0 the source never moves, and at
// p >= 1/2 the last received update is no longer the best estimator.
class SourceModel {
 public:
  explicit SourceModel(double flip_prob) : p_(flip_prob) {
    if (!(p_ > 0.0 && p_ < 0.5))
      throw std::invalid_argument("SourceModel: flip probability must lie in (0, 1/2), got " +
                                  std::to_string(flip_prob));
  }

  double flip_prob() const { return p_; }

 private:
  double p_;
};

}  // namespace aoii
