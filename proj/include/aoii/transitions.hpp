#pragma once

#include <array>

#include "aoii/delay.hpp"
#include "aoii/source.hpp"
#include "aoii/state.hpp"

namespace aoii {

struct Successor {
  State state;
  double prob = 0.0;
};

// One kernel row: at most four successors, zero-probability branches dropped.
class TransitionList {
 public:
  const Successor* begin() const { return items_.data(); }
  const Successor* end() const { return items_.data() + count_; }
  int size() const { return count_; }
  const Successor& operator[](int k) const { return items_[static_cast<std::size_t>(k)]; }

  void push(State s, double prob) {
    if (prob > 0.0) items_[static_cast<std::size_t>(count_++)] = {s, prob};
  }

 private:
  std::array<Successor, 4> items_{};
  int count_ = 0;
};

// Exact one-slot transition law of the joint process, untruncated: the
// successor AoII level is always 0 or delta + 1.  Delivery resolves with
// hazard q_1 for a transmission (re)started this slot and q_{t+1} for a
// continuing one; the source flip and the delivery outcome combine
// independently.
TransitionList transitions(const SourceModel& source, const DelayModel& delay,
                           const State& s, Action a);

}  // namespace aoii
