#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "aoii/delay.hpp"
#include "aoii/penalty.hpp"
#include "aoii/source.hpp"
#include "aoii/state.hpp"
#include "aoii/transitions.hpp"

namespace aoii {

class Policy;

struct TruncationConfig {
  int delta_max = 100;
  int t_max_trunc = 30;

  // Bounded delays default to t_max - 1, the largest reachable in-flight age.
  // Geometric defaults to the smallest t whose survival mass (1-p_s)^t drops
  // below geometric_tail.
  static TruncationConfig defaults_for(const DelayModel& delay, int delta_max = 100,
                                       double geometric_tail = 1e-9);
};

// Finite MDP over the clamped state grid.  Transition mass to out-of-range
// successors is folded onto the successor with delta and t clamped to the
// bounds and the channel indicator preserved.  Rows for states away from the
// bounds equal the untruncated kernel exactly.  Immutable after construction.
class TruncatedMdp {
 public:
  TruncatedMdp(const SourceModel& source, const DelayModel& delay,
               const PenaltyFunction& penalty, const TruncationConfig& cfg);

  int num_states() const { return indexer_.size(); }
  const StateIndexer& indexer() const { return indexer_; }
  const TruncationConfig& config() const { return cfg_; }
  const SourceModel& source() const { return source_; }
  const DelayModel& delay() const { return delay_; }
  const PenaltyFunction& penalty() const { return penalty_; }

  double cost(int idx) const { return costs_[static_cast<std::size_t>(idx)]; }
  std::span<const double> costs() const { return costs_; }

  std::span<const int> successor_ids(int idx, Action a) const;
  std::span<const double> successor_probs(int idx, Action a) const;

  // Columns: delta,t,i,a,delta2,t2,i2,prob
  void dump_kernel_csv(std::ostream& os) const;

 private:
  struct Csr {
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> prob;
  };

  SourceModel source_;
  DelayModel delay_;
  PenaltyFunction penalty_;
  TruncationConfig cfg_;
  StateIndexer indexer_;
  std::vector<double> costs_;
  Csr kernel_[2];
};

// Indices of states reachable from `start` under the policy-selected actions,
// in increasing index order.
std::vector<int> reachable_states(const TruncatedMdp& mdp, const Policy& policy,
                                  const State& start);

}  // namespace aoii
