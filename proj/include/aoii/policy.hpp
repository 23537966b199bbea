#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aoii/state.hpp"

namespace aoii {

class TruncatedMdp;

enum class PolicyKind {
  strong_preemptive,    // transmit when idle, always preempt
  weak_preemptive,      // as strong, but stays idle when delta > 0 and i = 1
  threshold_preemptive, // as strong, but declines to preempt at (delta, t_max-1, 1)
  lazy_threshold,       // non-preemptive baseline: transmit only when idle and delta > 0
  table,                // explicit action per enumerated state
  bernoulli             // randomized demo policy for traces; no per-state action
};

// Stationary decision rule, a pure function of the state.  The bernoulli kind
// is the only randomized one and is accepted by the simulator alone.
class Policy {
 public:
  static Policy strong_preemptive();
  static Policy weak_preemptive();
  static Policy threshold_preemptive(int t_max);
  static Policy lazy_threshold();
  static Policy table(StateIndexer indexer, std::vector<Action> actions);
  static Policy bernoulli(double transmit_prob);

  Action action(const State& s) const;
  PolicyKind kind() const { return kind_; }
  bool randomized() const { return kind_ == PolicyKind::bernoulli; }

  int threshold_t_max() const;
  double transmit_prob() const;
  const StateIndexer* table_indexer() const;

  // Actions of this policy over an enumeration, as a table.
  std::vector<Action> materialize(const StateIndexer& indexer) const;
  std::string name() const;

 private:
  explicit Policy(PolicyKind kind) : kind_(kind) {}

  PolicyKind kind_;
  int t_max_ = 0;
  double transmit_prob_ = 0.0;
  std::optional<StateIndexer> indexer_;
  std::vector<Action> actions_;
};

struct PolicyComparison {
  bool equal = true;
  std::vector<State> witnesses;  // reachable states where the actions differ
};

class DelayModel;

// A threshold preemptive policy only makes sense against a bounded delay
// whose transmission-time bound matches its own; everything else passes.
void require_policy_delay_match(const Policy& policy, const DelayModel& delay);

// Compares actions of `a` and `b` over every state reachable from `start`
// under policy `a` on the given truncated kernel.
PolicyComparison equal_on_reachable(const Policy& a, const Policy& b,
                                    const TruncatedMdp& mdp, const State& start);

void write_policy_csv(std::ostream& os, const Policy& policy, const StateIndexer& indexer);

}  // namespace aoii
