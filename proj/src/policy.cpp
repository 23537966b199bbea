#include "aoii/policy.hpp"

#include <ostream>
#include <stdexcept>

#include "aoii/truncated_mdp.hpp"

namespace aoii {

Policy Policy::strong_preemptive() { return Policy(PolicyKind::strong_preemptive); }

Policy Policy::weak_preemptive() { return Policy(PolicyKind::weak_preemptive); }

Policy Policy::threshold_preemptive(int t_max) {
  if (t_max < 2)
    throw std::invalid_argument("Policy::threshold_preemptive: t_max must be at least 2");
  Policy p(PolicyKind::threshold_preemptive);
  p.t_max_ = t_max;
  return p;
}

Policy Policy::lazy_threshold() { return Policy(PolicyKind::lazy_threshold); }

Policy Policy::table(StateIndexer indexer, std::vector<Action> actions) {
  if (static_cast<int>(actions.size()) != indexer.size())
    throw std::invalid_argument("Policy::table: action table must be total over the enumeration");
  Policy p(PolicyKind::table);
  p.indexer_ = indexer;
  p.actions_ = std::move(actions);
  return p;
}

Policy Policy::bernoulli(double transmit_prob) {
  if (!(transmit_prob >= 0.0 && transmit_prob <= 1.0))
    throw std::invalid_argument("Policy::bernoulli: transmit probability must lie in [0, 1]");
  Policy p(PolicyKind::bernoulli);
  p.transmit_prob_ = transmit_prob;
  return p;
}

Action Policy::action(const State& s) const {
  if (!is_valid_state(s))
    throw std::invalid_argument("Policy::action: invalid state " + to_string(s));
  switch (kind_) {
    case PolicyKind::strong_preemptive:
      return Action::transmit;
    case PolicyKind::weak_preemptive:
      return (s.delta > 0 && s.i == 1) ? Action::stay : Action::transmit;
    case PolicyKind::threshold_preemptive:
      return (s.delta >= 1 && s.t == t_max_ - 1 && s.i == 1) ? Action::stay : Action::transmit;
    case PolicyKind::lazy_threshold:
      return (s.i == -1 && s.delta > 0) ? Action::transmit : Action::stay;
    case PolicyKind::table:
      return actions_[static_cast<std::size_t>(indexer_->index_of(s))];
    case PolicyKind::bernoulli:
      throw std::logic_error("Policy::action: randomized policy has no per-state action");
  }
  return Action::stay;
}

int Policy::threshold_t_max() const {
  if (kind_ != PolicyKind::threshold_preemptive)
    throw std::logic_error("Policy::threshold_t_max: not a threshold preemptive policy");
  return t_max_;
}

double Policy::transmit_prob() const {
  if (kind_ != PolicyKind::bernoulli)
    throw std::logic_error("Policy::transmit_prob: not a bernoulli policy");
  return transmit_prob_;
}

const StateIndexer* Policy::table_indexer() const {
  return indexer_ ? &*indexer_ : nullptr;
}

std::vector<Action> Policy::materialize(const StateIndexer& indexer) const {
  std::vector<Action> out(static_cast<std::size_t>(indexer.size()));
  for (int k = 0; k < indexer.size(); ++k)
    out[static_cast<std::size_t>(k)] = action(indexer.state_at(k));
  return out;
}

std::string Policy::name() const {
  switch (kind_) {
    case PolicyKind::strong_preemptive: return "strong-preemptive";
    case PolicyKind::weak_preemptive: return "weak-preemptive";
    case PolicyKind::threshold_preemptive:
      return "threshold-preemptive(tmax=" + std::to_string(t_max_) + ")";
    case PolicyKind::lazy_threshold: return "lazy-threshold";
    case PolicyKind::table: return "table";
    case PolicyKind::bernoulli: return "bernoulli(" + std::to_string(transmit_prob_) + ")";
  }
  return "?";
}

void require_policy_delay_match(const Policy& policy, const DelayModel& delay) {
  if (policy.kind() != PolicyKind::threshold_preemptive) return;
  if (!delay.bounded() || *delay.t_max() != policy.threshold_t_max())
    throw std::invalid_argument(
        "threshold preemptive policy needs a bounded delay with matching t_max (policy t_max=" +
        std::to_string(policy.threshold_t_max()) + ", delay " + delay.describe() + ")");
}

PolicyComparison equal_on_reachable(const Policy& a, const Policy& b,
                                    const TruncatedMdp& mdp, const State& start) {
  require_policy_delay_match(a, mdp.delay());
  require_policy_delay_match(b, mdp.delay());
  PolicyComparison cmp;
  for (int k : reachable_states(mdp, a, start)) {
    State s = mdp.indexer().state_at(k);
    if (a.action(s) != b.action(s)) {
      cmp.equal = false;
      cmp.witnesses.push_back(s);
    }
  }
  return cmp;
}

void write_policy_csv(std::ostream& os, const Policy& policy, const StateIndexer& indexer) {
  os << "delta,t,i,a\n";
  for (int k = 0; k < indexer.size(); ++k) {
    State s = indexer.state_at(k);
    os << s.delta << ',' << s.t << ',' << s.i << ',' << to_int(policy.action(s)) << '\n';
  }
}

}  // namespace aoii
