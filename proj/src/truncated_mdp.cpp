#include "aoii/truncated_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "aoii/policy.hpp"

namespace aoii {

TruncationConfig TruncationConfig::defaults_for(const DelayModel& delay, int delta_max,
                                                double geometric_tail) {
  TruncationConfig cfg;
  cfg.delta_max = delta_max;
  if (delay.bounded()) {
    cfg.t_max_trunc = std::max(1, *delay.t_max() - 1);
  } else {
    double survive = 1.0 - delay.success_prob();
    int t = static_cast<int>(std::ceil(std::log(geometric_tail) / std::log(survive)));
    cfg.t_max_trunc = std::max(1, t);
  }
  return cfg;
}

TruncatedMdp::TruncatedMdp(const SourceModel& source, const DelayModel& delay,
                           const PenaltyFunction& penalty, const TruncationConfig& cfg)
    : source_(source),
      delay_(delay),
      penalty_(penalty),
      cfg_(cfg),
      indexer_(cfg.delta_max, cfg.t_max_trunc) {
  if (cfg.delta_max < 1 || cfg.t_max_trunc < 1)
    throw std::invalid_argument("TruncatedMdp: truncation bounds must be positive");
  if (delay.bounded() && cfg.t_max_trunc < *delay.t_max() - 1)
    throw std::invalid_argument(
        "TruncatedMdp: t_max_trunc must reach t_max - 1 so no reachable in-flight age is clipped");

  const int n = indexer_.size();
  costs_.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    costs_[static_cast<std::size_t>(k)] = penalty_(indexer_.state_at(k).delta);

  for (Action a : {Action::stay, Action::transmit}) {
    Csr& csr = kernel_[to_int(a)];
    csr.row_ptr.reserve(static_cast<std::size_t>(n) + 1);
    csr.row_ptr.push_back(0);
    for (int k = 0; k < n; ++k) {
      State s = indexer_.state_at(k);
      TransitionList row = transitions(source_, delay_, s, a);

      // Clamp out-of-range successors onto the bounds, keeping the indicator,
      // and merge the branches that land on the same clamped state.
      int ids[4];
      double pr[4];
      int count = 0;
      double sum = 0.0;
      for (const Successor& succ : row) {
        State c{std::min(succ.state.delta, cfg_.delta_max), std::min(succ.state.t, cfg_.t_max_trunc),
                succ.state.i};
        int id = indexer_.index_of(c);
        sum += succ.prob;
        bool merged = false;
        for (int j = 0; j < count; ++j) {
          if (ids[j] == id) {
            pr[j] += succ.prob;
            merged = true;
            break;
          }
        }
        if (!merged) {
          ids[count] = id;
          pr[count] = succ.prob;
          ++count;
        }
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw std::logic_error("TruncatedMdp: kernel row does not sum to 1 at state " + to_string(s));
      for (int j = 0; j < count; ++j) {
        csr.col.push_back(ids[j]);
        csr.prob.push_back(pr[j]);
      }
      csr.row_ptr.push_back(static_cast<int>(csr.col.size()));
    }
  }
}

std::span<const int> TruncatedMdp::successor_ids(int idx, Action a) const {
  const Csr& csr = kernel_[to_int(a)];
  auto begin = static_cast<std::size_t>(csr.row_ptr[static_cast<std::size_t>(idx)]);
  auto end = static_cast<std::size_t>(csr.row_ptr[static_cast<std::size_t>(idx) + 1]);
  return {csr.col.data() + begin, end - begin};
}

std::span<const double> TruncatedMdp::successor_probs(int idx, Action a) const {
  const Csr& csr = kernel_[to_int(a)];
  auto begin = static_cast<std::size_t>(csr.row_ptr[static_cast<std::size_t>(idx)]);
  auto end = static_cast<std::size_t>(csr.row_ptr[static_cast<std::size_t>(idx) + 1]);
  return {csr.prob.data() + begin, end - begin};
}

void TruncatedMdp::dump_kernel_csv(std::ostream& os) const {
  os << "delta,t,i,a,delta2,t2,i2,prob\n";
  char buf[64];
  for (int k = 0; k < num_states(); ++k) {
    State s = indexer_.state_at(k);
    for (Action a : {Action::stay, Action::transmit}) {
      auto ids = successor_ids(k, a);
      auto probs = successor_probs(k, a);
      for (std::size_t j = 0; j < ids.size(); ++j) {
        State z = indexer_.state_at(ids[j]);
        std::snprintf(buf, sizeof buf, "%.17g", probs[j]);
        os << s.delta << ',' << s.t << ',' << s.i << ',' << to_int(a) << ',' << z.delta << ','
           << z.t << ',' << z.i << ',' << buf << '\n';
      }
    }
  }
}

std::vector<int> reachable_states(const TruncatedMdp& mdp, const Policy& policy,
                                  const State& start) {
  const StateIndexer& ix = mdp.indexer();
  std::vector<char> seen(static_cast<std::size_t>(ix.size()), 0);
  std::vector<int> stack{ix.index_of(start)};
  seen[static_cast<std::size_t>(stack[0])] = 1;
  while (!stack.empty()) {
    int k = stack.back();
    stack.pop_back();
    Action a = policy.action(ix.state_at(k));
    for (int j : mdp.successor_ids(k, a)) {
      if (!seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = 1;
        stack.push_back(j);
      }
    }
  }
  std::vector<int> out;
  for (int k = 0; k < ix.size(); ++k)
    if (seen[static_cast<std::size_t>(k)]) out.push_back(k);
  return out;
}

}  // namespace aoii
