#include "aoii/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "aoii/transitions.hpp"

namespace aoii {

namespace {

// One generator per run; uniforms take the top 53 bits so the stream is fully
// pinned by the engine specification.
struct RunRng {
  std::mt19937_64 gen;
  explicit RunRng(std::uint64_t seed) : gen(seed) {}
  double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
};

struct Physical {
  int x = 0;
  int xhat = 0;
  std::int64_t delta = 0;
  bool busy = false;
  int age = 0;       // completed transmission slots of the in-flight update
  int inflight = 0;  // its content
};

State observed_state(const Physical& ph) {
  int delta = static_cast<int>(
      std::min<std::int64_t>(ph.delta, std::numeric_limits<int>::max() - 1));
  if (!ph.busy) return {delta, 0, -1};
  return {delta, ph.age, ph.inflight != ph.xhat ? 1 : 0};
}

// Runs the slot loop.  Per slot, in order: the policy observes (delta, t, i)
// and acts (a bernoulli policy draws its coin first), a fresh transmission
// replaces the in-flight update with age reset, the source-flip uniform is
// drawn, the delivery uniform is drawn when a transmission is active, and the
// estimate/AoII step to the next slot.  on_slot sees the pre-slot state, the
// action, delivery/preemption flags, and the physical pre-slot values.
template <typename OnSlot>
void run_slots(const SourceModel& source, const DelayModel& delay, const Policy& policy,
               std::int64_t horizon, std::uint64_t seed, OnSlot&& on_slot) {
  const double p = source.flip_prob();
  RunRng rng(seed);
  Physical ph;

  for (std::int64_t k = 0; k < horizon; ++k) {
    const State s = observed_state(ph);
    Action a;
    if (policy.randomized())
      a = rng.uniform() < policy.transmit_prob() ? Action::transmit : Action::stay;
    else
      a = policy.action(s);

    const bool preempted = ph.busy && a == Action::transmit;
    if (a == Action::transmit) {
      ph.busy = true;
      ph.inflight = ph.x;
      ph.age = 0;
    }

    const double u_flip = rng.uniform();
    bool delivered = false;
    if (ph.busy) {
      const double q = delay.hazard(ph.age + 1);
      if (rng.uniform() < q) delivered = true;
    }

    int xhat_next = ph.xhat;
    if (delivered) {
      xhat_next = ph.inflight;
      ph.busy = false;
      ph.age = 0;
    } else if (ph.busy) {
      ph.age += 1;
    }
    const int x_next = u_flip < p ? 1 - ph.x : ph.x;
    const std::int64_t delta_next = x_next == xhat_next ? 0 : ph.delta + 1;

    const int x_pre = ph.x;
    const int xhat_pre = ph.xhat;
    const std::int64_t delta_pre = ph.delta;
    ph.x = x_next;
    ph.xhat = xhat_next;
    ph.delta = delta_next;

    on_slot(k, s, a, preempted, delivered, x_pre, xhat_pre, delta_pre, observed_state(ph));
  }
}

}  // namespace

SimResult simulate(const SourceModel& source, const DelayModel& delay,
                   const PenaltyFunction& penalty, const Policy& policy, const SimConfig& cfg) {
  if (cfg.horizon <= cfg.warmup || cfg.warmup < 0)
    throw std::invalid_argument("simulate: horizon must exceed warmup >= 0");
  require_policy_delay_match(policy, delay);

  const std::int64_t counted = cfg.horizon - cfg.warmup;
  const std::int64_t batches = std::min<std::int64_t>(100, counted);
  const std::int64_t batch_len = counted / batches;

  SimResult res;
  res.slots = counted;
  std::vector<double> batch_sums(static_cast<std::size_t>(batches), 0.0);
  double total = 0.0;

  run_slots(source, delay, policy, cfg.horizon, cfg.seed,
            [&](std::int64_t k, const State& s, Action a, bool preempted, bool delivered,
                int x_pre, int xhat_pre, std::int64_t delta_pre, const State&) {
              if (k < cfg.warmup) return;
              const double f = penalty(delta_pre);
              total += f;
              const std::int64_t idx = (k - cfg.warmup) / batch_len;
              if (idx < batches) batch_sums[static_cast<std::size_t>(idx)] += f;
              if (delivered) ++res.deliveries;
              if (preempted) ++res.preemptions;
              if (cfg.record_trace)
                res.trace.push_back({k, x_pre, xhat_pre, delta_pre, to_int(a), s.t, s.i,
                                     delivered ? 1 : 0});
            });

  res.avg_penalty = total / static_cast<double>(counted);
  if (batches >= 2) {
    double mean = 0.0;
    for (double b : batch_sums) mean += b / static_cast<double>(batch_len);
    mean /= static_cast<double>(batches);
    double var = 0.0;
    for (double b : batch_sums) {
      double m = b / static_cast<double>(batch_len) - mean;
      var += m * m;
    }
    var /= static_cast<double>(batches - 1);
    res.std_error = std::sqrt(var / static_cast<double>(batches));
  }
  return res;
}

std::vector<TraceRow> sample_path(const SourceModel& source, const DelayModel& delay,
                                  const PenaltyFunction& penalty, const Policy& policy,
                                  std::int64_t length, std::uint64_t seed) {
  if (length < 0) throw std::invalid_argument("sample_path: length must be nonnegative");
  (void)penalty;  // the trace carries delta; penalties are re-derivable
  std::vector<TraceRow> trace;
  trace.reserve(static_cast<std::size_t>(length));
  if (length == 0) return trace;
  run_slots(source, delay, policy, length, seed,
            [&](std::int64_t k, const State& s, Action a, bool, bool delivered, int x_pre,
                int xhat_pre, std::int64_t delta_pre, const State&) {
              trace.push_back(
                  {k, x_pre, xhat_pre, delta_pre, to_int(a), s.t, s.i, delivered ? 1 : 0});
            });
  return trace;
}

std::vector<KernelCheckEntry> empirical_kernel_check(const SourceModel& source,
                                                     const DelayModel& delay,
                                                     const Policy& policy, std::int64_t slots,
                                                     std::uint64_t seed, std::int64_t min_visits,
                                                     int delta_cap, int t_cap) {
  if (slots < 0) throw std::invalid_argument("empirical_kernel_check: slots must be nonnegative");

  auto encode = [](const State& s, int a) {
    return (((static_cast<std::uint64_t>(s.delta) << 20) | static_cast<std::uint64_t>(s.t)) << 3 |
            static_cast<std::uint64_t>(s.i + 1)) << 1 |
           static_cast<std::uint64_t>(a);
  };
  auto decode_state = [](std::uint64_t key) {
    key >>= 1;
    int i = static_cast<int>(key & 7) - 1;
    key >>= 3;
    int t = static_cast<int>(key & ((1u << 20) - 1));
    int delta = static_cast<int>(key >> 20);
    return State{delta, t, i};
  };

  std::unordered_map<std::uint64_t, std::unordered_map<std::uint64_t, std::int64_t>> counts;
  run_slots(source, delay, policy, slots, seed,
            [&](std::int64_t, const State& s, Action a, bool, bool, int, int, std::int64_t,
                const State& s_next) {
              if (s.delta >= delta_cap || s.t >= t_cap) return;
              counts[encode(s, to_int(a))][encode(s_next, 0)] += 1;
            });

  std::vector<KernelCheckEntry> report;
  for (const auto& [key, row] : counts) {
    std::int64_t visits = 0;
    for (const auto& kv : row) visits += kv.second;
    if (visits < min_visits) continue;

    KernelCheckEntry entry;
    entry.s = decode_state(key);
    entry.a = static_cast<Action>(key & 1);
    entry.visits = visits;

    TransitionList exact = transitions(source, delay, entry.s, entry.a);
    double tv = 0.0;
    double matched_mass = 0.0;
    for (const Successor& succ : exact) {
      auto it = row.find(encode(succ.state, 0));
      double emp = it == row.end()
                       ? 0.0
                       : static_cast<double>(it->second) / static_cast<double>(visits);
      tv += std::abs(emp - succ.prob);
      matched_mass += emp;
    }
    tv += 1.0 - matched_mass;  // observed successors outside the exact support
    entry.tv_distance = 0.5 * tv;
    report.push_back(entry);
  }
  std::sort(report.begin(), report.end(), [&](const KernelCheckEntry& a, const KernelCheckEntry& b) {
    return encode(a.s, to_int(a.a)) < encode(b.s, to_int(b.a));
  });
  return report;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
  os << "k,x,xhat,delta,a,t,i,d\n";
  for (const TraceRow& r : trace)
    os << r.k << ',' << r.x << ',' << r.xhat << ',' << r.delta << ',' << r.a << ',' << r.t << ','
       << r.i << ',' << r.d << '\n';
}

}  // namespace aoii
