#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "aoii/delay.hpp"
#include "aoii/penalty.hpp"
#include "aoii/policy.hpp"
#include "aoii/source.hpp"

namespace aoii {

struct SimConfig {
  std::int64_t horizon = 1'000'000;
  std::int64_t warmup = 0;  // slots discarded before averaging
  std::uint64_t seed = 1;
  bool record_trace = false;
};

struct TraceRow {
  std::int64_t k;
  int x;      // source state
  int xhat;   // receiver estimate
  std::int64_t delta;
  int a;      // action taken this slot
  int t;      // in-flight age observed at decision time
  int i;      // channel indicator observed at decision time
  int d;      // 1 if an update was delivered at the end of this slot
};

struct SimResult {
  double avg_penalty = 0.0;
  double std_error = 0.0;  // batch-means standard error (100 batches)
  std::int64_t slots = 0;
  std::int64_t deliveries = 0;
  std::int64_t preemptions = 0;
  std::vector<TraceRow> trace;
};

// Slotted-time simulation of the physical system.  Per slot: the cost f(delta)
// accrues, the policy observes (delta, t, i) and acts, a fresh transmission
// (if any) replaces the in-flight update, delivery resolves by hazard, the
// source flips, and the AoII steps.  A delivered update changes the estimate
// effective from the next slot.  One 64-bit-seeded generator drives the run;
// the per-slot draw order is fixed (bernoulli action if any, source flip,
// then delivery when a transmission is active), so identical inputs replay
// identical paths bit for bit.
SimResult simulate(const SourceModel& source, const DelayModel& delay,
                   const PenaltyFunction& penalty, const Policy& policy,
                   const SimConfig& cfg);

// Full per-slot trace of a fresh run, for staircase plots.
std::vector<TraceRow> sample_path(const SourceModel& source, const DelayModel& delay,
                                  const PenaltyFunction& penalty, const Policy& policy,
                                  std::int64_t length, std::uint64_t seed);

struct KernelCheckEntry {
  State s;
  Action a;
  std::int64_t visits = 0;
  double tv_distance = 0.0;
};

// Long-run frequency check of simulated one-slot transitions against the
// exact kernel rows.  Only (state, action) pairs with delta below delta_cap
// and in-flight age below t_cap are bucketed; pairs visited fewer than
// min_visits times are omitted from the report.
std::vector<KernelCheckEntry> empirical_kernel_check(
    const SourceModel& source, const DelayModel& delay, const Policy& policy,
    std::int64_t slots, std::uint64_t seed, std::int64_t min_visits = 10000,
    int delta_cap = 32, int t_cap = 64);

// Columns: k,x,xhat,delta,a,t,i,d
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

}  // namespace aoii
