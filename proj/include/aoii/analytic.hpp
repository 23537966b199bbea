#pragma once

#include <vector>

#include "aoii/delay.hpp"
#include "aoii/penalty.hpp"
#include "aoii/source.hpp"

namespace aoii {

// Closed forms for the canonical preemptive policies.  The strong-preemptive
// chain depends on the delay model only through q_1, so these take the hazard
// directly; wrappers accepting a DelayModel sit next to them.

// Stationary probability of AoII level `delta` under the strong preemptive
// policy.  Requires 0 < p < 1/2 and 0 < q1 <= 1.
double sp_stationary(double p, double q1, int delta);

struct CappedSum {
  double value = 0.0;       // sum of f(delta) pi(delta) for delta <= cap
  double tail_bound = 0.0;  // rigorous upper bound on the omitted tail
};

// Expected penalty under the strong preemptive policy as a capped sum plus a
// tail bound derived from the geometric decay of the stationary law and the
// penalty kind's growth.  Table penalties need an extrapolation slope.
CappedSum sp_expected_aoii(double p, double q1, const PenaltyFunction& f, int delta_cap);

// Expected linear penalty alpha * delta + beta under the strong preemptive
// policy, in closed form.
double sp_expected_aoii_linear(double p, double q1, double alpha, double beta);

// The threshold preemptive policy attains the same expected linear penalty as
// the strong preemptive one (they differ only at states the induced chains
// never visit once t_max >= 3).
double tp_expected_aoii_linear(double p, double q1, double alpha, double beta);

// Thin wrappers: the closed forms above depend on the delay model only
// through its first-slot hazard.
double sp_stationary(const SourceModel& source, const DelayModel& delay, int delta);
CappedSum sp_expected_aoii(const SourceModel& source, const DelayModel& delay,
                           const PenaltyFunction& f, int delta_cap);
double sp_expected_aoii_linear(const SourceModel& source, const DelayModel& delay,
                               double alpha, double beta);
double tp_expected_aoii_linear(const SourceModel& source, const DelayModel& delay,
                               double alpha, double beta);

struct WpAggregates {
  double pi0 = 0.0;           // stationary mass of the correct-estimate states
  double Pi = 0.0;            // mass of delta > 0 states the policy transmits from
  std::vector<double> Pi_t;   // Pi_t[t-1]: mass of (delta > 0, t, i = 1), t = 1..t_max-1
};

// Aggregated stationary masses of the weak-preemptive chain.  Requires a
// bounded delay (the chain analysis caps the transmission time).
WpAggregates wp_aggregates(const SourceModel& source, const DelayModel& delay);

// Expected linear penalty under the weak preemptive policy via the aggregate
// recursions.  Bounded delays only.
double wp_expected_aoii_linear(const SourceModel& source, const DelayModel& delay,
                               double alpha, double beta);

// Sign conditions under which the threshold preemptive policy is provably
// optimal for a bounded delay with linear penalty.  For t_max = 2 the check
// is vacuous and always satisfied.  All inputs are recorded for audit.
struct ThresholdCondition {
  int t_max = 0;
  double p = 0.0;
  double q1 = 0.0;
  double q_before_last = 0.0;  // q_{t_max - 1}
  bool hazard_monotone = false;
  double Q1 = 0.0;
  double Q2 = 0.0;
  double Q3 = 0.0;
  bool satisfied = false;
};

ThresholdCondition check_condition1(const SourceModel& source, const DelayModel& delay);

}  // namespace aoii
