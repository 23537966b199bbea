#pragma once

#include <optional>
#include <span>
#include <vector>

#include "aoii/policy.hpp"
#include "aoii/truncated_mdp.hpp"

namespace aoii {

struct SolveOptions {
  double tolerance = 1e-9;
  long max_iterations = 500000;
  State reference_state{0, 0, -1};
  // Stop on the span of the Bellman update instead of the max-abs change of
  // the relative values; opt-in for periodicity-fragile instances.
  bool span_stopping = false;
  // Relative slack below which the two action values count as tied; ties
  // resolve to transmit.
  double tie_tolerance = 1e-7;
};

struct SolveResult {
  std::vector<double> values;          // relative values (rvi) or discounted values
  std::optional<double> theta;         // average cost; absent for discounted solves
  Policy policy = Policy::strong_preemptive();  // greedy table policy
  long iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Discounted value iteration from the all-zero function; stops when the
// max-abs change drops to tol.  Non-convergence is reported through the
// `converged` flag together with the last residual.
SolveResult discounted_vi(const TruncatedMdp& mdp, double gamma, double tol = 1e-9,
                          long max_iter = 500000);

// Relative value iteration: each sweep recenters the one-step lookahead at
// the reference state, stopping on max-abs change of the relative values.
// theta is the lookahead value at the reference state at convergence.
SolveResult rvi(const TruncatedMdp& mdp, const SolveOptions& opts = {});

struct PolicyEvaluation {
  std::vector<double> values;  // pinned to 0 at the reference state
  double theta = 0.0;
  double residual = 0.0;       // max equation residual
  long iterations = 0;         // 0 for the direct solve
};

// Solves V(s) + theta = C(s) + sum_s' P(s'|s) V(s') with V(ref) = 0.  Uses a
// dense direct solve below 5000 states and a damped fixed-point iteration
// above.  The policy must induce a unichain; multichain structure throws.
// Every equation residual is brought below 1e-10.
PolicyEvaluation policy_evaluation(const TruncatedMdp& mdp, const Policy& policy,
                                   State reference_state = {0, 0, -1});

// Greedy policy against the given values; ties resolve to transmit.
Policy policy_improvement(const TruncatedMdp& mdp, std::span<const double> values,
                          double tie_tolerance = 1e-7);

// Alternates evaluation and improvement until the policy repeats.  Reports a
// non-adjacent policy cycle (possible only through tie-break instability) via
// std::runtime_error.
SolveResult policy_iteration(const TruncatedMdp& mdp, const Policy& init,
                             int max_rounds = 200);

// Stationary distribution of the policy-induced chain by power iteration,
// started uniformly on the single recurrent class.  Residual max|pi P - pi|
// is brought below tol; multichain structure throws.
std::vector<double> stationary_distribution(const TruncatedMdp& mdp, const Policy& policy,
                                            double tol = 1e-12);

// Cost of a distribution over the truncated states.
double expected_cost(const TruncatedMdp& mdp, std::span<const double> distribution);

}  // namespace aoii
