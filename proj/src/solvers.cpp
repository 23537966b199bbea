#include "aoii/solvers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aoii {

namespace {

constexpr int kDenseLimit = 5000;        // direct solve below, fixed point above
constexpr double kEvalResidual = 1e-10;  // per-equation target for policy evaluation
constexpr double kEvalDamping = 0.9;

double row_dot(const TruncatedMdp& mdp, int s, Action a, const std::vector<double>& v) {
  auto ids = mdp.successor_ids(s, a);
  auto pr = mdp.successor_probs(s, a);
  double acc = 0.0;
  for (std::size_t j = 0; j < ids.size(); ++j)
    acc += pr[j] * v[static_cast<std::size_t>(ids[j])];
  return acc;
}

Action greedy_action(double q_stay, double q_transmit, double tie_tolerance) {
  double tie = tie_tolerance * (1.0 + std::max(std::abs(q_stay), std::abs(q_transmit)));
  return q_stay < q_transmit - tie ? Action::stay : Action::transmit;
}

// Strongly connected components of the policy-induced transition graph,
// iterative Tarjan.  Returns the component id per state and flags components
// with an outgoing edge; exactly one escape-free component means unichain.
struct ChainStructure {
  std::vector<int> component;
  std::vector<char> has_escape;
  int recurrent_count = 0;
};

ChainStructure chain_structure(const TruncatedMdp& mdp, const std::vector<Action>& actions) {
  const int n = mdp.num_states();
  ChainStructure cs;
  cs.component.assign(static_cast<std::size_t>(n), -1);

  std::vector<int> number(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
  std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<int> tarjan_stack;
  struct Frame {
    int node;
    std::size_t child;
  };
  std::vector<Frame> frames;
  int counter = 0, comp_count = 0;

  for (int root = 0; root < n; ++root) {
    if (number[static_cast<std::size_t>(root)] >= 0) continue;
    frames.push_back({root, 0});
    number[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = counter++;
    tarjan_stack.push_back(root);
    on_stack[static_cast<std::size_t>(root)] = 1;
    while (!frames.empty()) {
      Frame& f = frames.back();
      auto ids = mdp.successor_ids(f.node, actions[static_cast<std::size_t>(f.node)]);
      if (f.child < ids.size()) {
        int w = ids[f.child++];
        if (number[static_cast<std::size_t>(w)] < 0) {
          number[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] = counter++;
          tarjan_stack.push_back(w);
          on_stack[static_cast<std::size_t>(w)] = 1;
          frames.push_back({w, 0});
        } else if (on_stack[static_cast<std::size_t>(w)]) {
          low[static_cast<std::size_t>(f.node)] =
              std::min(low[static_cast<std::size_t>(f.node)], number[static_cast<std::size_t>(w)]);
        }
      } else {
        int v = f.node;
        frames.pop_back();
        if (!frames.empty()) {
          int parent = frames.back().node;
          low[static_cast<std::size_t>(parent)] =
              std::min(low[static_cast<std::size_t>(parent)], low[static_cast<std::size_t>(v)]);
        }
        if (low[static_cast<std::size_t>(v)] == number[static_cast<std::size_t>(v)]) {
          while (true) {
            int w = tarjan_stack.back();
            tarjan_stack.pop_back();
            on_stack[static_cast<std::size_t>(w)] = 0;
            cs.component[static_cast<std::size_t>(w)] = comp_count;
            if (w == v) break;
          }
          ++comp_count;
        }
      }
    }
  }

  cs.has_escape.assign(static_cast<std::size_t>(comp_count), 0);
  for (int k = 0; k < n; ++k) {
    for (int j : mdp.successor_ids(k, actions[static_cast<std::size_t>(k)])) {
      if (cs.component[static_cast<std::size_t>(j)] != cs.component[static_cast<std::size_t>(k)])
        cs.has_escape[static_cast<std::size_t>(cs.component[static_cast<std::size_t>(k)])] = 1;
    }
  }
  for (char esc : cs.has_escape)
    if (!esc) ++cs.recurrent_count;
  return cs;
}

ChainStructure require_unichain(const TruncatedMdp& mdp, const std::vector<Action>& actions,
                                const char* who) {
  ChainStructure cs = chain_structure(mdp, actions);
  if (cs.recurrent_count != 1)
    throw std::runtime_error(std::string(who) + ": policy induces " +
                             std::to_string(cs.recurrent_count) +
                             " recurrent classes; the average cost is not well defined");
  return cs;
}

}  // namespace

SolveResult discounted_vi(const TruncatedMdp& mdp, double gamma, double tol, long max_iter) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("discounted_vi: gamma must lie in (0, 1)");
  const int n = mdp.num_states();
  SolveResult res;
  std::vector<double> v(static_cast<std::size_t>(n), 0.0), w(static_cast<std::size_t>(n));

  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    double diff = 0.0;
    for (int s = 0; s < n; ++s) {
      double q0 = mdp.cost(s) + gamma * row_dot(mdp, s, Action::stay, v);
      double q1 = mdp.cost(s) + gamma * row_dot(mdp, s, Action::transmit, v);
      w[static_cast<std::size_t>(s)] = std::min(q0, q1);
      diff = std::max(diff, std::abs(w[static_cast<std::size_t>(s)] - v[static_cast<std::size_t>(s)]));
    }
    v.swap(w);
    res.residual = diff;
    if (diff <= tol) {
      res.converged = true;
      ++res.iterations;
      break;
    }
  }

  std::vector<Action> actions(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    double q0 = mdp.cost(s) + gamma * row_dot(mdp, s, Action::stay, v);
    double q1 = mdp.cost(s) + gamma * row_dot(mdp, s, Action::transmit, v);
    actions[static_cast<std::size_t>(s)] = greedy_action(q0, q1, 1e-7);
  }
  res.values = std::move(v);
  res.policy = Policy::table(mdp.indexer(), std::move(actions));
  return res;
}

SolveResult rvi(const TruncatedMdp& mdp, const SolveOptions& opts) {
  const int n = mdp.num_states();
  const int ref = mdp.indexer().index_of(opts.reference_state);
  SolveResult res;
  std::vector<double> v(static_cast<std::size_t>(n), 0.0), q(static_cast<std::size_t>(n));
  double theta = 0.0;

  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    for (int s = 0; s < n; ++s) {
      double q0 = mdp.cost(s) + row_dot(mdp, s, Action::stay, v);
      double q1 = mdp.cost(s) + row_dot(mdp, s, Action::transmit, v);
      q[static_cast<std::size_t>(s)] = std::min(q0, q1);
    }
    theta = q[static_cast<std::size_t>(ref)];

    double stop_metric;
    if (opts.span_stopping) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int s = 0; s < n; ++s) {
        double d = q[static_cast<std::size_t>(s)] - v[static_cast<std::size_t>(s)];
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
      stop_metric = hi - lo;
    } else {
      double diff = 0.0;
      for (int s = 0; s < n; ++s)
        diff = std::max(diff, std::abs(q[static_cast<std::size_t>(s)] - theta -
                                       v[static_cast<std::size_t>(s)]));
      stop_metric = diff;
    }
    for (int s = 0; s < n; ++s)
      v[static_cast<std::size_t>(s)] = q[static_cast<std::size_t>(s)] - theta;
    res.residual = stop_metric;
    if (stop_metric <= opts.tolerance) {
      res.converged = true;
      ++res.iterations;
      break;
    }
  }

  std::vector<Action> actions(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    double q0 = mdp.cost(s) + row_dot(mdp, s, Action::stay, v);
    double q1 = mdp.cost(s) + row_dot(mdp, s, Action::transmit, v);
    actions[static_cast<std::size_t>(s)] = greedy_action(q0, q1, opts.tie_tolerance);
  }
  res.values = std::move(v);
  res.theta = theta;
  res.policy = Policy::table(mdp.indexer(), std::move(actions));
  return res;
}

PolicyEvaluation policy_evaluation(const TruncatedMdp& mdp, const Policy& policy,
                                   State reference_state) {
  require_policy_delay_match(policy, mdp.delay());
  const int n = mdp.num_states();
  const int ref = mdp.indexer().index_of(reference_state);
  const std::vector<Action> actions = policy.materialize(mdp.indexer());
  require_unichain(mdp, actions, "policy_evaluation");

  auto equation_residual = [&](const std::vector<double>& v, double theta) {
    double resid = 0.0;
    for (int s = 0; s < n; ++s) {
      double w = mdp.cost(s) + row_dot(mdp, s, actions[static_cast<std::size_t>(s)], v);
      resid = std::max(resid, std::abs(w - v[static_cast<std::size_t>(s)] - theta));
    }
    return resid;
  };

  PolicyEvaluation out;
  if (n < kDenseLimit) {
    // Direct solve of (I - P) V + theta 1 = C with V(ref) pinned to zero.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n + 1);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
    for (int s = 0; s < n; ++s) {
      A(s, s) += 1.0;
      auto ids = mdp.successor_ids(s, actions[static_cast<std::size_t>(s)]);
      auto pr = mdp.successor_probs(s, actions[static_cast<std::size_t>(s)]);
      for (std::size_t j = 0; j < ids.size(); ++j) A(s, ids[j]) -= pr[j];
      A(s, n) = 1.0;
      b(s) = mdp.cost(s);
    }
    A(n, ref) = 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd x = lu.solve(b);
    // One refinement pass keeps the residual at solver noise level.
    x += lu.solve(b - A * x);

    out.values.assign(x.data(), x.data() + n);
    out.theta = x(n);
    out.residual = equation_residual(out.values, out.theta);
    if (!(out.residual < kEvalResidual))
      throw std::runtime_error("policy_evaluation: direct solve residual " +
                               std::to_string(out.residual) + " exceeds target");
    return out;
  }

  // Damped fixed point with the reference value pinned at zero.
  std::vector<double> v(static_cast<std::size_t>(n), 0.0), w(static_cast<std::size_t>(n));
  const long max_sweeps = 2000000;
  for (out.iterations = 0; out.iterations < max_sweeps; ++out.iterations) {
    for (int s = 0; s < n; ++s)
      w[static_cast<std::size_t>(s)] =
          mdp.cost(s) + row_dot(mdp, s, actions[static_cast<std::size_t>(s)], v);
    double theta = w[static_cast<std::size_t>(ref)];
    double resid = 0.0;
    for (int s = 0; s < n; ++s)
      resid = std::max(resid, std::abs(w[static_cast<std::size_t>(s)] - theta -
                                       v[static_cast<std::size_t>(s)]));
    out.theta = theta;
    out.residual = resid;
    if (resid < kEvalResidual) break;
    for (int s = 0; s < n; ++s)
      v[static_cast<std::size_t>(s)] = (1 - kEvalDamping) * v[static_cast<std::size_t>(s)] +
                                       kEvalDamping * (w[static_cast<std::size_t>(s)] - theta);
  }
  if (!(out.residual < kEvalResidual))
    throw std::runtime_error("policy_evaluation: fixed point stalled at residual " +
                             std::to_string(out.residual));
  out.values = std::move(v);
  return out;
}

Policy policy_improvement(const TruncatedMdp& mdp, std::span<const double> values,
                          double tie_tolerance) {
  const int n = mdp.num_states();
  if (static_cast<int>(values.size()) != n)
    throw std::invalid_argument("policy_improvement: values must be total over the enumeration");
  std::vector<double> v(values.begin(), values.end());
  std::vector<Action> actions(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    double q0 = mdp.cost(s) + row_dot(mdp, s, Action::stay, v);
    double q1 = mdp.cost(s) + row_dot(mdp, s, Action::transmit, v);
    actions[static_cast<std::size_t>(s)] = greedy_action(q0, q1, tie_tolerance);
  }
  return Policy::table(mdp.indexer(), std::move(actions));
}

SolveResult policy_iteration(const TruncatedMdp& mdp, const Policy& init, int max_rounds) {
  auto table_hash = [](const std::vector<Action>& t) {
    std::uint64_t h = 1469598103934665603ull;
    for (Action a : t) {
      h ^= static_cast<std::uint64_t>(to_int(a)) + 1;
      h *= 1099511628211ull;
    }
    return h;
  };

  std::vector<Action> current = init.materialize(mdp.indexer());
  std::vector<std::uint64_t> seen{table_hash(current)};

  SolveResult res;
  for (int round = 0; round < max_rounds; ++round) {
    PolicyEvaluation eval =
        policy_evaluation(mdp, Policy::table(mdp.indexer(), current), {0, 0, -1});
    Policy improved = policy_improvement(mdp, eval.values);
    std::vector<Action> next = improved.materialize(mdp.indexer());

    res.values = eval.values;
    res.theta = eval.theta;
    res.residual = eval.residual;
    res.iterations = round + 1;
    if (next == current) {
      res.policy = std::move(improved);
      res.converged = true;
      return res;
    }
    std::uint64_t h = table_hash(next);
    if (std::find(seen.begin(), seen.end(), h) != seen.end())
      throw std::runtime_error("policy_iteration: policy cycle without convergence after " +
                               std::to_string(round + 1) + " rounds");
    seen.push_back(h);
    current = std::move(next);
    res.policy = Policy::table(mdp.indexer(), current);
  }
  res.converged = false;
  return res;
}

std::vector<double> stationary_distribution(const TruncatedMdp& mdp, const Policy& policy,
                                            double tol) {
  require_policy_delay_match(policy, mdp.delay());
  const int n = mdp.num_states();
  const std::vector<Action> actions = policy.materialize(mdp.indexer());
  ChainStructure cs = require_unichain(mdp, actions, "stationary_distribution");

  int recurrent_comp = -1;
  for (std::size_t c = 0; c < cs.has_escape.size(); ++c)
    if (!cs.has_escape[c]) recurrent_comp = static_cast<int>(c);

  std::vector<double> pi(static_cast<std::size_t>(n), 0.0), next(static_cast<std::size_t>(n));
  int class_size = 0;
  for (int k = 0; k < n; ++k)
    if (cs.component[static_cast<std::size_t>(k)] == recurrent_comp) ++class_size;
  for (int k = 0; k < n; ++k)
    if (cs.component[static_cast<std::size_t>(k)] == recurrent_comp)
      pi[static_cast<std::size_t>(k)] = 1.0 / class_size;

  const long max_sweeps = 5000000;
  auto sweep = [&](const std::vector<double>& src, std::vector<double>& dst) {
    std::fill(dst.begin(), dst.end(), 0.0);
    for (int k = 0; k < n; ++k) {
      double mass = src[static_cast<std::size_t>(k)];
      if (mass == 0.0) continue;
      auto ids = mdp.successor_ids(k, actions[static_cast<std::size_t>(k)]);
      auto pr = mdp.successor_probs(k, actions[static_cast<std::size_t>(k)]);
      for (std::size_t j = 0; j < ids.size(); ++j)
        dst[static_cast<std::size_t>(ids[j])] += mass * pr[j];
    }
    double total = 0.0;
    for (double x : dst) total += x;
    for (double& x : dst) x /= total;
  };

  for (long iter = 0; iter < max_sweeps; ++iter) {
    sweep(pi, next);
    double resid = 0.0;
    for (int k = 0; k < n; ++k)
      resid = std::max(resid, std::abs(next[static_cast<std::size_t>(k)] -
                                       pi[static_cast<std::size_t>(k)]));
    if (resid <= tol) return pi;  // pi satisfies max|pi P - pi| <= tol
    pi.swap(next);
  }
  throw std::runtime_error("stationary_distribution: power iteration failed to reach tolerance");
}

double expected_cost(const TruncatedMdp& mdp, std::span<const double> distribution) {
  if (static_cast<int>(distribution.size()) != mdp.num_states())
    throw std::invalid_argument("expected_cost: distribution size mismatch");
  double acc = 0.0;
  for (int k = 0; k < mdp.num_states(); ++k)
    acc += distribution[static_cast<std::size_t>(k)] * mdp.cost(k);
  return acc;
}

}  // namespace aoii
