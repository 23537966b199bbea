#include "aoii/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace aoii {

namespace {

void check_sp_params(double p, double q1) {
  if (!(p > 0.0 && p < 0.5))
    throw std::invalid_argument("flip probability must lie in (0, 1/2)");
  if (!(q1 > 0.0 && q1 <= 1.0))
    throw std::invalid_argument("first-slot hazard must lie in (0, 1]");
}

// Geometric tail sums from N: sum_{k>=0} r^{N+k-1} (N+k)^m for m = 0, 1, 2.
double tail_sum0(double r, double n) { return std::pow(r, n - 1) / (1 - r); }
double tail_sum1(double r, double n) {
  return std::pow(r, n - 1) * (n / (1 - r) + r / ((1 - r) * (1 - r)));
}
double tail_sum2(double r, double n) {
  double u = 1 - r;
  return std::pow(r, n - 1) * (n * n / u + 2 * n * r / (u * u) + r * (1 + r) / (u * u * u));
}

}  // namespace

double sp_stationary(double p, double q1, int delta) {
  check_sp_params(p, q1);
  if (delta < 0) throw std::domain_error("sp_stationary: delta must be nonnegative");
  const double denom = 1 - (1 - q1) * (1 - 2 * p);
  if (delta == 0) return (p + q1 - 2 * q1 * p) / denom;
  const double r = 1 - q1 - p + 2 * q1 * p;
  const double c = (p * p + q1 * p - 2 * q1 * p * p) / denom;
  return std::pow(r, delta - 1) * c;
}

CappedSum sp_expected_aoii(double p, double q1, const PenaltyFunction& f, int delta_cap) {
  check_sp_params(p, q1);
  if (delta_cap < 1) throw std::invalid_argument("sp_expected_aoii: delta_cap must be positive");
  if (f.kind() == PenaltyKind::table && !f.table_slope())
    throw std::invalid_argument(
        "sp_expected_aoii: table penalty needs an extrapolation slope for the tail bound");

  const double denom = 1 - (1 - q1) * (1 - 2 * p);
  const double r = 1 - q1 - p + 2 * q1 * p;
  const double c = (p * p + q1 * p - 2 * q1 * p * p) / denom;

  CappedSum out;
  out.value = f(0) * (p + q1 - 2 * q1 * p) / denom;
  double power = 1.0;  // r^(delta-1)
  for (int delta = 1; delta <= delta_cap; ++delta) {
    out.value += f(delta) * c * power;
    power *= r;
  }

  // Everything past the cap, bounded by the penalty kind's growth against the
  // geometric decay of the stationary law.
  const double n = static_cast<double>(delta_cap) + 1.0;
  switch (f.kind()) {
    case PenaltyKind::linear:
      out.tail_bound = c * (f.linear_alpha() * tail_sum1(r, n) + f.linear_beta() * tail_sum0(r, n));
      break;
    case PenaltyKind::quadratic:
      out.tail_bound = c * f.quadratic_kappa() * tail_sum2(r, n);
      break;
    case PenaltyKind::logarithmic: {
      // log_b(delta + 1) <= log_b(n + 1) + (delta - n) / ((n + 1) ln b) for delta >= n.
      double lnb = std::log(f.log_base());
      out.tail_bound =
          c * (std::log(n + 1.0) / lnb * tail_sum0(r, n) +
               std::pow(r, n - 1) * r / ((1 - r) * (1 - r)) / ((n + 1.0) * lnb));
      break;
    }
    case PenaltyKind::table: {
      double steepest = *f.table_slope();
      const auto& vals = f.table_values();
      for (std::size_t k = 1; k < vals.size(); ++k)
        steepest = std::max(steepest, vals[k] - vals[k - 1]);
      out.tail_bound = c * (f(delta_cap + 1) * tail_sum0(r, n) +
                            steepest * std::pow(r, n - 1) * r / ((1 - r) * (1 - r)));
      break;
    }
  }
  return out;
}

double sp_expected_aoii_linear(double p, double q1, double alpha, double beta) {
  check_sp_params(p, q1);
  if (!(alpha >= 0.0) || !(beta >= 0.0))
    throw std::invalid_argument("sp_expected_aoii_linear: alpha and beta must be nonnegative");
  return alpha * p / ((p + q1 - 2 * q1 * p) * (q1 + 2 * p - 2 * q1 * p)) + beta;
}

double tp_expected_aoii_linear(double p, double q1, double alpha, double beta) {
  return sp_expected_aoii_linear(p, q1, alpha, beta);
}

double sp_stationary(const SourceModel& source, const DelayModel& delay, int delta) {
  return sp_stationary(source.flip_prob(), delay.hazard(1), delta);
}

CappedSum sp_expected_aoii(const SourceModel& source, const DelayModel& delay,
                           const PenaltyFunction& f, int delta_cap) {
  return sp_expected_aoii(source.flip_prob(), delay.hazard(1), f, delta_cap);
}

double sp_expected_aoii_linear(const SourceModel& source, const DelayModel& delay,
                               double alpha, double beta) {
  return sp_expected_aoii_linear(source.flip_prob(), delay.hazard(1), alpha, beta);
}

double tp_expected_aoii_linear(const SourceModel& source, const DelayModel& delay,
                               double alpha, double beta) {
  return tp_expected_aoii_linear(source.flip_prob(), delay.hazard(1), alpha, beta);
}

WpAggregates wp_aggregates(const SourceModel& source, const DelayModel& delay) {
  if (!delay.bounded())
    throw std::invalid_argument("wp_aggregates: the aggregate recursions need a bounded delay");
  const int t_max = *delay.t_max();
  const double p = source.flip_prob();
  const double q1 = delay.hazard(1);

  // survive[t] = prod_{l=1..t} (1 - q_l)(1 - p), survive[0] = 1.
  std::vector<double> survive(static_cast<std::size_t>(t_max), 1.0);
  for (int t = 1; t <= t_max - 1; ++t)
    survive[static_cast<std::size_t>(t)] =
        survive[static_cast<std::size_t>(t - 1)] * (1 - delay.hazard(t)) * (1 - p);

  double hazard_weighted = 0.0, survive_total = 0.0;
  for (int t = 1; t <= t_max - 1; ++t) {
    hazard_weighted += delay.hazard(t + 1) * survive[static_cast<std::size_t>(t)];
    survive_total += survive[static_cast<std::size_t>(t)];
  }

  WpAggregates agg;
  agg.Pi = 1.0 / (1.0 / p - q1 - hazard_weighted + 1.0 + survive_total);
  agg.Pi_t.resize(static_cast<std::size_t>(t_max - 1));
  double mass = agg.Pi;
  for (int t = 1; t <= t_max - 1; ++t) {
    agg.Pi_t[static_cast<std::size_t>(t - 1)] = survive[static_cast<std::size_t>(t)] * agg.Pi;
    mass += agg.Pi_t[static_cast<std::size_t>(t - 1)];
  }
  agg.pi0 = 1.0 - mass;
  return agg;
}

double wp_expected_aoii_linear(const SourceModel& source, const DelayModel& delay,
                               double alpha, double beta) {
  if (!(alpha >= 0.0) || !(beta >= 0.0))
    throw std::invalid_argument("wp_expected_aoii_linear: alpha and beta must be nonnegative");
  const WpAggregates agg = wp_aggregates(source, delay);
  const int t_max = *delay.t_max();
  const double p = source.flip_prob();
  const double q1 = delay.hazard(1);

  std::vector<double> step(static_cast<std::size_t>(t_max), 0.0);  // step[t] = (1 - q_t)(1 - p)
  for (int t = 1; t <= t_max - 1; ++t)
    step[static_cast<std::size_t>(t)] = (1 - delay.hazard(t)) * (1 - p);

  // inner[t] = sum_{i=1..t} prod_{j=i+1..t} step_j * Pi(i); empty products are 1.
  std::vector<double> inner(static_cast<std::size_t>(t_max), 0.0);
  std::vector<double> survive(static_cast<std::size_t>(t_max), 1.0);
  for (int t = 1; t <= t_max - 1; ++t) {
    survive[static_cast<std::size_t>(t)] =
        survive[static_cast<std::size_t>(t - 1)] * step[static_cast<std::size_t>(t)];
    double acc = 0.0, suffix = 1.0;
    for (int i = t; i >= 1; --i) {
      acc += suffix * agg.Pi_t[static_cast<std::size_t>(i - 1)];
      suffix *= step[static_cast<std::size_t>(i)];
    }
    inner[static_cast<std::size_t>(t)] = acc;
  }

  // The first-moment recursion weights each in-flight age by its delivery
  // hazard q_{t+1}.  (The first term's weight is q_1 = p_1.)
  double numer = agg.Pi, denom = 1.0 - q1 * p;
  for (int t = 1; t <= t_max - 1; ++t) {
    numer += delay.hazard(t + 1) * p * inner[static_cast<std::size_t>(t)];
    denom -= delay.hazard(t + 1) * p * survive[static_cast<std::size_t>(t)];
  }
  const double sigma = numer / denom;

  double total = sigma;
  for (int t = 1; t <= t_max - 1; ++t)
    total += survive[static_cast<std::size_t>(t)] * sigma + inner[static_cast<std::size_t>(t)];
  return alpha * total + beta;
}

ThresholdCondition check_condition1(const SourceModel& source, const DelayModel& delay) {
  if (!delay.bounded())
    throw std::invalid_argument("check_condition1: bounded delay required");
  const int t_max = *delay.t_max();
  if (t_max < 2)
    throw std::invalid_argument("check_condition1: t_max must be at least 2");

  ThresholdCondition rep;
  rep.t_max = t_max;
  rep.p = source.flip_prob();
  rep.q1 = delay.hazard(1);
  rep.q_before_last = delay.hazard(t_max - 1);

  rep.hazard_monotone = true;
  for (int t = 1; t <= t_max - 2; ++t)
    if (delay.hazard(t) > rep.q1) rep.hazard_monotone = false;

  const double p = rep.p, q1 = rep.q1, qm = rep.q_before_last;
  rep.Q1 = (qm - qm * p - p) + (1 - qm) * p * (q1 + 2 * p - 2 * q1 * p) * (q1 + 2 * p - 2 * q1 * p);
  rep.Q2 = (1 - 2 * p) * ((q1 - 1) + (1 - qm) * (p + q1 * (1 - p))) / (q1 + p - 2 * q1 * p);
  rep.Q3 = ((1 - q1) * (2 * p - 1) - p * (1 - qm)) /
               ((2 * p + q1 - 2 * q1 * p) * (p + q1 - 2 * q1 * p)) +
           (1 - qm) * (1 - p) * p / (q1 + p - 2 * q1 * p) + (1 - qm) * (1 - p) + rep.Q2;

  rep.satisfied =
      rep.hazard_monotone && (t_max < 3 || (rep.Q1 >= 0.0 && rep.Q2 >= 0.0 && rep.Q3 >= 0.0));
  return rep;
}

}  // namespace aoii
