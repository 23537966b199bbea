#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "aoii/analytic.hpp"
#include "aoii/solvers.hpp"

using namespace aoii;

namespace {

// Stationary masses of the weak-preemptive chain grouped the same way the
// aggregate recursions group them, straight from the numeric chain.
struct GroupedWp {
  double pi0 = 0.0;
  double Pi = 0.0;
  std::vector<double> Pi_t;
};

GroupedWp grouped_oracle(const SourceModel& src, const DelayModel& d, int delta_max) {
  TruncatedMdp mdp(src, d, PenaltyFunction::linear(1, 0),
                   TruncationConfig::defaults_for(d, delta_max));
  auto pi = stationary_distribution(mdp, Policy::weak_preemptive(), 1e-13);
  GroupedWp g;
  g.Pi_t.assign(static_cast<std::size_t>(*d.t_max() - 1), 0.0);
  for (int k = 0; k < mdp.num_states(); ++k) {
    State s = mdp.indexer().state_at(k);
    if (s.delta == 0)
      g.pi0 += pi[static_cast<std::size_t>(k)];
    else if (s.i == 1)
      g.Pi_t[static_cast<std::size_t>(s.t - 1)] += pi[static_cast<std::size_t>(k)];
    else
      g.Pi += pi[static_cast<std::size_t>(k)];
  }
  return g;
}

}  // namespace

TEST_CASE("unit-delay stationary law collapses to p^delta (1-p)") {
  CHECK(sp_stationary(0.3, 1.0, 0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(sp_stationary(0.3, 1.0, 1) == doctest::Approx(0.21).epsilon(1e-15));
  CHECK(sp_stationary(0.3, 1.0, 2) == doctest::Approx(0.063).epsilon(1e-15));
}

TEST_CASE("strong preemptive stationary values at p=0.3, q1=0.7") {
  CHECK(sp_stationary(0.3, 0.7, 0) == doctest::Approx(0.58 / 0.88).epsilon(1e-15));
  CHECK(sp_stationary(0.3, 0.7, 1) == doctest::Approx(0.174 / 0.88).epsilon(1e-15));
}

TEST_CASE("strong preemptive stationary law is normalized") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    double p = 0.01 + 0.48 * U(gen);
    double q1 = 0.01 + 0.99 * U(gen);
    double r = 1 - q1 - p + 2 * q1 * p;
    // pi(0) + sum_{d>=1} pi(d) with the geometric tail summed analytically
    double total = sp_stationary(p, q1, 0) + sp_stationary(p, q1, 1) / (1 - r);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(sp_stationary(0.6, 0.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(sp_stationary(0.3, 0.0, 0), std::invalid_argument);
}

TEST_CASE("linear closed form at p=0.3, q1=0.7") {
  CHECK(sp_expected_aoii_linear(0.3, 0.7, 1, 0) ==
        doctest::Approx(0.3 / (0.58 * 0.88)).epsilon(1e-15));
  // unit delay: alpha p / (1 - p) + beta
  CHECK(sp_expected_aoii_linear(0.3, 1.0, 2, 1) ==
        doctest::Approx(2 * 0.3 / 0.7 + 1).epsilon(1e-14));
  CHECK(sp_expected_aoii_linear(0.3, 0.4, 0, 5) == 5.0);
}

TEST_CASE("capped sum with tail bound brackets the linear closed form") {
  for (double p : {0.05, 0.3, 0.45}) {
    for (double q1 : {0.2, 0.7, 1.0}) {
      for (int cap : {5, 40, 500}) {
        auto got = sp_expected_aoii(p, q1, PenaltyFunction::linear(1.0, 0.5), cap);
        double exact = sp_expected_aoii_linear(p, q1, 1.0, 0.5);
        CHECK(got.value <= exact + 1e-12);
        CHECK(exact <= got.value + got.tail_bound + 1e-12);
      }
    }
  }
}

TEST_CASE("capped sum of a constant penalty returns the constant") {
  auto got = sp_expected_aoii(0.3, 0.7, PenaltyFunction::linear(0.0, 2.5), 500);
  CHECK(got.value == doctest::Approx(2.5).epsilon(1e-13));
  CHECK(got.tail_bound < 1e-12);
}

TEST_CASE("quadratic capped sum matches the stationary chain") {
  auto d = DelayModel::geometric(0.9);
  TruncatedMdp mdp(SourceModel(0.1), d, PenaltyFunction::quadratic(1.0),
                   TruncationConfig::defaults_for(d, 300));
  auto pi = stationary_distribution(mdp, Policy::strong_preemptive(), 1e-14);
  double oracle = expected_cost(mdp, pi);
  auto got = sp_expected_aoii(0.1, 0.9, PenaltyFunction::quadratic(1.0), 300);
  CHECK(got.value == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("log and table tails are bounded and shrink with the cap") {
  auto log_small = sp_expected_aoii(0.3, 0.5, PenaltyFunction::logarithmic(2.0), 50);
  auto log_large = sp_expected_aoii(0.3, 0.5, PenaltyFunction::logarithmic(2.0), 200);
  CHECK(log_large.tail_bound < log_small.tail_bound);
  CHECK(log_large.value + log_large.tail_bound >= log_small.value);

  auto tab = sp_expected_aoii(0.3, 0.5, PenaltyFunction::table({0, 1, 3}, 1.0), 100);
  CHECK(tab.tail_bound >= 0.0);
  CHECK_THROWS_AS(sp_expected_aoii(0.3, 0.5, PenaltyFunction::table({0, 1, 3}), 100),
                  std::invalid_argument);
}

TEST_CASE("two-slot uniform delay aggregates") {
  SourceModel src(0.2);
  auto d = DelayModel::explicit_pmf({0.5, 0.5});
  auto agg = wp_aggregates(src, d);
  CHECK(agg.Pi == doctest::Approx(2.0 / 11).epsilon(1e-14));
  REQUIRE(agg.Pi_t.size() == 1);
  CHECK(agg.Pi_t[0] == doctest::Approx(0.4 * 2.0 / 11).epsilon(1e-14));
  CHECK(agg.pi0 == doctest::Approx(8.2 / 11).epsilon(1e-14));
}

TEST_CASE("aggregates always normalize") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int rep = 0; rep < 60; ++rep) {
    int tm = 2 + static_cast<int>(gen() % 7);
    std::vector<double> w(static_cast<std::size_t>(tm));
    double sum = 0.0;
    for (auto& x : w) {
      x = U(gen) + 1e-3;
      sum += x;
    }
    for (auto& x : w) x /= sum;
    SourceModel src(0.02 + 0.45 * U(gen));
    auto agg = wp_aggregates(src, DelayModel::explicit_pmf(w));
    double total = agg.pi0 + agg.Pi;
    for (double x : agg.Pi_t) total += x;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(wp_aggregates(SourceModel(0.3), DelayModel::geometric(0.5)),
                  std::invalid_argument);
}

TEST_CASE("aggregates match the grouped stationary chain") {
  SourceModel src(0.3);
  auto d = DelayModel::zipf(1.0, 5);
  auto agg = wp_aggregates(src, d);
  auto g = grouped_oracle(src, d, 400);
  CHECK(agg.pi0 == doctest::Approx(g.pi0).epsilon(1e-8));
  CHECK(agg.Pi == doctest::Approx(g.Pi).epsilon(1e-8));
  REQUIRE(agg.Pi_t.size() == g.Pi_t.size());
  for (std::size_t k = 0; k < g.Pi_t.size(); ++k)
    CHECK(agg.Pi_t[k] == doctest::Approx(g.Pi_t[k]).epsilon(1e-8));
}

TEST_CASE("weak preemptive linear value matches the stationary chain") {
  SourceModel src(0.2);
  auto d = DelayModel::explicit_pmf({0.5, 0.5});
  TruncatedMdp mdp(src, d, PenaltyFunction::linear(1, 0),
                   TruncationConfig::defaults_for(d, 400));
  auto pi = stationary_distribution(mdp, Policy::weak_preemptive(), 1e-13);
  double oracle = expected_cost(mdp, pi);
  CHECK(wp_expected_aoii_linear(src, d, 1, 0) == doctest::Approx(oracle).epsilon(1e-8));
  CHECK(wp_expected_aoii_linear(src, d, 0, 3.5) == 3.5);
}

TEST_CASE("unit delay makes weak and strong preemption coincide") {
  SourceModel src(0.3);
  auto d = DelayModel::deterministic(1);
  CHECK(wp_expected_aoii_linear(src, d, 1.0, 0.25) ==
        doctest::Approx(sp_expected_aoii_linear(0.3, 1.0, 1.0, 0.25)).epsilon(1e-14));
}

TEST_CASE("hazard-weighted first-moment recursion matches the chain; pmf-weighted does not") {
  // The denominator/numerator weights of the first-moment recursion must be
  // the delivery hazards q_{t+1}.  Weighting by the raw pmf values p_{t+1}
  // (an easy slip since p_1 = q_1) lands several percent off the chain.
  SourceModel src(0.3);
  auto d = DelayModel::zipf(1.0, 3);
  TruncatedMdp mdp(src, d, PenaltyFunction::linear(1, 0),
                   TruncationConfig::defaults_for(d, 400));
  auto pi = stationary_distribution(mdp, Policy::weak_preemptive(), 1e-13);
  double oracle = expected_cost(mdp, pi);

  CHECK(wp_expected_aoii_linear(src, d, 1, 0) == doctest::Approx(oracle).epsilon(1e-8));

  auto agg = wp_aggregates(src, d);
  const double p = src.flip_prob();
  int tm = *d.t_max();
  std::vector<double> step(static_cast<std::size_t>(tm), 0.0);
  for (int t = 1; t <= tm - 1; ++t) step[static_cast<std::size_t>(t)] = (1 - d.hazard(t)) * (1 - p);
  double numer = agg.Pi, denom = 1.0 - d.pmf(1) * p;
  double survive = 1.0;
  for (int t = 1; t <= tm - 1; ++t) {
    survive *= step[static_cast<std::size_t>(t)];
    double inner = 0.0, suffix = 1.0;
    for (int i = t; i >= 1; --i) {
      inner += suffix * agg.Pi_t[static_cast<std::size_t>(i - 1)];
      suffix *= step[static_cast<std::size_t>(i)];
    }
    numer += d.pmf(t + 1) * p * inner;
    denom -= d.pmf(t + 1) * p * survive;
  }
  double sigma = numer / denom;
  double pmf_variant = sigma;
  survive = 1.0;
  for (int t = 1; t <= tm - 1; ++t) {
    survive *= step[static_cast<std::size_t>(t)];
    double inner = 0.0, suffix = 1.0;
    for (int i = t; i >= 1; --i) {
      inner += suffix * agg.Pi_t[static_cast<std::size_t>(i - 1)];
      suffix *= step[static_cast<std::size_t>(i)];
    }
    pmf_variant += survive * sigma + inner;
  }
  CHECK(std::abs(pmf_variant - oracle) / oracle > 0.01);
}

TEST_CASE("threshold and strong preemptive linear values are identical") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    double p = 0.01 + 0.48 * U(gen);
    double q1 = 0.01 + 0.99 * U(gen);
    double alpha = 2 * U(gen), beta = U(gen);
    CHECK(tp_expected_aoii_linear(p, q1, alpha, beta) ==
          sp_expected_aoii_linear(p, q1, alpha, beta));
  }
}

TEST_CASE("threshold optimality condition over the published grid") {
  auto sweep = [](double a) {
    int pass = 0, total = 0;
    for (int tm = 3; tm <= 11; ++tm) {
      for (int pk = 1; pk <= 9; ++pk) {
        auto rep = check_condition1(SourceModel(0.05 * pk), DelayModel::zipf(a, tm));
        pass += rep.satisfied ? 1 : 0;
        ++total;
      }
    }
    return std::pair{pass, total};
  };
  auto a1 = sweep(1.0);
  CHECK(a1.first == 0);
  auto a3 = sweep(3.0);
  CHECK(a3.first == a3.second);
  auto mid = sweep(2.25);
  CHECK(mid.first > 0);
  CHECK(mid.first < mid.second);
}

TEST_CASE("two-slot bound satisfies the condition unconditionally") {
  for (double p : {0.05, 0.25, 0.45}) {
    for (double q1 : {0.1, 0.5, 0.9}) {
      auto rep = check_condition1(SourceModel(p), DelayModel::explicit_pmf({q1, 1 - q1}));
      CHECK(rep.t_max == 2);
      CHECK(rep.satisfied);
    }
  }
  CHECK_THROWS_AS(check_condition1(SourceModel(0.3), DelayModel::geometric(0.5)),
                  std::invalid_argument);
}

TEST_CASE("Q2 simplification agrees with its unsimplified form") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    double p = 0.01 + 0.48 * U(gen);
    double q1 = 0.01 + 0.98 * U(gen);
    double qm = 0.01 + 0.98 * U(gen);
    double sigma = 1.0 / (q1 + p - 2 * q1 * p);
    double raw = ((1 - q1) * (2 * p - 1) - p * p * (1 - qm)) * sigma + (1 - qm) * (1 - p);
    double printed = (1 - 2 * p) * ((q1 - 1) + (1 - qm) * (p + q1 * (1 - p))) / (q1 + p - 2 * q1 * p);
    CHECK(printed == doctest::Approx(raw).epsilon(1e-11));
  }
}

TEST_CASE("Q3 equals the improvement gap at the first stale level") {
  // Q3 is the value-difference expression of the one-step lookahead gap at
  // (1, t_max-2, 1) evaluated through theta and sigma; both routes must agree.
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    double p = 0.01 + 0.48 * U(gen);
    double q1 = 0.01 + 0.98 * U(gen);
    double qm = 0.01 + 0.98 * U(gen);
    double sigma = 1.0 / (q1 + p - 2 * q1 * p);
    double theta = p / ((p + q1 - 2 * q1 * p) * (q1 + 2 * p - 2 * q1 * p));
    double q2coef = ((1 - q1) * (2 * p - 1) - p * p * (1 - qm)) * sigma + (1 - qm) * (1 - p);
    double gap_at_1 = ((1 - q1) * (2 * p - 1) - p * (1 - qm)) / p * theta +
                      (1 - qm) * (1 - p) * 2.0 +
                      (((1 - q1) * (2 * p - 1) - p * p * (1 - qm)) * 1.0 +
                       (1 - qm) * (1 - p) * p) *
                          sigma;
    // regroup: coefficient form used by the report
    double q3 = ((1 - q1) * (2 * p - 1) - p * (1 - qm)) /
                    ((2 * p + q1 - 2 * q1 * p) * (p + q1 - 2 * q1 * p)) +
                (1 - qm) * (1 - p) * p / (q1 + p - 2 * q1 * p) + (1 - qm) * (1 - p) + q2coef;
    CHECK(q3 == doctest::Approx(gap_at_1).epsilon(1e-10));
  }
}
