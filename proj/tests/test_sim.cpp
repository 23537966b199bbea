#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "aoii/analytic.hpp"
#include "aoii/sim.hpp"
#include "aoii/solvers.hpp"
#include "aoii/transitions.hpp"

using namespace aoii;

TEST_CASE("identical seeds replay identical runs") {
  SourceModel src(0.3);
  auto d = DelayModel::geometric(0.6);
  auto f = PenaltyFunction::linear(1, 0);
  SimConfig cfg{20000, 100, 42, true};
  auto a = simulate(src, d, f, Policy::weak_preemptive(), cfg);
  auto b = simulate(src, d, f, Policy::weak_preemptive(), cfg);
  CHECK(a.avg_penalty == b.avg_penalty);
  CHECK(a.deliveries == b.deliveries);
  CHECK(a.preemptions == b.preemptions);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    CHECK(a.trace[k].delta == b.trace[k].delta);
    CHECK(a.trace[k].a == b.trace[k].a);
    CHECK(a.trace[k].d == b.trace[k].d);
  }
}

TEST_CASE("constant penalties average to the constant exactly") {
  auto res = simulate(SourceModel(0.3), DelayModel::geometric(0.6),
                      PenaltyFunction::linear(0, 1.25), Policy::strong_preemptive(),
                      {50000, 0, 7, false});
  CHECK(res.avg_penalty == 1.25);
  CHECK(res.deliveries <= res.slots);
}

TEST_CASE("empty sample path") {
  auto trace = sample_path(SourceModel(0.3), DelayModel::geometric(0.6),
                           PenaltyFunction::linear(1, 0), Policy::strong_preemptive(), 0, 1);
  CHECK(trace.empty());
}

TEST_CASE("unit-delay staircase steps by two or resets") {
  auto trace = sample_path(SourceModel(0.3), DelayModel::deterministic(1),
                           PenaltyFunction::linear(2, 0), Policy::strong_preemptive(), 5000, 9);
  for (std::size_t k = 1; k < trace.size(); ++k) {
    double prev = 2.0 * static_cast<double>(trace[k - 1].delta);
    double cur = 2.0 * static_cast<double>(trace[k].delta);
    bool ok = cur == 0.0 || cur == prev + 2.0;
    CHECK(ok);
  }
}

TEST_CASE("the estimate is wrong exactly while the AoII is positive") {
  auto trace = sample_path(SourceModel(0.35), DelayModel::zipf(1.0, 4),
                           PenaltyFunction::linear(1, 0), Policy::weak_preemptive(), 20000, 4);
  for (const TraceRow& r : trace) CHECK((r.delta == 0) == (r.x == r.xhat));
}

TEST_CASE("long-run average matches the closed form within three sigmas") {
  auto res = simulate(SourceModel(0.3), DelayModel::geometric(0.7),
                      PenaltyFunction::linear(1, 0), Policy::strong_preemptive(),
                      {1000000, 10000, 2024, false});
  double target = sp_expected_aoii_linear(0.3, 0.7, 1, 0);
  CHECK(std::abs(res.avg_penalty - target) <= 3.0 * res.std_error);
  CHECK(res.std_error > 0.0);
}

TEST_CASE("threshold policy simulation matches its closed form within three sigmas") {
  auto d = DelayModel::zipf(3.0, 5);
  auto res = simulate(SourceModel(0.35), d, PenaltyFunction::linear(1, 0),
                      Policy::threshold_preemptive(5), {1000000, 10000, 515, false});
  double target = tp_expected_aoii_linear(0.35, d.hazard(1), 1, 0);
  CHECK(std::abs(res.avg_penalty - target) <= 3.0 * res.std_error);
}

TEST_CASE("weak preemptive simulation matches its closed form within three sigmas") {
  SourceModel src(0.3);
  auto d = DelayModel::zipf(1.0, 4);
  auto res = simulate(src, d, PenaltyFunction::linear(1, 0), Policy::weak_preemptive(),
                      {1000000, 10000, 616, false});
  double target = wp_expected_aoii_linear(src, d, 1, 0);
  CHECK(std::abs(res.avg_penalty - target) <= 3.0 * res.std_error);
}

TEST_CASE("lazy baseline simulation matches its evaluated average cost") {
  SourceModel src(0.3);
  auto d = DelayModel::geometric(0.6);
  TruncatedMdp mdp(src, d, PenaltyFunction::linear(1, 0),
                   TruncationConfig::defaults_for(d, 200));
  double theta = policy_evaluation(mdp, Policy::lazy_threshold()).theta;
  auto res = simulate(src, d, PenaltyFunction::linear(1, 0), Policy::lazy_threshold(),
                      {1000000, 10000, 717, false});
  CHECK(std::abs(res.avg_penalty - theta) <= 3.0 * res.std_error);
}

TEST_CASE("threshold and strong preemption walk the same path under shared draws") {
  SourceModel src(0.35);
  auto d = DelayModel::zipf(3.0, 5);
  auto f = PenaltyFunction::linear(1, 0);
  SimConfig cfg{200000, 0, 77, true};
  auto a = simulate(src, d, f, Policy::strong_preemptive(), cfg);
  auto b = simulate(src, d, f, Policy::threshold_preemptive(5), cfg);
  CHECK(a.avg_penalty == b.avg_penalty);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    CHECK(a.trace[k].delta == b.trace[k].delta);
    CHECK(a.trace[k].a == b.trace[k].a);
  }
}

TEST_CASE("hazard-resolved delivery reproduces the transmission-time pmf") {
  // Draw transmission times via successive hazards and chi-square them
  // against the pmf.  Frozen 1% critical points: 15.086 at 5 dof, 24.725 at
  // 11 dof.
  auto draw_chi2 = [](const DelayModel& d, int cells, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    auto uniform = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    const int n = 1000000;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(cells), 0);
    for (int k = 0; k < n; ++k) {
      int t = 1;
      while (uniform() >= d.hazard(t) && t < 100000) ++t;
      ++counts[static_cast<std::size_t>(std::min(t, cells) - 1)];
    }
    double chi2 = 0.0;
    for (int c = 1; c <= cells; ++c) {
      double expect;
      if (c < cells) {
        expect = d.pmf(c) * n;
      } else {
        double tail = 1.0;
        for (int t = 1; t < cells; ++t) tail -= d.pmf(t);
        expect = tail * n;
      }
      double diff = static_cast<double>(counts[static_cast<std::size_t>(c - 1)]) - expect;
      chi2 += diff * diff / expect;
    }
    return chi2;
  };

  CHECK(draw_chi2(DelayModel::zipf(2.0, 6), 6, 1234) < 15.086);
  CHECK(draw_chi2(DelayModel::geometric(0.4), 12, 5678) < 24.725);
}

TEST_CASE("a bernoulli policy produces a runnable trace") {
  auto trace = sample_path(SourceModel(0.3), DelayModel::geometric(0.5),
                           PenaltyFunction::linear(1, 0), Policy::bernoulli(0.5), 2000, 3);
  CHECK(trace.size() == 2000);
  bool transmitted = false, stayed = false;
  for (const TraceRow& r : trace) {
    if (r.a == 1) transmitted = true;
    if (r.a == 0) stayed = true;
  }
  CHECK(transmitted);
  CHECK(stayed);
}

TEST_CASE("empirical transitions sit on the exact two-successor support for unit delay") {
  auto report = empirical_kernel_check(SourceModel(0.3), DelayModel::deterministic(1),
                                       Policy::strong_preemptive(), 200000, 11, 1000);
  CHECK(!report.empty());
  for (const auto& e : report) {
    CHECK(e.tv_distance < 0.02);
    auto exact = transitions(SourceModel(0.3), DelayModel::deterministic(1), e.s, e.a);
    CHECK(exact.size() == 2);
  }
}

TEST_CASE("zero slots produce an empty kernel report") {
  auto report = empirical_kernel_check(SourceModel(0.3), DelayModel::geometric(0.5),
                                       Policy::strong_preemptive(), 0, 1);
  CHECK(report.empty());
}

TEST_CASE("trace csv round-trips its rows") {
  auto trace = sample_path(SourceModel(0.3), DelayModel::geometric(0.5),
                           PenaltyFunction::linear(1, 0), Policy::strong_preemptive(), 10, 2);
  std::ostringstream os;
  write_trace_csv(os, trace);
  std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 11);
  CHECK(text.rfind("k,x,xhat,delta,a,t,i,d", 0) == 0);
}

TEST_CASE("simulate rejects degenerate horizons") {
  CHECK_THROWS_AS(simulate(SourceModel(0.3), DelayModel::geometric(0.5),
                           PenaltyFunction::linear(1, 0), Policy::strong_preemptive(),
                           {100, 100, 1, false}),
                  std::invalid_argument);
}
