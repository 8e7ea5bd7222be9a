#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "tpp/apps/conga.hpp"
#include "tpp/apps/history.hpp"
#include "tpp/apps/microburst.hpp"
#include "tpp/apps/rcp.hpp"
#include "tpp/apps/sketch.hpp"
#include "tpp/exec.hpp"
#include "tpp/memmap.hpp"

using namespace tpp;

TEST_CASE("the rate equation is stationary at full, queue-free utilization") {
  RcpParams prm;
  double C = 100e6;
  CHECK(rcp_compute_rate(50e6, C, 0, C, prm.period_s, prm) == doctest::Approx(50e6));
  // Under-utilized: the rate grows.
  CHECK(rcp_compute_rate(50e6, 0.5 * C, 0, C, prm.period_s, prm) > 50e6);
  // Standing queue at full utilization: the rate backs off.
  CHECK(rcp_compute_rate(50e6, C, 1e6, C, prm.period_s, prm) < 50e6);
  // Clamps: never below 1% of capacity, never above capacity.
  CHECK(rcp_compute_rate(1e4, 10 * C, 1e9, C, prm.period_s, prm) == doctest::Approx(0.01 * C));
  CHECK(rcp_compute_rate(C, 0, 0, C, prm.period_s, prm) == doctest::Approx(C));
}

TEST_CASE("iterating the rate equation converges to capacity for one flow") {
  RcpParams prm;
  double C = 100e6, rate = 1e6;
  for (int i = 0; i < 400; ++i) rate = rcp_compute_rate(rate, rate, 0, C, prm.period_s, prm);
  CHECK(rate == doctest::Approx(C).epsilon(0.02));
}

TEST_CASE("alpha-fair aggregation spans min to nearly-min") {
  std::vector<double> rates = {50e6, 100e6};
  double inf = std::numeric_limits<double>::infinity();
  CHECK(alpha_fair_aggregate(rates, inf) == doctest::Approx(50e6));
  // alpha = 1 is the harmonic combination: 1/R = 1/R1 + 1/R2.
  CHECK(alpha_fair_aggregate(rates, 1.0) == doctest::Approx(1.0 / (1.0 / 50e6 + 1.0 / 100e6)));
  // Larger alpha moves the aggregate toward the bottleneck rate.
  CHECK(alpha_fair_aggregate(rates, 4.0) > alpha_fair_aggregate(rates, 1.0));
  CHECK(alpha_fair_aggregate(rates, 4.0) < alpha_fair_aggregate(rates, inf));
  // A single link is its own aggregate at any alpha.
  std::vector<double> one = {30e6};
  CHECK(alpha_fair_aggregate(one, 1.0) == doctest::Approx(30e6));
  CHECK(alpha_fair_aggregate(one, inf) == doctest::Approx(30e6));
}

TEST_CASE("collection probes bring back one record per executed hop") {
  testing::Bench b;
  TppProgram p = rcp_collect_program(4);
  execute_tpp(b.ctx, p);
  p.header.hop_index += 1;
  auto samples = rcp_parse_collect(p);
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].switch_id == 3);
  CHECK(samples[0].tx_util == 4242);
  CHECK(samples[0].version == 5);  // [Link:AppSpecific_0] seeded by the bench
}

TEST_CASE("the update program races the version word then writes the rate") {
  std::vector<RcpHopUpdate> ups = {{5, 6, 40000}};
  TppProgram p = rcp_update_program(ups);
  REQUIRE(p.instructions.size() == 2);
  CHECK(p.instructions[0].op == Opcode::Cstore);
  CHECK(p.instructions[1].op == Opcode::Store);
  CHECK(p.mem_word(0) == 5);
  CHECK(p.mem_word(2) == 6);
  CHECK(p.mem_word(4) == 40000);

  testing::Bench winner;  // link 1 starts at version 5
  TppProgram w = p;
  execute_tpp(winner.ctx, w);
  CHECK(winner.sw.links[1].app_specific0 == 6);
  CHECK(winner.sw.links[1].app_specific1 == 40000);

  TppProgram l = p;  // a second updater with the same expected version loses
  ExecutionTrace tr = execute_tpp(winner.ctx, l);
  CHECK(tr.records[1].skip == SkipReason::CondFailed);
  CHECK(winner.sw.links[1].app_specific1 == 40000);
  CHECK(l.mem_word(0) == 6);  // the loser learns the current version
}

TEST_CASE("path metrics pick the least congested path, ties to the lowest") {
  std::vector<CongaHopSample> hops = {{1, 100, 0}, {2, 900, 0}, {3, 400, 0}};
  CHECK(conga_metric(hops, true) == 900);
  CHECK(conga_metric(hops, false) == 1400);
  std::vector<double> m1 = {3.0, 1.0, 2.0};
  CHECK(conga_select(m1) == 1);
  std::vector<double> m2 = {2.0, 1.0, 1.0};
  CHECK(conga_select(m2) == 1);
  std::vector<double> m3 = {7.0};
  CHECK(conga_select(m3) == 0);
}

TEST_CASE("probe parsing skips unexecuted hop regions") {
  TppProgram p = conga_probe_program(6);
  p.set_mem_word(0, 2);      // hop 0 executed: link 2, util 1234
  p.set_mem_word(2, 1234);
  p.set_mem_word(4, 99);
  auto samples = conga_parse_probe(p);
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].link_id == 2);
  CHECK(samples[0].tx_util == 1234);
}

TEST_CASE("histories stop at the first unexecuted hop and catch loops") {
  testing::Bench a, b;
  a.sw.switch_id = 1;
  b.sw.switch_id = 2;
  TppProgram p = history_program(4);
  execute_tpp(a.ctx, p);
  p.header.hop_index += 1;
  execute_tpp(b.ctx, p);
  p.header.hop_index += 1;

  auto hist = build_history(p);
  REQUIRE(hist.size() == 2);
  CHECK(hist[0].switch_id == 1);
  CHECK(hist[1].switch_id == 2);
  CHECK(hist[0].matched_entry_id == 9);

  CHECK(netwatch_check(hist, {{1, 2}, false}));
  CHECK_FALSE(netwatch_check(hist, {{1, 3}, false}));
  CHECK_FALSE(netwatch_check(hist, {{1}, false}));   // too long for the expectation
  CHECK(netwatch_check({hist[0]}, {{1, 2}, true}));  // prefix allowed
  CHECK_FALSE(netwatch_check({hist[0]}, {{1, 2}, false}));

  auto loop = hist;
  loop.push_back(hist[0]);  // revisits switch 1
  CHECK_FALSE(netwatch_check(loop, {{1, 2, 1}, false}));
}

TEST_CASE("burst summaries count maximal runs above the threshold") {
  std::vector<QueueReport> samples = {
      {1, 10, 0}, {1, 600, 0}, {1, 700, 0}, {1, 20, 0}, {1, 800, 0}, {2, 900, 0}};
  BurstSummary s = summarize_bursts(samples, 1, 500);
  CHECK(s.samples == 5);
  CHECK(s.bursts == 2);
  CHECK(s.peak == 800);
  BurstSummary quiet = summarize_bursts(samples, 3, 500);
  CHECK(quiet.samples == 0);
  CHECK(quiet.bursts == 0);
}

TEST_CASE("the bitmap sketch estimates small cardinalities within tolerance") {
  std::mt19937_64 rng(1);
  for (std::size_t n : {10u, 50u, 200u}) {
    double err_sum = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
      BitmapSketch sk(1024, 7);
      std::set<uint64_t> uniq;
      while (uniq.size() < n) uniq.insert(rng());
      for (uint64_t k : uniq) sk.add(k);
      err_sum += std::abs(sk.estimate() - double(n)) / double(n);
    }
    CHECK(err_sum / trials <= 0.15);
  }
}

TEST_CASE("adding a duplicate key never changes the sketch") {
  BitmapSketch sk(256, 3);
  sk.add(42);
  BitmapSketch before = sk;
  sk.add(42);
  CHECK(sk == before);
}

TEST_CASE("merging sketches is exactly the bitwise OR of their bitmaps") {
  std::mt19937_64 rng(9);
  BitmapSketch a(512, 11), b(512, 11), u(512, 11);
  for (int i = 0; i < 300; ++i) {
    uint64_t k = rng();
    if (i % 2 == 0) a.add(k); else b.add(k);
    u.add(k);
  }
  BitmapSketch merged = a;
  merged.merge(b);
  CHECK(merged == u);
  for (std::size_t w = 0; w < merged.words().size(); ++w)
    CHECK(merged.words()[w] == (a.words()[w] | b.words()[w]));

  BitmapSketch other_seed(512, 12);
  try {
    merged.merge(other_seed);
    FAIL("merged sketches with different hash seeds");
  } catch (const TppError& e) {
    CHECK(e.code() == Errc::ConfigError);
  }
}
