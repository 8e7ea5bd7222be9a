// End-to-end acceptance checks.  Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "tpp/analyzer.hpp"
#include "tpp/apps/history.hpp"
#include "tpp/apps/microburst.hpp"
#include "tpp/apps/rcp.hpp"
#include "tpp/apps/sketch.hpp"
#include "tpp/endhost.hpp"
#include "tpp/exec.hpp"
#include "tpp/experiments.hpp"
#include "tpp/memmap.hpp"
#include "tpp/sim.hpp"

using namespace tpp;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("%s  criterion %2d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string outdir(const std::string& leaf) {
  auto dir = std::filesystem::path("acceptance_out") / leaf;
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// --- 1. encoding arithmetic -------------------------------------------------

void criterion_1() {
  // Per-hop queue monitor: switch id, port number, queue size.
  TppProgram monitor = testing::make_program(
      {make_push(addr::kSwitchId), make_push(addr::kMetaOutputPort),
       make_push(addr::kCurrentQueueBase + addr::kQueueOccupancy)},
      3, 5);
  std::size_t monitor_bytes = encode(monitor).size();

  TppProgram ndb = history_program(10);
  std::size_t ndb_bytes = encode(ndb).size();

  report(1, monitor_bytes == 54 && ndb_bytes == 84,
         "monitor TPP for 5 hops = " + std::to_string(monitor_bytes) +
             " bytes (want 54); path-history TPP for 10 hops = " + std::to_string(ndb_bytes) +
             " bytes (want 84)");
}

// --- 2/3. explicit rate control ----------------------------------------------

void criterion_rcp(int criterion, const std::string& name) {
  ExperimentResult r = run_experiment(name, outdir(name), 1, 30.0);
  std::ostringstream os;
  os << name << ": a=" << fmt(r.metrics["flow_a_mbps"]) << " b=" << fmt(r.metrics["flow_b_mbps"])
     << " c=" << fmt(r.metrics["flow_c_mbps"]) << " Mb/s vs targets "
     << fmt(r.metrics["target_a_mbps"]) << "/" << fmt(r.metrics["target_bc_mbps"])
     << " (+-10%) over a 30 s run";
  report(criterion, r.ok, os.str());
}

// --- 4. flowlet load balancing ----------------------------------------------

void criterion_4() {
  ExperimentResult r = run_experiment("conga", outdir("conga"), 1, 0);
  std::ostringstream os;
  os << "adaptive " << fmt(r.metrics["adaptive_mbps"]) << " Mb/s >= 95% of optimal "
     << fmt(r.metrics["optimal_mbps"]) << ", static " << fmt(r.metrics["static_mbps"])
     << ", probe overhead " << fmt(100 * r.metrics["probe_overhead"]) << "% of bytes";
  report(4, r.ok, os.str());
}

// --- 5. micro-burst fidelity -------------------------------------------------

void criterion_5() {
  ExperimentResult r = run_experiment("microburst", outdir("microburst"), 1, 8.0);
  bool ok = r.ok && r.metrics["samples"] >= 1e5 && r.metrics["mismatches"] == 0;
  std::ostringstream os;
  os << fmt(r.metrics["samples"]) << " queue samples, " << fmt(r.metrics["mismatches"])
     << " disagree with the shadow log (want 0 over >= 1e5)";
  report(5, ok, os.str());
}

// --- 6. CSTORE serialization -------------------------------------------------

void criterion_6() {
  // Ten updaters race version bumps on one link's scratch words for 10^4
  // rounds.  Arrival order within a round is shuffled; exactly one CSTORE
  // per version may succeed.
  std::mt19937_64 rng(6);
  testing::Bench b;
  ShadowLog shadow;
  b.ctx.observer = &shadow;
  b.sw.links[1].app_specific0 = 0;

  const int rounds = 10'000, updaters = 10;
  for (int round = 0; round < rounds; ++round) {
    Word v = b.sw.links[1].app_specific0;
    std::vector<TppProgram> racers;
    for (int u = 0; u < updaters; ++u) {
      std::vector<RcpHopUpdate> up = {{v, Word(v + 1), Word(1000 + u)}};
      racers.push_back(rcp_update_program(up));
    }
    std::shuffle(racers.begin(), racers.end(), rng);
    for (auto& p : racers) execute_tpp(b.ctx, p);
  }

  std::vector<int> wins(rounds, 0);
  for (const auto& c : shadow.cstores)
    if (c.success && c.expected < rounds) ++wins[c.expected];
  bool one_winner_each = std::all_of(wins.begin(), wins.end(), [](int w) { return w == 1; });
  bool no_lost_updates = b.sw.links[1].app_specific0 == rounds;
  std::ostringstream os;
  os << shadow.cstores.size() << " CSTOREs over " << rounds
     << " versions: exactly one winner per version = " << (one_winner_each ? "yes" : "no")
     << ", final version " << b.sw.links[1].app_specific0;
  report(6, one_winner_each && no_lost_updates, os.str());
}

// --- 7. reorder equivalence --------------------------------------------------

void criterion_7() {
  std::mt19937_64 rng(7);
  int programs = 0;
  long orders = 0, mismatches = 0;
  while (programs < 1000) {
    TppProgram p = testing::random_hazard_free(rng);
    ++programs;
    testing::Bench ref;
    TppProgram want = p;
    execute_tpp(ref.ctx, want);
    auto ref_snap = testing::snapshot(ref);

    for (const auto& order : testing::conditional_respecting_orders(p)) {
      ++orders;
      testing::Bench alt;
      TppProgram got = p;
      execute_tpp_ordered(alt.ctx, got, order);
      if (got.memory != want.memory || got.header.sp != want.header.sp ||
          testing::snapshot(alt) != ref_snap)
        ++mismatches;
    }
  }
  std::ostringstream os;
  os << programs << " hazard-free TPPs, " << orders << " issue orders, " << mismatches
     << " diverged from sequential execution";
  report(7, mismatches == 0, os.str());
}

// --- 8. PUSH/POP rewrite -----------------------------------------------------

void criterion_8() {
  // The published four-instruction example.
  TppProgram example = testing::make_program(
      {make_push(addr::kMetaOutputPort), make_push(addr::kMetaInputPort),
       make_push(addr::kStageBase + 1 * addr::kStageStride + addr::kStageRegBase + 1),
       make_pop(addr::kStageBase + 3 * addr::kStageStride + addr::kStageRegBase + 3)},
      3, 2);
  TppProgram rewritten = rewrite_push_pop(example);
  bool example_ok =
      rewritten.instructions ==
      std::vector<Instruction>{
          make_load(addr::kMetaOutputPort, 0), make_load(addr::kMetaInputPort, 1),
          make_load(addr::kStageBase + 1 * addr::kStageStride + addr::kStageRegBase + 1, 2),
          make_store(addr::kStageBase + 3 * addr::kStageStride + addr::kStageRegBase + 3, 2)};

  std::mt19937_64 rng(8);
  int mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    TppProgram p = testing::random_program(rng);
    testing::Bench seq, rew;
    TppProgram a = p;
    execute_tpp(seq.ctx, a);
    TppProgram b = rewrite_push_pop(p);
    execute_tpp(rew.ctx, b);
    if (a.memory != b.memory || testing::snapshot(seq) != testing::snapshot(rew)) ++mismatches;
  }
  std::ostringstream os;
  os << "published example rewrites to Hop[0],Hop[1],Hop[2],Hop[2]: "
     << (example_ok ? "yes" : "no") << "; " << mismatches
     << "/1000 random programs changed final state";
  report(8, example_ok && mismatches == 0, os.str());
}

// --- 9. sketch accuracy ------------------------------------------------------

void criterion_9() {
  std::mt19937_64 rng(9);
  bool acc_ok = true;
  std::ostringstream os;
  for (std::size_t n : {10u, 50u, 200u}) {
    double err_sum = 0;
    for (int t = 0; t < 100; ++t) {
      BitmapSketch sk(1024, 7);
      std::set<uint64_t> uniq;
      while (uniq.size() < n) uniq.insert(rng());
      for (uint64_t k : uniq) sk.add(k);
      err_sum += std::abs(sk.estimate() - double(n)) / double(n);
    }
    double mean = err_sum / 100;
    acc_ok = acc_ok && mean <= 0.15;
    os << "n=" << n << " err=" << fmt(100 * mean) << "% ";
  }

  bool merge_ok = true;
  for (int t = 0; t < 50; ++t) {
    BitmapSketch a(1024, 7), b(1024, 7), u(1024, 7);
    for (int i = 0; i < 400; ++i) {
      uint64_t k = rng();
      (i % 2 ? a : b).add(k);
      u.add(k);
    }
    BitmapSketch merged = a;
    merged.merge(b);
    merge_ok = merge_ok && merged == u;
  }
  os << "(want <= 15%); OR-merge equals union: " << (merge_ok ? "yes" : "no");
  report(9, acc_ok && merge_ok, os.str());
}

// --- 10. policy enforcement --------------------------------------------------

void criterion_10() {
  // Policy set for app 7: read anything defined, write only the two
  // per-link scratch words.
  std::vector<MemoryPolicy> policies = {
      {7, AccessOp::Read, 0x0000, 0xdfff},
      {7, AccessOp::Write, uint16_t(addr::kCurrentLinkBase + addr::kLinkAppSpecific0),
       uint16_t(addr::kCurrentLinkBase + addr::kLinkAppSpecific1)},
  };

  std::mt19937_64 rng(10);
  std::vector<uint16_t> covered_reads;
  for (uint16_t a : testing::readable_addrs())
    if (a <= 0xdfff) covered_reads.push_back(a);
  auto rd = [&] { return covered_reads[rng() % covered_reads.size()]; };
  std::vector<std::pair<TppProgram, bool>> corpus;  // (program, admissible)
  for (int i = 0; i < 25; ++i) {
    switch (i % 3) {
      case 0:
        corpus.push_back({testing::make_program({make_push(rd()), make_push(rd())}, 2, 2), true});
        break;
      case 1:
        corpus.push_back(
            {testing::make_program(
                 {make_push(rd()),
                  make_store(addr::kCurrentLinkBase + addr::kLinkAppSpecific1, 1)},
                 2, 2),
             true});
        break;
      default:
        corpus.push_back(
            {testing::make_program(
                 {make_cstore(addr::kCurrentLinkBase + addr::kLinkAppSpecific0, 0, 1)}, 2, 2),
             true});
        break;
    }
  }
  for (int i = 0; i < 25; ++i) {
    switch (i % 4) {
      case 0:  // reads above the covered range
        corpus.push_back({testing::make_program({make_push(addr::kMetaInputPort),
                                                 make_push(0xe005)},
                                                2, 2),
                          false});
        break;
      case 1:  // write outside the scratch words
        corpus.push_back(
            {testing::make_program({make_store(testing::writable_addrs()[0], 0)}, 2, 2), false});
        break;
      case 2:  // undefined address
        corpus.push_back({testing::make_program({make_load(0x7abc, 0)}, 2, 2), false});
        break;
      default:  // conditional write outside the allowed range
        corpus.push_back(
            {testing::make_program({make_cstore(testing::writable_addrs()[1], 0, 1)}, 2, 2),
             false});
        break;
    }
  }

  int false_accepts = 0, false_rejects = 0;
  for (const auto& [prog, want] : corpus) {
    bool got = analyze(prog, policies, 7).admissible();
    if (got && !want) ++false_accepts;
    if (!got && want) ++false_rejects;
  }

  // Write-disabled switches: a full run with write-hungry TPPs must leave
  // every switch word untouched.
  std::string topo = R"({
    "nodes": [
      {"name": "h1"}, {"name": "h2"},
      {"name": "s1", "type": "switch", "tpp_writes": false},
      {"name": "s2", "type": "switch", "tpp_writes": false}
    ],
    "links": [
      {"a": "h1", "b": "s1", "rate_gbps": 1}, {"a": "s1", "b": "s2", "rate_mbps": 100},
      {"a": "s2", "b": "h2", "rate_gbps": 1}
    ]})";
  Network net(Topology::from_json_text(topo), 1);
  int h1 = net.node("h1"), h2 = net.node("h2");
  for (int i = 0; i < 200; ++i) {
    net.at(uint64_t(i) * 100'000, [&net, h1, h2] {
      auto pkt = net.make_packet();
      pkt->src = h1;
      pkt->dst = h2;
      pkt->size_bytes = 200;
      std::vector<RcpHopUpdate> up = {{0, 1, 5000}, {0, 1, 5000}};
      pkt->tpp = rcp_update_program(up);
      net.send(h1, std::move(pkt));
    });
  }
  net.run();
  bool no_writes = net.shadow.tpp_writes.empty();
  bool state_clean = true;
  for (const char* sw : {"s1", "s2"})
    for (const auto& l : net.state(net.node(sw)).links)
      state_clean = state_clean && l.app_specific0 == 0 && l.app_specific1 == 0;

  std::ostringstream os;
  os << corpus.size() << "-TPP corpus: " << false_accepts << " false accepts, " << false_rejects
     << " false rejects; write-disabled run recorded " << net.shadow.tpp_writes.size()
     << " switch-memory writes";
  report(10, false_accepts == 0 && false_rejects == 0 && no_writes && state_clean, os.str());
}

}  // namespace

int main() {
  criterion_1();
  criterion_rcp(2, "rcp_maxmin");
  criterion_rcp(3, "rcp_propfair");
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  std::printf(
      "INFO  criterion 11: hardware timing/area figures, kernel-stack throughput and live-TCP "
      "overhead percentages are out of scope for this software model and are not asserted; "
      "per-packet byte overhead is asserted exactly by criterion 1.\n");
  return failures == 0 ? 0 : 1;
}
