#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "tpp/exec.hpp"
#include "tpp/memmap.hpp"

using namespace tpp;
using tpp::testing::Bench;
using tpp::testing::make_program;

TEST_CASE("LOAD copies switch state into the addressed hop slot") {
  Bench b;
  TppProgram p = make_program({make_load(addr::kSwitchId, 1)}, 3, 4);
  p.header.hop_index = 2;
  execute_tpp(b.ctx, p);
  CHECK(p.mem_word(2 * (2 * 3 + 1)) == 3);  // hop 2, offset 1
  CHECK(p.header.flags == 0);
}

TEST_CASE("STORE copies the hop slot into writable switch memory") {
  Bench b;
  TppProgram p = make_program({make_store(addr::kCurrentLinkBase + addr::kLinkAppSpecific1, 0)}, 1, 1);
  p.set_mem_word(0, 0x1234);
  execute_tpp(b.ctx, p);
  CHECK(b.sw.links[1].app_specific1 == 0x1234);  // the packet's output port is 1
}

TEST_CASE("a monitor TPP appends id, port and queue size at sp") {
  Bench b;
  TppProgram p = make_program({make_push(addr::kSwitchId),
                               make_push(addr::kMetaOutputPortBitmap),
                               make_push(addr::kCurrentQueueBase + addr::kQueueOccupancy)},
                              3, 2);
  execute_tpp(b.ctx, p);
  CHECK(p.header.sp == 6);
  CHECK(p.mem_word(0) == 3);
  CHECK(p.mem_word(2) == (1u << 1));
  CHECK(p.mem_word(4) == 7000);
}

TEST_CASE("POP writes the top of stack and consumes the word") {
  Bench b;
  TppProgram p = make_program({make_push(addr::kSwitchId),
                               make_pop(addr::kStageBase + addr::kStageRegBase)},
                              2, 1);
  execute_tpp(b.ctx, p);
  CHECK(p.header.sp == 0);
  CHECK(b.sw.stages[0].regs[0] == 3);
}

TEST_CASE("reads of nonexistent memory skip gracefully and set the error flag") {
  Bench b;
  TppProgram p = make_program({make_load(0x7abc, 0), make_push(addr::kSwitchId)}, 2, 1);
  ExecutionTrace tr = execute_tpp(b.ctx, p);
  CHECK(tr.records[0].skip == SkipReason::NonexistentMemory);
  CHECK(tr.records[1].skip == SkipReason::None);  // later instructions still run
  CHECK((p.header.flags & kFlagExecError) != 0);
  CHECK(p.mem_word(0) == 3);  // the PUSH landed in its own slot
}

TEST_CASE("a failed PUSH still claims its slot") {
  Bench b;
  TppProgram p = make_program({make_push(0x7abc), make_push(addr::kSwitchId)}, 2, 1);
  ExecutionTrace tr = execute_tpp(b.ctx, p);
  CHECK(tr.records[0].skip == SkipReason::NonexistentMemory);
  CHECK(p.header.sp == 4);
  CHECK(p.mem_word(2) == 3);  // the second PUSH skipped over the claimed slot
}

TEST_CASE("writes are no-ops when the switch disables TPP writes") {
  Bench b;
  b.ctx.write_enabled = false;
  TppProgram p = make_program({make_push(addr::kSwitchId),
                               make_pop(addr::kStageBase + addr::kStageRegBase),
                               make_push(addr::kSwitchVersion)},
                              3, 1);
  ExecutionTrace tr = execute_tpp(b.ctx, p);
  CHECK(tr.records[1].skip == SkipReason::WriteDisabled);
  CHECK(b.sw.stages[0].regs[0] == 0);
  CHECK((p.header.flags & kFlagWriteSkipped) != 0);
  // The POP still consumed the pushed word, so the next PUSH reuses slot 0.
  CHECK(p.header.sp == 2);
  CHECK(tr.records[2].skip == SkipReason::None);
}

TEST_CASE("CSTORE writes only when the location matches the expected value") {
  SUBCASE("match: location updated, packet sees the new value") {
    Bench b;
    b.sw.links[1].app_specific0 = 5;
    TppProgram p = make_program(
        {make_cstore(addr::kCurrentLinkBase + addr::kLinkAppSpecific0, 0, 1),
         make_store(addr::kCurrentLinkBase + addr::kLinkAppSpecific1, 2)},
        3, 1);
    p.set_mem_word(0, 5);     // expected version
    p.set_mem_word(2, 6);     // new version
    p.set_mem_word(4, 4000);  // payload guarded by the version bump
    ExecutionTrace tr = execute_tpp(b.ctx, p);
    CHECK(tr.records[0].cond_ok);
    CHECK(b.sw.links[1].app_specific0 == 6);
    CHECK(b.sw.links[1].app_specific1 == 4000);
    CHECK(p.mem_word(0) == 6);
  }
  SUBCASE("mismatch: location untouched, subsequent instructions suppressed") {
    Bench b;
    b.sw.links[1].app_specific0 = 9;
    TppProgram p = make_program(
        {make_cstore(addr::kCurrentLinkBase + addr::kLinkAppSpecific0, 0, 1),
         make_store(addr::kCurrentLinkBase + addr::kLinkAppSpecific1, 2)},
        3, 1);
    p.set_mem_word(0, 5);
    p.set_mem_word(2, 6);
    p.set_mem_word(4, 4000);
    ExecutionTrace tr = execute_tpp(b.ctx, p);
    CHECK_FALSE(tr.records[0].cond_ok);
    CHECK(tr.records[1].skip == SkipReason::CondFailed);
    CHECK(b.sw.links[1].app_specific0 == 9);
    CHECK(b.sw.links[1].app_specific1 == 0);
    CHECK(p.mem_word(0) == 9);  // the loser learns the winning value
  }
}

TEST_CASE("CEXEC gates the rest of the program on a masked compare") {
  Bench b;  // switch id 3
  auto gated = [&](Word target) {
    TppProgram p = make_program({make_cexec(addr::kSwitchId, 0),
                                 make_push(addr::kSwitchVersion)},
                                5, 1);
    p.set_mem_word(0, 0);       // mask 0x0000ffff
    p.set_mem_word(2, 0xffff);
    p.set_mem_word(4, 0);       // value = target id
    p.set_mem_word(6, target);
    p.header.sp = 8;
    return p;
  };
  TppProgram hit = gated(3);
  ExecutionTrace tr = execute_tpp(b.ctx, hit);
  CHECK(tr.records[0].cond_ok);
  CHECK(tr.records[1].skip == SkipReason::None);

  TppProgram miss = gated(4);
  tr = execute_tpp(b.ctx, miss);
  CHECK_FALSE(tr.records[0].cond_ok);
  CHECK(tr.records[1].skip == SkipReason::CondFailed);
  CHECK(miss.header.sp == 8);  // the gated PUSH claimed nothing
}

TEST_CASE("PUSH/POP serialize to the published example") {
  TppProgram p = make_program(
      {make_push(addr::kMetaOutputPort), make_push(addr::kMetaInputPort),
       make_push(addr::kStageBase + 1 * addr::kStageStride + addr::kStageRegBase + 1),
       make_pop(addr::kStageBase + 3 * addr::kStageStride + addr::kStageRegBase + 3)},
      3, 2);
  TppProgram r = rewrite_push_pop(p);
  REQUIRE(r.instructions.size() == 4);
  CHECK(r.instructions[0] == make_load(addr::kMetaOutputPort, 0));
  CHECK(r.instructions[1] == make_load(addr::kMetaInputPort, 1));
  CHECK(r.instructions[2] ==
        make_load(addr::kStageBase + 1 * addr::kStageStride + addr::kStageRegBase + 1, 2));
  CHECK(r.instructions[3] ==
        make_store(addr::kStageBase + 3 * addr::kStageStride + addr::kStageRegBase + 3, 2));
}

TEST_CASE("slot assignment respects the current sp and hop region") {
  TppProgram p = make_program({make_push(addr::kSwitchId), make_push(addr::kSwitchId),
                               make_push(addr::kSwitchId)},
                              3, 2);
  p.header.hop_index = 1;
  p.header.sp = 6;  // start of hop 1's region
  TppProgram r = rewrite_push_pop(p);
  CHECK(r.instructions[0].hop_offset() == 0);
  CHECK(r.instructions[1].hop_offset() == 1);
  CHECK(r.instructions[2].hop_offset() == 2);

  p.instructions.push_back(make_push(addr::kSwitchId));
  try {
    rewrite_push_pop(p);
    FAIL("a fourth PUSH fit a 3-word hop region");
  } catch (const TppError& e) {
    CHECK(e.code() == Errc::MemoryOverflow);
  }

  TppProgram pop_only = make_program({make_pop(addr::kStageBase + addr::kStageRegBase)}, 3, 2);
  try {
    rewrite_push_pop(pop_only);
    FAIL("POP from an empty region was rewritten");
  } catch (const TppError& e) {
    CHECK(e.code() == Errc::MemoryOverflow);
  }
}

TEST_CASE("programs without PUSH/POP rewrite to themselves") {
  TppProgram p = make_program({make_load(addr::kSwitchId, 0),
                               make_store(addr::kCurrentLinkBase + addr::kLinkAppSpecific0, 1)},
                              2, 1);
  CHECK(rewrite_push_pop(p) == p);
}

TEST_CASE("rewrite preserves final state on random programs") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 1000; ++t) {
    TppProgram p = testing::random_program(rng);
    Bench seq, rew;
    TppProgram a = p;
    execute_tpp(seq.ctx, a);
    TppProgram b = rewrite_push_pop(p);
    execute_tpp(rew.ctx, b);
    // The rewritten program's sp does not self-advance; only memory and
    // switch effects are comparable.
    CHECK(a.memory == b.memory);
    CHECK(testing::snapshot(seq) == testing::snapshot(rew));
  }
}

TEST_CASE("any conditional-respecting issue order matches sequential execution") {
  std::mt19937_64 rng(29);
  int programs = 0, orders = 0;
  while (programs < 200) {
    TppProgram p = testing::random_hazard_free(rng);
    ++programs;
    Bench ref;
    TppProgram want = p;
    ExecutionTrace ref_tr = execute_tpp(ref.ctx, want);
    auto ref_snap = testing::snapshot(ref);

    for (const auto& order : testing::conditional_respecting_orders(p)) {
      ++orders;
      Bench b;
      TppProgram got = p;
      execute_tpp_ordered(b.ctx, got, order);
      CHECK(got.memory == want.memory);
      CHECK(got.header.sp == want.header.sp);
      CHECK(testing::snapshot(b) == ref_snap);
    }
  }
  CHECK(orders > programs);  // the permutation sets were not all singletons
}

TEST_CASE("utilization words scale to 65535 at line rate") {
  LinkState l;
  l.capacity_bps = 100'000'000;
  l.window_tx_bytes = 6'250'000 / 2;  // half of 100 Mb/s over 0.5 s
  l.window_rx_bytes = 6'250'000;      // exactly 100 Mb/s over 0.5 s
  update_link_utilization(l, 500'000'000);
  CHECK(l.tx_utilization == 32768);  // rounds half up
  CHECK(l.rx_utilization == 65535);
  CHECK(l.window_tx_bytes == 0);

  l.window_rx_bytes = 12'500'000;  // oversubscribed: clamps
  update_link_utilization(l, 500'000'000);
  CHECK(l.rx_utilization == 65535);
}
