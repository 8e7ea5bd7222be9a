#include "doctest.h"
#include "helpers.hpp"
#include "tpp/analyzer.hpp"
#include "tpp/memmap.hpp"

using namespace tpp;

namespace {

const MemoryPolicy kReadAll{1, AccessOp::Read, 0x0000, 0xffff};
const MemoryPolicy kWriteScratch{1, AccessOp::Write, addr::kCurrentLinkBase,
                                 uint16_t(addr::kCurrentLinkBase + addr::kLinkWords - 1)};

TppProgram collect_probe() {
  // The congestion-probe read set: five PUSHes along the path.
  return testing::make_program(
      {make_push(addr::kSwitchId), make_push(addr::kCurrentLinkBase + addr::kLinkQueueSize),
       make_push(addr::kCurrentLinkBase + addr::kLinkTxUtilization),
       make_push(addr::kCurrentLinkBase + addr::kLinkAppSpecific0),
       make_push(addr::kCurrentLinkBase + addr::kLinkAppSpecific1)},
      5, 2);
}

TppProgram updater() {
  return testing::make_program(
      {make_cstore(addr::kCurrentLinkBase + addr::kLinkAppSpecific0, 0, 1),
       make_store(addr::kCurrentLinkBase + addr::kLinkAppSpecific1, 2)},
      3, 2);
}

}  // namespace

TEST_CASE("read-only probe under a covering read policy is admissible") {
  AnalysisReport r = analyze(collect_probe(), {kReadAll}, 1);
  CHECK(r.admissible());
  CHECK_FALSE(r.has_writes);
  CHECK(r.hazard_order_ok);
  CHECK(r.touched_ranges.size() == 5);
}

TEST_CASE("writes under a read-only policy set are each flagged") {
  AnalysisReport r = analyze(updater(), {kReadAll}, 1);
  CHECK(r.has_writes);
  CHECK(r.violations.size() == 2);
  CHECK_FALSE(r.admissible());
}

TEST_CASE("a write policy for the scratch range admits the updater") {
  AnalysisReport r = analyze(updater(), {kReadAll, kWriteScratch}, 1);
  CHECK(r.admissible());
  CHECK(r.has_writes);
}

TEST_CASE("policies are per-application") {
  MemoryPolicy other = kReadAll;
  other.appid = 2;
  AnalysisReport r = analyze(collect_probe(), {other}, 1);
  CHECK(r.violations.size() == 5);
}

TEST_CASE("deny_writes rejects every STORE/CSTORE outright") {
  AnalysisReport r = analyze(updater(), {kReadAll, kWriteScratch}, 1, /*deny_writes=*/true);
  CHECK(r.violations.size() == 2);
  AnalysisReport ro = analyze(collect_probe(), {kReadAll}, 1, /*deny_writes=*/true);
  CHECK(ro.admissible());
}

TEST_CASE("accesses to undefined addresses are violations") {
  TppProgram p = testing::make_program({make_push(0x7abc)}, 1, 2);
  AnalysisReport r = analyze(p, {kReadAll}, 1);
  CHECK(r.violations.size() == 1);
}

TEST_CASE("a conditional followed by an earlier-stage operand breaks pipeline order") {
  // The CEXEC condition resolves at egress, but the LOAD after it needs a
  // stage-0 value: no pipeline can execute that in order.
  TppProgram bad = testing::make_program(
      {make_cexec(addr::kCurrentLinkBase + addr::kLinkTxUtilization, 0),
       make_load(addr::kMetaInputPort, 4)},
      5, 2);
  CHECK_FALSE(analyze(bad, {kReadAll}, 1).hazard_order_ok);

  TppProgram good = testing::make_program(
      {make_cexec(addr::kMetaInputPort, 0),
       make_load(addr::kCurrentLinkBase + addr::kLinkTxUtilization, 4)},
      5, 2);
  CHECK(analyze(good, {kReadAll}, 1).hazard_order_ok);
}

TEST_CASE("the empty program yields an empty, admissible report") {
  TppProgram p = testing::make_program({}, 1, 1);
  AnalysisReport r = analyze(p, {}, 1);
  CHECK(r.admissible());
  CHECK(r.touched_ranges.empty());
  CHECK(r.hazard_order_ok);
  CHECK_FALSE(r.has_writes);
}
