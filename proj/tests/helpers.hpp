#ifndef TPP_TESTS_HELPERS_HPP
#define TPP_TESTS_HELPERS_HPP

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tpp/exec.hpp"
#include "tpp/memmap.hpp"

namespace tpp::testing {

// A 4-port switch with distinctive counter values and a routed packet's
// metadata, for driving the interpreter without a simulator around it.
struct Bench {
  SwitchState sw;
  PacketMetadata meta;
  TppHeader header;
  ExecContext ctx{sw, meta, true, nullptr, &header};

  Bench() {
    sw.switch_id = 3;
    for (int p = 0; p < 4; ++p) sw.add_link(uint16_t(p), 100'000'000);
    sw.links[1].tx_bytes = 123456;
    sw.links[1].tx_utilization = 4242;
    sw.links[1].app_specific0 = 5;
    sw.queues[1][0].occupancy_bytes = 7000;
    sw.stages[1].regs[1] = 77;
    sw.stages[3].regs[3] = 1234;
    meta.input_port = 0;
    meta.output_port_bitmap = 1u << 1;
    meta.enqueued_queue_id = 0;
    meta.queue_known = true;
    meta.matched = true;
    meta.matched_entry_id = 9;
  }
};

inline TppProgram make_program(std::vector<Instruction> insns, uint8_t hop_size, uint8_t hops) {
  TppProgram p;
  p.instructions = std::move(insns);
  p.header.insn_count = uint8_t(p.instructions.size());
  p.header.hop_size_words = hop_size;
  p.header.mem_len = uint16_t(hops) * hop_size * 2;
  p.memory.assign(p.header.mem_len, 0);
  return p;
}

// Everything the interpreter can change, flattened for equality checks.
inline std::vector<uint64_t> snapshot(const Bench& b) {
  std::vector<uint64_t> s;
  for (const auto& st : b.sw.stages)
    for (Word r : st.regs) s.push_back(r);
  for (const auto& l : b.sw.links) {
    s.push_back(l.app_specific0);
    s.push_back(l.app_specific1);
  }
  s.push_back(b.meta.output_port_bitmap);
  return s;
}

inline const std::vector<uint16_t>& readable_addrs() {
  static const std::vector<uint16_t> v = {
      addr::kSwitchId,
      addr::kSwitchVersion,
      uint16_t(addr::kStageBase + 0 * addr::kStageStride + addr::kStageRegBase + 2),
      uint16_t(addr::kStageBase + 1 * addr::kStageStride + addr::kStageRegBase + 1),
      uint16_t(addr::kStageBase + 4 * addr::kStageStride + addr::kStageRegBase),
      uint16_t(addr::kLinkBase + 1 * addr::kLinkStride + addr::kLinkTxBytesLo),
      uint16_t(addr::kCurrentLinkBase + addr::kLinkTxUtilization),
      uint16_t(addr::kCurrentLinkBase + addr::kLinkAppSpecific0),
      uint16_t(addr::kCurrentQueueBase + addr::kQueueOccupancy),
      addr::kMetaInputPort,
      addr::kMetaMatchedEntryId,
  };
  return v;
}

inline const std::vector<uint16_t>& writable_addrs() {
  static const std::vector<uint16_t> v = {
      uint16_t(addr::kStageBase + 0 * addr::kStageStride + addr::kStageRegBase + 4),
      uint16_t(addr::kStageBase + 2 * addr::kStageStride + addr::kStageRegBase + 5),
      uint16_t(addr::kStageBase + 4 * addr::kStageStride + addr::kStageRegBase + 6),
      uint16_t(addr::kLinkBase + 1 * addr::kLinkStride + addr::kLinkAppSpecific0),
      uint16_t(addr::kCurrentLinkBase + addr::kLinkAppSpecific1),
  };
  return v;
}

// Structurally valid program of up to 5 instructions with in-range operands
// and balanced PUSH/POP, suitable for both the sequential interpreter and
// rewrite_push_pop.  Includes conditionals unless `with_conditionals` is off.
inline TppProgram random_program(std::mt19937_64& rng, bool with_conditionals = true) {
  const uint8_t hop_size = 8;
  auto pick = [&rng](const std::vector<uint16_t>& pool) {
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  };
  std::uniform_int_distribution<int> n_dist(1, 5), kind_dist(0, with_conditionals ? 5 : 3);
  std::uniform_int_distribution<int> off_dist(0, hop_size - 1);

  TppProgram p = make_program({}, hop_size, 2);
  for (std::size_t i = 0; i < p.memory.size(); i += 2)
    p.set_mem_word(i, Word(std::uniform_int_distribution<int>(0, 0xffff)(rng)));

  int pushed = 0;
  const int n = n_dist(rng);
  for (int i = 0; i < n; ++i) {
    switch (kind_dist(rng)) {
      case 0:
        p.instructions.push_back(make_load(pick(readable_addrs()), uint8_t(off_dist(rng))));
        break;
      case 1:
        p.instructions.push_back(make_store(pick(writable_addrs()), uint8_t(off_dist(rng))));
        break;
      case 2:
        if (pushed >= hop_size) { --i; continue; }
        p.instructions.push_back(make_push(pick(readable_addrs())));
        ++pushed;
        break;
      case 3:
        if (pushed == 0) { --i; continue; }
        p.instructions.push_back(make_pop(pick(writable_addrs())));
        --pushed;
        break;
      case 4: {
        int pre = std::uniform_int_distribution<int>(0, 7)(rng);
        int post = std::uniform_int_distribution<int>(0, 7)(rng);
        p.instructions.push_back(make_cstore(pick(writable_addrs()), uint8_t(pre), uint8_t(post)));
        break;
      }
      default:
        // Block offset <= 4 keeps the 4-word block inside the hop region.
        p.instructions.push_back(
            make_cexec(pick(readable_addrs()), uint8_t(std::uniform_int_distribution<int>(0, 4)(rng))));
        break;
    }
  }
  p.header.insn_count = uint8_t(p.instructions.size());
  return p;
}

// Hazard-free program: no two instructions touch the same packet word or the
// same switch word, so the only inter-instruction coupling is conditional
// suppression.  PUSHes take slots 0..4; everything else allocates from word 5
// up within a 16-word hop region.
inline TppProgram random_hazard_free(std::mt19937_64& rng) {
  // Physically distinct locations (CurrentLink aliases Link$1 in the Bench,
  // so the pools below never name the same word through both views).
  static const std::vector<uint16_t> reads = {
      addr::kSwitchId,
      addr::kSwitchVersion,
      uint16_t(addr::kStageBase + 1 * addr::kStageStride + addr::kStageRegBase + 1),
      uint16_t(addr::kStageBase + 3 * addr::kStageStride + addr::kStageRegBase + 3),
      uint16_t(addr::kLinkBase + 1 * addr::kLinkStride + addr::kLinkTxBytesLo),
      uint16_t(addr::kCurrentLinkBase + addr::kLinkTxUtilization),
      uint16_t(addr::kCurrentQueueBase + addr::kQueueOccupancy),
      addr::kMetaInputPort,
      addr::kMetaMatchedEntryId,
  };
  static const std::vector<uint16_t> writes = {
      uint16_t(addr::kStageBase + 0 * addr::kStageStride + addr::kStageRegBase + 4),
      uint16_t(addr::kStageBase + 2 * addr::kStageStride + addr::kStageRegBase + 5),
      uint16_t(addr::kStageBase + 4 * addr::kStageStride + addr::kStageRegBase + 6),
      uint16_t(addr::kLinkBase + 1 * addr::kLinkStride + addr::kLinkAppSpecific0),
      uint16_t(addr::kCurrentLinkBase + addr::kLinkAppSpecific1),
  };
  std::vector<uint16_t> read_pool = reads, write_pool = writes;
  std::shuffle(read_pool.begin(), read_pool.end(), rng);
  std::shuffle(write_pool.begin(), write_pool.end(), rng);
  auto take = [](std::vector<uint16_t>& pool) {
    uint16_t a = pool.back();
    pool.pop_back();
    return a;
  };

  const uint8_t hop_size = 16;
  TppProgram p = make_program({}, hop_size, 1);
  for (std::size_t i = 0; i < p.memory.size(); i += 2)
    p.set_mem_word(i, Word(std::uniform_int_distribution<int>(0, 0xffff)(rng)));

  int next_slot = 5;  // slots 0..4 are reserved for PUSH serialization
  const int n = std::uniform_int_distribution<int>(1, 5)(rng);
  for (int i = 0; i < n; ++i) {
    switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
      case 0:
        if (read_pool.empty() || next_slot >= hop_size) { --i; continue; }
        p.instructions.push_back(make_load(take(read_pool), uint8_t(next_slot++)));
        break;
      case 1:
        if (write_pool.empty() || next_slot >= hop_size) { --i; continue; }
        p.instructions.push_back(make_store(take(write_pool), uint8_t(next_slot++)));
        break;
      case 2:
        if (read_pool.empty()) { --i; continue; }
        p.instructions.push_back(make_push(take(read_pool)));
        break;
      case 3:
        if (write_pool.empty() || next_slot + 1 >= hop_size) { --i; continue; }
        p.instructions.push_back(
            make_cstore(take(write_pool), uint8_t(next_slot), uint8_t(next_slot + 1)));
        // Most writable words start at zero, so this makes the compare
        // succeed about half the time.
        if (std::uniform_int_distribution<int>(0, 1)(rng) == 0)
          p.set_mem_word(std::size_t(next_slot) * 2, 0);
        next_slot += 2;
        break;
      default:
        if (read_pool.empty() || next_slot + 3 >= hop_size) { --i; continue; }
        p.instructions.push_back(make_cexec(take(read_pool), uint8_t(next_slot)));
        // A coin flip decides whether the gate passes: a zero mask with a
        // zero value always passes, random block contents almost never do.
        if (std::uniform_int_distribution<int>(0, 1)(rng) == 0)
          for (int w = 0; w < 4; ++w) p.set_mem_word(std::size_t(next_slot + w) * 2, 0);
        next_slot += 4;
        break;
    }
  }
  p.header.insn_count = uint8_t(p.instructions.size());
  return p;
}

// All instruction orders the reorder contract covers: each conditional issues
// before every instruction that follows it in program order.
inline std::vector<std::vector<int>> conditional_respecting_orders(const TppProgram& p) {
  std::vector<int> order(p.instructions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  std::vector<std::vector<int>> out;
  do {
    bool ok = true;
    std::vector<int> pos(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = int(k);
    for (std::size_t i = 0; i < order.size() && ok; ++i) {
      if (!is_conditional(p.instructions[i].op)) continue;
      for (std::size_t j = i + 1; j < order.size(); ++j)
        if (pos[j] < pos[i]) { ok = false; break; }
    }
    if (ok) out.push_back(order);
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

inline const char* kLineTopoJson = R"({
  "nodes": [
    {"name": "h1"},
    {"name": "s1", "type": "switch"},
    {"name": "s2", "type": "switch"},
    {"name": "h2"}
  ],
  "links": [
    {"a": "h1", "b": "s1", "rate_gbps": 1, "delay_us": 5},
    {"a": "s1", "b": "s2", "rate_mbps": 100, "delay_us": 20},
    {"a": "s2", "b": "h2", "rate_gbps": 1, "delay_us": 5}
  ]
})";

}  // namespace tpp::testing

#endif
