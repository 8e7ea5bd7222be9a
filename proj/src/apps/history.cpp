#include "tpp/apps/history.hpp"

#include <set>

#include "tpp/memmap.hpp"

namespace tpp {

TppProgram history_program(uint8_t max_hops) {
  TppProgram p;
  p.instructions.push_back(make_push(addr::kSwitchId));
  p.instructions.push_back(make_push(addr::kMetaMatchedEntryId));
  p.instructions.push_back(make_push(addr::kMetaInputPort));
  p.header.hop_size_words = 3;
  p.header.insn_count = uint8_t(p.instructions.size());
  p.header.mem_len = uint16_t(max_hops) * 6;
  p.memory.assign(p.header.mem_len, 0xff);
  return p;
}

std::vector<HopRecord> build_history(const TppProgram& p) {
  std::vector<HopRecord> out;
  for (std::size_t h = 0; (h + 1) * 6 <= p.memory.size(); ++h) {
    std::size_t base = h * 6;
    if (p.mem_word(base) == 0xffff) break;  // histories are contiguous
    out.push_back({p.mem_word(base), p.mem_word(base + 2), p.mem_word(base + 4)});
  }
  return out;
}

bool netwatch_check(const std::vector<HopRecord>& history, const PathExpectation& expected) {
  std::set<uint16_t> seen;
  for (const auto& h : history)
    if (!seen.insert(h.switch_id).second) return false;  // loop

  if (expected.switches.empty()) return true;
  if (expected.allow_prefix) {
    if (history.size() > expected.switches.size()) return false;
  } else if (history.size() != expected.switches.size()) {
    return false;
  }
  for (std::size_t i = 0; i < history.size(); ++i)
    if (history[i].switch_id != expected.switches[i]) return false;
  return true;
}

}  // namespace tpp
